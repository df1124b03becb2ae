"""
Tests para formularios de Django.
"""
from core.dominio.gop_model import GopConfig, IrapMode
from core.forms import GopConfigForm, SimulacionForm


class TestGopConfigForm:
    """Tests para GopConfigForm."""

    def test_form_valido(self):
        """Un form completo arma el GopConfig y conserva el largo."""
        form = GopConfigForm(data={'gop': 32, 'irap': 64, 'mode': 'open'})

        assert form.is_valid()
        assert form.cleaned_data['config'] == GopConfig(32, 64, IrapMode.OPEN_GOP)
        assert form.cleaned_data['length'] == 65

    def test_modo_requerido(self):
        """El modo IRAP es obligatorio."""
        form = GopConfigForm(data={'gop': 8, 'irap': 64})
        assert not form.is_valid()
        assert 'mode' in form.errors

    def test_gop_no_potencia_de_dos(self):
        """El error de potencia de dos queda en el campo gop."""
        form = GopConfigForm(data={'gop': 12, 'irap': 48, 'mode': 'constrained'})

        assert not form.is_valid()
        assert 'potencia de dos' in form.errors['gop'][0]

    def test_irap_no_multiplo(self):
        """Un IRAP que no es múltiplo del GOP es un error del form."""
        form = GopConfigForm(data={'gop': 32, 'irap': 48, 'mode': 'constrained'})

        assert not form.is_valid()
        assert '__all__' in form.errors

    def test_largo_invalido(self):
        """El error de largo cita el valor recibido."""
        form = GopConfigForm(data={'gop': 8, 'irap': 64, 'mode': 'closed', 'length': 70})

        assert not form.is_valid()
        assert 'length=70' in form.errors['__all__'][0]

    def test_segmento(self):
        """El largo de segmento opcional llega al GopConfig."""
        form = GopConfigForm(data={'gop': 8, 'irap': 64, 'mode': 'closed', 'segment': 32, 'length': 129})

        assert form.is_valid()
        assert form.cleaned_data['config'].segment_length == 32

    def test_modo_desconocido(self):
        """Un modo fuera de IrapMode no valida."""
        form = GopConfigForm(data={'gop': 8, 'irap': 64, 'mode': 'semi-open'})
        assert not form.is_valid()


class TestSimulacionForm:
    """Tests para SimulacionForm."""

    def test_por_defecto(self):
        """Sin datos el form asume RPR, jitter 0 y sin semilla."""
        form = SimulacionForm(data={'caps': 'rpr'})

        assert form.is_valid()
        assert form.cleaned_data['supports_rpr'] is True
        assert form.cleaned_data['jitter'] == 0.0
        assert form.cleaned_data['seed'] is None

    def test_sin_rpr(self):
        """Las capacidades sin RPR apagan supports_rpr."""
        form = SimulacionForm(data={'caps': 'no-rpr'})

        assert form.is_valid()
        assert form.cleaned_data['supports_rpr'] is False

    def test_jitter_necesita_semilla(self):
        """Pedir jitter sin semilla es un error del form."""
        form = SimulacionForm(data={'caps': 'rpr', 'jitter': 0.2})

        assert not form.is_valid()
        assert 'semilla' in form.errors['__all__'][0]

    def test_jitter_con_semilla(self):
        """Jitter con semilla es válido."""
        form = SimulacionForm(data={'caps': 'rpr', 'jitter': 0.2, 'seed': 3})

        assert form.is_valid()
        assert form.cleaned_data['jitter'] == 0.2

    def test_jitter_fuera_de_rango(self):
        """Un jitter de 1.0 o más queda en el campo jitter."""
        form = SimulacionForm(data={'caps': 'rpr', 'jitter': 1.5, 'seed': 3})
        assert not form.is_valid()
        assert 'jitter' in form.errors

    def test_caps_desconocidas(self):
        """Solo se aceptan las capacidades conocidas."""
        assert not SimulacionForm(data={'caps': 'hevc'}).is_valid()
