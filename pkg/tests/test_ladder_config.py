"""
Tests para LadderConfigService: ingesta de escaleras, curvas RD, trazas y schedules.
"""
import json

import pytest

from core.dominio.constraint_engine import ApsKind
from core.dominio.gop_model import IrapMode, RaslMode
from core.excepciones import EntradaInvalidaError
from core.services.LadderConfigService import validar_documento


def escribir_escalera(tmp_path, muestras, **cambios):
    """Copia la escalera conforme con cambios de primer nivel y rutas RD absolutas."""
    documento = json.loads((muestras / 'escalera_conforme.json').read_text(encoding='utf-8'))
    for rep in documento['representations'] + [documento['fallback']]:
        rep['rd_curve'] = str(muestras / rep['rd_curve'])
    documento.update(cambios)
    ruta = tmp_path / 'escalera.json'
    ruta.write_text(json.dumps(documento), encoding='utf-8')
    return ruta


class TestCargarEscalera:
    """Tests para cargar_escalera."""

    def test_escalera_conforme(self, escalera_conforme):
        """La escalera de muestra carga tres representaciones ordenadas y el fallback closed GOP."""
        escalera = escalera_conforme.ladder

        assert [r.id for r in escalera.representations] == ['720p', '1080p', '2160p']
        assert escalera.fallback.id == '720p-closed'
        assert escalera.fallback.gop_config.irap_mode == IrapMode.CLOSED_GOP
        assert escalera.fallback_enabled
        assert escalera.segment_count == 11
        assert escalera.segment_duration_s == 1.0

    def test_representaciones_restringidas(self, escalera_conforme):
        """Cada representación queda restringida con su bitrate, calidad y APS."""
        rep = escalera_conforme.ladder.representation('2160p')

        assert rep.sequence.constraint_mode == RaslMode.FULL_RPR
        assert rep.avg_bitrate_kbps == 16000
        assert rep.quality_db == pytest.approx(42.5)
        assert {e.kind for e in rep.aps_events} == set(ApsKind)

    def test_override_sembrado(self, escalera_falla_dmvr):
        """Los overrides por imagen del JSON llegan a la secuencia."""
        rep = escalera_falla_dmvr.ladder.representation('2160p')
        assert rep.sequence.picture(48).tools.dmvr

    def test_digests(self, escalera_conforme):
        """Cada archivo leído tiene su SHA-256."""
        digests = escalera_conforme.digests

        assert 'escalera_conforme.json' in digests
        assert 'rd_720p_closed.csv' in digests
        assert all(len(d) == 64 for d in digests.values())

    def test_parametros_por_defecto(self, escalera_conforme):
        """Sin bloques abr ni transition se usan los valores por defecto."""
        assert escalera_conforme.abr.safety_margin == 0.9
        assert escalera_conforme.transition.up_mean_below_high_db == 1.77

    def test_overrides_de_abr(self, cargador, muestras, tmp_path):
        """El bloque abr del JSON pisa el margen de seguridad."""
        ruta = escribir_escalera(tmp_path, muestras, abr={'safety_margin': 0.75})
        assert cargador.cargar_escalera(ruta).abr.safety_margin == 0.75

    def test_archivo_inexistente(self, cargador, tmp_path):
        """Una ruta que no existe es un error de entrada."""
        with pytest.raises(EntradaInvalidaError, match='No existe'):
            cargador.cargar_escalera(tmp_path / 'nada.json')

    def test_json_invalido(self, cargador, tmp_path):
        """Un JSON truncado da un error legible."""
        ruta = tmp_path / 'roto.json'
        ruta.write_text('{"length": ', encoding='utf-8')

        with pytest.raises(EntradaInvalidaError, match='JSON inválido'):
            cargador.cargar_escalera(ruta)

    def test_esquema_sin_representaciones(self, cargador, tmp_path):
        """Un documento sin representaciones no pasa el esquema."""
        ruta = tmp_path / 'vacia.json'
        ruta.write_text(json.dumps({'length': 641, 'segment_duration_pics': 64}), encoding='utf-8')

        with pytest.raises(EntradaInvalidaError, match='representations'):
            cargador.cargar_escalera(ruta)

    def test_clave_desconocida(self, cargador, muestras, tmp_path):
        """El esquema no admite claves extra."""
        ruta = escribir_escalera(tmp_path, muestras, codec='hevc')

        with pytest.raises(EntradaInvalidaError):
            cargador.cargar_escalera(ruta)

    def test_curva_rd_inexistente(self, cargador, muestras, tmp_path):
        """Copiada a otra carpeta, la escalera no encuentra sus curvas RD relativas."""
        documento = json.loads((muestras / 'escalera_sin_fallback.json').read_text(encoding='utf-8'))
        ruta = tmp_path / 'escalera.json'
        ruta.write_text(json.dumps(documento), encoding='utf-8')

        with pytest.raises(EntradaInvalidaError, match='curva RD'):
            cargador.cargar_escalera(ruta)


class TestLectoresCsv:
    """Tests para las curvas RD, trazas y schedules."""

    def test_curva_rd(self, cargador, muestras):
        """La curva RD de 1080p trae cuatro tasas y la calidad YUV ponderada."""
        curva = cargador.leer_curva_rd(muestras / 'rd_1080p.csv')

        assert list(curva.rates) == [1500, 2500, 4000, 6000]
        assert curva.points[-1].psnr_yuv == pytest.approx(40.25)

    def test_columnas_faltantes(self, cargador, datos):
        """El error nombra la columna que falta."""
        with pytest.raises(EntradaInvalidaError, match='psnr_u'):
            cargador.leer_curva_rd(datos / 'rd_columnas_faltantes.csv')

    def test_traza(self, traza_escalon):
        """La traza de muestra tiene tres tramos."""
        assert traza_escalon.times_s == (0.0, 2.0, 7.0)
        assert traza_escalon.kbps == (20000.0, 1500.0, 20000.0)

    def test_schedule(self, cargador, muestras):
        """El schedule de muestra baja a 1080p en el segmento 2."""
        schedule = cargador.leer_schedule(muestras / 'schedule_baja_1080p.csv')
        assert schedule == ['2160p'] * 2 + ['1080p'] * 9

    def test_schedule_con_huecos(self, cargador, tmp_path):
        """Un schedule con segmentos salteados se rechaza."""
        ruta = tmp_path / 'schedule.csv'
        ruta.write_text('segment,rep_id\n0,720p\n2,720p\n', encoding='utf-8')

        with pytest.raises(EntradaInvalidaError, match='sin huecos'):
            cargador.leer_schedule(ruta)

    def test_csv_vacio(self, cargador, tmp_path):
        """Un CSV vacío es un error de entrada."""
        ruta = tmp_path / 'vacio.csv'
        ruta.write_text('', encoding='utf-8')

        with pytest.raises(EntradaInvalidaError):
            cargador.leer_traza(ruta)


class TestValidarDocumento:
    """Tests para la validación contra esquemas."""

    def test_reporte_de_bd_rate_incompleto(self):
        """Un reporte de BD-rate sin sus tablas no valida."""
        with pytest.raises(EntradaInvalidaError, match='bdrate_report'):
            validar_documento({'tool_version': '1.0.0'}, 'bdrate_report')
