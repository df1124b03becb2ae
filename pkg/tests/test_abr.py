"""
Tests para el ABR por throughput, la traza de ancho de banda y la sesión ABR completa.
"""
import pytest

from core.dominio.switch_sim import (
    AbrConfig,
    BandwidthTrace,
    CodecCapabilities,
    GracefulDrift,
    Seamless,
    panic_down_switches,
    run_abr,
    simulate_session,
)
from core.excepciones import ArgumentoInvalidoError


class TestBandwidthTrace:
    """Tests para BandwidthTrace."""

    def test_throughput_por_tramos(self, traza_escalon):
        """El throughput es constante por tramos y el último tramo se extiende al infinito."""
        assert traza_escalon.throughput_at(0.0) == 20000
        assert traza_escalon.throughput_at(1.99) == 20000
        assert traza_escalon.throughput_at(2.0) == 1500
        assert traza_escalon.throughput_at(100.0) == 20000

    def test_descarga_que_cruza_la_caida(self, traza_escalon):
        """Una descarga que atraviesa dos cambios de tramo integra cada uno por separado."""
        # 8000 kbit a 20000 hasta t=2, 7500 a 1500 hasta t=7 y 500 a 20000
        assert traza_escalon.download_time(1.6, 16000) == pytest.approx(5.425)

    def test_tiempos_no_crecientes(self):
        """Rechaza tiempos repetidos."""
        with pytest.raises(ArgumentoInvalidoError):
            BandwidthTrace((0.0, 2.0, 2.0), (1000.0, 2000.0, 3000.0))

    def test_throughput_no_positivo(self):
        """Rechaza tramos con throughput cero."""
        with pytest.raises(ArgumentoInvalidoError):
            BandwidthTrace((0.0, 1.0), (1000.0, 0.0))

    def test_jitter_reproducible(self, traza_escalon):
        """Con la misma semilla el jitter da la misma traza, dentro de la amplitud pedida."""
        a = traza_escalon.con_jitter(seed=7, amplitud=0.1)
        b = traza_escalon.con_jitter(seed=7, amplitud=0.1)

        assert a == b
        assert a.times_s == traza_escalon.times_s
        for original, con_ruido in zip(traza_escalon.kbps, a.kbps):
            assert 0.9 * original <= con_ruido <= 1.1 * original

    def test_jitter_fuera_de_rango(self, traza_escalon):
        """Una amplitud de 1.0 o más se rechaza."""
        with pytest.raises(ArgumentoInvalidoError):
            traza_escalon.con_jitter(seed=1, amplitud=1.0)


class TestAbrConfig:
    """Tests para AbrConfig."""

    def test_desde_settings(self):
        """Los overrides parciales se combinan con los valores por defecto."""
        config = AbrConfig.desde_settings({'safety_margin': 0.8})
        assert config == AbrConfig(safety_margin=0.8)

    def test_margen_fuera_de_rango(self):
        """Rechaza un margen de seguridad mayor que 1."""
        with pytest.raises(ArgumentoInvalidoError):
            AbrConfig(safety_margin=1.5)

    def test_clave_desconocida(self):
        """Una clave que AbrConfig no conoce es un error."""
        with pytest.raises(ArgumentoInvalidoError):
            AbrConfig.desde_settings({'bola': 1.0})


class TestRunAbr:
    """Tests para run_abr."""

    def test_throughput_alto_elige_la_mayor(self, escalera_conforme):
        """Con 20 Mbps constantes se pide siempre 2160p sin stalls."""
        decisiones = run_abr(escalera_conforme.ladder, BandwidthTrace((0.0,), (20000.0,)))

        assert [d.representation_id for d in decisiones] == ['2160p'] * 11
        assert panic_down_switches(decisiones) == []
        assert all(d.stall_s == 0 for d in decisiones)

    def test_throughput_intermedio(self, escalera_conforme):
        """Elige la mayor representación que entra bajo el margen."""
        # 0.9 * 5000 = 4500: entra 720p (3000) pero no 1080p (6000)
        decisiones = run_abr(escalera_conforme.ladder, BandwidthTrace((0.0,), (5000.0,)))
        assert {d.representation_id for d in decisiones} == {'720p'}

    def test_el_fallback_no_participa(self, escalera_conforme):
        """El fallback closed-GOP nunca sale del ABR, aun con throughput mínimo."""
        decisiones = run_abr(escalera_conforme.ladder, BandwidthTrace((0.0,), (500.0,)))
        assert '720p-closed' not in {d.representation_id for d in decisiones}

    def test_caida_dispara_el_panico(self, escalera_conforme, traza_escalon):
        """La caída de throughput vacía el buffer y el pánico baja a la representación más baja."""
        decisiones = run_abr(escalera_conforme.ladder, traza_escalon, escalera_conforme.abr)

        # Tras el stall el buffer recién pasa el umbral de pánico en el segmento 5
        assert [d.representation_id for d in decisiones] == ['2160p'] * 3 + ['720p'] * 3 + ['2160p'] * 5
        assert panic_down_switches(decisiones) == [3]
        assert decisiones[2].download_time_s == pytest.approx(5.425)
        assert decisiones[2].stall_s == pytest.approx(0.025)
        assert decisiones[2].buffer.level_s == pytest.approx(0.0)
        assert [d.panic for d in decisiones[3:7]] == [True, True, True, False]
        assert decisiones[-1].buffer.level_s == pytest.approx(3.55)
        assert sum(d.stall_s for d in decisiones) == pytest.approx(0.025)

    def test_conservacion_del_buffer(self, escalera_conforme, traza_escalon):
        """Cada nivel es el anterior más la duración menos la descarga, acotado a [0, capacidad]."""
        config = escalera_conforme.abr
        duracion = escalera_conforme.ladder.segment_duration_s
        decisiones = run_abr(escalera_conforme.ladder, traza_escalon, config)

        nivel = config.initial_buffer_s
        for decision in decisiones:
            bruto = nivel + duracion - decision.download_time_s
            nivel = min(max(bruto, 0.0), config.buffer_capacity_s)
            assert decision.buffer.level_s == pytest.approx(nivel)
            assert decision.stall_s == pytest.approx(max(0.0, -bruto))

    def test_respeta_el_margen_fuera_del_panico(self, escalera_conforme, traza_escalon):
        """Fuera del pánico toda elección salvo la más baja cumple bitrate <= margen * estimación."""
        escalera = escalera_conforme.ladder
        decisiones = run_abr(escalera, traza_escalon)

        for decision in decisiones:
            if decision.panic:
                continue
            rep = escalera.representation(decision.representation_id)
            if rep.id != escalera.representations[0].id:
                assert rep.avg_bitrate_kbps <= 0.9 * decision.throughput_estimate_kbps

    def test_buffer_no_supera_la_capacidad(self, escalera_conforme):
        """El nivel del buffer se satura en la capacidad configurada."""
        config = AbrConfig(buffer_capacity_s=5.0, initial_buffer_s=4.0)
        decisiones = run_abr(escalera_conforme.ladder, BandwidthTrace((0.0,), (20000.0,)), config)
        assert max(d.buffer.level_s for d in decisiones) == pytest.approx(5.0)


class TestSesionAbr:
    """La sesión completa sobre la traza con caída y la escalera con fallback."""

    def test_panico_reescrito_al_fallback(self, escalera_conforme, traza_escalon):
        """La bajada por pánico se reescribe al fallback y la subida posterior es un drift leve."""
        escalera = escalera_conforme.ladder
        decisiones = run_abr(escalera, traza_escalon, escalera_conforme.abr)

        sesion = simulate_session(
            escalera, [d.representation_id for d in decisiones], CodecCapabilities(True),
            abr_decisions=decisiones, params=escalera_conforme.transition,
        )

        bajada, subida = sesion.switches
        assert bajada.panic and bajada.rewritten_to_fallback
        assert isinstance(bajada.outcome, Seamless)
        assert bajada.effective_rep == '720p-closed'
        assert subida.event.from_rep == '720p-closed'
        assert isinstance(subida.outcome, GracefulDrift)
        assert len(subida.outcome.affected_pocs) == 31
        assert sesion.summary['panic_down_switches'] == 1
        assert sesion.summary['stall_total_s'] == pytest.approx(0.025)
        assert sesion.summary['transition_means_db'] == [pytest.approx(40.73)]
