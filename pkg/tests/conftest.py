"""
Configuración y fixtures para pytest.
"""
from pathlib import Path

import pytest

from core.dominio.constraint_engine import ApsStrategy, SpsModel, apply_rasl_constraints, plan_aps
from core.dominio.gop_model import GopConfig, IrapMode, RaslMode, build_sequence
from core.dominio.quality_metrics import RdCurve, RdPoint
from core.dominio.switch_sim import Ladder, Representation
from core.services.LadderConfigService import LadderConfigService


MUESTRAS = Path(__file__).resolve().parent.parent / 'core' / 'muestras'
DATOS = Path(__file__).resolve().parent / 'datos'


# =============================================================================
# FIXTURES DE ARCHIVOS
# =============================================================================

@pytest.fixture
def muestras():
    """Carpeta de muestras incluidas en core/muestras."""
    return MUESTRAS


@pytest.fixture
def datos():
    """Carpeta de datos de prueba."""
    return DATOS


@pytest.fixture(autouse=True)
def media_temporal(settings, tmp_path):
    """Las salidas por defecto van a una carpeta temporal."""
    settings.MEDIA_ROOT = str(tmp_path / 'media')
    return settings.MEDIA_ROOT


# =============================================================================
# FIXTURES DE ESCALERAS
# =============================================================================

@pytest.fixture
def cargador():
    return LadderConfigService()


@pytest.fixture
def escalera_conforme(cargador):
    """Escalera 2160p/1080p/720p restringida con fallback closed GOP habilitado."""
    return cargador.cargar_escalera(MUESTRAS / 'escalera_conforme.json')


@pytest.fixture
def escalera_sin_fallback(cargador):
    return cargador.cargar_escalera(MUESTRAS / 'escalera_sin_fallback.json')


@pytest.fixture
def escalera_falla_dmvr(cargador):
    return cargador.cargar_escalera(MUESTRAS / 'escalera_falla_dmvr.json')


@pytest.fixture
def escalera_open(cargador):
    """Escalera open GOP sin restricciones en las RASL."""
    return cargador.cargar_escalera(MUESTRAS / 'escalera_open_sin_restringir.json')


@pytest.fixture
def traza_escalon(cargador):
    """20000 kbps, cae a 1500 kbps entre t=2 s y t=7 s y vuelve a 20000."""
    return cargador.leer_traza(MUESTRAS / 'traza_escalon.csv')


# =============================================================================
# FIXTURES DE SECUENCIAS Y CURVAS
# =============================================================================

@pytest.fixture
def secuencia_open_g8():
    """GOP 8, IRAP 64, open GOP sin restringir, 129 imágenes."""
    return build_sequence(GopConfig(8, 64, IrapMode.OPEN_GOP), 129)


@pytest.fixture
def secuencia_closed_g8():
    return build_sequence(GopConfig(8, 64, IrapMode.CLOSED_GOP), 129)


@pytest.fixture
def curva_anchor():
    return RdCurve((
        RdPoint(4000, 36.0, 40.0, 41.0),
        RdPoint(7000, 38.5, 41.5, 42.5),
        RdPoint(10000, 40.0, 42.5, 43.5),
        RdPoint(16000, 42.0, 43.5, 44.5),
    ))


@pytest.fixture
def fabrica_representacion(curva_anchor):
    """Arma representaciones sintéticas con la secuencia ya restringida y el plan de APS."""
    def crear(rep_id, width, height, modo=IrapMode.CONSTRAINED_OPEN_GOP, gop=32, irap=64,
              length=129, segmento=0, rasl_mode=RaslMode.FULL_RPR,
              aps=ApsStrategy.RESET_AT_IRAP, sps=None, bitrate=None):
        seq = build_sequence(GopConfig(gop, irap, modo, segment_length=segmento), length)
        if modo == IrapMode.CONSTRAINED_OPEN_GOP:
            seq = apply_rasl_constraints(seq, rasl_mode)
        seq, eventos = plan_aps(seq, aps)
        return Representation(
            id=rep_id,
            width=width,
            height=height,
            gop_config=seq.config,
            sequence=seq,
            rd_curve=curva_anchor,
            bitrates_kbps=(float(bitrate),) if bitrate else (),
            sps=sps,
            aps_events=tuple(eventos),
        )
    return crear


@pytest.fixture
def fabrica_escalera():
    def crear(*representaciones, segmento=64, sps=None, fallback=None, fallback_enabled=False):
        return Ladder(
            representations=tuple(representaciones),
            sps=sps or SpsModel(),
            segment_duration_pics=segmento,
            fallback=fallback,
            fallback_enabled=fallback_enabled,
        )
    return crear
