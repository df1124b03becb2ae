"""
Simulación de conmutaciones entre representaciones.

Evalúa cada conmutación en un límite de segmento (legalidad de RPR,
clasificación del resultado, imágenes afectadas) y corre sesiones ABR sobre
trazas de ancho de banda con un modelo de buffer.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, ClassVar, Iterable, Mapping, Sequence

import numpy as np
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.dominio.constraint_engine import (
    AlcanceRegla,
    ApsEvent,
    ConformanceReport,
    DriftCategory,
    SpsModel,
    Violation,
    validate_ladder,
)
from core.dominio.gop_model import (
    CodedSequence,
    GopConfig,
    IrapMode,
    PictureKind,
    leading_pictures,
)
from core.dominio.quality_metrics import (
    Direction,
    RdCurve,
    TransitionParams,
    build_transition_profile,
    session_quality,
)
from core.excepciones import ArgumentoInvalidoError

logger = logging.getLogger(__name__)

RPR_MAX_DOWNSCALE = Fraction(1, 2)
RPR_MAX_UPSCALE = Fraction(8)


# =============================================================================
# ESCALERA
# =============================================================================

@dataclass(frozen=True)
class Representation:
    id: str
    width: int
    height: int
    gop_config: GopConfig
    sequence: CodedSequence
    rd_curve: RdCurve
    bitrates_kbps: tuple[float, ...] = ()
    operating_point: int = -1
    scaling_window: tuple[int, int] = (0, 0)
    sps: SpsModel | None = None
    aps_events: tuple[ApsEvent, ...] = ()
    # Tamaño real (kbit) por índice de segmento; vacío = tasa constante
    segment_sizes_kbit: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.width <= 0 or self.height <= 0:
            raise ArgumentoInvalidoError(f"Representación {self.id}: dimensiones inválidas {self.width}x{self.height}")
        if not self.bitrates_kbps:
            object.__setattr__(self, 'bitrates_kbps', tuple(float(r) for r in self.rd_curve.rates))
        if self.scaling_window == (0, 0):
            object.__setattr__(self, 'scaling_window', (self.width, self.height))
        if not -len(self.bitrates_kbps) <= self.operating_point < len(self.bitrates_kbps):
            raise ArgumentoInvalidoError(f"Representación {self.id}: operating_point fuera de rango")

    @property
    def avg_bitrate_kbps(self) -> float:
        return float(self.bitrates_kbps[self.operating_point])

    @property
    def quality_db(self) -> float:
        return self.rd_curve.points[self.operating_point].psnr_yuv

    def segment_kbits(self, segment_index: int, duracion_s: float) -> float:
        if segment_index < len(self.segment_sizes_kbit):
            return float(self.segment_sizes_kbit[segment_index])
        return self.avg_bitrate_kbps * duracion_s


@dataclass(frozen=True)
class Ladder:
    """
    Escalera de representaciones ordenadas por tasa ascendente.

    El fallback (closed GOP, menor resolución) queda fuera de la progresión ABR.
    """

    representations: tuple[Representation, ...]
    sps: SpsModel
    segment_duration_pics: int
    frame_rate: float = 64.0
    fallback: Representation | None = None
    fallback_enabled: bool = False

    def __post_init__(self) -> None:
        if not self.representations:
            raise ArgumentoInvalidoError("La escalera no tiene representaciones")
        object.__setattr__(
            self, 'representations',
            tuple(sorted(self.representations, key=lambda r: (r.avg_bitrate_kbps, r.id))),
        )
        ids = [r.id for r in self.todas()]
        if len(set(ids)) != len(ids):
            raise ArgumentoInvalidoError(f"Ids de representación repetidos: {ids}")
        if self.frame_rate <= 0 or self.segment_duration_pics <= 0:
            raise ArgumentoInvalidoError("frame_rate y segment_duration_pics deben ser positivos")
        for rep in self.todas():
            if rep.gop_config.segment_length != self.segment_duration_pics:
                raise ArgumentoInvalidoError(
                    f"Representación {rep.id}: segment_length {rep.gop_config.segment_length} "
                    f"!= segment_duration_pics {self.segment_duration_pics}"
                )
        largos = {r.sequence.length for r in self.todas()}
        if len(largos) != 1:
            raise ArgumentoInvalidoError(f"Las secuencias de la escalera difieren en longitud: {sorted(largos)}")
        if self.fallback is not None and self.fallback.gop_config.irap_mode != IrapMode.CLOSED_GOP:
            raise ArgumentoInvalidoError(f"El fallback {self.fallback.id} debe ser closed GOP")

    def todas(self) -> list[Representation]:
        return list(self.representations) + ([self.fallback] if self.fallback is not None else [])

    def representation(self, rep_id: str) -> Representation:
        for rep in self.todas():
            if rep.id == rep_id:
                return rep
        raise ArgumentoInvalidoError(f"Representación desconocida: {rep_id!r}")

    def indice(self, rep_id: str) -> int:
        """Posición en la progresión ABR; el fallback queda debajo de todas (-1)."""
        for posicion, rep in enumerate(self.representations):
            if rep.id == rep_id:
                return posicion
        self.representation(rep_id)
        return -1

    def sps_de(self, rep_id: str) -> SpsModel:
        return self.representation(rep_id).sps or self.sps

    @property
    def segment_duration_s(self) -> float:
        return self.segment_duration_pics / self.frame_rate

    @property
    def segment_count(self) -> int:
        return len(self.representations[0].sequence.segments)

    @property
    def length(self) -> int:
        return self.representations[0].sequence.length


@dataclass(frozen=True)
class CodecCapabilities:
    supports_rpr: bool = True


@dataclass(frozen=True)
class SwitchEvent:
    boundary_segment_index: int
    from_rep: str
    to_rep: str

    def to_dict(self) -> dict[str, Any]:
        return {'segment': self.boundary_segment_index, 'from_rep': self.from_rep, 'to_rep': self.to_rep}


# =============================================================================
# RESULTADOS DE CONMUTACIÓN
# =============================================================================

class OutcomeKind(models.TextChoices):
    SEAMLESS = 'Seamless', _('Sin costura')
    GRACEFUL_DRIFT = 'GracefulDrift', _('Drift leve')
    SEVERE_ARTEFACT_RISK = 'SevereArtefactRisk', _('Riesgo de artefactos severos')
    NON_CONFORMANT = 'NonConformant', _('Bitstream no conforme')
    DROPPED_PICTURES = 'DroppedPictures', _('Imágenes descartadas')
    ILLEGAL_RPR_RATIO = 'IllegalRprRatio', _('Factor RPR ilegal')
    NOT_A_SWITCH_POINT = 'NotASwitchPoint', _('No es punto de conmutación')


@dataclass(frozen=True)
class SwitchOutcome:
    kind: ClassVar[OutcomeKind]

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind.value}


@dataclass(frozen=True)
class Seamless(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.SEAMLESS


@dataclass(frozen=True)
class NotASwitchPoint(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.NOT_A_SWITCH_POINT


@dataclass(frozen=True)
class GracefulDrift(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.GRACEFUL_DRIFT
    affected_pocs: tuple[int, ...] = ()
    predicted_quality_series: tuple[float, ...] = ()
    direction: Direction = Direction.UP
    clamped: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            'kind': self.kind.value,
            'affected_pocs': list(self.affected_pocs),
            'predicted_quality_series': list(self.predicted_quality_series),
            'direction': self.direction.value,
            'clamped': self.clamped,
        }


@dataclass(frozen=True)
class SevereArtefactRisk(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.SEVERE_ARTEFACT_RISK
    causes: tuple[DriftCategory, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind.value, 'causes': [c.value for c in self.causes]}


@dataclass(frozen=True)
class NonConformant(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.NON_CONFORMANT
    violations: tuple[Violation, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind.value, 'violations': [v.to_dict() for v in self.violations]}


@dataclass(frozen=True)
class DroppedPictures(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.DROPPED_PICTURES
    dropped_pocs: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind.value, 'dropped_pocs': list(self.dropped_pocs)}


@dataclass(frozen=True)
class IllegalRprRatio(SwitchOutcome):
    kind: ClassVar[OutcomeKind] = OutcomeKind.ILLEGAL_RPR_RATIO
    h_factor: Fraction = Fraction(1)
    v_factor: Fraction = Fraction(1)

    def to_dict(self) -> dict[str, Any]:
        return {'kind': self.kind.value, 'h_factor': float(self.h_factor), 'v_factor': float(self.v_factor)}


# =============================================================================
# RPR
# =============================================================================

def rpr_scaling_factors(from_rep: Representation, to_rep: Representation) -> tuple[Fraction, Fraction]:
    """Factores (horizontal, vertical): ventana de la imagen actual sobre la de referencia."""
    ancho_ref, alto_ref = from_rep.scaling_window
    ancho_act, alto_act = to_rep.scaling_window
    if min(ancho_ref, alto_ref, ancho_act, alto_act) <= 0:
        raise ArgumentoInvalidoError("Ventana de escalado con dimensión nula")
    return Fraction(ancho_act, ancho_ref), Fraction(alto_act, alto_ref)


def rpr_legal(h_factor: Fraction | float, v_factor: Fraction | float) -> bool:
    """Hasta 8x de ampliación y 2x de reducción por dimensión, límites incluidos."""
    if h_factor <= 0 or v_factor <= 0:
        raise ArgumentoInvalidoError(f"Factores RPR no positivos: ({h_factor}, {v_factor})")
    return all(RPR_MAX_DOWNSCALE <= Fraction(f) <= RPR_MAX_UPSCALE for f in (h_factor, v_factor))


# =============================================================================
# EVALUACIÓN DE UNA CONMUTACIÓN
# =============================================================================

def _violaciones_del_cambio(ladder: Ladder, reporte: ConformanceReport, origen: Representation,
                            destino: Representation, segmento: int, leading: set[int],
                            cambia_resolucion: bool) -> tuple[list[Violation], list[Violation]]:
    """Separa las violaciones que tocan esta conmutación en (conformidad, drift)."""
    sps_involucrados = [ladder.sps_de(origen.id), ladder.sps_de(destino.id)]
    conformidad: list[Violation] = []
    drift: list[Violation] = []

    for violacion in reporte.violations:
        regla = violacion.regla
        lugar = violacion.location
        if regla.pillar == 3:
            if lugar.representation is not None and ladder.sps_de(lugar.representation) in sps_involucrados:
                conformidad.append(violacion)
            continue
        if lugar.representation != destino.id:
            continue
        if regla.scope == AlcanceRegla.ALWAYS:
            if lugar.segment == segmento:
                conformidad.append(violacion)
        elif lugar.poc in leading:
            if regla.scope == AlcanceRegla.RPR and cambia_resolucion:
                conformidad.append(violacion)
            elif regla.scope == AlcanceRegla.DRIFT:
                drift.append(violacion)
    return conformidad, drift


def _causas(seq: CodedSequence, drift: Iterable[Violation]) -> tuple[DriftCategory, ...]:
    causas: set[DriftCategory] = set()
    for violacion in drift:
        pic = seq.picture(violacion.location.poc) if violacion.location.poc is not None else None
        if violacion.rule_id == 'rasl-collocated':
            if pic is None or pic.tools.tmvp or pic.tools.sbtmvp:
                causas.add(DriftCategory.SYNTAX_TO_SYNTAX)
        elif violacion.rule_id in ('rasl-dmvr', 'rasl-cclm'):
            causas.add(DriftCategory.SAMPLE_TO_SYNTAX)
    orden = list(DriftCategory)
    return tuple(sorted(causas, key=orden.index))


def evaluate_switch(ladder: Ladder, event: SwitchEvent, caps: CodecCapabilities,
                    conformance: ConformanceReport | None = None,
                    params: TransitionParams | None = None) -> SwitchOutcome:
    """
    Clasifica una conmutación. El orden de la cascada es parte del contrato:

        1. segmento sin IRAP al inicio -> NotASwitchPoint
        2. IDR (o misma representación) -> Seamless
        3. cambio de resolución sin RPR -> DroppedPictures
        4. factores RPR ilegales -> IllegalRprRatio
        5. violaciones de conformidad en este límite -> NonConformant
        6. open GOP sin restringir o drift en las RASL -> SevereArtefactRisk
        7. open GOP restringido -> GracefulDrift
    """
    origen = ladder.representation(event.from_rep)
    destino = ladder.representation(event.to_rep)
    seq = destino.sequence
    indice = event.boundary_segment_index
    if not 0 <= indice < len(seq.segments):
        raise ArgumentoInvalidoError(f"Segmento {indice} fuera de rango (0..{len(seq.segments) - 1})")

    segmento = seq.segments[indice]
    if not segmento.starts_with_irap:
        return NotASwitchPoint()
    irap = seq.picture(segmento.picture_pocs[0])
    if origen.id == destino.id or irap.kind == PictureKind.IDR:
        return Seamless()

    leading = leading_pictures(seq, irap.poc)
    pocs_leading = tuple(p.poc for p in leading)
    cambia_resolucion = (origen.width, origen.height) != (destino.width, destino.height)

    if cambia_resolucion and not caps.supports_rpr:
        return DroppedPictures(dropped_pocs=pocs_leading)

    if cambia_resolucion:
        h_factor, v_factor = rpr_scaling_factors(origen, destino)
        if not rpr_legal(h_factor, v_factor):
            return IllegalRprRatio(h_factor=h_factor, v_factor=v_factor)

    reporte = conformance if conformance is not None else validate_ladder(ladder)
    conformidad, drift = _violaciones_del_cambio(
        ladder, reporte, origen, destino, indice, set(pocs_leading), cambia_resolucion
    )
    if conformidad:
        return NonConformant(violations=tuple(conformidad))

    if seq.config.irap_mode == IrapMode.OPEN_GOP or drift:
        causas = _causas(seq, drift)
        if causas:
            return SevereArtefactRisk(causes=causas)

    direccion = Direction.UP if ladder.indice(destino.id) > ladder.indice(origen.id) else Direction.DOWN
    alta = max(origen.quality_db, destino.quality_db)
    baja = min(origen.quality_db, destino.quality_db)
    perfil = build_transition_profile(direccion, alta, baja, len(pocs_leading), params)
    return GracefulDrift(
        affected_pocs=pocs_leading,
        predicted_quality_series=perfil.values,
        direction=direccion,
        clamped=perfil.clamped,
    )


# =============================================================================
# ABR
# =============================================================================

@dataclass(frozen=True)
class AbrConfig:
    safety_margin: float = 0.9
    panic_threshold_s: float = 2.0
    buffer_capacity_s: float = 30.0
    initial_buffer_s: float = 4.0

    def __post_init__(self) -> None:
        if not 0 < self.safety_margin <= 1:
            raise ArgumentoInvalidoError(f"safety_margin fuera de (0, 1]: {self.safety_margin}")
        if self.buffer_capacity_s <= 0 or self.panic_threshold_s < 0 or self.initial_buffer_s < 0:
            raise ArgumentoInvalidoError("Parámetros de buffer inválidos")

    @classmethod
    def desde_settings(cls, overrides: Mapping[str, float] | None = None) -> AbrConfig:
        valores = {**settings.OGOP_SIM['ABR'], **(overrides or {})}
        try:
            return cls(**{clave: float(valor) for clave, valor in valores.items()})
        except TypeError as e:
            raise ArgumentoInvalidoError(f"Parámetros ABR desconocidos: {e}") from e


@dataclass(frozen=True)
class BandwidthTrace:
    """Traza constante por tramos; el último valor se extiende indefinidamente."""

    times_s: tuple[float, ...]
    kbps: tuple[float, ...]

    def __post_init__(self) -> None:
        if not self.times_s or len(self.times_s) != len(self.kbps):
            raise ArgumentoInvalidoError("La traza está vacía o sus columnas difieren en largo")
        if np.any(np.diff(self.times_s) <= 0):
            raise ArgumentoInvalidoError("Los tiempos de la traza deben ser estrictamente crecientes")
        if min(self.kbps) <= 0:
            raise ArgumentoInvalidoError("La traza contiene throughput no positivo")

    def throughput_at(self, t: float) -> float:
        posicion = int(np.searchsorted(self.times_s, t, side='right')) - 1
        return float(self.kbps[max(posicion, 0)])

    def download_time(self, inicio_s: float, kbits: float) -> float:
        """Tiempo para descargar kbits desde inicio_s integrando la traza."""
        restante = kbits
        t = inicio_s
        while True:
            tasa = self.throughput_at(t)
            posicion = int(np.searchsorted(self.times_s, t, side='right'))
            proximo = self.times_s[posicion] if posicion < len(self.times_s) else float('inf')
            capacidad = tasa * (proximo - t)
            if capacidad >= restante:
                return t + restante / tasa - inicio_s
            restante -= capacidad
            t = proximo

    def con_jitter(self, seed: int, amplitud: float) -> BandwidthTrace:
        """Multiplica cada muestra por un factor uniforme en [1-amplitud, 1+amplitud]."""
        if not 0 <= amplitud < 1:
            raise ArgumentoInvalidoError(f"amplitud de jitter fuera de [0, 1): {amplitud}")
        rng = np.random.default_rng(seed)
        factores = rng.uniform(1 - amplitud, 1 + amplitud, size=len(self.kbps))
        return BandwidthTrace(self.times_s, tuple(float(k * f) for k, f in zip(self.kbps, factores)))


@dataclass(frozen=True)
class BufferState:
    level_s: float
    capacity_s: float

    def to_dict(self) -> dict[str, Any]:
        return {'level_s': self.level_s, 'capacity_s': self.capacity_s}


@dataclass(frozen=True)
class AbrDecision:
    segment_index: int
    representation_id: str
    buffer: BufferState
    throughput_estimate_kbps: float
    download_time_s: float
    stall_s: float = 0.0
    panic: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            'segment': self.segment_index,
            'representation': self.representation_id,
            'buffer': self.buffer.to_dict(),
            'throughput_estimate_kbps': self.throughput_estimate_kbps,
            'download_time_s': self.download_time_s,
            'stall_s': self.stall_s,
            'panic': self.panic,
        }


def run_abr(ladder: Ladder, trace: BandwidthTrace, abr_config: AbrConfig | None = None) -> list[AbrDecision]:
    """
    ABR por throughput con regla de pánico.

    Se elige la representación de mayor tasa con tasa <= safety_margin por el
    throughput medido en la descarga anterior. Con el buffer por debajo de
    panic_threshold_s se elige la más baja sin importar el throughput. El
    buffer evoluciona como nivel += duración - descarga, acotado a
    [0, capacidad]; lo que el piso de 0 recorta se registra como stall y al
    superar la capacidad el cliente espera.
    """
    config = abr_config or AbrConfig()
    representaciones = ladder.representations
    duracion = ladder.segment_duration_s

    t = 0.0
    nivel = min(config.initial_buffer_s, config.buffer_capacity_s)
    estimado = trace.throughput_at(0.0)
    decisiones: list[AbrDecision] = []

    for indice in range(ladder.segment_count):
        panico = nivel < config.panic_threshold_s
        if panico:
            elegida = representaciones[0]
        else:
            entran = [r for r in representaciones if r.avg_bitrate_kbps <= config.safety_margin * estimado]
            elegida = entran[-1] if entran else representaciones[0]

        kbits = elegida.segment_kbits(indice, duracion)
        descarga = trace.download_time(t, kbits)
        bruto = nivel + duracion - descarga
        estancado = max(0.0, -bruto)
        nivel = max(bruto, 0.0)
        t += descarga
        if nivel > config.buffer_capacity_s:
            t += nivel - config.buffer_capacity_s
            nivel = config.buffer_capacity_s

        decisiones.append(AbrDecision(
            segment_index=indice,
            representation_id=elegida.id,
            buffer=BufferState(level_s=nivel, capacity_s=config.buffer_capacity_s),
            throughput_estimate_kbps=estimado,
            download_time_s=descarga,
            stall_s=estancado,
            panic=panico,
        ))
        if panico and len(decisiones) > 1 and decisiones[-2].representation_id != elegida.id:
            logger.warning(f"Pánico en segmento {indice}: buffer bajo, se baja a {elegida.id}")
        estimado = kbits / descarga

    return decisiones


def panic_down_switches(decisiones: Sequence[AbrDecision]) -> list[int]:
    """Segmentos donde la regla de pánico cambió de representación."""
    return [
        actual.segment_index
        for previa, actual in zip(decisiones, decisiones[1:])
        if actual.panic and actual.representation_id != previa.representation_id
    ]


# =============================================================================
# SESIÓN
# =============================================================================

class EstadoImagen(models.TextChoices):
    ESTABLE = 'estable', _('Calidad estable')
    TRANSICION = 'transicion', _('Transición RASL')
    DESCARTADA = 'descartada', _('Descartada')
    RPR_ILEGAL = 'rpr_ilegal', _('Factor RPR ilegal')
    NO_CONFORME = 'no_conforme', _('No conforme')
    RIESGO_ARTEFACTO = 'riesgo_artefacto', _('Riesgo de artefacto')
    SIN_DATOS = 'sin_datos', _('Sin datos')


_ESTADO_HUECO: dict[OutcomeKind, EstadoImagen] = {
    OutcomeKind.DROPPED_PICTURES: EstadoImagen.DESCARTADA,
    OutcomeKind.ILLEGAL_RPR_RATIO: EstadoImagen.RPR_ILEGAL,
    OutcomeKind.NON_CONFORMANT: EstadoImagen.NO_CONFORME,
    OutcomeKind.SEVERE_ARTEFACT_RISK: EstadoImagen.RIESGO_ARTEFACTO,
}


@dataclass(frozen=True)
class SwitchRecord:
    event: SwitchEvent
    outcome: SwitchOutcome
    requested_rep: str
    effective_rep: str
    rewritten_to_fallback: bool = False
    panic: bool = False

    def to_dict(self) -> dict[str, Any]:
        return {
            **self.event.to_dict(),
            'requested_rep': self.requested_rep,
            'effective_rep': self.effective_rep,
            'rewritten_to_fallback': self.rewritten_to_fallback,
            'panic': self.panic,
            'outcome': self.outcome.to_dict(),
        }


@dataclass(frozen=True)
class TimelineEntry:
    poc: int
    quality_db: float | None
    representation: str | None
    status: EstadoImagen


@dataclass(frozen=True)
class SessionReport:
    switches: tuple[SwitchRecord, ...]
    timeline: tuple[TimelineEntry, ...]
    effective_schedule: tuple[str, ...]
    summary: dict[str, Any] = field(default_factory=dict)
    abr_decisions: tuple[AbrDecision, ...] = ()

    def outcomes(self) -> list[SwitchOutcome]:
        return [registro.outcome for registro in self.switches]

    def quality_series(self) -> list[float | None]:
        return [entrada.quality_db for entrada in self.timeline]


def _leading_del_segmento(rep: Representation, indice: int) -> tuple[int, ...]:
    segmento = rep.sequence.segments[indice]
    if not segmento.starts_with_irap:
        return ()
    return tuple(p.poc for p in leading_pictures(rep.sequence, segmento.picture_pocs[0]))


def simulate_session(ladder: Ladder, schedule: Sequence[str], caps: CodecCapabilities,
                     abr_decisions: Sequence[AbrDecision] = (),
                     params: TransitionParams | None = None,
                     conformance: ConformanceReport | None = None) -> SessionReport:
    """
    Reproduce una sesión a partir de la representación pedida en cada segmento.

    Una conmutación se evalúa cuando cambia el pedido. Con fallback habilitado,
    un pedido con factor RPR ilegal se reescribe hacia el fallback. En un
    NotASwitchPoint el reproductor sigue con la representación anterior.
    """
    if len(schedule) != ladder.segment_count:
        raise ArgumentoInvalidoError(
            f"El schedule tiene {len(schedule)} segmentos y la escalera {ladder.segment_count}"
        )
    for rep_id in schedule:
        ladder.representation(rep_id)

    reporte = conformance if conformance is not None else validate_ladder(ladder)
    panicos = set(panic_down_switches(abr_decisions))

    efectivas = [schedule[0]]
    pedido_anterior = schedule[0]
    registros: list[SwitchRecord] = []

    for indice in range(1, len(schedule)):
        pedido = schedule[indice]
        actual = efectivas[-1]
        if pedido == pedido_anterior or pedido == actual:
            efectivas.append(actual)
            pedido_anterior = pedido
            continue

        evento = SwitchEvent(indice, actual, pedido)
        resultado = evaluate_switch(ladder, evento, caps, reporte, params)
        reescrito = False
        if (isinstance(resultado, IllegalRprRatio) and ladder.fallback is not None
                and ladder.fallback_enabled and actual != ladder.fallback.id):
            evento = SwitchEvent(indice, actual, ladder.fallback.id)
            resultado = evaluate_switch(ladder, evento, caps, reporte, params)
            reescrito = True
            logger.info(f"Segmento {indice}: {actual} -> {pedido} reescrito hacia el fallback {ladder.fallback.id}")

        if isinstance(resultado, NotASwitchPoint):
            efectivas.append(actual)
            # El pedido sigue pendiente para el próximo segmento
        else:
            efectivas.append(evento.to_rep)
            pedido_anterior = pedido

        registros.append(SwitchRecord(
            event=evento, outcome=resultado, requested_rep=pedido,
            effective_rep=efectivas[-1], rewritten_to_fallback=reescrito, panic=indice in panicos,
        ))

    timeline = _armar_timeline(ladder, efectivas, registros)
    resumen = _resumen(registros, timeline, abr_decisions)
    logger.info(
        f"Sesión simulada: {len(registros)} conmutaciones, calidad media {resumen['mean_quality_db']}"
    )
    return SessionReport(
        switches=tuple(registros),
        timeline=timeline,
        effective_schedule=tuple(efectivas),
        summary=resumen,
        abr_decisions=tuple(abr_decisions),
    )


def _armar_timeline(ladder: Ladder, efectivas: Sequence[str],
                    registros: Sequence[SwitchRecord]) -> tuple[TimelineEntry, ...]:
    calidad: list[float | None] = [None] * ladder.length
    representacion: list[str | None] = [None] * ladder.length
    estado = [EstadoImagen.SIN_DATOS] * ladder.length

    for indice, rep_id in enumerate(efectivas):
        rep = ladder.representation(rep_id)
        for poc in rep.sequence.segments[indice].picture_pocs:
            calidad[poc] = rep.quality_db
            representacion[poc] = rep_id
            estado[poc] = EstadoImagen.ESTABLE

    for registro in registros:
        resultado = registro.outcome
        if isinstance(resultado, GracefulDrift):
            for poc, valor in zip(resultado.affected_pocs, resultado.predicted_quality_series):
                calidad[poc] = valor
                estado[poc] = EstadoImagen.TRANSICION
        elif resultado.kind in _ESTADO_HUECO:
            destino = ladder.representation(registro.event.to_rep)
            for poc in _leading_del_segmento(destino, registro.event.boundary_segment_index):
                calidad[poc] = None
                estado[poc] = _ESTADO_HUECO[resultado.kind]

    return tuple(
        TimelineEntry(poc=poc, quality_db=calidad[poc], representation=representacion[poc], status=estado[poc])
        for poc in range(ladder.length)
    )


def _resumen(registros: Sequence[SwitchRecord], timeline: Sequence[TimelineEntry],
             abr_decisions: Sequence[AbrDecision]) -> dict[str, Any]:
    conteo = {kind.value: 0 for kind in OutcomeKind}
    for registro in registros:
        conteo[registro.outcome.kind.value] += 1

    ventanas = [r.outcome.affected_pocs for r in registros if isinstance(r.outcome, GracefulDrift)]
    serie = [entrada.quality_db for entrada in timeline]
    calidad = session_quality(serie, ventanas) if any(v is not None for v in serie) else None

    return {
        'switch_counts': conteo,
        'mean_quality_db': calidad.mean if calidad else None,
        'min_quality_db': calidad.min if calidad else None,
        'transition_means_db': list(calidad.transition_means) if calidad else [],
        'dropped_pictures': sum(
            len(r.outcome.dropped_pocs) for r in registros if isinstance(r.outcome, DroppedPictures)
        ),
        'stall_total_s': float(sum(d.stall_s for d in abr_decisions)),
        'panic_down_switches': len(panic_down_switches(abr_decisions)),
        'fallback_rewrites': sum(1 for r in registros if r.rewritten_to_fallback),
    }
