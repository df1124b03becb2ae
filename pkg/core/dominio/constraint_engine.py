"""
Motor de restricciones para conmutación con open GOP.

Clasifica las herramientas de inter-predicción según el tipo de drift que
provocan y aplica/valida los tres pilares de la codificación restringida:

    1. Herramientas de las imágenes RASL (DMVR, BDOF, PROF, CCLM, wraparound
       deshabilitados; TMVP/SBTMVP con el CRA como imagen colocada).
    2. APS autocontenidos por segmento (reset en cada IRAP).
    3. SPS alineados en toda la escalera.
"""
from __future__ import annotations

import asyncio
import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Any, Iterable, NamedTuple

from asgiref.sync import sync_to_async
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _

from core.dominio.gop_model import (
    CodedSequence,
    IrapMode,
    Picture,
    PictureKind,
    RaslMode,
    ToolFlags,
    leading_pictures,
)
from core.excepciones import ArgumentoInvalidoError

if TYPE_CHECKING:
    from core.dominio.switch_sim import Ladder, Representation

logger = logging.getLogger(__name__)

__all__ = [
    'ApsEvent', 'ApsKind', 'ApsStrategy', 'ChromaFormat', 'ConformanceReport',
    'DriftCategory', 'DriftClassification', 'Location', 'RaslMode', 'SpsModel',
    'Tool', 'ToolFlags', 'Violation', 'apply_rasl_constraints',
    'check_aps_self_containment', 'check_rasl_tools', 'check_sps_alignment',
    'drift_category', 'plan_aps', 'validar_escalera_async', 'validate_ladder',
]


# =============================================================================
# TAXONOMÍA DE DRIFT
# =============================================================================

class Tool(models.TextChoices):
    MC = 'MC', _('Compensación de movimiento')
    AMC = 'AMC', _('Compensación de movimiento afín')
    PROF = 'PROF', _('Prediction refinement with optical flow')
    BDOF = 'BDOF', _('Bi-directional optical flow')
    TMVP = 'TMVP', _('Temporal motion vector prediction')
    SBTMVP = 'SBTMVP', _('Subblock TMVP')
    DMVR = 'DMVR', _('Decoder-side motion vector refinement')
    CCLM = 'CCLM', _('Cross-component linear model')
    LMCS = 'LMCS', _('Luma mapping with chroma scaling')
    APS = 'APS', _('Adaptation parameter set')


class DriftCategory(models.TextChoices):
    SAMPLE_TO_SAMPLE = 'SampleToSample', _('Muestra a muestra')
    SYNTAX_TO_SYNTAX = 'SyntaxToSyntax', _('Sintaxis a sintaxis')
    SAMPLE_TO_SYNTAX = 'SampleToSyntax', _('Muestra a sintaxis')
    PARAMETER_SET = 'ParameterSet', _('Parameter set')


class DriftClassification(NamedTuple):
    category: DriftCategory
    severity: str


_CATEGORIAS: dict[Tool, DriftClassification] = {
    Tool.MC: DriftClassification(DriftCategory.SAMPLE_TO_SAMPLE, 'low'),
    Tool.AMC: DriftClassification(DriftCategory.SAMPLE_TO_SAMPLE, 'low'),
    Tool.PROF: DriftClassification(DriftCategory.SAMPLE_TO_SAMPLE, 'low'),
    Tool.BDOF: DriftClassification(DriftCategory.SAMPLE_TO_SAMPLE, 'low'),
    Tool.TMVP: DriftClassification(DriftCategory.SYNTAX_TO_SYNTAX, 'high'),
    Tool.SBTMVP: DriftClassification(DriftCategory.SYNTAX_TO_SYNTAX, 'high'),
    Tool.DMVR: DriftClassification(DriftCategory.SAMPLE_TO_SYNTAX, 'high'),
    Tool.CCLM: DriftClassification(DriftCategory.SAMPLE_TO_SYNTAX, 'high'),
    # El promediado de LMCS atenúa el drift
    Tool.LMCS: DriftClassification(DriftCategory.SAMPLE_TO_SYNTAX, 'high (mitigated)'),
    Tool.APS: DriftClassification(DriftCategory.PARAMETER_SET, 'high (possible decoder crash)'),
}


def drift_category(tool: Tool | str) -> DriftClassification:
    """
    Categoría de drift de una herramienta y nota de severidad.

    Ejemplo:
        drift_category('TMVP') -> (SyntaxToSyntax, 'high')
    """
    try:
        clave = Tool(str(tool).upper())
    except ValueError as e:
        raise ArgumentoInvalidoError(f"Herramienta desconocida: {tool!r}") from e
    return _CATEGORIAS[clave]


def es_alta_severidad(categoria: DriftCategory) -> bool:
    return categoria != DriftCategory.SAMPLE_TO_SAMPLE


# =============================================================================
# TIPOS DE PARAMETER SETS
# =============================================================================

class ChromaFormat(models.TextChoices):
    YUV400 = '400', _('4:0:0')
    YUV420 = '420', _('4:2:0')
    YUV422 = '422', _('4:2:2')
    YUV444 = '444', _('4:4:4')


@dataclass(frozen=True)
class SpsModel:
    max_width: int = 3840
    max_height: int = 2160
    chroma_format: ChromaFormat = ChromaFormat.YUV420
    bit_depth: int = 10
    ctu_size: int = 128
    level_idc: int = 83
    rpr_enabled: bool = True
    res_change_allowed: bool = True
    gci_no_res_change: bool = False
    subpictures_enabled: bool = False

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, 'chroma_format', ChromaFormat(str(self.chroma_format)))
        except ValueError as e:
            raise ArgumentoInvalidoError(f"chroma_format desconocido: {self.chroma_format!r}") from e
        if self.max_width <= 0 or self.max_height <= 0:
            raise ArgumentoInvalidoError("max_width y max_height deben ser positivos")


class ApsKind(models.TextChoices):
    ALF = 'ALF', _('Adaptive loop filter')
    LMCS = 'LMCS', _('Luma mapping with chroma scaling')
    SCALING_LIST = 'ScalingList', _('Scaling list')


class ApsStrategy(models.TextChoices):
    RESET_AT_IRAP = 'reset_at_irap', _('Reset de APS en cada IRAP')
    CARRY_OVER = 'carry_over', _('APS heredados entre segmentos')


@dataclass(frozen=True)
class ApsEvent:
    aps_id: int
    carried_in_poc: int
    segment_index: int
    kind: ApsKind

    def __post_init__(self) -> None:
        if self.aps_id < 0:
            raise ArgumentoInvalidoError(f"aps_id negativo: {self.aps_id}")
        object.__setattr__(self, 'kind', ApsKind(self.kind))


# Un id por tipo; el reset vuelve a emitir los mismos ids
APS_IDS_POR_TIPO: dict[ApsKind, int] = {
    ApsKind.ALF: 0,
    ApsKind.LMCS: 1,
    ApsKind.SCALING_LIST: 2,
}


# =============================================================================
# REPORTE DE CONFORMIDAD
# =============================================================================

class AlcanceRegla(models.TextChoices):
    DRIFT = 'drift', _('Drift en imágenes RASL')
    RPR = 'rpr', _('Restricciones de RPR')
    ALWAYS = 'always', _('Siempre')


@dataclass(frozen=True)
class Regla:
    pillar: int
    severity: str
    scope: AlcanceRegla
    descripcion: str


REGLAS: dict[str, Regla] = {
    'rasl-dmvr': Regla(1, 'high', AlcanceRegla.DRIFT, "DMVR habilitado en imagen RASL"),
    'rasl-bdof': Regla(1, 'low', AlcanceRegla.RPR, "BDOF habilitado en imagen RASL"),
    'rasl-prof': Regla(1, 'low', AlcanceRegla.RPR, "PROF habilitado en imagen RASL"),
    'rasl-cclm': Regla(1, 'high', AlcanceRegla.DRIFT, "CCLM habilitado en imagen RASL"),
    'rasl-wraparound': Regla(1, 'low', AlcanceRegla.RPR, "Wraparound habilitado en imagen RASL"),
    'rasl-collocated': Regla(1, 'high', AlcanceRegla.DRIFT, "Imagen colocada de RASL anterior al CRA"),
    'aps-cross-segment': Regla(2, 'high', AlcanceRegla.ALWAYS, "APS de un segmento anterior"),
    'aps-missing': Regla(2, 'high', AlcanceRegla.ALWAYS, "APS nunca emitido"),
    'sps-chroma-format': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "chroma_format distinto"),
    'sps-bit-depth': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "bit_depth distinto"),
    'sps-ctu-size': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "ctu_size distinto"),
    'sps-max-resolution': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "Resolución máxima insuficiente"),
    'sps-rpr-disabled': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "RPR deshabilitado"),
    'sps-res-change-disallowed': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "Cambio de resolución no permitido"),
    'sps-gci-no-res-change': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "GCI prohíbe cambio de resolución"),
    'sps-subpictures': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "Subpictures independientes habilitadas"),
    'sps-level': Regla(3, 'non-conformant', AlcanceRegla.ALWAYS, "level_idc no cubre la resolución máxima"),
}

SEVERIDAD_APS_RASL = 'decoder-crash risk after switch'
SEVERIDAD_APS_OTRAS = 'missing parameter set after switch'


@dataclass(frozen=True)
class Location:
    poc: int | None = None
    representation: str | None = None
    segment: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {'poc': self.poc, 'representation': self.representation, 'segment': self.segment}


@dataclass(frozen=True)
class Violation:
    rule_id: str
    location: Location
    message: str
    severity: str

    @property
    def regla(self) -> Regla:
        return REGLAS[self.rule_id]

    def to_dict(self) -> dict[str, Any]:
        return {
            'rule_id': self.rule_id,
            'location': self.location.to_dict(),
            'message': self.message,
            'severity': self.severity,
        }

    def to_text(self) -> str:
        lugar = ' '.join(
            f"{clave}={valor}" for clave, valor in self.location.to_dict().items() if valor is not None
        )
        return f"[{self.rule_id}] {lugar}: {self.message} ({self.severity})"


@dataclass(frozen=True)
class ConformanceReport:
    violations: tuple[Violation, ...] = ()
    warnings: tuple[str, ...] = ()

    @property
    def is_switchable(self) -> bool:
        return not self.violations

    def rule_ids(self) -> list[str]:
        return [v.rule_id for v in self.violations]

    def to_dict(self) -> dict[str, Any]:
        return {
            'is_switchable': self.is_switchable,
            'violations': [v.to_dict() for v in self.violations],
            'warnings': list(self.warnings),
        }

    def to_text(self) -> str:
        lineas = [f"switchable: {'yes' if self.is_switchable else 'no'}"]
        lineas += [v.to_text() for v in self.violations]
        lineas += [f"warning: {w}" for w in self.warnings]
        return '\n'.join(lineas)


def _violacion(rule_id: str, mensaje: str, poc: int | None = None,
               representacion: str | None = None, segmento: int | None = None,
               severidad: str | None = None) -> Violation:
    return Violation(
        rule_id=rule_id,
        location=Location(poc=poc, representation=representacion, segment=segmento),
        message=mensaje,
        severity=severidad or REGLAS[rule_id].severity,
    )


# =============================================================================
# PILAR 1: HERRAMIENTAS DE LAS IMÁGENES RASL
# =============================================================================

def _rasl_por_cra(seq: CodedSequence) -> list[tuple[Picture, list[Picture]]]:
    grupos = []
    for poc in seq.irap_pocs():
        cra = seq.picture(poc)
        if cra.kind != PictureKind.CRA:
            continue
        rasl = [p for p in leading_pictures(seq, poc) if p.kind == PictureKind.RASL]
        if rasl:
            grupos.append((cra, sorted(rasl, key=lambda p: p.decode_idx)))
    return grupos


def apply_rasl_constraints(seq: CodedSequence, mode: RaslMode | str) -> CodedSequence:
    """
    Restringe las imágenes RASL de cada CRA para que la conmutación sea conforme.

    La primera RASL en orden de decodificación usa el CRA como imagen colocada;
    el resto nunca usa como colocada una imagen anterior al CRA. DMVR, CCLM y
    wraparound quedan deshabilitados; en modo full_rpr también BDOF y PROF.
    Las imágenes que no son RASL no se tocan. Operación idempotente.
    """
    modo = RaslMode(mode)
    if seq.config.irap_mode == IrapMode.CLOSED_GOP:
        raise ArgumentoInvalidoError("Una secuencia closed GOP no tiene imágenes RASL que restringir")

    grupos = _rasl_por_cra(seq)
    if not grupos:
        return seq

    cambios: dict[int, Picture] = {}
    for cra, rasl in grupos:
        for indice, pic in enumerate(rasl):
            colocada = pic.collocated_ref
            if indice == 0:
                colocada = cra.poc
            elif colocada is not None and seq.picture(colocada).decode_idx < cra.decode_idx:
                # Se pasa a la otra referencia diádica (posterior al CRA)
                candidatas = [r for r in pic.refs if seq.picture(r).decode_idx >= cra.decode_idx]
                colocada = (
                    min(candidatas, key=lambda r: (seq.picture(r).tid, r)) if candidatas else cra.poc
                )

            herramientas = replace(pic.tools, dmvr=False, cclm=False, mc_wraparound=False)
            if modo == RaslMode.FULL_RPR:
                herramientas = replace(herramientas, bdof=False, prof=False)
            cambios[pic.poc] = replace(pic, collocated_ref=colocada, tools=herramientas)

    restringida = seq.con_pictures(cambios)
    logger.debug(f"Restricciones RASL aplicadas ({modo}): {len(cambios)} imágenes en {len(grupos)} CRAs")
    return replace(
        restringida,
        config=replace(seq.config, irap_mode=IrapMode.CONSTRAINED_OPEN_GOP),
        constraint_mode=modo,
    )


def check_rasl_tools(seq: CodedSequence, representation_id: str | None = None,
                     exempt_optical_flow: bool = False) -> list[Violation]:
    """Violaciones del pilar 1: una por (imagen, regla)."""
    violaciones: list[Violation] = []
    for cra, rasl in _rasl_por_cra(seq):
        for indice, pic in enumerate(rasl):
            herramientas = pic.tools
            activas = [
                ('rasl-dmvr', herramientas.dmvr),
                ('rasl-bdof', herramientas.bdof and not exempt_optical_flow),
                ('rasl-prof', herramientas.prof and not exempt_optical_flow),
                ('rasl-cclm', herramientas.cclm),
                ('rasl-wraparound', herramientas.mc_wraparound),
            ]
            for rule_id, activa in activas:
                if activa:
                    violaciones.append(_violacion(
                        rule_id, f"RASL POC {pic.poc} del CRA {cra.poc}: {REGLAS[rule_id].descripcion}",
                        poc=pic.poc, representacion=representation_id, segmento=pic.segment_index,
                    ))

            colocada = pic.collocated_ref
            previa = colocada is not None and seq.picture(colocada).decode_idx < cra.decode_idx
            primera_mal = indice == 0 and colocada != cra.poc
            if previa or primera_mal:
                violaciones.append(_violacion(
                    'rasl-collocated',
                    f"RASL POC {pic.poc} usa POC {colocada} como colocada (CRA {cra.poc})",
                    poc=pic.poc, representacion=representation_id, segmento=pic.segment_index,
                ))
    return violaciones


# =============================================================================
# PILAR 2: APS AUTOCONTENIDOS
# =============================================================================

def plan_aps(seq: CodedSequence, strategy: ApsStrategy | str) -> tuple[CodedSequence, list[ApsEvent]]:
    """
    Asigna APS a la secuencia.

    reset_at_irap: cada IRAP emite ALF, LMCS y scaling list de nuevo.
    carry_over: solo el IDR inicial los emite y el resto los reutiliza.
    """
    estrategia = ApsStrategy(strategy)
    ids = tuple(sorted(APS_IDS_POR_TIPO.values()))

    if estrategia == ApsStrategy.RESET_AT_IRAP:
        portadoras = [p for p in seq.decode_order() if p.es_irap]
    else:
        portadoras = [seq.picture(0)]

    eventos = [
        ApsEvent(aps_id=aps_id, carried_in_poc=pic.poc, segment_index=pic.segment_index, kind=kind)
        for pic in portadoras
        for kind, aps_id in APS_IDS_POR_TIPO.items()
    ]
    con_aps = seq.con_pictures({p.poc: replace(p, aps_refs=ids) for p in seq.pictures})
    return con_aps, eventos


def check_aps_self_containment(seq: CodedSequence, aps_events: Iterable[ApsEvent],
                               aps_uses: dict[int, tuple[int, ...]] | None = None,
                               representation_id: str | None = None) -> list[Violation]:
    """
    Violaciones del pilar 2.

    Una imagen en posición de decodificación igual o posterior al IRAP de su
    segmento no puede leer un APS cuya última emisión está en un segmento
    anterior. Las imágenes previas al IRAP del segmento quedan exentas.
    """
    usos = aps_uses if aps_uses is not None else {p.poc: p.aps_refs for p in seq.pictures}

    # Emisiones por id en orden de decodificación de la imagen portadora
    emisiones: dict[int, list[tuple[int, ApsEvent]]] = {}
    for evento in aps_events:
        decode_idx = seq.picture(evento.carried_in_poc).decode_idx
        emisiones.setdefault(evento.aps_id, []).append((decode_idx, evento))
    for lista in emisiones.values():
        lista.sort(key=lambda par: par[0])

    irap_de_segmento: dict[int, int] = {}
    for segmento in seq.segments:
        for poc in segmento.picture_pocs:
            if seq.picture(poc).es_irap:
                irap_de_segmento[segmento.index] = seq.picture(poc).decode_idx
                break

    violaciones: list[Violation] = []
    for pic in seq.decode_order():
        inicio = irap_de_segmento.get(pic.segment_index)
        if inicio is None or pic.decode_idx < inicio:
            continue
        for aps_id in usos.get(pic.poc, ()):
            previas = [e for d, e in emisiones.get(aps_id, []) if d <= pic.decode_idx]
            if not previas:
                violaciones.append(_violacion(
                    'aps-missing', f"POC {pic.poc} lee APS {aps_id}, nunca emitido antes",
                    poc=pic.poc, representacion=representation_id, segmento=pic.segment_index,
                ))
                continue
            ultima = previas[-1]
            if ultima.segment_index < pic.segment_index:
                severidad = SEVERIDAD_APS_RASL if pic.kind == PictureKind.RASL else SEVERIDAD_APS_OTRAS
                violaciones.append(_violacion(
                    'aps-cross-segment',
                    f"POC {pic.poc} lee APS {aps_id} ({ultima.kind}) emitido en POC "
                    f"{ultima.carried_in_poc} del segmento {ultima.segment_index}",
                    poc=pic.poc, representacion=representation_id, segmento=pic.segment_index,
                    severidad=severidad,
                ))
    return violaciones


# =============================================================================
# PILAR 3: SPS ALINEADOS
# =============================================================================

def nivel_minimo(ancho: int, alto: int, level_table: list[list[int]] | None = None) -> int | None:
    """level_idc mínimo para un tamaño de imagen; None si excede la tabla."""
    tabla = level_table if level_table is not None else settings.OGOP_SIM['LEVEL_TABLE']
    muestras = ancho * alto
    for max_muestras, level_idc in sorted(tabla):
        if muestras <= max_muestras:
            return int(level_idc)
    return None


def _sps_efectivos(ladder: Ladder) -> list[tuple[str, SpsModel]]:
    # Un SPS distinto se reporta una sola vez, en la primera representación que lo usa
    vistos: list[tuple[str, SpsModel]] = []
    for rep in sorted(ladder.todas(), key=lambda r: r.id):
        sps = rep.sps or ladder.sps
        if all(sps != otro for _, otro in vistos):
            vistos.append((rep.id, sps))
    return vistos


def check_sps_alignment(ladder: Ladder, level_table: list[list[int]] | None = None) -> list[Violation]:
    """Violaciones del pilar 3, evaluadas una vez por SPS efectivo distinto."""
    representaciones = ladder.todas()
    if not representaciones:
        raise ArgumentoInvalidoError("La escalera no tiene representaciones")

    ancho_max = max(r.width for r in representaciones)
    alto_max = max(r.height for r in representaciones)
    requerido = nivel_minimo(ancho_max, alto_max, level_table)

    efectivos = _sps_efectivos(ladder)
    referencia = ladder.sps
    violaciones: list[Violation] = []

    for rep_id, sps in efectivos:
        def agregar(rule_id: str, mensaje: str) -> None:
            violaciones.append(_violacion(rule_id, mensaje, representacion=rep_id))

        if sps.chroma_format != referencia.chroma_format:
            agregar('sps-chroma-format', f"chroma_format {sps.chroma_format} != {referencia.chroma_format}")
        if sps.bit_depth != referencia.bit_depth:
            agregar('sps-bit-depth', f"bit_depth {sps.bit_depth} != {referencia.bit_depth}")
        if sps.ctu_size != referencia.ctu_size:
            agregar('sps-ctu-size', f"ctu_size {sps.ctu_size} != {referencia.ctu_size}")
        if sps.max_width < ancho_max or sps.max_height < alto_max:
            agregar('sps-max-resolution',
                    f"SPS indica {sps.max_width}x{sps.max_height}, la escalera llega a {ancho_max}x{alto_max}")
        if not sps.rpr_enabled:
            agregar('sps-rpr-disabled', "sps_ref_pic_resampling_enabled_flag = 0")
        if not sps.res_change_allowed:
            agregar('sps-res-change-disallowed', "sps_res_change_in_clvs_allowed_flag = 0")
        if sps.gci_no_res_change:
            agregar('sps-gci-no-res-change', "gci_no_res_change_in_clvs_constraint_flag = 1")
        if sps.subpictures_enabled:
            agregar('sps-subpictures', "Subpictures independientes habilitadas con RPR")
        if requerido is None or sps.level_idc < requerido:
            agregar('sps-level', f"level_idc {sps.level_idc} no cubre {ancho_max}x{alto_max} (mínimo {requerido})")

    return violaciones


# =============================================================================
# VALIDACIÓN DE LA ESCALERA
# =============================================================================

def _exencion_optical_flow(ladder: Ladder) -> bool:
    # BDOF/PROF solo quedan exentos si no hay cambio de escala posible
    representaciones = ladder.todas()
    solo_qp = all(
        r.sequence.constraint_mode == RaslMode.QP_SWITCHING_ONLY
        for r in representaciones if r.sequence.config.es_open
    )
    ventanas = {r.scaling_window for r in representaciones}
    return solo_qp and len(ventanas) == 1


def _validar_representacion(rep: Representation, exento: bool) -> list[Violation]:
    violaciones = check_rasl_tools(rep.sequence, rep.id, exempt_optical_flow=exento)
    violaciones += check_aps_self_containment(rep.sequence, rep.aps_events, representation_id=rep.id)
    return sorted(
        violaciones,
        key=lambda v: (v.location.poc if v.location.poc is not None else -1, v.rule_id),
    )


def _advertencias(ladder: Ladder) -> list[str]:
    from core.dominio.switch_sim import rpr_legal, rpr_scaling_factors

    advertencias = []
    con_fallback = ladder.fallback is not None and ladder.fallback_enabled
    for origen in ladder.representations:
        for destino in ladder.representations:
            if origen.id == destino.id:
                continue
            if not rpr_legal(*rpr_scaling_factors(origen, destino)) and not con_fallback:
                advertencias.append(
                    f"Conmutación directa {origen.id} -> {destino.id} con factor RPR ilegal y sin fallback declarado"
                )
    return advertencias


def _armar_reporte(ladder: Ladder, por_representacion: dict[str, list[Violation]],
                   level_table: list[list[int]] | None) -> ConformanceReport:
    violaciones: list[Violation] = []
    for rep_id in sorted(por_representacion):
        violaciones += por_representacion[rep_id]
    violaciones += check_sps_alignment(ladder, level_table)
    reporte = ConformanceReport(violations=tuple(violaciones), warnings=tuple(_advertencias(ladder)))
    logger.info(
        f"Escalera validada: {len(reporte.violations)} violaciones, "
        f"{len(reporte.warnings)} advertencias, conmutable={reporte.is_switchable}"
    )
    return reporte


def validate_ladder(ladder: Ladder, level_table: list[list[int]] | None = None) -> ConformanceReport:
    """Une los tres pilares. Las violaciones se ordenan por representación y al final las de SPS."""
    exento = _exencion_optical_flow(ladder)
    por_representacion = {rep.id: _validar_representacion(rep, exento) for rep in ladder.todas()}
    return _armar_reporte(ladder, por_representacion, level_table)


async def validar_escalera_async(ladder: Ladder, level_table: list[list[int]] | None = None,
                                 max_workers: int | None = None) -> ConformanceReport:
    """
    Igual que validate_ladder pero validando cada representación en paralelo.

    La concurrencia se limita con OGOP_SIM_THREADS; el resultado no depende
    del orden en que terminan las tareas.
    """
    exento = _exencion_optical_flow(ladder)
    semaforo = asyncio.Semaphore(max_workers or settings.OGOP_SIM_THREADS)

    async def validar(rep: Representation) -> tuple[str, list[Violation]]:
        async with semaforo:
            violaciones = await sync_to_async(_validar_representacion, thread_sensitive=False)(rep, exento)
            return rep.id, violaciones

    resultados = await asyncio.gather(*(validar(rep) for rep in ladder.todas()))
    return _armar_reporte(ladder, dict(resultados), level_table)
