"""
Modelo estructural de secuencias codificadas.

Construye y valida GOPs jerárquicos: Temporal Ids, orden de decodificación,
listas de referencias diádicas, tipos de imagen (IDR/CRA/RASL/RADL/TRAIL)
y segmentación en orden de decodificación.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction

from django.db import models
from django.utils.translation import gettext_lazy as _

from core.excepciones import ArgumentoInvalidoError

logger = logging.getLogger(__name__)

GOP_SIZES_VALIDOS = (1, 2, 4, 8, 16, 32)


# =============================================================================
# TIPOS
# =============================================================================

class PictureKind(models.TextChoices):
    IDR = 'IDR', _('IDR')
    CRA = 'CRA', _('CRA')
    RASL = 'RASL', _('RASL')
    RADL = 'RADL', _('RADL')
    TRAIL = 'TRAIL', _('TRAIL')


IRAP_KINDS = frozenset({PictureKind.IDR, PictureKind.CRA})
LEADING_KINDS = frozenset({PictureKind.RASL, PictureKind.RADL})


class IrapMode(models.TextChoices):
    CLOSED_GOP = 'closed', _('Closed GOP (IDR)')
    OPEN_GOP = 'open', _('Open GOP (CRA sin restricciones)')
    CONSTRAINED_OPEN_GOP = 'constrained', _('Open GOP restringido (CRA)')


class RaslMode(models.TextChoices):
    FULL_RPR = 'full_rpr', _('Conmutación con RPR')
    QP_SWITCHING_ONLY = 'qp_switching_only', _('Solo conmutación de QP')


@dataclass(frozen=True)
class ToolFlags:
    """Herramientas de inter-predicción habilitadas en una imagen."""

    tmvp: bool = True
    sbtmvp: bool = True
    dmvr: bool = True
    bdof: bool = True
    prof: bool = True
    cclm: bool = True
    # Herramienta de video 360: deshabilitada salvo pedido explícito
    mc_wraparound: bool = False

    def intra(self) -> ToolFlags:
        """Flags de una imagen IRAP: solo sobrevive la predicción intra (CCLM)."""
        return ToolFlags(
            tmvp=False, sbtmvp=False, dmvr=False, bdof=False, prof=False,
            cclm=self.cclm, mc_wraparound=False,
        )


@dataclass(frozen=True)
class Picture:
    poc: int
    decode_idx: int
    tid: int
    kind: PictureKind
    refs: tuple[int, ...] = ()
    collocated_ref: int | None = None
    tools: ToolFlags = field(default_factory=ToolFlags)
    aps_refs: tuple[int, ...] = ()
    segment_index: int = 0

    @property
    def es_irap(self) -> bool:
        return self.kind in IRAP_KINDS

    @property
    def es_leading(self) -> bool:
        return self.kind in LEADING_KINDS


@dataclass(frozen=True)
class GopConfig:
    """
    Configuración de GOP de una representación.

    segment_length = 0 significa "un segmento por período IRAP".
    """

    gop_size: int
    irap_period: int
    irap_mode: IrapMode = IrapMode.CONSTRAINED_OPEN_GOP
    segment_length: int = 0

    def __post_init__(self) -> None:
        try:
            object.__setattr__(self, 'irap_mode', IrapMode(self.irap_mode))
        except ValueError as e:
            raise ArgumentoInvalidoError(f"irap_mode desconocido: {self.irap_mode!r}") from e

        if self.gop_size not in GOP_SIZES_VALIDOS:
            raise ArgumentoInvalidoError(
                f"gop_size={self.gop_size} inválido: debe ser potencia de dos "
                f"entre 1 y 32 (límite del DPB)"
            )
        if self.irap_period <= 0 or self.irap_period % self.gop_size != 0:
            raise ArgumentoInvalidoError(
                f"irap_period={self.irap_period} debe ser múltiplo positivo de gop_size={self.gop_size}"
            )
        if self.segment_length == 0:
            object.__setattr__(self, 'segment_length', self.irap_period)
        if self.segment_length <= 0 or self.irap_period % self.segment_length != 0:
            raise ArgumentoInvalidoError(
                f"segment_length={self.segment_length} debe dividir a irap_period={self.irap_period}"
            )
        if self.segment_length % self.gop_size != 0:
            raise ArgumentoInvalidoError(
                f"segment_length={self.segment_length} debe ser múltiplo de gop_size={self.gop_size}"
            )

    @property
    def es_open(self) -> bool:
        return self.irap_mode != IrapMode.CLOSED_GOP


@dataclass(frozen=True)
class Segment:
    index: int
    picture_pocs: tuple[int, ...]  # en orden de decodificación
    starts_with_irap: bool

    @property
    def duration_pics(self) -> int:
        return len(self.picture_pocs)


@dataclass(frozen=True)
class CodedSequence:
    """Secuencia codificada. pictures[poc].poc == poc."""

    config: GopConfig
    length: int
    pictures: tuple[Picture, ...]
    segments: tuple[Segment, ...]
    constraint_mode: RaslMode | None = None

    def picture(self, poc: int) -> Picture:
        if not 0 <= poc < len(self.pictures):
            raise ArgumentoInvalidoError(f"POC {poc} fuera de la secuencia (length={self.length})")
        return self.pictures[poc]

    def decode_order(self) -> list[Picture]:
        return sorted(self.pictures, key=lambda p: p.decode_idx)

    def irap_pocs(self) -> list[int]:
        return [p.poc for p in self.pictures if p.es_irap]

    def segment_of(self, poc: int) -> Segment:
        return self.segments[self.picture(poc).segment_index]

    def con_pictures(self, pictures: dict[int, Picture]) -> CodedSequence:
        """Copia de la secuencia reemplazando las imágenes indicadas por POC."""
        nuevas = tuple(pictures.get(p.poc, p) for p in self.pictures)
        return replace(self, pictures=nuevas)


@dataclass(frozen=True)
class StructureViolation:
    poc: int | None
    rule: str
    message: str


# =============================================================================
# OPERACIONES
# =============================================================================

def _es_potencia_de_dos(n: int) -> bool:
    return n > 0 and n & (n - 1) == 0


def tid_of(offset_in_gop: int, gop_size: int) -> int:
    """Temporal Id de un offset dentro del GOP (el ancla, offset == gop_size, es Tid 0)."""
    if not _es_potencia_de_dos(gop_size):
        raise ArgumentoInvalidoError(f"gop_size={gop_size} no es potencia de dos")
    if not 1 <= offset_in_gop <= gop_size:
        raise ArgumentoInvalidoError(f"offset {offset_in_gop} fuera de 1..{gop_size}")
    ceros_finales = (offset_in_gop & -offset_in_gop).bit_length() - 1
    return gop_size.bit_length() - 1 - ceros_finales


def build_decode_order(gop_size: int) -> list[int]:
    """
    Orden de decodificación de los offsets de un GOP.

    El ancla primero, luego la expansión recursiva por puntos medios de cada
    intervalo, primero la mitad inferior. Cada imagen queda detrás de sus dos
    referencias diádicas.

    Ejemplo:
        build_decode_order(8) -> [8, 4, 2, 1, 3, 6, 5, 7]
    """
    if not _es_potencia_de_dos(gop_size):
        raise ArgumentoInvalidoError(f"gop_size={gop_size} no es potencia de dos")

    orden = [gop_size]
    pendientes = [(0, gop_size)]
    while pendientes:
        bajo, alto = pendientes.pop()
        if alto - bajo < 2:
            continue
        medio = (bajo + alto) // 2
        orden.append(medio)
        # La pila invierte: se apila primero la mitad superior
        pendientes.append((medio, alto))
        pendientes.append((bajo, medio))
    return orden


def dyadic_brackets(offset_in_gop: int, gop_size: int) -> tuple[int, int] | None:
    """Offsets de las dos referencias diádicas (inferior, superior); None para el ancla."""
    if offset_in_gop == gop_size:
        return None
    paso = offset_in_gop & -offset_in_gop
    return offset_in_gop - paso, offset_in_gop + paso


def _collocated_por_defecto(refs: tuple[int, ...], tids: dict[int, int]) -> int | None:
    # Menor Tid; empate -> menor POC
    if not refs:
        return None
    return min(refs, key=lambda poc: (tids[poc], poc))


def build_sequence(config: GopConfig, length: int, tools: ToolFlags | None = None) -> CodedSequence:
    """
    Construye la secuencia: POC 0 es un IDR aislado, luego GOPs completos.

    Los IRAP en POC k·irap_period son IDR en modo ClosedGop y CRA en los modos
    open. Las leading pictures de un CRA son RASL. Las de un IDR son RADL:
    pierden la referencia diádica inferior cuando es el ancla anterior, así
    nada decodificado después del IDR referencia algo previo a él.
    """
    plantilla = tools or ToolFlags()
    g = config.gop_size
    if length < 1 or (length - 1) % g != 0:
        raise ArgumentoInvalidoError(
            f"length={length} debe ser 1 + múltiplo de gop_size={g} (IDR inicial + GOPs completos)"
        )

    cantidad_gops = (length - 1) // g
    orden_gop = build_decode_order(g)
    cerrado = config.irap_mode == IrapMode.CLOSED_GOP

    tids: dict[int, int] = {0: 0}
    # (poc, tid, kind, refs, tools) en orden de decodificación
    filas: list[tuple[int, int, PictureKind, tuple[int, ...], ToolFlags]] = [
        (0, 0, PictureKind.IDR, (), plantilla.intra())
    ]

    for numero in range(1, cantidad_gops + 1):
        base = (numero - 1) * g
        ancla_es_irap = (numero * g) % config.irap_period == 0
        ancla_idr = ancla_es_irap and cerrado

        for offset in orden_gop:
            poc = base + offset
            tid = tid_of(offset, g)
            tids[poc] = tid
            brackets = dyadic_brackets(offset, g)

            if brackets is None:
                if ancla_es_irap:
                    kind = PictureKind.IDR if cerrado else PictureKind.CRA
                    filas.append((poc, tid, kind, (), plantilla.intra()))
                else:
                    filas.append((poc, tid, PictureKind.TRAIL, (base,), plantilla))
                continue

            inferior, superior = brackets
            refs = [base + superior]
            if not (ancla_idr and inferior == 0):
                refs.insert(0, base + inferior)
            if not ancla_es_irap:
                kind = PictureKind.TRAIL
            else:
                kind = PictureKind.RADL if cerrado else PictureKind.RASL
            filas.append((poc, tid, kind, tuple(refs), plantilla))

    # Segmentación en orden de decodificación: un corte en cada ancla cuyo POC
    # es múltiplo de segment_length
    segmentos: list[list[int]] = [[]]
    for poc, _tid, _kind, _refs, _tools in filas:
        if poc > 0 and poc % g == 0 and poc % config.segment_length == 0:
            segmentos.append([])
        segmentos[-1].append(poc)

    segmento_de = {poc: indice for indice, pocs in enumerate(segmentos) for poc in pocs}
    kinds = {fila[0]: fila[2] for fila in filas}

    por_poc: dict[int, Picture] = {}
    for decode_idx, (poc, tid, kind, refs, flags) in enumerate(filas):
        por_poc[poc] = Picture(
            poc=poc,
            decode_idx=decode_idx,
            tid=tid,
            kind=kind,
            refs=refs,
            collocated_ref=_collocated_por_defecto(refs, tids),
            tools=flags,
            segment_index=segmento_de[poc],
        )

    segments = tuple(
        Segment(
            index=indice,
            picture_pocs=tuple(pocs),
            starts_with_irap=kinds[pocs[0]] in IRAP_KINDS,
        )
        for indice, pocs in enumerate(segmentos)
    )

    secuencia = CodedSequence(
        config=config,
        length=length,
        pictures=tuple(por_poc[poc] for poc in range(length)),
        segments=segments,
    )
    logger.debug(
        f"Secuencia construida: gop={g} irap={config.irap_period} modo={config.irap_mode} "
        f"length={length} segmentos={len(segments)}"
    )
    return secuencia


def leading_pictures(seq: CodedSequence, irap_poc: int) -> list[Picture]:
    """Imágenes que siguen al IRAP en decodificación y lo preceden en presentación."""
    irap = seq.picture(irap_poc)
    if not irap.es_irap:
        raise ArgumentoInvalidoError(f"POC {irap_poc} no es IRAP ({irap.kind})")
    return sorted(
        (p for p in seq.pictures if p.decode_idx > irap.decode_idx and p.poc < irap_poc),
        key=lambda p: p.poc,
    )


def cross_boundary_pictures(seq: CodedSequence, cra_poc: int) -> list[Picture]:
    """RASL del CRA que referencian imágenes anteriores al CRA en decodificación (usan RPR al conmutar)."""
    cra = seq.picture(cra_poc)
    return [
        p for p in leading_pictures(seq, cra_poc)
        if any(seq.picture(ref).decode_idx < cra.decode_idx for ref in p.refs)
    ]


def drift_exposure(config: GopConfig) -> Fraction:
    """Fracción de imágenes por período IRAP expuestas a drift al conmutar."""
    if not config.es_open:
        return Fraction(0)
    return Fraction(config.gop_size - 1, config.irap_period)


def drift_exposure_ratio(config_a: GopConfig, config_b: GopConfig) -> Fraction:
    exposicion_b = drift_exposure(config_b)
    if exposicion_b == 0:
        raise ArgumentoInvalidoError("La configuración de referencia no tiene imágenes RASL")
    return drift_exposure(config_a) / exposicion_b


def validate_structure(seq: CodedSequence) -> list[StructureViolation]:
    """
    Verifica los invariantes de Picture y CodedSequence.

    Devuelve una lista vacía si la secuencia está bien formada; cada violación
    nombra el POC y la regla.
    """
    violaciones: list[StructureViolation] = []
    por_poc = {p.poc: p for p in seq.pictures}

    pocs = sorted(por_poc)
    if pocs != list(range(seq.length)) or len(seq.pictures) != seq.length:
        violaciones.append(StructureViolation(
            None, 'poc-range', f"Los POC no cubren 0..{seq.length - 1} exactamente una vez"
        ))
    if sorted(p.decode_idx for p in seq.pictures) != list(range(len(seq.pictures))):
        violaciones.append(StructureViolation(
            None, 'decode-permutation', "decode_idx no es una permutación de 0..length-1"
        ))

    inicio = por_poc.get(0)
    if inicio is None or inicio.kind != PictureKind.IDR:
        violaciones.append(StructureViolation(0, 'stream-start', "POC 0 debe ser IDR"))

    # Referencias: existencia, orden de decodificación y capas temporales
    for pic in seq.pictures:
        referencias = list(pic.refs)
        if pic.collocated_ref is not None and pic.collocated_ref not in referencias:
            referencias.append(pic.collocated_ref)
        for ref in referencias:
            referida = por_poc.get(ref)
            if referida is None:
                violaciones.append(StructureViolation(
                    pic.poc, 'ref-missing', f"POC {pic.poc} referencia POC {ref} inexistente"
                ))
                continue
            if referida.decode_idx >= pic.decode_idx:
                violaciones.append(StructureViolation(
                    pic.poc, 'ref-decode-order',
                    f"POC {pic.poc} referencia POC {ref}, que no lo precede en orden de decodificación"
                ))
            if referida.tid > pic.tid:
                violaciones.append(StructureViolation(
                    pic.poc, 'tid-layering',
                    f"POC {pic.poc} (Tid {pic.tid}) referencia POC {ref} (Tid {referida.tid})"
                ))
        if pic.kind == PictureKind.IDR and pic.refs:
            violaciones.append(StructureViolation(pic.poc, 'idr-refs', f"IDR {pic.poc} con referencias"))

    decodificadas = sorted(seq.pictures, key=lambda p: p.decode_idx)

    # Un IDR vacía el DPB: nada decodificado después referencia algo anterior
    for idr in (p for p in seq.pictures if p.kind == PictureKind.IDR and p.poc != 0):
        for pic in decodificadas:
            if pic.decode_idx <= idr.decode_idx:
                continue
            cruzadas = [r for r in pic.refs if r in por_poc and por_poc[r].decode_idx < idr.decode_idx]
            if cruzadas:
                violaciones.append(StructureViolation(
                    pic.poc, 'idr-reset', f"POC {pic.poc} referencia {cruzadas} a través del IDR {idr.poc}"
                ))

    # Un IRAP cada irap_period POCs, y solo ahí
    for pic in seq.pictures:
        esperado_irap = pic.poc % seq.config.irap_period == 0
        if pic.es_irap != esperado_irap:
            violaciones.append(StructureViolation(
                pic.poc, 'irap-period',
                f"POC {pic.poc}: IRAP esperado={esperado_irap}, tipo={pic.kind}"
            ))

    # Leading pictures: IRAP asociado = último IRAP anterior en decodificación
    irap_asociado: Picture | None = None
    for pic in decodificadas:
        if pic.es_irap:
            irap_asociado = pic
            continue
        es_leading = irap_asociado is not None and pic.poc < irap_asociado.poc
        if pic.es_leading and not es_leading:
            violaciones.append(StructureViolation(
                pic.poc, 'leading-kind', f"POC {pic.poc} es {pic.kind} pero no es leading picture"
            ))
        if pic.kind == PictureKind.RASL and irap_asociado is not None and irap_asociado.kind != PictureKind.CRA:
            violaciones.append(StructureViolation(
                pic.poc, 'rasl-association', f"RASL {pic.poc} asociada a {irap_asociado.kind} {irap_asociado.poc}"
            ))

    # Segmentos: partición en orden de decodificación
    concatenados = [poc for segmento in seq.segments for poc in segmento.picture_pocs]
    if concatenados != [p.poc for p in decodificadas]:
        violaciones.append(StructureViolation(
            None, 'segment-partition', "Los segmentos no reproducen el orden de decodificación"
        ))
    for segmento in seq.segments:
        if not segmento.picture_pocs:
            violaciones.append(StructureViolation(None, 'segment-partition', f"Segmento {segmento.index} vacío"))
            continue
        primera = por_poc.get(segmento.picture_pocs[0])
        if segmento.starts_with_irap and (primera is None or not primera.es_irap):
            violaciones.append(StructureViolation(
                segmento.picture_pocs[0], 'segment-irap',
                f"Segmento {segmento.index} declara IRAP inicial pero empieza con POC {segmento.picture_pocs[0]}"
            ))

    if violaciones:
        logger.info(f"validate_structure: {len(violaciones)} violaciones")
    return violaciones
