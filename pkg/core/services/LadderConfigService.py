"""
Servicio de ingesta de archivos de entrada.

Lee el JSON de configuración de escalera (validado con jsonschema), las
curvas RD, las trazas de ancho de banda y los schedules en CSV, y arma los
objetos de dominio listos para simular.
"""
from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import jsonschema
import pandas as pd

from core.dominio.constraint_engine import (
    ApsStrategy,
    RaslMode,
    SpsModel,
    ToolFlags,
    apply_rasl_constraints,
    plan_aps,
)
from core.dominio.gop_model import CodedSequence, GopConfig, IrapMode, build_sequence
from core.dominio.quality_metrics import RdCurve, RdPoint, TransitionParams
from core.dominio.switch_sim import AbrConfig, BandwidthTrace, Ladder, Representation
from core.excepciones import ArgumentoInvalidoError, EntradaInvalidaError

logger = logging.getLogger(__name__)

ESQUEMAS_DIR = Path(__file__).resolve().parent.parent / 'esquemas'

COLUMNAS_RD = ['rate_kbps', 'psnr_y', 'psnr_u', 'psnr_v']
COLUMNAS_TRAZA = ['time_s', 'kbps']
COLUMNAS_SCHEDULE = ['segment', 'rep_id']


def cargar_esquema(nombre: str) -> dict[str, Any]:
    with open(ESQUEMAS_DIR / f"{nombre}.schema.json", encoding='utf-8') as archivo:
        return json.load(archivo)


def validar_documento(documento: Any, nombre_esquema: str) -> None:
    """Valida un documento JSON contra un esquema de core/esquemas."""
    try:
        jsonschema.validate(documento, cargar_esquema(nombre_esquema))
    except jsonschema.ValidationError as e:
        ruta = '/'.join(str(p) for p in e.absolute_path) or '(raíz)'
        raise EntradaInvalidaError(f"{nombre_esquema}: {ruta}: {e.message}") from e


def digest_archivo(ruta: str | Path) -> str:
    return hashlib.sha256(Path(ruta).read_bytes()).hexdigest()


@dataclass(frozen=True)
class LadderFile:
    """Escalera cargada junto con los parámetros que el archivo sobreescribe."""

    ladder: Ladder
    abr: AbrConfig
    transition: TransitionParams
    path: Path
    digests: dict[str, str] = field(default_factory=dict)


class LadderConfigService:
    """Lee archivos de entrada y construye el dominio."""

    def _leer_csv(self, ruta: str | Path, columnas: list[str]) -> pd.DataFrame:
        ruta = Path(ruta)
        if not ruta.is_file():
            raise EntradaInvalidaError(f"No existe el archivo: {ruta}")
        try:
            df = pd.read_csv(ruta)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as e:
            raise EntradaInvalidaError(f"CSV ilegible {ruta}: {e}") from e

        df.columns = [str(c).strip() for c in df.columns]
        faltantes = [c for c in columnas if c not in df.columns]
        if faltantes:
            raise EntradaInvalidaError(f"{ruta.name}: faltan columnas {faltantes}")
        return df[columnas]

    def leer_curva_rd(self, ruta: str | Path) -> RdCurve:
        df = self._leer_csv(ruta, COLUMNAS_RD)
        try:
            puntos = tuple(
                RdPoint(float(fila.rate_kbps), float(fila.psnr_y), float(fila.psnr_u), float(fila.psnr_v))
                for fila in df.itertuples(index=False)
            )
            return RdCurve(puntos)
        except (ValueError, TypeError) as e:
            raise EntradaInvalidaError(f"{Path(ruta).name}: {e}") from e

    def leer_traza(self, ruta: str | Path) -> BandwidthTrace:
        df = self._leer_csv(ruta, COLUMNAS_TRAZA)
        try:
            return BandwidthTrace(
                times_s=tuple(df['time_s'].astype(float)),
                kbps=tuple(df['kbps'].astype(float)),
            )
        except (ValueError, TypeError) as e:
            raise EntradaInvalidaError(f"{Path(ruta).name}: {e}") from e

    def leer_schedule(self, ruta: str | Path) -> list[str]:
        df = self._leer_csv(ruta, COLUMNAS_SCHEDULE).sort_values('segment')
        segmentos = df['segment'].tolist()
        if segmentos != list(range(len(segmentos))):
            raise EntradaInvalidaError(f"{Path(ruta).name}: los segmentos deben ser 0..n-1 sin huecos")
        return [str(rep_id) for rep_id in df['rep_id']]

    # ── Escalera ───────────────────────────────────────────────────────

    def cargar_escalera(self, ruta: str | Path) -> LadderFile:
        """
        Carga y arma la escalera.

        Cada representación se construye con build_sequence, se restringe si
        su modo es constrained, recibe su plan de APS y por último los
        overrides por imagen (fallas sembradas en los fixtures).
        """
        ruta = Path(ruta)
        if not ruta.is_file():
            raise EntradaInvalidaError(f"No existe el archivo de escalera: {ruta}")
        try:
            documento = json.loads(ruta.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise EntradaInvalidaError(f"{ruta.name}: JSON inválido: {e}") from e

        validar_documento(documento, 'ladder')
        base = ruta.parent
        digests = {ruta.name: digest_archivo(ruta)}

        length = documento['length']
        duracion = documento['segment_duration_pics']
        sps = SpsModel(**documento.get('sps', {}))

        representaciones = []
        for datos in documento['representations']:
            representaciones.append(self._construir_representacion(datos, base, length, duracion, digests))

        fallback = None
        if 'fallback' in documento:
            fallback = self._construir_representacion(documento['fallback'], base, length, duracion, digests)

        ladder = Ladder(
            representations=tuple(representaciones),
            sps=sps,
            segment_duration_pics=duracion,
            frame_rate=float(documento.get('frame_rate', 64.0)),
            fallback=fallback,
            fallback_enabled=bool(documento.get('fallback_enabled', False)),
        )
        logger.info(
            f"Escalera {ruta.name}: {len(ladder.representations)} representaciones, "
            f"fallback={'sí' if fallback else 'no'} (habilitado={ladder.fallback_enabled})"
        )
        return LadderFile(
            ladder=ladder,
            abr=AbrConfig.desde_settings(documento.get('abr')),
            transition=TransitionParams.desde_settings(documento.get('transition')),
            path=ruta,
            digests=dict(sorted(digests.items())),
        )

    def _construir_representacion(self, datos: dict[str, Any], base: Path, length: int,
                                  duracion: int, digests: dict[str, str]) -> Representation:
        gop = datos['gop']
        config = GopConfig(
            gop_size=gop['gop_size'],
            irap_period=gop['irap_period'],
            irap_mode=gop.get('irap_mode', IrapMode.CONSTRAINED_OPEN_GOP),
            segment_length=duracion,
        )
        herramientas = replace(ToolFlags(), **datos.get('tools', {}))
        secuencia = build_sequence(config, length, herramientas)
        if config.irap_mode == IrapMode.CONSTRAINED_OPEN_GOP:
            secuencia = apply_rasl_constraints(secuencia, gop.get('rasl_mode', RaslMode.FULL_RPR))
        secuencia, eventos = plan_aps(secuencia, datos.get('aps_strategy', ApsStrategy.RESET_AT_IRAP))
        secuencia = self._aplicar_overrides(secuencia, datos.get('overrides', []))

        ruta_rd = base / datos['rd_curve']
        if not ruta_rd.is_file():
            raise EntradaInvalidaError(f"Representación {datos['id']}: no existe la curva RD {ruta_rd}")
        digests[datos['rd_curve']] = digest_archivo(ruta_rd)

        ventana = datos.get('scaling_window')
        return Representation(
            id=datos['id'],
            width=datos['width'],
            height=datos['height'],
            gop_config=secuencia.config,
            sequence=secuencia,
            rd_curve=self.leer_curva_rd(ruta_rd),
            bitrates_kbps=tuple(float(b) for b in datos.get('bitrates_kbps', ())),
            operating_point=datos.get('operating_point', -1),
            scaling_window=(ventana[0], ventana[1]) if ventana else (0, 0),
            sps=SpsModel(**datos['sps']) if 'sps' in datos else None,
            aps_events=tuple(eventos),
            segment_sizes_kbit=tuple(float(s) for s in datos.get('segment_sizes_kbit', ())),
        )

    def _aplicar_overrides(self, secuencia: CodedSequence, overrides: list[dict[str, Any]]) -> CodedSequence:
        cambios = {}
        for override in overrides:
            poc = override['poc']
            if not 0 <= poc < secuencia.length:
                raise ArgumentoInvalidoError(f"Override para POC {poc} fuera de la secuencia")
            pic = cambios.get(poc, secuencia.picture(poc))
            if 'tools' in override:
                pic = replace(pic, tools=replace(pic.tools, **override['tools']))
            if 'collocated_ref' in override:
                pic = replace(pic, collocated_ref=override['collocated_ref'])
            if 'aps_refs' in override:
                pic = replace(pic, aps_refs=tuple(override['aps_refs']))
            cambios[poc] = pic
        return secuencia.con_pictures(cambios) if cambios else secuencia
