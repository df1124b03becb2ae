"""
Servicio de emisión de reportes.

Arma el RunReport y los CSV para gráficos de una corrida de simulación, con
formato determinista: claves ordenadas, floats a 6 dígitos significativos y
sin marcas de tiempo.
"""
from __future__ import annotations

import json
import logging
import os
from dataclasses import asdict, dataclass
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping

import pandas as pd
from django.conf import settings

from core.dominio.constraint_engine import ConformanceReport, validate_ladder
from core.dominio.gop_model import IrapMode
from core.dominio.quality_metrics import bd_rate_table
from core.dominio.switch_sim import (
    AbrDecision,
    CodecCapabilities,
    DroppedPictures,
    GracefulDrift,
    Ladder,
    SessionReport,
    run_abr,
    simulate_session,
)
from core.excepciones import ArgumentoInvalidoError, EntradaInvalidaError
from core.services.LadderConfigService import LadderConfigService, digest_archivo, validar_documento

logger = logging.getLogger(__name__)

COLUMNAS_BD = ('y', 'u', 'v', 'yuv')


def redondear(valor: Any, digitos: int | None = None) -> Any:
    """Normaliza un documento para JSON: floats a N dígitos significativos, enums a su valor."""
    cifras = digitos or settings.OGOP_SIM['FLOAT_SIGNIFICANT_DIGITS']
    if isinstance(valor, bool) or valor is None:
        return valor
    if isinstance(valor, Enum):
        return valor.value
    if isinstance(valor, (float, Fraction)):
        return float(f"{float(valor):.{cifras}g}")
    if isinstance(valor, Mapping):
        return {str(k): redondear(v, cifras) for k, v in valor.items()}
    if isinstance(valor, (list, tuple)):
        return [redondear(v, cifras) for v in valor]
    return valor


def a_json(documento: Mapping[str, Any]) -> str:
    return json.dumps(redondear(documento), sort_keys=True, indent=2, ensure_ascii=False) + '\n'


def tabla_bd_rate_texto(filas: Mapping[str, Mapping[str, float]]) -> str:
    """Tabla de columnas alineadas: una fila por comparación, columnas Y U V YUV."""
    ancho = max([len('comparison')] + [len(nombre) for nombre in filas])
    lineas = [f"{'comparison':<{ancho}}" + ''.join(f"{c.upper():>10}" for c in COLUMNAS_BD)]
    for nombre, tabla in filas.items():
        lineas.append(f"{nombre:<{ancho}}" + ''.join(f"{tabla[c]:>+9.2f}%" for c in COLUMNAS_BD))
    return '\n'.join(lineas)


class ReporteCorridaService:
    """Escribe run_report.json, timeline.csv y switches.csv en una carpeta."""

    def __init__(self, ruta_carpeta: str | Path | None = None) -> None:
        self.ruta_carpeta = Path(ruta_carpeta) if ruta_carpeta else Path(settings.MEDIA_ROOT) / 'corridas'
        os.makedirs(self.ruta_carpeta, exist_ok=True)

    # ── Documentos ─────────────────────────────────────────────────────

    def tablas_bd_rate(self, ladder: Ladder) -> dict[str, Any]:
        """BD-rate entre representaciones de igual resolución (ej. open GOP restringido vs closed GOP)."""
        tablas: dict[str, Any] = {}
        reps = ladder.todas()
        for primera in reps:
            for segunda in reps:
                if primera.id >= segunda.id or (primera.width, primera.height) != (segunda.width, segunda.height):
                    continue
                # El closed GOP es el anchor cuando hay uno
                anchor, test = primera, segunda
                if segunda.gop_config.irap_mode == IrapMode.CLOSED_GOP:
                    anchor, test = segunda, primera
                clave = f"{test.id} vs {anchor.id}"
                try:
                    tablas[clave] = bd_rate_table(anchor.rd_curve, test.rd_curve)
                except ArgumentoInvalidoError as e:
                    tablas[clave] = {'error': str(e)}
        return tablas

    def armar_run_report(self, ladder: Ladder, sesion: SessionReport, conformidad: ConformanceReport,
                         caps: CodecCapabilities, digests: Mapping[str, str],
                         extra: Mapping[str, Any] | None = None) -> dict[str, Any]:
        documento = {
            'tool_version': settings.OGOP_SIM['VERSION'],
            'inputs': dict(sorted(digests.items())),
            'caps': {'supports_rpr': caps.supports_rpr},
            'conformance': conformidad.to_dict(),
            'switches': [registro.to_dict() for registro in sesion.switches],
            'abr_decisions': [decision.to_dict() for decision in sesion.abr_decisions],
            'effective_schedule': list(sesion.effective_schedule),
            'timeline': [
                {
                    'poc': entrada.poc,
                    'quality_db': entrada.quality_db,
                    'representation': entrada.representation,
                    'status': entrada.status.value,
                }
                for entrada in sesion.timeline
            ],
            'bd_rate_tables': self.tablas_bd_rate(ladder),
            'summary': dict(sesion.summary),
        }
        if extra:
            documento.update(extra)
        documento = redondear(documento)
        validar_documento(documento, 'run_report')
        return documento

    # ── Archivos ───────────────────────────────────────────────────────

    def timeline_df(self, sesion: SessionReport) -> pd.DataFrame:
        return pd.DataFrame(
            [
                {
                    'poc': e.poc,
                    'quality_db': e.quality_db,
                    'representation': e.representation or '',
                    'status': e.status.value,
                }
                for e in sesion.timeline
            ],
            columns=['poc', 'quality_db', 'representation', 'status'],
        )

    def switches_df(self, sesion: SessionReport) -> pd.DataFrame:
        filas = []
        for registro in sesion.switches:
            resultado = registro.outcome
            if isinstance(resultado, GracefulDrift):
                afectadas = len(resultado.affected_pocs)
            elif isinstance(resultado, DroppedPictures):
                afectadas = len(resultado.dropped_pocs)
            else:
                afectadas = 0
            filas.append({
                'segment': registro.event.boundary_segment_index,
                'from_rep': registro.event.from_rep,
                'to_rep': registro.event.to_rep,
                'requested_rep': registro.requested_rep,
                'outcome': resultado.kind.value,
                'affected_pictures': afectadas,
                'rewritten_to_fallback': registro.rewritten_to_fallback,
                'panic': registro.panic,
            })
        return pd.DataFrame(filas, columns=[
            'segment', 'from_rep', 'to_rep', 'requested_rep', 'outcome',
            'affected_pictures', 'rewritten_to_fallback', 'panic',
        ])

    def escribir(self, documento: Mapping[str, Any], sesion: SessionReport,
                 excel: bool = False) -> dict[str, Path]:
        """Escribe los archivos de la corrida y devuelve sus rutas."""
        rutas = {
            'run_report': self.ruta_carpeta / 'run_report.json',
            'timeline': self.ruta_carpeta / 'timeline.csv',
            'switches': self.ruta_carpeta / 'switches.csv',
        }
        rutas['run_report'].write_text(a_json(documento), encoding='utf-8')
        formato = f"%.{settings.OGOP_SIM['FLOAT_SIGNIFICANT_DIGITS']}g"
        self.timeline_df(sesion).to_csv(rutas['timeline'], index=False, float_format=formato)
        self.switches_df(sesion).to_csv(rutas['switches'], index=False)

        if excel:
            rutas['excel'] = self.ruta_carpeta / 'corrida.xlsx'
            self.escribir_excel(rutas['excel'], sesion)

        logger.info(f"Reporte de corrida escrito en {self.ruta_carpeta}")
        return rutas

    def escribir_excel(self, ruta: Path, sesion: SessionReport) -> Path:
        with pd.ExcelWriter(ruta, engine='openpyxl') as writer:
            self.switches_df(sesion).to_excel(writer, sheet_name='Conmutaciones', index=False)
            self.timeline_df(sesion).to_excel(writer, sheet_name='Timeline', index=False)
        return ruta

    # ── Corrida completa ───────────────────────────────────────────────

    def ejecutar(self, ruta_escalera: str | Path, ruta_traza: str | Path | None = None,
                 ruta_schedule: str | Path | None = None, supports_rpr: bool = True,
                 seed: int | None = None, jitter: float = 0.0, excel: bool = False) -> ResultadoCorrida:
        """
        Corre `sim run`: carga, valida, simula y escribe los archivos.

        Con traza el schedule sale del ABR; con schedule se usa tal cual.
        Exactamente uno de los dos debe estar presente.
        """
        if (ruta_traza is None) == (ruta_schedule is None):
            raise EntradaInvalidaError("Indicar exactamente uno de: traza o schedule")

        cargador = LadderConfigService()
        archivo = cargador.cargar_escalera(ruta_escalera)
        ladder = archivo.ladder
        digests = dict(archivo.digests)
        caps = CodecCapabilities(supports_rpr=supports_rpr)
        conformidad = validate_ladder(ladder)

        decisiones: list[AbrDecision] = []
        if ruta_traza is not None:
            traza = cargador.leer_traza(ruta_traza)
            digests[Path(ruta_traza).name] = digest_archivo(ruta_traza)
            if jitter > 0:
                if seed is None:
                    raise EntradaInvalidaError("El jitter necesita una semilla explícita")
                traza = traza.con_jitter(seed, jitter)
            decisiones = run_abr(ladder, traza, archivo.abr)
            schedule = [d.representation_id for d in decisiones]
        else:
            assert ruta_schedule is not None
            schedule = cargador.leer_schedule(ruta_schedule)
            digests[Path(ruta_schedule).name] = digest_archivo(ruta_schedule)
            if len(schedule) != ladder.segment_count:
                raise EntradaInvalidaError(
                    f"El schedule tiene {len(schedule)} segmentos y la escalera {ladder.segment_count}"
                )

        sesion = simulate_session(
            ladder, schedule, caps, abr_decisions=decisiones,
            params=archivo.transition, conformance=conformidad,
        )
        parametros = {
            'parameters': {
                'seed': seed,
                'jitter': jitter,
                'abr': asdict(archivo.abr),
                'transition': asdict(archivo.transition),
            },
        }
        documento = self.armar_run_report(ladder, sesion, conformidad, caps, digests, parametros)
        rutas = self.escribir(documento, sesion, excel=excel)
        return ResultadoCorrida(
            documento=documento,
            sesion=sesion,
            conformidad=conformidad,
            rutas=rutas,
            digest_escalera=archivo.digests[archivo.path.name],
        )


@dataclass(frozen=True)
class ResultadoCorrida:
    documento: dict[str, Any]
    sesion: SessionReport
    conformidad: ConformanceReport
    rutas: dict[str, Path]
    digest_escalera: str


def filas_bd_rate(tablas: Mapping[str, Mapping[str, Any]]) -> dict[str, Mapping[str, float]]:
    """Descarta las comparaciones sin solapamiento para la tabla de texto."""
    return {nombre: tabla for nombre, tabla in tablas.items() if 'error' not in tabla}


def resumen_texto(documento: Mapping[str, Any], conformidad: ConformanceReport) -> str:
    resumen = documento['summary']
    lineas = [conformidad.to_text(), '']
    for registro in documento['switches']:
        lineas.append(
            f"segment {registro['segment']}: {registro['from_rep']} -> {registro['to_rep']} "
            f"=> {registro['outcome']['kind']}"
            + (' (fallback)' if registro['rewritten_to_fallback'] else '')
            + (' (panic)' if registro['panic'] else '')
        )
    lineas += [
        '',
        f"mean quality: {resumen['mean_quality_db']} dB",
        f"dropped pictures: {resumen['dropped_pictures']}",
        f"stall total: {resumen['stall_total_s']} s",
        f"panic down-switches: {resumen['panic_down_switches']}",
    ]
    tablas = filas_bd_rate(documento.get('bd_rate_tables', {}))
    if tablas:
        lineas += ['', tabla_bd_rate_texto(tablas)]
    return '\n'.join(lineas)
