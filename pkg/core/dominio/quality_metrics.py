"""
Métricas de calidad y rate-distortion.

YUV-PSNR ponderado 6/1/1, BD-rate con interpolación PCHIP de log10(rate)
en función de la calidad, y el modelo de transición de calidad de las
imágenes RASL después de una conmutación.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, fields
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _
from scipy.integrate import trapezoid
from scipy.interpolate import PchipInterpolator

from core.excepciones import ArgumentoInvalidoError, SinSolapamientoError

logger = logging.getLogger(__name__)

MIN_PUNTOS_RD = 4


class Metric(models.TextChoices):
    Y = 'y', _('PSNR Y')
    U = 'u', _('PSNR U')
    V = 'v', _('PSNR V')
    YUV = 'yuv', _('YUV-PSNR 6/1/1')


class Direction(models.TextChoices):
    UP = 'Up', _('Subida de calidad')
    DOWN = 'Down', _('Bajada de calidad')


def yuv_psnr(psnr_y: float, psnr_u: float, psnr_v: float) -> float:
    """PSNR ponderado (6·Y + U + V) / 8."""
    return (6 * psnr_y + psnr_u + psnr_v) / 8


@dataclass(frozen=True)
class RdPoint:
    rate_kbps: float
    psnr_y: float
    psnr_u: float
    psnr_v: float

    def __post_init__(self) -> None:
        if not self.rate_kbps > 0:
            raise ArgumentoInvalidoError(f"rate_kbps debe ser positivo: {self.rate_kbps}")
        if not np.all(np.isfinite([self.psnr_y, self.psnr_u, self.psnr_v])):
            raise ArgumentoInvalidoError("PSNR no finito en punto RD")

    @property
    def psnr_yuv(self) -> float:
        return yuv_psnr(self.psnr_y, self.psnr_u, self.psnr_v)

    def quality(self, metric: Metric | str = Metric.YUV) -> float:
        metrica = Metric(metric)
        if metrica == Metric.YUV:
            return self.psnr_yuv
        return float(getattr(self, f"psnr_{metrica.value}"))


@dataclass(frozen=True)
class RdCurve:
    points: tuple[RdPoint, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, 'points', tuple(self.points))
        if len(self.points) < MIN_PUNTOS_RD:
            raise ArgumentoInvalidoError(
                f"Una curva RD necesita al menos {MIN_PUNTOS_RD} puntos, tiene {len(self.points)}"
            )
        if np.any(np.diff(self.rates) <= 0):
            raise ArgumentoInvalidoError("Las tasas de la curva RD deben ser estrictamente crecientes")
        if np.any(np.diff(self.quality(Metric.YUV)) < 0):
            raise ArgumentoInvalidoError("La calidad ponderada de la curva RD decrece con la tasa")

    @property
    def rates(self) -> np.ndarray:
        return np.array([p.rate_kbps for p in self.points], dtype=float)

    def quality(self, metric: Metric | str = Metric.YUV) -> np.ndarray:
        return np.array([p.quality(metric) for p in self.points], dtype=float)

    def scaled(self, factor: float) -> RdCurve:
        """Misma curva con todas las tasas multiplicadas por factor."""
        return RdCurve(tuple(
            RdPoint(p.rate_kbps * factor, p.psnr_y, p.psnr_u, p.psnr_v) for p in self.points
        ))


# =============================================================================
# BD-RATE
# =============================================================================

@dataclass(frozen=True)
class _Interpolantes:
    anchor: PchipInterpolator
    test: PchipInterpolator
    bajo: float
    alto: float


def _interpolantes(anchor: RdCurve, test: RdCurve, metric: Metric | str) -> _Interpolantes:
    curvas = []
    for nombre, curva in (('anchor', anchor), ('test', test)):
        calidad = curva.quality(metric)
        if np.any(np.diff(calidad) <= 0):
            raise ArgumentoInvalidoError(
                f"Curva {nombre}: la calidad ({Metric(metric).label}) no es estrictamente creciente"
            )
        curvas.append((calidad, np.log10(curva.rates)))

    (qa, la), (qt, lt) = curvas
    bajo = max(qa.min(), qt.min())
    alto = min(qa.max(), qt.max())
    if alto <= bajo:
        raise SinSolapamientoError(
            f"Sin solapamiento de calidad: anchor [{qa.min():.4f}, {qa.max():.4f}] "
            f"vs test [{qt.min():.4f}, {qt.max():.4f}]"
        )
    return _Interpolantes(PchipInterpolator(qa, la), PchipInterpolator(qt, lt), float(bajo), float(alto))


def _a_porcentaje(diferencia_media_log: float) -> float:
    return 100.0 * (10.0 ** diferencia_media_log - 1.0)


def bd_rate(anchor: RdCurve, test: RdCurve, metric: Metric | str = Metric.YUV) -> float:
    """
    BD-rate de test contra anchor en porcentaje (negativo = test ahorra tasa).

    Integral exacta de los interpolantes PCHIP sobre la intersección de los
    rangos de calidad.
    """
    interp = _interpolantes(anchor, test, metric)
    ancho = interp.alto - interp.bajo
    diferencia = (
        interp.test.integrate(interp.bajo, interp.alto) - interp.anchor.integrate(interp.bajo, interp.alto)
    ) / ancho
    return _a_porcentaje(float(diferencia))


def bd_rate_oracle(anchor: RdCurve, test: RdCurve, metric: Metric | str = Metric.YUV,
                   samples: int = 10001) -> float:
    """Mismo BD-rate por integración trapezoidal densa de los mismos interpolantes."""
    if samples < 2:
        raise ArgumentoInvalidoError("samples debe ser al menos 2")
    interp = _interpolantes(anchor, test, metric)
    grilla = np.linspace(interp.bajo, interp.alto, samples)
    area = trapezoid(interp.test(grilla) - interp.anchor(grilla), grilla)
    return _a_porcentaje(float(area) / (interp.alto - interp.bajo))


def bd_rate_table(anchor: RdCurve, test: RdCurve) -> dict[str, float]:
    """BD-rate por componente y ponderado, con las columnas y, u, v, yuv."""
    return {metrica.value: bd_rate(anchor, test, metrica) for metrica in Metric}


# =============================================================================
# TRANSICIÓN DE CALIDAD EN RASL
# =============================================================================

@dataclass(frozen=True)
class TransitionParams:
    up_mean_below_high_db: float = 1.77
    up_mean_above_low_db: float = 2.82
    down_mean_below_high_db: float = 3.72
    down_mean_above_low_db: float = 0.87
    down_first_rasl_drop_db: float = 2.92

    def __post_init__(self) -> None:
        for campo in fields(self):
            if getattr(self, campo.name) < 0:
                raise ArgumentoInvalidoError(f"{campo.name} debe ser >= 0")

    def brecha_medida_db(self, direction: Direction | str) -> float:
        """Distancia high - low a la que se midieron los offsets de esa dirección."""
        if Direction(direction) == Direction.UP:
            return self.up_mean_below_high_db + self.up_mean_above_low_db
        return self.down_mean_below_high_db + self.down_mean_above_low_db

    def media_sobre_low_db(self, direction: Direction | str) -> float:
        if Direction(direction) == Direction.UP:
            return self.up_mean_above_low_db
        return self.down_mean_above_low_db

    @classmethod
    def desde_settings(cls, overrides: Mapping[str, float] | None = None) -> TransitionParams:
        valores = {**settings.OGOP_SIM['TRANSITION'], **(overrides or {})}
        conocidos = {campo.name for campo in fields(cls)}
        desconocidos = set(valores) - conocidos
        if desconocidos:
            raise ArgumentoInvalidoError(f"Parámetros de transición desconocidos: {sorted(desconocidos)}")
        return cls(**{clave: float(valor) for clave, valor in valores.items()})


@dataclass(frozen=True)
class TransitionProfile:
    values: tuple[float, ...]
    clamped: bool = False

    @property
    def mean(self) -> float | None:
        return float(np.mean(self.values)) if self.values else None


def _rampa(inicio: float, fin: float, cantidad: int) -> np.ndarray:
    if cantidad == 1:
        return np.array([(inicio + fin) / 2])
    return np.linspace(inicio, fin, cantidad)


def build_transition_profile(direction: Direction | str, high_db: float, low_db: float,
                             n_rasl: int, params: TransitionParams | None = None) -> TransitionProfile:
    """
    Serie de calidad por imagen RASL, en orden de presentación.

    Up: rampa lineal q_i = inicio + (i+1)/(n+1)·(high − inicio) con inicio
    elegido para que la media sea high − up_mean_below_high_db.

    Down: la primera RASL cae down_first_rasl_drop_db bajo high; el resto es
    una recuperación lineal desde un piso hasta ese primer valor, con el piso
    resuelto para que la media total sea high − down_mean_below_high_db.

    Todos los valores quedan en [low, high]; si los offsets no son
    alcanzables se recorta y clamped = True.
    """
    direccion = Direction(direction)
    parametros = params or TransitionParams()
    if high_db < low_db:
        raise ArgumentoInvalidoError(f"high_db ({high_db}) < low_db ({low_db})")
    if n_rasl < 0:
        raise ArgumentoInvalidoError(f"n_rasl negativo: {n_rasl}")
    if n_rasl == 0:
        return TransitionProfile(values=())

    recortado = False
    if direccion == Direction.UP:
        media = high_db - parametros.up_mean_below_high_db
        inicio = 2 * media - high_db
        if inicio < low_db:
            inicio, recortado = low_db, True
        posiciones = np.arange(1, n_rasl + 1) / (n_rasl + 1)
        valores = inicio + posiciones * (high_db - inicio)
    else:
        media = high_db - parametros.down_mean_below_high_db
        primero = high_db - parametros.down_first_rasl_drop_db
        if primero < low_db:
            primero, recortado = low_db, True
        if n_rasl == 1:
            valores = np.array([primero])
            recortado = recortado or abs(primero - media) > 1e-9
        else:
            media_resto = (n_rasl * media - primero) / (n_rasl - 1)
            piso, fin = 2 * media_resto - primero, primero
            if piso < low_db:
                piso, recortado = low_db, True
                fin = min(2 * media_resto - piso, high_db)
            elif piso > high_db:
                piso, recortado = high_db, True
            valores = np.concatenate(([primero], _rampa(piso, fin, n_rasl - 1)))

    acotados = np.clip(valores, low_db, high_db)
    if not np.allclose(acotados, valores, rtol=0.0, atol=1e-12):
        recortado = True
    if recortado:
        logger.warning(
            f"Perfil {direccion} recortado a [{low_db}, {high_db}] con n={n_rasl}: "
            f"media {float(np.mean(acotados)):.2f} dB = low + {float(np.mean(acotados)) - low_db:.2f} "
            f"(medido: low + {parametros.media_sobre_low_db(direccion):.2f}, "
            f"brecha medida {parametros.brecha_medida_db(direccion):.2f} dB vs {high_db - low_db:.2f} dB)"
        )
    return TransitionProfile(values=tuple(float(v) for v in acotados), clamped=recortado)


def transition_profile(direction: Direction | str, high_db: float, low_db: float,
                       n_rasl: int, params: TransitionParams | None = None) -> list[float]:
    return list(build_transition_profile(direction, high_db, low_db, n_rasl, params).values)


# =============================================================================
# CALIDAD DE SESIÓN
# =============================================================================

@dataclass(frozen=True)
class SessionQuality:
    mean: float
    min: float
    transition_means: tuple[float | None, ...] = field(default_factory=tuple)

    def to_dict(self) -> dict[str, Any]:
        return {'mean': self.mean, 'min': self.min, 'transition_means': list(self.transition_means)}


def session_quality(timeline: Sequence[float | None],
                    switch_windows: Iterable[Sequence[int]] = ()) -> SessionQuality:
    """
    Estadísticas de una serie de calidad indexada por POC.

    Los huecos (None) no entran en las medias. Cada ventana es la lista de
    POCs afectados por una conmutación.
    """
    valores = np.array([v for v in timeline if v is not None], dtype=float)
    if valores.size == 0:
        raise ArgumentoInvalidoError("Serie de calidad vacía")

    medias: list[float | None] = []
    for ventana in switch_windows:
        en_ventana = [timeline[poc] for poc in ventana if 0 <= poc < len(timeline) and timeline[poc] is not None]
        medias.append(float(np.mean(en_ventana)) if en_ventana else None)

    return SessionQuality(mean=float(valores.mean()), min=float(valores.min()), transition_means=tuple(medias))
