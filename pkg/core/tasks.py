"""
Tareas asíncronas para Django-Q.

Funciones que los workers de Django-Q ejecutan para las corridas encoladas
con `sim run --enqueue` o `ladder validate --enqueue`.
"""
from __future__ import annotations

import logging
import os

from asgiref.sync import async_to_sync
from django.conf import settings

from core.dominio.constraint_engine import validar_escalera_async
from core.models import CorridaSimulacion
from core.services.LadderConfigService import LadderConfigService, digest_archivo
from core.services.ReporteCorridaService import ReporteCorridaService, redondear

logger: logging.Logger = logging.getLogger(__name__)


# ============================================================================
# SIMULACIÓN DE SESIÓN
# ============================================================================

def ejecutar_simulacion_async(corrida_id: int) -> int:
    """
    Ejecuta una corrida de simulación registrada.

    Args:
        corrida_id (int): ID de la CorridaSimulacion en la base de datos

    Returns:
        int: ID de la corrida procesada

    Ejemplo de uso:
        from django_q.tasks import async_task

        async_task('core.tasks.ejecutar_simulacion_async', corrida.id)
    """
    logger.info(f"[Django-Q] Iniciando simulación de corrida #{corrida_id}")
    corrida = CorridaSimulacion.objects.get(id=corrida_id)
    corrida.estado = CorridaSimulacion.Estado.PROCESANDO
    corrida.save(update_fields=['estado'])

    try:
        ruta_salida = corrida.ruta_salida or os.path.join(settings.MEDIA_ROOT, 'corridas', f'corrida_{corrida.id}')
        servicio = ReporteCorridaService(ruta_carpeta=ruta_salida)
        resultado = servicio.ejecutar(
            corrida.ruta_escalera,
            ruta_traza=corrida.ruta_traza or None,
            ruta_schedule=corrida.ruta_schedule or None,
            supports_rpr=corrida.soporta_rpr,
            seed=corrida.semilla,
            jitter=corrida.jitter,
        )

        corrida.ruta_salida = ruta_salida
        corrida.reporte = resultado.documento
        corrida.es_conmutable = resultado.conformidad.is_switchable
        corrida.digest_entradas = resultado.digest_escalera
        corrida.estado = CorridaSimulacion.Estado.COMPLETADO
        corrida.save()
        corrida.registrar_switches(resultado.documento['switches'])

        logger.info(f"[Django-Q] Corrida #{corrida_id} completada")
        return corrida_id

    except Exception as e:
        logger.error(f"[Django-Q] Error en corrida #{corrida_id}: {e}", exc_info=True)
        corrida.estado = CorridaSimulacion.Estado.ERROR
        corrida.mensaje_error = str(e)
        corrida.save(update_fields=['estado', 'mensaje_error'])
        raise


# ============================================================================
# VALIDACIÓN DE ESCALERA
# ============================================================================

def validar_escalera_corrida_async(corrida_id: int) -> int:
    """Valida la escalera de una corrida con el fan-out por representación."""
    logger.info(f"[Django-Q] Iniciando validación de corrida #{corrida_id}")
    corrida = CorridaSimulacion.objects.get(id=corrida_id)
    corrida.estado = CorridaSimulacion.Estado.PROCESANDO
    corrida.save(update_fields=['estado'])

    try:
        archivo = LadderConfigService().cargar_escalera(corrida.ruta_escalera)
        reporte = async_to_sync(validar_escalera_async)(archivo.ladder)

        corrida.reporte = redondear(reporte.to_dict())
        corrida.es_conmutable = reporte.is_switchable
        corrida.digest_entradas = digest_archivo(corrida.ruta_escalera)
        corrida.estado = CorridaSimulacion.Estado.COMPLETADO
        corrida.save()

        logger.info(f"[Django-Q] Validación #{corrida_id}: conmutable={reporte.is_switchable}")
        return corrida_id

    except Exception as e:
        logger.error(f"[Django-Q] Error en validación #{corrida_id}: {e}", exc_info=True)
        corrida.estado = CorridaSimulacion.Estado.ERROR
        corrida.mensaje_error = str(e)
        corrida.save(update_fields=['estado', 'mensaje_error'])
        raise
