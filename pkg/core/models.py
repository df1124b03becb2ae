from __future__ import annotations

import os.path
from typing import Any

from django.conf import settings
from django.db import models
from django.utils.translation import gettext_lazy as _
import pandas as pd


# =============================================================================
# HISTORIAL DE CORRIDAS
# =============================================================================

class CorridaSimulacion(models.Model):
    """Una ejecución registrada de `ladder validate` o `sim run`."""

    class Estado(models.TextChoices):
        PENDIENTE = 'PENDIENTE', _('Pendiente')
        PROCESANDO = 'PROCESANDO', _('Procesando')
        COMPLETADO = 'COMPLETADO', _('Completado')
        ERROR = 'ERROR', _('Error')

    class Tipo(models.TextChoices):
        VALIDACION = 'VALIDACION', _('Validación de escalera')
        SIMULACION = 'SIMULACION', _('Simulación de sesión')

    estado = models.CharField(
        max_length=15,
        choices=Estado.choices,
        default=Estado.PENDIENTE
    )
    tipo = models.CharField(
        max_length=15,
        choices=Tipo.choices,
        default=Tipo.SIMULACION
    )

    ruta_escalera = models.CharField(max_length=500)
    ruta_traza = models.CharField(max_length=500, blank=True, default='')
    ruta_schedule = models.CharField(max_length=500, blank=True, default='')
    ruta_salida = models.CharField(max_length=500, blank=True, default='')

    soporta_rpr = models.BooleanField(default=True, verbose_name='Decoder con RPR')
    semilla = models.IntegerField(null=True, blank=True)
    jitter = models.FloatField(default=0.0)

    digest_entradas = models.CharField(
        max_length=64,
        blank=True,
        default='',
        help_text='sha256 de la escalera usada'
    )
    es_conmutable = models.BooleanField(null=True, blank=True)
    reporte = models.JSONField(null=True, blank=True)
    mensaje_error = models.TextField(blank=True, default='')

    fecha_creacion = models.DateTimeField(auto_now_add=True)

    class Meta:
        verbose_name = "Corrida de simulación"
        verbose_name_plural = "Corridas de simulación"
        ordering = ['-fecha_creacion', '-id']

    def __str__(self) -> str:
        return f"Corrida #{self.id} {self.get_tipo_display()} ({self.estado})"

    def registrar_switches(self, switches: list[dict[str, Any]]) -> int:
        """Reemplaza las filas de conmutación a partir de los registros del RunReport."""
        self.switches.all().delete()
        filas = [
            ResultadoSwitch(
                corrida=self,
                segmento=registro['segment'],
                desde=registro['from_rep'],
                hacia=registro['to_rep'],
                pedido=registro['requested_rep'],
                resultado=registro['outcome']['kind'],
                imagenes_afectadas=len(
                    registro['outcome'].get('affected_pocs') or registro['outcome'].get('dropped_pocs') or []
                ),
                fallback=registro['rewritten_to_fallback'],
                panico=registro['panic'],
            )
            for registro in switches
        ]
        ResultadoSwitch.objects.bulk_create(filas)
        return len(filas)

    def generar_reporte_excel(self) -> str:
        """
        Genera el Excel de la corrida (conmutaciones y timeline) y retorna su ruta.

        Returns:
            str: Ruta completa del archivo Excel generado
        """
        ruta_final = os.path.join(settings.MEDIA_ROOT, f'corrida_{self.id}.xlsx')
        os.makedirs(settings.MEDIA_ROOT, exist_ok=True)
        conmutaciones = pd.DataFrame([s.convertir_en_diccionario() for s in self.switches.all()])
        timeline = pd.DataFrame((self.reporte or {}).get('timeline', []))
        with pd.ExcelWriter(ruta_final, engine='openpyxl') as writer:
            conmutaciones.to_excel(writer, sheet_name='Conmutaciones', index=False)
            timeline.to_excel(writer, sheet_name='Timeline', index=False)
        return ruta_final


class ResultadoSwitch(models.Model):
    """Resultado de una conmutación dentro de una corrida."""

    corrida = models.ForeignKey(
        CorridaSimulacion,
        on_delete=models.CASCADE,
        related_name='switches'
    )
    segmento = models.IntegerField()
    desde = models.CharField(max_length=50)
    hacia = models.CharField(max_length=50)
    pedido = models.CharField(max_length=50)
    resultado = models.CharField(max_length=30)
    imagenes_afectadas = models.IntegerField(default=0)
    fallback = models.BooleanField(default=False)
    panico = models.BooleanField(default=False)

    class Meta:
        ordering = ['corrida', 'segmento']

    def __str__(self) -> str:
        return f"Segmento {self.segmento}: {self.desde} -> {self.hacia} ({self.resultado})"

    def convertir_en_diccionario(self) -> dict[str, Any]:
        return {
            'segmento': self.segmento,
            'desde': self.desde,
            'hacia': self.hacia,
            'pedido': self.pedido,
            'resultado': self.resultado,
            'imagenes_afectadas': self.imagenes_afectadas,
            'fallback': self.fallback,
            'panico': self.panico,
        }
