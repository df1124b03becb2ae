"""
Simulación de sesiones de streaming sobre una escalera.

Uso:
    python manage.py sim run --ladder escalera.json --trace traza.csv --out salida/
    python manage.py sim run --ladder escalera.json --schedule schedule.csv --caps no-rpr
    python manage.py sim history
    python manage.py sim export --id 3
"""
from __future__ import annotations

import logging
import os
from typing import Any

from django.core.management.base import CommandParser
from django_q.tasks import async_task

from core.forms import SimulacionForm
from core.management.commands._comun import ComandoSimulador
from core.models import CorridaSimulacion
from core.services.ReporteCorridaService import ReporteCorridaService, resumen_texto

logger = logging.getLogger(__name__)


class Command(ComandoSimulador):
    help = 'Corre una sesión (ABR o schedule fijo) y escribe el RunReport y los CSV para gráficos'

    def add_arguments(self, parser: CommandParser) -> None:
        super().add_arguments(parser)
        parser.add_argument('accion', choices=['run', 'history', 'export'])
        parser.add_argument('--ladder', help='Archivo JSON de la escalera')
        parser.add_argument('--trace', help='Traza de ancho de banda (CSV time_s,kbps)')
        parser.add_argument('--schedule', help='Schedule fijo (CSV segment,rep_id)')
        parser.add_argument('--caps', default='rpr', help='rpr o no-rpr')
        parser.add_argument('--jitter', default=None, help='Amplitud del jitter de la traza (requiere --seed)')
        parser.add_argument('--excel', action='store_true', help='Escribir además corrida.xlsx')
        parser.add_argument('--record', action='store_true', help='Registrar la corrida en la base de datos')
        parser.add_argument('--enqueue', action='store_true', help='Encolar la corrida en Django-Q')
        parser.add_argument('--limit', type=int, default=20, help='Corridas a listar en history')
        parser.add_argument('--id', type=int, default=None, help='Corrida a exportar en export')

    def handle(self, *args: Any, **options: Any) -> None:
        acciones = {
            'run': self.correr,
            'history': self.historial,
            'export': self.exportar,
        }
        acciones[options['accion']](options)

    # ── run ────────────────────────────────────────────────────────────

    def correr(self, options: dict[str, Any]) -> None:
        if not options['ladder']:
            raise self.error_de_entrada('Falta --ladder')
        if bool(options['trace']) == bool(options['schedule']):
            raise self.error_de_entrada('Indicar exactamente uno de --trace o --schedule')

        form = SimulacionForm(data={
            'caps': options['caps'],
            'seed': options['seed'],
            'jitter': options['jitter'],
        })
        if not form.is_valid():
            raise self.error_de_entrada('; '.join(
                ' '.join(mensajes) for mensajes in form.errors.values()
            ))
        datos = form.cleaned_data

        if options['enqueue']:
            corrida = self._nueva_corrida(options, datos)
            async_task('core.tasks.ejecutar_simulacion_async', corrida.id)
            self.stdout.write(self.style.SUCCESS(f"Corrida #{corrida.id} encolada"))
            return

        servicio = ReporteCorridaService(ruta_carpeta=options['out'])
        resultado = servicio.ejecutar(
            options['ladder'],
            ruta_traza=options['trace'],
            ruta_schedule=options['schedule'],
            supports_rpr=datos['supports_rpr'],
            seed=datos['seed'],
            jitter=datos['jitter'],
            excel=options['excel'],
        )

        if options['format'] == 'json':
            self.stdout.write(resultado.rutas['run_report'].read_text(encoding='utf-8'), ending='')
        else:
            self.stdout.write(resumen_texto(resultado.documento, resultado.conformidad))
            for nombre, ruta in sorted(resultado.rutas.items()):
                self.stdout.write(f"{nombre}: {ruta}")

        if options['record']:
            corrida = self._nueva_corrida(options, datos)
            corrida.ruta_salida = str(servicio.ruta_carpeta)
            corrida.reporte = resultado.documento
            corrida.es_conmutable = resultado.conformidad.is_switchable
            corrida.digest_entradas = resultado.digest_escalera
            corrida.estado = CorridaSimulacion.Estado.COMPLETADO
            corrida.save()
            corrida.registrar_switches(resultado.documento['switches'])
            logger.info(f"Simulación registrada como corrida #{corrida.id}")

    def _nueva_corrida(self, options: dict[str, Any], datos: dict[str, Any]) -> CorridaSimulacion:
        return CorridaSimulacion.objects.create(
            tipo=CorridaSimulacion.Tipo.SIMULACION,
            ruta_escalera=options['ladder'],
            ruta_traza=options['trace'] or '',
            ruta_schedule=options['schedule'] or '',
            ruta_salida=options['out'] or '',
            soporta_rpr=datos['supports_rpr'],
            semilla=datos['seed'],
            jitter=datos['jitter'],
        )

    # ── history / export ───────────────────────────────────────────────

    def historial(self, options: dict[str, Any]) -> None:
        corridas = CorridaSimulacion.objects.all()[:options['limit']]
        filas = [
            {
                'id': c.id,
                'tipo': c.tipo,
                'estado': c.estado,
                'es_conmutable': c.es_conmutable,
                'ruta_escalera': c.ruta_escalera,
                'switches': c.switches.count(),
            }
            for c in corridas
        ]
        lineas = [
            f"#{f['id']:<5} {f['tipo']:<11} {f['estado']:<11} "
            f"conmutable={f['es_conmutable']} switches={f['switches']} {os.path.basename(f['ruta_escalera'])}"
            for f in filas
        ] or ['Sin corridas registradas']
        self.emitir(options, {'corridas': filas}, '\n'.join(lineas))

    def exportar(self, options: dict[str, Any]) -> None:
        if options['id'] is None:
            raise self.error_de_entrada('Falta --id')
        try:
            corrida = CorridaSimulacion.objects.get(id=options['id'])
        except CorridaSimulacion.DoesNotExist:
            raise self.error_de_entrada(f"No existe la corrida #{options['id']}")
        ruta = corrida.generar_reporte_excel()
        self.stdout.write(self.style.SUCCESS(f"Excel generado: {ruta}"))
