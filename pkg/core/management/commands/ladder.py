"""
Validación de conformidad de una escalera.

Uso:
    python manage.py ladder validate core/muestras/escalera_conforme.json
    python manage.py ladder validate escalera.json --format json --record

Sale con 0 si la escalera es conmutable, 1 si hay violaciones y 2 si la
entrada está mal formada.
"""
from __future__ import annotations

import logging
from typing import Any

from asgiref.sync import async_to_sync
from django.core.management.base import CommandError, CommandParser
from django_q.tasks import async_task

from core.dominio.constraint_engine import validar_escalera_async
from core.management.commands._comun import EXIT_HALLAZGOS, ComandoSimulador
from core.models import CorridaSimulacion
from core.services.LadderConfigService import LadderConfigService

logger = logging.getLogger(__name__)


class Command(ComandoSimulador):
    help = 'Valida los tres pilares de conformidad de una escalera de representaciones'

    def add_arguments(self, parser: CommandParser) -> None:
        super().add_arguments(parser)
        parser.add_argument('accion', choices=['validate'])
        parser.add_argument('ruta', help='Archivo JSON de la escalera')
        parser.add_argument('--record', action='store_true', help='Registrar la corrida en la base de datos')
        parser.add_argument('--enqueue', action='store_true', help='Encolar la validación en Django-Q')

    def handle(self, *args: Any, **options: Any) -> None:
        if options['enqueue']:
            corrida = CorridaSimulacion.objects.create(
                tipo=CorridaSimulacion.Tipo.VALIDACION,
                ruta_escalera=options['ruta'],
            )
            async_task('core.tasks.validar_escalera_corrida_async', corrida.id)
            self.stdout.write(self.style.SUCCESS(f"Corrida #{corrida.id} encolada"))
            return

        archivo = LadderConfigService().cargar_escalera(options['ruta'])
        reporte = async_to_sync(validar_escalera_async)(archivo.ladder)

        self.emitir(options, reporte.to_dict(), reporte.to_text(),
                    esquema='conformance_report', nombre_archivo='conformance_report')

        if options['record']:
            corrida = CorridaSimulacion.objects.create(
                tipo=CorridaSimulacion.Tipo.VALIDACION,
                estado=CorridaSimulacion.Estado.COMPLETADO,
                ruta_escalera=options['ruta'],
                digest_entradas=archivo.digests[archivo.path.name],
                es_conmutable=reporte.is_switchable,
                reporte=reporte.to_dict(),
            )
            logger.info(f"Validación registrada como corrida #{corrida.id}")

        if not reporte.is_switchable:
            raise CommandError(
                f"Escalera no conmutable: {len(reporte.violations)} violaciones",
                returncode=EXIT_HALLAZGOS,
            )
