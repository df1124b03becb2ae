"""
Tabla de BD-rate entre dos curvas RD.

Uso:
    python manage.py bdrate anchor.csv test.csv
    python manage.py bdrate anchor.csv test.csv --format json --oracle
"""
from __future__ import annotations

from pathlib import Path
from typing import Any

from django.conf import settings
from django.core.management.base import CommandError, CommandParser

from core.dominio.quality_metrics import Metric, bd_rate_oracle, bd_rate_table
from core.excepciones import SinSolapamientoError
from core.management.commands._comun import EXIT_HALLAZGOS, ComandoSimulador
from core.services.LadderConfigService import LadderConfigService, digest_archivo
from core.services.ReporteCorridaService import tabla_bd_rate_texto


class Command(ComandoSimulador):
    help = 'Calcula el BD-rate por componente (Y, U, V) y ponderado 6/1/1 de test contra anchor'

    def add_arguments(self, parser: CommandParser) -> None:
        super().add_arguments(parser)
        parser.add_argument('anchor', help='CSV rate_kbps,psnr_y,psnr_u,psnr_v del anchor')
        parser.add_argument('test', help='CSV con las mismas columnas del test')
        parser.add_argument('--oracle', action='store_true',
                            help='Agregar el BD-rate por integración trapezoidal densa')

    def handle(self, *args: Any, **options: Any) -> None:
        cargador = LadderConfigService()
        anchor = cargador.leer_curva_rd(options['anchor'])
        test = cargador.leer_curva_rd(options['test'])

        try:
            tabla = bd_rate_table(anchor, test)
            oraculo = {m.value: bd_rate_oracle(anchor, test, m) for m in Metric} if options['oracle'] else None
        except SinSolapamientoError as e:
            raise CommandError(f"SinSolapamientoError: {e}", returncode=EXIT_HALLAZGOS) from e

        documento: dict[str, Any] = {
            'tool_version': settings.OGOP_SIM['VERSION'],
            'inputs': {
                'anchor': digest_archivo(options['anchor']),
                'test': digest_archivo(options['test']),
            },
            'bd_rate': tabla,
        }
        nombre = f"{Path(options['test']).stem} vs {Path(options['anchor']).stem}"
        filas = {nombre: tabla}
        if oraculo is not None:
            documento['oracle'] = oraculo
            filas[f"{nombre} (oracle)"] = oraculo

        self.emitir(options, documento, tabla_bd_rate_texto(filas),
                    esquema='bdrate_report', nombre_archivo='bdrate')
