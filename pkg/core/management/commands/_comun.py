"""
Base de los comandos del simulador.

Agrega las opciones globales (--format, --out, --seed) y traduce las
excepciones de entrada al código de salida 2.
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Any, Mapping

from django.core.management.base import BaseCommand, CommandError, CommandParser

from core.excepciones import ArgumentoInvalidoError, EntradaInvalidaError
from core.services.LadderConfigService import validar_documento
from core.services.ReporteCorridaService import a_json, redondear

logger = logging.getLogger(__name__)

EXIT_HALLAZGOS = 1
EXIT_ENTRADA = 2


class ComandoSimulador(BaseCommand):
    """Comando con las opciones globales y el contrato de códigos de salida."""

    def add_arguments(self, parser: CommandParser) -> None:
        parser.add_argument(
            '--format',
            choices=['json', 'text'],
            default='text',
            help='Formato de salida (default: text)',
        )
        parser.add_argument(
            '--out',
            default=None,
            help='Carpeta donde escribir los archivos de salida',
        )
        parser.add_argument(
            '--seed',
            type=int,
            default=None,
            help='Semilla para la aleatoriedad opcional (jitter de traza)',
        )

    def execute(self, *args: Any, **options: Any) -> str | None:
        try:
            return super().execute(*args, **options)
        except (EntradaInvalidaError, ArgumentoInvalidoError) as e:
            logger.error(f"Entrada inválida: {e}")
            raise CommandError(str(e), returncode=EXIT_ENTRADA) from e

    def error_de_entrada(self, mensaje: str) -> CommandError:
        return CommandError(mensaje, returncode=EXIT_ENTRADA)

    def emitir(self, options: Mapping[str, Any], documento: Mapping[str, Any], texto: str,
               esquema: str | None = None, nombre_archivo: str | None = None) -> None:
        """Imprime el documento (JSON validado o texto) y lo copia a --out si se pidió."""
        if options['format'] == 'json':
            documento = redondear(documento)
            if esquema:
                validar_documento(documento, esquema)
            salida = a_json(documento)
        else:
            salida = texto if texto.endswith('\n') else texto + '\n'

        self.stdout.write(salida, ending='')

        if options.get('out') and nombre_archivo:
            carpeta = Path(options['out'])
            carpeta.mkdir(parents=True, exist_ok=True)
            extension = 'json' if options['format'] == 'json' else 'txt'
            (carpeta / f"{nombre_archivo}.{extension}").write_text(salida, encoding='utf-8')
