"""
Excepciones del simulador.

Las violaciones de estructura o de conformidad son datos (listas de
violaciones), nunca excepciones. Estas clases cubren argumentos inválidos
y documentos de entrada mal formados.
"""
from __future__ import annotations


class ArgumentoInvalidoError(ValueError):
    """Argumento fuera de rango o inconsistente para una operación."""


class SinSolapamientoError(ArgumentoInvalidoError):
    """Las curvas RD no comparten rango de calidad para integrar el BD-rate."""


class EntradaInvalidaError(ValueError):
    """Documento de entrada mal formado: esquema, archivo faltante o columnas."""
