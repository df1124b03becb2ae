from __future__ import annotations

from typing import Any

from django import forms
from django.core.exceptions import ValidationError

from core.dominio.gop_model import GOP_SIZES_VALIDOS, GopConfig, IrapMode
from core.excepciones import ArgumentoInvalidoError


class GopConfigForm(forms.Form):
    """Parámetros de `gop show`: arma el GopConfig y la longitud de la secuencia."""

    gop = forms.IntegerField(
        min_value=1,
        help_text='Tamaño de GOP: potencia de dos entre 1 y 32'
    )
    irap = forms.IntegerField(
        min_value=1,
        help_text='Período IRAP en imágenes (múltiplo del GOP)'
    )
    mode = forms.ChoiceField(
        choices=IrapMode.choices,
        initial=IrapMode.CONSTRAINED_OPEN_GOP,
    )
    segment = forms.IntegerField(
        min_value=1,
        required=False,
        help_text='Largo de segmento; por defecto igual al período IRAP'
    )
    length = forms.IntegerField(
        min_value=1,
        required=False,
        help_text='Cantidad de imágenes; por defecto irap + 1'
    )

    def clean_gop(self) -> int:
        gop = self.cleaned_data['gop']
        if gop not in GOP_SIZES_VALIDOS:
            raise ValidationError(
                f'gop={gop} inválido: el tamaño de GOP debe ser potencia de dos (1, 2, 4, 8, 16 o 32).'
            )
        return gop

    def clean(self) -> dict[str, Any]:
        cleaned_data: dict[str, Any] = super().clean()
        if self.errors:
            return cleaned_data

        try:
            cleaned_data['config'] = GopConfig(
                gop_size=cleaned_data['gop'],
                irap_period=cleaned_data['irap'],
                irap_mode=cleaned_data['mode'],
                segment_length=cleaned_data.get('segment') or 0,
            )
        except ArgumentoInvalidoError as e:
            raise ValidationError(str(e)) from e

        length = cleaned_data.get('length') or cleaned_data['irap'] + 1
        if (length - 1) % cleaned_data['gop'] != 0:
            raise ValidationError(
                f'length={length} debe ser 1 + múltiplo del GOP ({cleaned_data["gop"]}).'
            )
        cleaned_data['length'] = length
        return cleaned_data


class SimulacionForm(forms.Form):
    """Opciones de `sim run` que no son rutas de archivo."""

    caps = forms.ChoiceField(
        choices=[('rpr', 'Decoder con RPR'), ('no-rpr', 'Decoder sin RPR')],
        initial='rpr',
    )
    seed = forms.IntegerField(required=False, min_value=0)
    jitter = forms.FloatField(
        required=False,
        min_value=0.0,
        max_value=0.99,
        help_text='Amplitud del jitter multiplicativo de la traza (requiere --seed)'
    )

    def clean(self) -> dict[str, Any]:
        cleaned_data: dict[str, Any] = super().clean()
        jitter = cleaned_data.get('jitter') or 0.0
        if jitter > 0 and cleaned_data.get('seed') is None:
            raise ValidationError('El jitter necesita una semilla explícita (--seed).')
        cleaned_data['jitter'] = jitter
        cleaned_data['supports_rpr'] = cleaned_data.get('caps', 'rpr') == 'rpr'
        return cleaned_data
