"""
Estructura de GOP y exposición a drift.

Uso:
    python manage.py gop show --gop 8 --irap 64 --mode open
    python manage.py gop exposure --format json
"""
from __future__ import annotations

from typing import Any

import pandas as pd
from django.conf import settings
from django.core.management.base import CommandParser

from core.dominio.constraint_engine import apply_rasl_constraints
from core.dominio.gop_model import (
    GopConfig,
    IrapMode,
    RaslMode,
    build_sequence,
    drift_exposure,
    drift_exposure_ratio,
    validate_structure,
)
from core.forms import GopConfigForm
from core.management.commands._comun import ComandoSimulador

GRILLA_GOP = (8, 16, 32)
GRILLA_IRAP = (64, 128, 256)


class Command(ComandoSimulador):
    help = 'Muestra la estructura de una secuencia codificada o la exposición a drift por configuración'

    def add_arguments(self, parser: CommandParser) -> None:
        super().add_arguments(parser)
        parser.add_argument('accion', choices=['show', 'exposure'])
        parser.add_argument('--gop', help='Tamaño de GOP')
        parser.add_argument('--irap', help='Período IRAP en imágenes')
        parser.add_argument('--mode', default=IrapMode.CONSTRAINED_OPEN_GOP.value,
                            help='closed, open o constrained')
        parser.add_argument('--segment', help='Largo de segmento en imágenes')
        parser.add_argument('--length', help='Cantidad de imágenes de la secuencia')

    def handle(self, *args: Any, **options: Any) -> None:
        if options['accion'] == 'show':
            self.mostrar(options)
        else:
            self.exposicion(options)

    def mostrar(self, options: dict[str, Any]) -> None:
        form = GopConfigForm(data={
            'gop': options['gop'],
            'irap': options['irap'],
            'mode': options['mode'],
            'segment': options['segment'],
            'length': options['length'],
        })
        if not form.is_valid():
            errores = '; '.join(
                f"{campo}: {' '.join(mensajes)}" if campo != '__all__' else ' '.join(mensajes)
                for campo, mensajes in form.errors.items()
            )
            raise self.error_de_entrada(errores)

        config: GopConfig = form.cleaned_data['config']
        seq = build_sequence(config, form.cleaned_data['length'])
        if config.irap_mode == IrapMode.CONSTRAINED_OPEN_GOP:
            seq = apply_rasl_constraints(seq, RaslMode.FULL_RPR)
        filas = [
            {
                'poc': p.poc,
                'decode_idx': p.decode_idx,
                'tid': p.tid,
                'kind': p.kind.value,
                'refs': list(p.refs),
                'collocated_ref': p.collocated_ref,
                'segment': p.segment_index,
            }
            for p in seq.pictures
        ]
        violaciones = validate_structure(seq)

        df = pd.DataFrame(filas, columns=['poc', 'decode_idx', 'tid', 'kind', 'refs', 'collocated_ref', 'segment'])
        df['refs'] = df['refs'].map(lambda refs: ' '.join(str(r) for r in refs))
        df['collocated_ref'] = df['collocated_ref'].map(lambda c: '' if c is None or pd.isna(c) else str(int(c)))
        texto = df.to_csv(index=False, lineterminator='\n')
        for v in violaciones:
            texto += f"# violation [{v.rule}] poc={v.poc}: {v.message}\n"

        documento = {
            'config': {
                'gop_size': config.gop_size,
                'irap_period': config.irap_period,
                'irap_mode': config.irap_mode.value,
                'segment_length': config.segment_length,
                'length': seq.length,
            },
            'pictures': filas,
            'structure_violations': [
                {'poc': v.poc, 'rule': v.rule, 'message': v.message} for v in violaciones
            ],
        }
        self.emitir(options, documento, texto, esquema='gop_show', nombre_archivo='gop_show')

    def exposicion(self, options: dict[str, Any]) -> None:
        grilla = []
        for gop in GRILLA_GOP:
            for irap in GRILLA_IRAP:
                config = GopConfig(gop, irap, IrapMode.CONSTRAINED_OPEN_GOP)
                grilla.append({
                    'gop_size': gop,
                    'irap_period': irap,
                    'rasl_per_cra': gop - 1,
                    'drift_exposure': float(drift_exposure(config)),
                })

        cocientes = {
            str(gop): float(drift_exposure_ratio(
                GopConfig(gop, 64, IrapMode.CONSTRAINED_OPEN_GOP),
                GopConfig(gop, 256, IrapMode.CONSTRAINED_OPEN_GOP),
            ))
            for gop in GRILLA_GOP
        }
        ganancia_64 = settings.OGOP_SIM['MEASURED_GAIN_IRAP64_PCT']
        ganancia_256 = settings.OGOP_SIM['MEASURED_GAIN_IRAP256_PCT']
        nota = {
            'irap64_pct': ganancia_64,
            'irap256_pct': ganancia_256,
            'ratio': ganancia_64 / ganancia_256,
            'asserted': False,
        }

        lineas = [f"{'gop':>4} {'irap':>5} {'rasl/cra':>9} {'exposure':>9}"]
        lineas += [
            f"{f['gop_size']:>4} {f['irap_period']:>5} {f['rasl_per_cra']:>9} {f['drift_exposure']:>9.4f}"
            for f in grilla
        ]
        lineas.append('')
        lineas += [f"exposure ratio irap 64 / 256 (gop {gop}): {r:.2f}" for gop, r in cocientes.items()]
        lineas.append(
            f"measured gain ratio {abs(ganancia_64):.2f} / {abs(ganancia_256):.2f} = {nota['ratio']:.2f} (not asserted)"
        )

        documento = {
            'grid': grilla,
            'ratio_irap64_vs_irap256': cocientes,
            'measured_gain_ratio_note': nota,
        }
        self.emitir(options, documento, '\n'.join(lineas), esquema='gop_exposure', nombre_archivo='gop_exposure')
