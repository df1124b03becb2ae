"""
Tests para el modelo de GOP (core.dominio.gop_model).
"""
from dataclasses import replace
from fractions import Fraction

import pytest

from core.dominio.gop_model import (
    GOP_SIZES_VALIDOS,
    GopConfig,
    IrapMode,
    PictureKind,
    build_decode_order,
    build_sequence,
    cross_boundary_pictures,
    drift_exposure,
    drift_exposure_ratio,
    dyadic_brackets,
    leading_pictures,
    tid_of,
    validate_structure,
)
from core.excepciones import ArgumentoInvalidoError


class TestTidOf:
    """Tests para tid_of."""

    def test_ancla_es_tid_cero(self):
        """La imagen ancla del GOP es Tid 0."""
        assert tid_of(8, 8) == 0

    @pytest.mark.parametrize('offset,esperado', [(4, 1), (6, 2), (5, 3)])
    def test_jerarquia_gop_8(self, offset, esperado):
        """El Tid crece con la profundidad de la bisección."""
        assert tid_of(offset, 8) == esperado

    def test_gop_32(self):
        """La mitad de un GOP de 32 es Tid 1."""
        assert tid_of(16, 32) == 1

    def test_offset_fuera_de_rango(self):
        """Un offset mayor que el GOP se rechaza."""
        with pytest.raises(ArgumentoInvalidoError):
            tid_of(9, 8)

    def test_gop_no_potencia_de_dos(self):
        """tid_of solo acepta GOP potencia de dos."""
        with pytest.raises(ArgumentoInvalidoError):
            tid_of(3, 12)


class TestBuildDecodeOrder:
    """Tests para build_decode_order."""

    def test_gop_1(self):
        """Con GOP 1 el orden es trivial."""
        assert build_decode_order(1) == [1]

    def test_gop_8(self):
        """Orden jerárquico de un GOP de 8."""
        assert build_decode_order(8) == [8, 4, 2, 1, 3, 6, 5, 7]

    @pytest.mark.parametrize('gop', GOP_SIZES_VALIDOS)
    def test_orden_topologico(self, gop):
        """Cada offset aparece una vez, el ancla primero y después de sus dos brackets."""
        orden = build_decode_order(gop)
        assert sorted(orden) == list(range(1, gop + 1))
        assert orden[0] == gop
        posicion = {offset: i for i, offset in enumerate(orden)}
        for offset in orden[1:]:
            inferior, superior = dyadic_brackets(offset, gop)
            if inferior > 0:
                assert posicion[inferior] < posicion[offset]
            assert posicion[superior] < posicion[offset]

    def test_gop_invalido(self):
        """Un GOP de 12 no tiene orden jerárquico."""
        with pytest.raises(ArgumentoInvalidoError):
            build_decode_order(12)


class TestGopConfig:
    """Tests para las validaciones de GopConfig."""

    def test_gop_12_rechazado(self):
        """Un GOP de 12 no es potencia de dos."""
        with pytest.raises(ArgumentoInvalidoError, match='potencia de dos'):
            GopConfig(12, 48)

    def test_irap_no_multiplo(self):
        """El período IRAP tiene que ser múltiplo del GOP."""
        with pytest.raises(ArgumentoInvalidoError):
            GopConfig(32, 48)

    def test_segmento_por_defecto_es_el_periodo_irap(self):
        """Sin largo de segmento se usa el período IRAP."""
        assert GopConfig(32, 64).segment_length == 64

    def test_segmento_que_no_divide_el_periodo(self):
        """Un segmento que no divide el período IRAP se rechaza."""
        with pytest.raises(ArgumentoInvalidoError):
            GopConfig(8, 64, segment_length=24)

    def test_modo_desconocido(self):
        """Un modo IRAP desconocido se rechaza."""
        with pytest.raises(ArgumentoInvalidoError):
            GopConfig(8, 64, 'semi-open')


class TestBuildSequence:
    """Tests para build_sequence."""

    def test_open_gop_32(self):
        """CRA en 64 y 128; las leading de CRA-64 son las RASL 33..63."""
        seq = build_sequence(GopConfig(32, 64, IrapMode.OPEN_GOP), 129)

        assert seq.irap_pocs() == [0, 64, 128]
        assert seq.picture(0).kind == PictureKind.IDR
        assert seq.picture(64).kind == PictureKind.CRA
        leading = leading_pictures(seq, 64)
        assert [p.poc for p in leading] == list(range(33, 64))
        assert all(p.kind == PictureKind.RASL for p in leading)
        assert len(leading) == 31

    def test_closed_gop_sin_rasl(self):
        """Con closed GOP los IRAP son IDR y no aparece ninguna RASL."""
        seq = build_sequence(GopConfig(8, 64, IrapMode.CLOSED_GOP), 65)

        assert seq.picture(64).kind == PictureKind.IDR
        assert not [p for p in seq.pictures if p.kind == PictureKind.RASL]
        assert validate_structure(seq) == []

    def test_closed_gop_ninguna_referencia_cruza_el_idr(self, secuencia_closed_g8):
        """Nada decodificado después de un IDR referencia algo anterior a él."""
        seq = secuencia_closed_g8
        for idr_poc in (64, 128):
            idr = seq.picture(idr_poc)
            posteriores = [p for p in seq.pictures if p.decode_idx > idr.decode_idx]
            for pic in posteriores:
                assert all(seq.picture(r).decode_idx >= idr.decode_idx for r in pic.refs)

    def test_closed_gop_leading_son_radl(self, secuencia_closed_g8):
        """En closed GOP las leading del IDR son RADL."""
        leading = leading_pictures(secuencia_closed_g8, 64)
        assert [p.poc for p in leading] == list(range(57, 64))
        assert all(p.kind == PictureKind.RADL for p in leading)

    def test_gop_1_todo_tid_cero(self):
        """Con GOP 1 todas las imágenes quedan en Tid 0."""
        seq = build_sequence(GopConfig(1, 8, IrapMode.OPEN_GOP), 17)
        assert all(p.tid == 0 for p in seq.pictures)
        assert validate_structure(seq) == []

    @pytest.mark.parametrize('gop', GOP_SIZES_VALIDOS)
    @pytest.mark.parametrize('modo', list(IrapMode))
    def test_secuencias_bien_formadas(self, gop, modo):
        """Toda combinación de GOP y modo produce una estructura válida."""
        seq = build_sequence(GopConfig(gop, 64, modo), 129)
        assert validate_structure(seq) == []

    @pytest.mark.parametrize('gop', [8, 16, 32])
    @pytest.mark.parametrize('irap', [64, 128, 256])
    def test_rasl_por_cra_es_gop_menos_uno(self, gop, irap):
        """Cada CRA tiene gop - 1 RASL, para todo período IRAP."""
        seq = build_sequence(GopConfig(gop, irap, IrapMode.OPEN_GOP), 2 * irap + 1)

        cras = [poc for poc in seq.irap_pocs() if poc > 0]
        assert cras == [irap, 2 * irap]
        for cra in cras:
            leading = leading_pictures(seq, cra)
            assert len(leading) == gop - 1
            assert all(p.kind == PictureKind.RASL for p in leading)

    def test_largo_invalido(self):
        """El largo tiene que ser múltiplo del período IRAP más uno."""
        with pytest.raises(ArgumentoInvalidoError):
            build_sequence(GopConfig(32, 64), 64)

    def test_segmentos_particionan_el_orden_de_decodificacion(self):
        """Los segmentos concatenados reproducen el orden de decodificación."""
        seq = build_sequence(GopConfig(32, 64, IrapMode.OPEN_GOP), 129)

        concatenados = [poc for s in seq.segments for poc in s.picture_pocs]
        assert concatenados == [p.poc for p in seq.decode_order()]
        assert [s.duration_pics for s in seq.segments] == [33, 64, 32]
        assert all(s.starts_with_irap for s in seq.segments)
        assert seq.segment_of(40).index == 1

    def test_segmentos_sin_irap(self):
        """Con segmentos de 32 imágenes e IRAP cada 64 la mitad no empieza en IRAP."""
        seq = build_sequence(GopConfig(32, 64, IrapMode.OPEN_GOP, segment_length=32), 129)
        assert [s.starts_with_irap for s in seq.segments] == [True, False, True, False, True]

    def test_colocada_por_defecto_menor_tid(self, secuencia_open_g8):
        """Sin restricciones la colocada es la referencia de menor Tid."""
        # POC 6: brackets 4 (Tid 1) y 8 (Tid 0)
        assert secuencia_open_g8.picture(6).collocated_ref == 8


class TestCrossBoundary:
    """Tests para cross_boundary_pictures y la exposición a drift."""

    def test_rasl_que_referencian_el_gop_anterior(self, secuencia_open_g8):
        """En GOP 8 solo tres RASL referencian imágenes anteriores al CRA."""
        pocs = [p.poc for p in cross_boundary_pictures(secuencia_open_g8, 64)]
        assert pocs == [57, 58, 60]

    def test_exposicion(self):
        """Open GOP expone 31 de cada 64 imágenes y closed GOP ninguna."""
        assert drift_exposure(GopConfig(32, 64, IrapMode.OPEN_GOP)) == Fraction(31, 64)
        assert drift_exposure(GopConfig(32, 64, IrapMode.CLOSED_GOP)) == 0

    def test_cociente_irap_64_vs_256(self):
        """Cuadruplicar el período IRAP divide por cuatro la exposición."""
        cociente = drift_exposure_ratio(GopConfig(32, 64), GopConfig(32, 256))
        assert cociente == 4

    def test_cociente_contra_closed_gop(self):
        """Un closed GOP no tiene exposición y el cociente no está definido."""
        with pytest.raises(ArgumentoInvalidoError):
            drift_exposure_ratio(GopConfig(32, 64), GopConfig(32, 64, IrapMode.CLOSED_GOP))


class TestValidateStructure:
    """Tests para validate_structure con fallas sembradas."""

    def test_referencia_posterior_en_decodificacion(self, secuencia_open_g8):
        """Referenciar una imagen decodificada después es ref-decode-order."""
        # POC 7 se decodifica después de POC 5
        pic = secuencia_open_g8.picture(5)
        seq = secuencia_open_g8.con_pictures({5: replace(pic, refs=(4, 7), collocated_ref=4)})

        violaciones = validate_structure(seq)

        assert [(v.poc, v.rule) for v in violaciones] == [(5, 'ref-decode-order')]

    def test_tid_2_referencia_tid_3(self, secuencia_open_g8):
        """Una imagen no puede referenciar un Tid mayor que el suyo."""
        pic = secuencia_open_g8.picture(6)
        assert pic.tid == 2
        seq = secuencia_open_g8.con_pictures({6: replace(pic, refs=(4, 3))})

        violaciones = validate_structure(seq)

        assert [(v.poc, v.rule) for v in violaciones] == [(6, 'tid-layering')]

    def test_idr_con_referencias(self, secuencia_closed_g8):
        """Un IDR no puede tener referencias."""
        pic = secuencia_closed_g8.picture(64)
        seq = secuencia_closed_g8.con_pictures({64: replace(pic, refs=(56,))})

        reglas = {v.rule for v in validate_structure(seq)}

        assert 'idr-refs' in reglas

    def test_referencia_a_traves_del_idr(self, secuencia_closed_g8):
        """Referenciar a través de un IDR rompe el reset."""
        pic = secuencia_closed_g8.picture(60)
        seq = secuencia_closed_g8.con_pictures({60: replace(pic, refs=(56, 64))})

        violaciones = validate_structure(seq)

        assert (60, 'idr-reset') in [(v.poc, v.rule) for v in violaciones]
