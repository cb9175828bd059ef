"""Tests for the label algebra."""

import pytest

from c2gen.models import (
    ALL_COMP_TYPES,
    COMPOSITION_TABLE,
    CompType,
    FunctionType,
    Label,
    Signature,
    compose,
    function_type,
)

ROWS = [
    ("+", "e", "e"),
    ("+", "n", "n"),
    ("+", "c", "c"),
    ("o", "e", "n"),
    ("o", "n", "n"),
    ("o", "c", "n"),
    ("-", "e", "c"),
    ("-", "n", "n"),
    ("-", "c", "e"),
]


class TestCompose:
    @pytest.mark.parametrize("v,n,gold", ROWS)
    def test_table_rows(self, v, n, gold):
        assert compose(Signature.from_symbol(v), Label.from_symbol(n)) == Label.from_symbol(gold)

    def test_function_type_agrees_with_table(self):
        for sig in Signature:
            for label in Label:
                assert function_type(sig).apply(label) == COMPOSITION_TABLE[sig][label]

    def test_function_types(self):
        assert function_type(Signature.PLUS) is FunctionType.F_VE
        assert function_type(Signature.NEUTRAL) is FunctionType.F_VN
        assert function_type(Signature.MINUS) is FunctionType.F_VC

    def test_inverse_keeps_neutral(self):
        assert Label.N.inverse() == Label.N
        assert Label.E.inverse() == Label.C
        assert Label.C.inverse() == Label.E


class TestCompType:
    def test_nine_types_in_row_order(self):
        assert len(ALL_COMP_TYPES) == 9
        assert [ct.index for ct in ALL_COMP_TYPES] == list(range(1, 10))
        assert [ct.code for ct in ALL_COMP_TYPES] == [v + n for v, n, _ in ROWS]

    def test_code_round_trip(self):
        for ct in ALL_COMP_TYPES:
            assert CompType.from_code(ct.code) == ct
            assert CompType.from_index(ct.index) == ct

    def test_gold_and_function(self):
        ct = CompType.from_code("-c")
        assert ct.gold == Label.E
        assert ct.function is FunctionType.F_VC
        assert str(ct) == "-c"

    def test_bad_code(self):
        with pytest.raises(ValueError):
            CompType.from_code("+x")
        with pytest.raises(ValueError):
            CompType.from_code("+")

    def test_bad_index(self):
        with pytest.raises(ValueError):
            CompType.from_index(0)
        with pytest.raises(ValueError):
            CompType.from_index(10)


class TestSymbols:
    def test_label_symbols(self):
        assert [label.symbol for label in Label] == ["e", "n", "c"]
        with pytest.raises(ValueError):
            Label.from_symbol("x")

    def test_signature_as_label(self):
        assert Signature.PLUS.as_label() == Label.E
        assert Signature.NEUTRAL.as_label() == Label.N
        assert Signature.MINUS.as_label() == Label.C
