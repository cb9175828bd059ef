"""Label algebra for compositional inference.

Three-valued inference labels, verb veridicality signatures, the nine
compositional types and the composition table that defines ground truth
for every dataset, classifier and metric downstream.
"""

from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Tuple


class Label(IntEnum):
    """Three-way inference class. Integer codes are stable across runs."""

    E = 0  # entailment
    N = 1  # neutral
    C = 2  # contradiction

    @property
    def symbol(self) -> str:
        return "enc"[self.value]

    @classmethod
    def from_symbol(cls, symbol: str) -> "Label":
        """Parse a serialized label ("e", "n" or "c")."""
        try:
            return cls("enc".index(symbol))
        except ValueError:
            raise ValueError(f"Unknown label symbol: {symbol!r}") from None

    def inverse(self) -> "Label":
        """Swap entailment and contradiction; neutral is its own inverse."""
        return Label(2 - self.value)


class Signature(IntEnum):
    """Veridicality signature of an embedding verb."""

    PLUS = 0
    NEUTRAL = 1
    MINUS = 2

    @property
    def symbol(self) -> str:
        return "+o-"[self.value]

    @classmethod
    def from_symbol(cls, symbol: str) -> "Signature":
        """Parse a serialized signature ("+", "o" or "-")."""
        try:
            return cls("+o-".index(symbol))
        except ValueError:
            raise ValueError(f"Unknown signature symbol: {symbol!r}") from None

    def as_label(self) -> Label:
        """Label of the veridical probe "SUBJ VERB to VP" => "SUBJ VP"."""
        return Label(self.value)


class FunctionType(Enum):
    """Label map induced by a verb signature."""

    F_VE = "f_ve"  # identity
    F_VN = "f_vn"  # constant neutral
    F_VC = "f_vc"  # inverse

    def apply(self, label: Label) -> Label:
        if self is FunctionType.F_VE:
            return label
        if self is FunctionType.F_VN:
            return Label.N
        return label.inverse()


# Rows: Signature (+, o, -); columns: Label (e, n, c).
COMPOSITION_TABLE: Tuple[Tuple[Label, ...], ...] = (
    (Label.E, Label.N, Label.C),
    (Label.N, Label.N, Label.N),
    (Label.C, Label.N, Label.E),
)

_FUNCTION_TYPES = (FunctionType.F_VE, FunctionType.F_VN, FunctionType.F_VC)


def compose(v: Signature, n: Label) -> Label:
    """Compositional label of an NLI pair embedded under a verb of signature ``v``."""
    return COMPOSITION_TABLE[Signature(v)][Label(n)]


def function_type(v: Signature) -> FunctionType:
    """Function type determined by the signature alone."""
    return _FUNCTION_TYPES[Signature(v)]


@dataclass(frozen=True, order=True)
class CompType:
    """One of the nine compositional types (veridical signature x NLI label).

    Attributes:
        v: Signature of the embedding verb.
        n: Label of the embedded NLI pair.
    """

    v: Signature
    n: Label

    @property
    def index(self) -> int:
        """Composition-table row number in [1..9]."""
        return int(self.v) * 3 + int(self.n) + 1

    @property
    def code(self) -> str:
        """Two-character serialization such as "+e", "oc" or "-n"."""
        return f"{self.v.symbol}{self.n.symbol}"

    @property
    def gold(self) -> Label:
        return compose(self.v, self.n)

    @property
    def function(self) -> FunctionType:
        return function_type(self.v)

    @classmethod
    def from_code(cls, code: str) -> "CompType":
        if len(code) != 2:
            raise ValueError(f"CompType code must have two characters, got {code!r}")
        return cls(Signature.from_symbol(code[0]), Label.from_symbol(code[1]))

    @classmethod
    def from_index(cls, index: int) -> "CompType":
        if not 1 <= index <= 9:
            raise ValueError(f"CompType index must be in [1..9], got {index}")
        return cls(Signature((index - 1) // 3), Label((index - 1) % 3))

    def __str__(self) -> str:
        return self.code


ALL_COMP_TYPES: Tuple[CompType, ...] = tuple(CompType.from_index(i) for i in range(1, 10))
