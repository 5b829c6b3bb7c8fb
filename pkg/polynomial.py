"""
Exact polynomials for symbolic enumeration.

BellPolynomial wraps an element of a sympy integer polynomial ring. Two
variable sets exist: the Werner pair (F, G) and the general Bell-diagonal
quadruple (p00, p01, p10, p11).
"""

import math
from typing import Dict, Mapping, Sequence, Tuple, Union

from sympy import ZZ
from sympy.polys.rings import ring

from utils import UsageError, format_monomial

WERNER = 'werner'
GENERAL = 'general'

_RINGS = {
    WERNER: ring("F,G", ZZ)[0],
    GENERAL: ring("p00,p01,p10,p11", ZZ)[0],
}

Number = Union[int, float]


class BellPolynomial:
    """Polynomial with integer coefficients over one of the two variable sets."""

    __slots__ = ('_element', '_kind')

    def __init__(self, element, kind: str):
        self._element = element
        self._kind = kind

    @classmethod
    def _ring(cls, kind: str):
        try:
            return _RINGS[kind]
        except KeyError:
            raise UsageError(f"Unknown variable set {kind!r}; use {WERNER!r} or {GENERAL!r}") from None

    @classmethod
    def variables_of(cls, kind: str) -> Tuple['BellPolynomial', ...]:
        poly_ring = cls._ring(kind)
        return tuple(cls(g, kind) for g in poly_ring.gens)

    @classmethod
    def constant(cls, value: int, kind: str) -> 'BellPolynomial':
        return cls(cls._ring(kind)(value), kind)

    @classmethod
    def zero(cls, kind: str) -> 'BellPolynomial':
        return cls.constant(0, kind)

    @classmethod
    def from_coefficients(cls, coefficients: Mapping[Tuple[int, ...], int], kind: str) -> 'BellPolynomial':
        poly_ring = cls._ring(kind)
        return cls(poly_ring.from_dict({tuple(m): int(c) for m, c in coefficients.items()}), kind)

    @property
    def kind(self) -> str:
        return self._kind

    @property
    def names(self) -> Tuple[str, ...]:
        return tuple(str(s) for s in self._element.ring.symbols)

    def _coerce(self, other):
        if isinstance(other, BellPolynomial):
            if other._kind != self._kind:
                raise UsageError(f"Cannot combine {self._kind} and {other._kind} polynomials")
            return other._element
        if isinstance(other, int):
            return self._element.ring(other)
        return NotImplemented

    def __add__(self, other):
        element = self._coerce(other)
        if element is NotImplemented:
            return NotImplemented
        return BellPolynomial(self._element + element, self._kind)

    __radd__ = __add__

    def __mul__(self, other):
        element = self._coerce(other)
        if element is NotImplemented:
            return NotImplemented
        return BellPolynomial(self._element * element, self._kind)

    __rmul__ = __mul__

    def __pow__(self, exponent: int):
        return BellPolynomial(self._element ** exponent, self._kind)

    def __eq__(self, other) -> bool:
        if isinstance(other, BellPolynomial):
            return self._kind == other._kind and self.coefficients() == other.coefficients()
        if isinstance(other, int):
            return self.coefficients() == ({} if other == 0 else {(0,) * len(self.names): other})
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self._kind, frozenset(self.coefficients().items())))

    def coefficients(self) -> Dict[Tuple[int, ...], int]:
        """Exponent vector -> integer coefficient, zero terms omitted."""
        return {tuple(monom): int(coeff) for monom, coeff in self._element.terms() if coeff}

    def is_zero(self) -> bool:
        return not self.coefficients()

    def evaluate(self, point: Union[Sequence[Number], Mapping[str, Number]]) -> float:
        """Numeric value at a point given in variable order or by name."""
        if isinstance(point, Mapping):
            values = [float(point[name]) for name in self.names]
        else:
            values = [float(v) for v in point]
        if len(values) != len(self.names):
            raise UsageError(f"Expected {len(self.names)} values for {self.names}, got {len(values)}")
        return math.fsum(
            coeff * math.prod(v ** e for v, e in zip(values, monom))
            for monom, coeff in self.coefficients().items()
        )

    def monomial(self) -> str:
        """Render a single-term, unit-coefficient polynomial such as "F^2G^2"."""
        terms = self.coefficients()
        if len(terms) != 1:
            raise UsageError(f"Not a monomial: {self}")
        (monom, coeff), = terms.items()
        text = format_monomial(monom, self.names)
        return text if coeff == 1 else f"{coeff}{text}"

    def __str__(self) -> str:
        terms = sorted(self.coefficients().items(), key=lambda t: (-sum(t[0]), tuple(-e for e in t[0])))
        if not terms:
            return '0'
        rendered = []
        for monom, coeff in terms:
            text = format_monomial(monom, self.names)
            if text == '1':
                rendered.append(str(coeff))
            else:
                rendered.append(text if coeff == 1 else f"{coeff}{text}")
        return ' + '.join(rendered)

    def __repr__(self) -> str:
        return f"BellPolynomial({self}, {self._kind!r})"
