"""
Bell-state label algebra.

A Bell state is tracked by two classical bits, (phase, amplitude):
    PHI_PLUS = 00, PSI_PLUS = 01, PHI_MINUS = 10, PSI_MINUS = 11
Global phases are dropped. Every gate used by the protocols (bilateral XOR,
sigma_x, B_x) permutes these labels, so a product of n Bell-diagonal pairs is
a probability distribution over 2n-bit strings.
"""

import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Iterable, Sequence, Tuple

import numpy as np
from scipy.stats import entropy

from utils import (
    DomainError, UsageError, NORMALIZATION_TOL, ENTROPY_TOL,
    validate_distribution, summarize_errors, bits_to_str, str_to_bits
)

logger = logging.getLogger(__name__)


class BellLabel(IntEnum):
    PHI_PLUS = 0
    PSI_PLUS = 1
    PHI_MINUS = 2
    PSI_MINUS = 3

    @property
    def phase(self) -> int:
        return self.value >> 1

    @property
    def amplitude(self) -> int:
        return self.value & 1

    @classmethod
    def from_bits(cls, phase: int, amplitude: int) -> 'BellLabel':
        return cls(((phase & 1) << 1) | (amplitude & 1))

    @property
    def bits(self) -> str:
        return f"{self.phase}{self.amplitude}"

    @property
    def symbol(self) -> str:
        return _SYMBOLS[self]


_SYMBOLS = {
    BellLabel.PHI_PLUS: 'Φ+',
    BellLabel.PSI_PLUS: 'Ψ+',
    BellLabel.PHI_MINUS: 'Φ−',
    BellLabel.PSI_MINUS: 'Ψ−',
}


@dataclass(frozen=True)
class BellDiagonal:
    """Weights of the four Bell states in a Bell-diagonal two-qubit state."""

    p00: float
    p01: float
    p10: float
    p11: float

    def __post_init__(self):
        _, errors = validate_distribution(self.probabilities, tol=NORMALIZATION_TOL)
        if errors:
            raise DomainError(f"Invalid Bell-diagonal state: {summarize_errors(errors)}")

    @classmethod
    def werner(cls, fidelity: float) -> 'BellDiagonal':
        """F on PHI_PLUS and G = (1-F)/3 on each other label."""
        if not 0.0 <= fidelity <= 1.0:
            raise DomainError(f"Fidelity must lie in [0, 1], got {fidelity}")
        g = (1.0 - fidelity) / 3.0
        return cls(fidelity, g, g, g)

    @classmethod
    def from_sequence(cls, values: Sequence[float]) -> 'BellDiagonal':
        if len(values) != 4:
            raise UsageError(f"A Bell-diagonal state needs 4 probabilities, got {len(values)}")
        return cls(*(float(v) for v in values))

    @classmethod
    def pure(cls) -> 'BellDiagonal':
        return cls(1.0, 0.0, 0.0, 0.0)

    @classmethod
    def uniform(cls) -> 'BellDiagonal':
        return cls(0.25, 0.25, 0.25, 0.25)

    @property
    def probabilities(self) -> Tuple[float, float, float, float]:
        return (self.p00, self.p01, self.p10, self.p11)

    @property
    def fidelity(self) -> float:
        return self.p00

    def as_array(self) -> np.ndarray:
        return np.array(self.probabilities, dtype=float)

    def __getitem__(self, label: int) -> float:
        return self.probabilities[int(label)]

    def is_werner(self, tol: float = 1e-12) -> bool:
        return abs(self.p01 - self.p10) <= tol and abs(self.p10 - self.p11) <= tol


@dataclass(frozen=True)
class BellString:
    """A joint pure Bell product state of n pairs, pair 1 first."""

    labels: Tuple[BellLabel, ...]

    def __post_init__(self):
        object.__setattr__(self, 'labels', tuple(BellLabel(l) for l in self.labels))

    def __len__(self) -> int:
        return len(self.labels)

    def __getitem__(self, i: int) -> BellLabel:
        return self.labels[i]

    @classmethod
    def from_bits(cls, text: str) -> 'BellString':
        bits = str_to_bits(text)
        if len(bits) % 2:
            raise UsageError(f"Bit string must have even length, got {len(bits)}")
        return cls(tuple(BellLabel.from_bits(bits[i], bits[i + 1]) for i in range(0, len(bits), 2)))

    @classmethod
    def from_index(cls, index: int, n: int) -> 'BellString':
        """Inverse of to_index: the index read in binary is the bit string."""
        if not 0 <= index < 4 ** n:
            raise UsageError(f"Index {index} out of range for {n} pairs")
        return cls(tuple(BellLabel((index >> (2 * (n - 1 - i))) & 3) for i in range(n)))

    def to_bits(self) -> str:
        return ''.join(label.bits for label in self.labels)

    def to_index(self) -> int:
        index = 0
        for label in self.labels:
            index = (index << 2) | int(label)
        return index

    def replace(self, position: int, label: BellLabel) -> 'BellString':
        labels = list(self.labels)
        labels[position] = label
        return BellString(tuple(labels))

    def __str__(self) -> str:
        return self.to_bits()


def bxor(source: BellLabel, target: BellLabel) -> Tuple[BellLabel, BellLabel]:
    """
    Bilateral XOR (both parties apply CNOT source -> target).
    The source picks up the target's phase bit; the target picks up the
    source's amplitude bit.
    """
    new_source = BellLabel.from_bits(source.phase ^ target.phase, source.amplitude)
    new_target = BellLabel.from_bits(target.phase, target.amplitude ^ source.amplitude)
    return new_source, new_target


def bxor_string(s: BellString, source: int, target: int) -> BellString:
    """Apply bxor between two positions of a BellString."""
    if source == target:
        raise UsageError("bxor needs two distinct pairs")
    new_source, new_target = bxor(s[source], s[target])
    return s.replace(source, new_source).replace(target, new_target)


def sigma_x_relabel(label: BellLabel) -> BellLabel:
    """Unilateral sigma_x: flips the amplitude bit."""
    return BellLabel.from_bits(label.phase, label.amplitude ^ 1)


def bx_relabel(label: BellLabel) -> BellLabel:
    """Bilateral pi/2 x-rotation: swaps PHI_PLUS and PSI_PLUS."""
    if label == BellLabel.PHI_PLUS:
        return BellLabel.PSI_PLUS
    if label == BellLabel.PSI_PLUS:
        return BellLabel.PHI_PLUS
    return label


def twirl_relabel(label: BellLabel) -> BellLabel:
    """sigma_x followed by B_x; net effect swaps PHI_MINUS and PSI_MINUS."""
    return bx_relabel(sigma_x_relabel(label))


def measure_compare(label: BellLabel, axis: str) -> int:
    """
    Outcome comparison when both parties measure along the same axis.
    0: identical results, 1: opposite results.
    """
    if axis == 'z':
        return label.amplitude
    if axis == 'x':
        return label.phase
    raise UsageError(f"Measurement axis must be 'x' or 'z', got {axis!r}")


def apply_f(s: BellString) -> BellString:
    """
    The 4-pair XOR circuit as a map on 8-bit strings a1a2b1b2c1c2d1d2:
    (a1^d1, a2^c2, b1^d1, b2^c2, a1^b1^c1^d1, c2, d1, a2^b2^c2^d2)
    """
    if len(s) != 4:
        raise UsageError(f"apply_f needs exactly 4 pairs, got {len(s)}")
    a1, a2, b1, b2, c1, c2, d1, d2 = str_to_bits(s.to_bits())
    image = (a1 ^ d1, a2 ^ c2, b1 ^ d1, b2 ^ c2, a1 ^ b1 ^ c1 ^ d1, c2, d1, a2 ^ b2 ^ c2 ^ d2)
    return BellString.from_bits(bits_to_str(image))


# Pair positions a=0, b=1, c=2, d=3; each entry is (source, target).
F_CIRCUIT = ((2, 0), (2, 1), (0, 3), (1, 3), (2, 3))


def f_circuit(s: BellString, gates: Iterable[Tuple[int, int]] = F_CIRCUIT) -> BellString:
    """Run a sequence of bxor gates; with the default gates this equals apply_f."""
    for source, target in gates:
        s = bxor_string(s, source, target)
    return s


@lru_cache(maxsize=None)
def f_table() -> Tuple[int, ...]:
    """apply_f tabulated over all 256 string indices."""
    table = tuple(apply_f(BellString.from_index(i, 4)).to_index() for i in range(256))
    logger.debug("tabulated apply_f over %d strings", len(table))
    return table


def shannon_entropy(dist: Iterable[float]) -> float:
    """Shannon entropy in bits, with 0 log 0 = 0."""
    values, errors = validate_distribution(list(dist), tol=ENTROPY_TOL)
    if errors:
        raise DomainError(f"Not a probability distribution: {summarize_errors(errors)}")
    return float(entropy(values, base=2))


def werner_entropy(fidelity: float) -> float:
    return shannon_entropy(BellDiagonal.werner(fidelity).probabilities)
