"""
Exhaustive enumeration over Bell-label strings.

A product ensemble of n Bell-diagonal pairs is materialized as a weight per
string (numeric probability or exact BellPolynomial). The label circuits of
the protocols are applied to every string, outcomes are conditioned on the
comparison measurements, and the survivors are marginalized.
"""

import logging
from collections import Counter
from dataclasses import dataclass
from functools import reduce
from typing import Dict, Optional, Tuple, Union

import numpy as np
import pandas as pd

from bell import (
    BellDiagonal, BellLabel, BellString, bxor, measure_compare, twirl_relabel,
    f_table, shannon_entropy
)
from polynomial import BellPolynomial, WERNER, GENERAL
from utils import CapacityError, DegenerateInputError, UsageError

logger = logging.getLogger(__name__)

MAX_DENSE_PAIRS = 10
MS_DENSE_RANGE = (2, 8)
TABLE_COLUMNS = ['monomial', 'input', 'f_image', 'marginal']

Weight = Union[float, BellPolynomial]


@dataclass(frozen=True, eq=False)
class WeightedStringTable:
    """Weight of every n-pair BellString, indexed by BellString.to_index()."""

    n: int
    weights: Union[np.ndarray, Tuple[BellPolynomial, ...]]
    kind: Optional[str] = None

    @property
    def symbolic(self) -> bool:
        return self.kind is not None

    def __len__(self) -> int:
        return len(self.weights)

    def weight(self, s: BellString) -> Weight:
        if len(s) != self.n:
            raise UsageError(f"Table holds {self.n}-pair strings, got {len(s)} pairs")
        return self.weights[s.to_index()]


@dataclass(frozen=True)
class ConditionalResult:
    """
    Outcome of a post-selection. On the numeric path the posterior is
    normalized; on the symbolic path it holds raw weights summing to p_pass.
    """

    p_pass: Weight
    p_fail: Weight
    posterior: Dict[str, Weight]
    normalized: bool


def _label_weights(kind: str):
    if kind == WERNER:
        f, g = BellPolynomial.variables_of(WERNER)
        return (f, g, g, g)
    if kind == GENERAL:
        return BellPolynomial.variables_of(GENERAL)
    raise UsageError(f"Unknown symbolic assignment {kind!r}")


def product_table(dist: Union[BellDiagonal, str], n: int) -> WeightedStringTable:
    """
    Materialize dist^{(x)n} over labels. dist is either a numeric BellDiagonal
    or the name of a symbolic assignment ('werner' or 'general').
    """
    if n < 1:
        raise UsageError(f"Need at least one pair, got {n}")
    if n > MAX_DENSE_PAIRS:
        raise CapacityError(f"Dense enumeration is limited to {MAX_DENSE_PAIRS} pairs, got {n}")

    if isinstance(dist, BellDiagonal):
        p = dist.as_array()
        weights = reduce(np.multiply.outer, [p] * n).ravel()
        logger.debug("numeric product table: n=%d, %d strings", n, weights.size)
        return WeightedStringTable(n, weights)

    label_weights = _label_weights(dist)
    weights = [BellPolynomial.constant(1, dist)]
    for _ in range(n):
        weights = [w * lw for w in weights for lw in label_weights]
    logger.debug("symbolic product table (%s): n=%d, %d strings", dist, n, len(weights))
    return WeightedStringTable(n, tuple(weights), kind=dist)


def werner_table(n: int = 4) -> WeightedStringTable:
    return product_table(WERNER, n)


def general_table(n: int = 4) -> WeightedStringTable:
    return product_table(GENERAL, n)


def table_total(table: WeightedStringTable) -> Weight:
    if table.symbolic:
        return sum(table.weights, BellPolynomial.zero(table.kind))
    return float(np.sum(table.weights))


def _ls_masks() -> Tuple[np.ndarray, np.ndarray]:
    """Pass mask over input indices and the a1a2b1b2 marginal of each f-image."""
    image = np.array(f_table())
    # 5th bit of the image is c1 (x test on pair 3), 8th bit is d2 (z test on pair 4)
    passed = (((image >> 3) & 1) == 0) & ((image & 1) == 0)
    marginal = image >> 4
    return passed, marginal


def ls_exact(table: WeightedStringTable) -> ConditionalResult:
    """
    Run the 4-pair circuit on every string, keep strings whose pair-3 x test
    and pair-4 z test agree, and marginalize onto the first two pairs.
    """
    if table.n != 4:
        raise UsageError(f"The 4-pair protocol needs a 4-pair table, got n={table.n}")

    passed, marginal = _ls_masks()

    if table.symbolic:
        zero = BellPolynomial.zero(table.kind)
        acc = [zero] * 16
        p_fail = zero
        for index, w in enumerate(table.weights):
            if passed[index]:
                acc[marginal[index]] = acc[marginal[index]] + w
            else:
                p_fail = p_fail + w
        p_pass = sum(acc, zero)
        posterior = {format(j, '04b'): acc[j] for j in range(16)}
        return ConditionalResult(p_pass, p_fail, posterior, normalized=False)

    w = np.asarray(table.weights, dtype=float)
    acc = np.bincount(marginal[passed], weights=w[passed], minlength=16)
    p_pass = float(acc.sum())
    p_fail = float(w[~passed].sum())
    if p_pass <= 0:
        raise DegenerateInputError("The 4-pair protocol never passes on this input")
    posterior = {format(j, '04b'): float(acc[j] / p_pass) for j in range(16)}
    logger.debug("ls_exact: p_pass=%.12g", p_pass)
    return ConditionalResult(p_pass, p_fail, posterior, normalized=True)


def ls_weight_classes(result: ConditionalResult) -> Dict[Weight, int]:
    """Distinct posterior weights and how many marginal strings carry each."""
    return dict(Counter(w for w in result.posterior.values() if w != 0))


def generate_table() -> pd.DataFrame:
    """
    The 64 input strings that pass the 4-pair protocol under Werner weights,
    with their monomial, f-image and two-pair marginal.
    """
    table = werner_table(4)
    passed, _ = _ls_masks()
    image = f_table()

    rows = []
    for index in np.flatnonzero(passed):
        s = BellString.from_index(int(index), 4)
        f_image = BellString.from_index(image[index], 4).to_bits()
        rows.append({
            'monomial': table.weights[index].monomial(),
            'input': s.to_bits(),
            'f_image': f_image,
            'marginal': f_image[:4],
        })

    df = pd.DataFrame(rows, columns=TABLE_COLUMNS)
    return df.sort_values(['marginal', 'input'], kind='stable').reset_index(drop=True)


def write_table_csv(path_or_buffer, df: Optional[pd.DataFrame] = None) -> None:
    if df is None:
        df = generate_table()
    df.to_csv(path_or_buffer, index=False, lineterminator='\n')


def load_reference_table(path) -> pd.DataFrame:
    """Read a golden table CSV; every column is kept as text."""
    df = pd.read_csv(path, dtype=str)
    missing = [c for c in TABLE_COLUMNS if c not in df.columns]
    if missing:
        raise UsageError(f"Reference table is missing columns: {', '.join(missing)}")
    return df[TABLE_COLUMNS]


def recurrence_outcomes(dist: BellDiagonal, relabel: bool = True) -> Tuple[np.ndarray, float]:
    """
    Unnormalized surviving-source weights of one recurrence round, found by
    enumerating all 16 (source, target) label pairs.
    """
    acc = np.zeros(4)
    for source in BellLabel:
        for target in BellLabel:
            weight = dist[source] * dist[target]
            new_source, new_target = bxor(source, target)
            if measure_compare(new_target, 'z') != 0:
                continue
            kept = twirl_relabel(new_source) if relabel else new_source
            acc[kept] += weight
    return acc, float(acc.sum())


def recurrence_exact(dist: BellDiagonal, relabel: bool = True) -> Tuple[BellDiagonal, float]:
    acc, p_pass = recurrence_outcomes(dist, relabel=relabel)
    if p_pass <= 0:
        raise DegenerateInputError("Recurrence round never passes on this input")
    return BellDiagonal.from_sequence(acc / p_pass), p_pass


def _dense_labels(m: int) -> np.ndarray:
    index = np.arange(4 ** m, dtype=np.int64)
    shifts = 2 * (m - 1 - np.arange(m))
    return (index[:, None] >> shifts) & 3


def ms_exact(dist: BellDiagonal, m: int) -> Tuple[float, float]:
    """
    Block of m pairs: pairs 1..m-1 are bxor'ed into pair m, pair m is
    compared along z. Returns (p_pass, joint entropy of the surviving
    m-1 source labels).
    """
    lo, hi = MS_DENSE_RANGE
    if not lo <= m <= hi:
        raise CapacityError(f"Dense block enumeration supports {lo} <= m <= {hi}, got {m}")

    labels = _dense_labels(m)
    weights = np.prod(dist.as_array()[labels], axis=1)
    phase = labels >> 1
    amplitude = labels & 1

    passed = np.bitwise_xor.reduce(amplitude, axis=1) == 0
    source_phase = phase[:, :-1] ^ phase[:, -1:]
    source_labels = (source_phase << 1) | amplitude[:, :-1]
    out_index = (source_labels << (2 * (m - 2 - np.arange(m - 1)))).sum(axis=1)

    posterior = np.bincount(out_index[passed], weights=weights[passed], minlength=4 ** (m - 1))
    p_pass = float(posterior.sum())
    if p_pass <= 0:
        raise DegenerateInputError(f"Block of {m} never passes on this input")
    h = shannon_entropy(posterior / p_pass)
    logger.debug("ms_exact: m=%d p_pass=%.12g H=%.12g", m, p_pass, h)
    return p_pass, h
