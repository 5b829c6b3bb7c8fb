"""
Yield formulas for the purification protocols and the comparison between them.

Yields are output PHI_PLUS pairs per input pair. Formula values below zero are
clamped to 0: a protocol that would consume more entanglement than it makes
is simply not run.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Any, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy.optimize import bisect, brentq
from scipy.special import entr

from bell import BellDiagonal, shannon_entropy, werner_entropy
from enumerator import ls_exact, product_table
from utils import (
    DegenerateInputError, DomainError, UsageError, clamp_yield, round_sig, validate_grid
)

logger = logging.getLogger(__name__)

HASHING = 'hashing'
MS = 'ms'
LS = 'ls'
RECURRENCE = 'recurrence'
COMBINED = 'combined'
TERMINALS = (HASHING, MS, LS)
PROTOCOLS = (HASHING, RECURRENCE, MS, LS, COMBINED)

DEFAULT_K_MAX = 64
DEFAULT_M_RANGE = (2, 64)
MAX_BLOCK_SIZE = 128
BISECT_TOL = 5e-3
DEFAULT_COMPETITORS = (RECURRENCE, MS)
COMBINED_TERMINALS = (HASHING, LS)

CURVE_COLUMNS = [
    'F', 'yield_hashing', 'best_k', 'yield_recurrence', 'best_m',
    'yield_ms', 'yield_ls', 'yield_combined',
]

WINNER_COLUMNS = [
    'F', 'yield_ls', 'best_competitor', 'yield_competitor', 'best_k', 'best_m', 'winner',
]

CURVE_COLUMN_OWNERS = {
    'yield_hashing': HASHING,
    'best_k': RECURRENCE,
    'yield_recurrence': RECURRENCE,
    'best_m': MS,
    'yield_ms': MS,
    'yield_ls': LS,
    'yield_combined': COMBINED,
}

_LN2 = math.log(2.0)


def hashing_yield(dist: BellDiagonal) -> float:
    """Universal hashing: 1 - S(rho)."""
    return clamp_yield(1.0 - shannon_entropy(dist.probabilities))


def recurrence_step(dist: BellDiagonal) -> Tuple[BellDiagonal, float]:
    """One recurrence round, including the sigma_x/B_x relabeling of survivors."""
    p00, p01, p10, p11 = dist.probabilities
    p_pass = p00 ** 2 + p01 ** 2 + p10 ** 2 + p11 ** 2 + 2 * p00 * p10 + 2 * p01 * p11
    if p_pass <= 0:
        raise DegenerateInputError("Recurrence round has zero pass probability")
    evolved = BellDiagonal(
        (p00 ** 2 + p10 ** 2) / p_pass,
        (p01 ** 2 + p11 ** 2) / p_pass,
        2 * p01 * p11 / p_pass,
        2 * p00 * p10 / p_pass,
    )
    return evolved, p_pass


def iterate_recurrence(dist: BellDiagonal, k_max: int) -> Iterator[Tuple[int, BellDiagonal, float]]:
    """
    Yields (k, dist after k rounds, pair-cost factor prod(p_pass_i / 2)).
    Each round keeps at most one pair out of every two.
    """
    if k_max < 0:
        raise UsageError(f"k_max must be >= 0, got {k_max}")
    factor = 1.0
    yield 0, dist, factor
    for k in range(1, k_max + 1):
        dist, p_pass = recurrence_step(dist)
        factor *= p_pass / 2.0
        yield k, dist, factor


@lru_cache(maxsize=None)
def _compositions(total: int) -> Tuple[np.ndarray, np.ndarray]:
    """Label counts (n00, n01, n10, n11) summing to total, with multinomial counts."""
    counts = [
        (a, b, c, total - a - b - c)
        for a in range(total + 1)
        for b in range(total + 1 - a)
        for c in range(total + 1 - a - b)
    ]
    fact = math.factorial
    multiplicity = [fact(total) // (fact(a) * fact(b) * fact(c) * fact(d)) for a, b, c, d in counts]
    return np.array(counts, dtype=np.int64), np.array(multiplicity, dtype=float)


def ms_posterior(dist: BellDiagonal, m: int) -> Tuple[float, float]:
    """
    Pass probability and joint source entropy of an m-pair block.

    A surviving source tuple's weight depends only on how many of each label
    it holds and on the target's two possible phase bits, so the sum runs over
    label counts instead of 4^(m-1) strings.
    """
    if not 2 <= m <= MAX_BLOCK_SIZE:
        raise UsageError(f"Block size must lie in [2, {MAX_BLOCK_SIZE}], got {m}")
    counts, multiplicity = _compositions(m - 1)
    p = dist.as_array()
    phase_flipped = p[[2, 3, 0, 1]]
    parity = (counts[:, 1] + counts[:, 3]) & 1

    weights = (
        p[parity] * np.prod(p ** counts, axis=1)
        + p[2 + parity] * np.prod(phase_flipped ** counts, axis=1)
    )
    p_pass = float(multiplicity @ weights)
    if p_pass <= 0:
        raise DegenerateInputError(f"Block of {m} has zero pass probability")
    h = float(multiplicity @ entr(weights / p_pass)) / _LN2
    return p_pass, h


def ms_yield_from(p_pass: float, entropy_bits: float, m: int) -> float:
    return clamp_yield(p_pass * (m - 1) / m * (1.0 - entropy_bits / (m - 1)))


def ms_yield(dist: BellDiagonal, m: int) -> float:
    try:
        p_pass, h = ms_posterior(dist, m)
    except DegenerateInputError:
        # e.g. odd blocks of pure PSI states: the parity test always fails
        return 0.0
    return ms_yield_from(p_pass, h, m)


def best_ms_yield(dist: BellDiagonal, m_range: Tuple[int, int] = DEFAULT_M_RANGE) -> Tuple[int, float]:
    """Best block size in the inclusive range; ties go to the smaller block."""
    lo, hi = m_range
    best_m, best = lo, -1.0
    for m in range(lo, hi + 1):
        value = ms_yield(dist, m)
        if value > best:
            best_m, best = m, value
    return best_m, best


def ls_yield_from(p_pass: float, entropy_bits: float) -> float:
    return clamp_yield(p_pass / 2.0 * (1.0 - entropy_bits / 2.0))


def ls_yield(dist: BellDiagonal) -> float:
    """The 4-pair protocol, evaluated by enumerating all 256 strings."""
    result = ls_exact(product_table(dist, 4))
    h = shannon_entropy(result.posterior.values())
    return ls_yield_from(result.p_pass, h)


def _class_entropy(classes: Sequence[Tuple[float, int]], p_pass: float) -> float:
    return sum(mult * float(entr(weight / p_pass)) for weight, mult in classes) / _LN2


def ls_closed_form_werner(fidelity: float) -> Tuple[float, float, float]:
    """(p_pass, H(Q), yield) from the Werner closed forms."""
    if not 0.0 <= fidelity <= 1.0:
        raise DomainError(f"Fidelity must lie in [0, 1], got {fidelity}")
    f = fidelity
    g = (1.0 - f) / 3.0
    p_pass = f ** 4 + 18 * f ** 2 * g ** 2 + 24 * f * g ** 3 + 21 * g ** 4
    classes = [
        (f ** 4 + 3 * g ** 4, 1),
        (2 * f ** 2 * g ** 2 + 2 * g ** 4, 9),
        (4 * f * g ** 3, 6),
    ]
    h = _class_entropy(classes, p_pass)
    return p_pass, h, ls_yield_from(p_pass, h)


def ls_closed_form_general(dist: BellDiagonal) -> Tuple[float, float, float]:
    """(p_pass, H(Q), yield) from the four-variable closed forms."""
    p00, p01, p10, p11 = dist.probabilities
    quartic = p00 ** 4 + p01 ** 4 + p10 ** 4 + p11 ** 4
    product = p00 * p01 * p10 * p11
    pairings = [
        2 * p00 ** 2 * p01 ** 2 + 2 * p10 ** 2 * p11 ** 2,
        2 * p00 ** 2 * p10 ** 2 + 2 * p01 ** 2 * p11 ** 2,
        2 * p00 ** 2 * p11 ** 2 + 2 * p01 ** 2 * p10 ** 2,
    ]
    p_pass = quartic + 24 * product + 3 * sum(pairings)
    classes = [(quartic, 1), (4 * product, 6)] + [(c, 3) for c in pairings]
    h = _class_entropy(classes, p_pass)
    return p_pass, h, ls_yield_from(p_pass, h)


@dataclass(frozen=True)
class ProtocolSchedule:
    """k recurrence rounds followed by a terminal protocol."""

    recurrence_rounds: int = 0
    terminal: str = HASHING
    block_size: Optional[int] = None

    def __post_init__(self):
        if self.recurrence_rounds < 0:
            raise UsageError(f"Recurrence rounds must be >= 0, got {self.recurrence_rounds}")
        if self.terminal not in TERMINALS:
            raise UsageError(f"Unknown terminal {self.terminal!r}; choose from {', '.join(TERMINALS)}")
        if self.terminal == MS:
            if self.block_size is None or not 2 <= self.block_size <= MAX_BLOCK_SIZE:
                raise UsageError(f"ms terminal needs a block size in [2, {MAX_BLOCK_SIZE}]")

    def label(self) -> str:
        name = f"ms(m={self.block_size})" if self.terminal == MS else self.terminal
        return f"{self.recurrence_rounds}x recurrence -> {name}"


def terminal_yield(dist: BellDiagonal, terminal: str, block_size: Optional[int] = None) -> float:
    if terminal == HASHING:
        return hashing_yield(dist)
    if terminal == LS:
        return ls_yield(dist)
    if terminal == MS:
        if block_size is None:
            raise UsageError("ms terminal needs a block size")
        return ms_yield(dist, block_size)
    raise UsageError(f"Unknown terminal {terminal!r}")


def pipeline_yield(dist: BellDiagonal, schedule: ProtocolSchedule, k_max: int = DEFAULT_K_MAX) -> float:
    if schedule.recurrence_rounds > k_max:
        raise UsageError(f"Schedule asks for {schedule.recurrence_rounds} rounds, maximum is {k_max}")
    factor = 1.0
    for _, dist, factor in iterate_recurrence(dist, schedule.recurrence_rounds):
        pass
    return clamp_yield(factor * terminal_yield(dist, schedule.terminal, schedule.block_size))


def recurrence_schedule_yield(dist: BellDiagonal, terminal: str = HASHING,
                              k_max: int = DEFAULT_K_MAX,
                              block_size: Optional[int] = None) -> Tuple[int, float]:
    """
    Best number of recurrence rounds before the terminal protocol.
    Terminal yields never exceed 1, so once the accumulated pair-cost factor
    drops to the best yield found, no later round can win.
    """
    best_k, best = 0, -1.0
    for k, evolved, factor in iterate_recurrence(dist, k_max):
        if factor <= best:
            break
        value = factor * terminal_yield(evolved, terminal, block_size)
        if value > best:
            best_k, best = k, value
    return best_k, clamp_yield(best)


def best_pipeline(dist: BellDiagonal, k_max: int = DEFAULT_K_MAX,
                  terminals: Sequence[str] = COMBINED_TERMINALS) -> Dict[str, Any]:
    """Best (k, terminal) over the given terminals; ties keep the earlier terminal."""
    best = {'combined_k': 0, 'combined_terminal': terminals[0], 'yield_combined': -1.0}
    for terminal in terminals:
        k, value = recurrence_schedule_yield(dist, terminal, k_max)
        if value > best['yield_combined']:
            best = {'combined_k': k, 'combined_terminal': terminal, 'yield_combined': value}
    return best


@dataclass(frozen=True)
class YieldPoint:
    fidelity: float
    hashing: float
    recurrence: float
    best_k: Optional[int]
    ms: float
    best_m: Optional[int]
    ls: float
    combined: float
    combined_k: Optional[int]
    combined_terminal: Optional[str]

    def as_row(self, digits: int = 12) -> Dict[str, Any]:
        return {
            'F': round_sig(self.fidelity, digits),
            'yield_hashing': round_sig(self.hashing, digits),
            'best_k': self.best_k,
            'yield_recurrence': round_sig(self.recurrence, digits),
            'best_m': self.best_m,
            'yield_ms': round_sig(self.ms, digits),
            'yield_ls': round_sig(self.ls, digits),
            'yield_combined': round_sig(self.combined, digits),
        }


class YieldAnalyzer:
    """Evaluates every protocol family on a state and compares them over fidelity grids."""

    def __init__(self, k_max: int = DEFAULT_K_MAX, m_range: Tuple[int, int] = DEFAULT_M_RANGE,
                 tol: float = BISECT_TOL, combined_terminals: Sequence[str] = COMBINED_TERMINALS):
        if k_max < 0:
            raise UsageError(f"k_max must be >= 0, got {k_max}")
        lo, hi = m_range
        if not 2 <= lo <= hi <= MAX_BLOCK_SIZE:
            raise UsageError(f"Block size range must satisfy 2 <= m_min <= m_max <= {MAX_BLOCK_SIZE}")
        if not tol > 0:
            raise UsageError(f"Tolerance must be positive, got {tol}")
        self.k_max = k_max
        self.m_range = (lo, hi)
        self.tol = tol
        self.combined_terminals = tuple(combined_terminals)

    def config(self) -> Dict[str, Any]:
        return {
            'k_max': self.k_max,
            'm_min': self.m_range[0],
            'm_max': self.m_range[1],
            'tol': self.tol,
            'combined_terminals': list(self.combined_terminals),
        }

    def evaluate_point(self, dist: BellDiagonal, protocols: Sequence[str] = PROTOCOLS) -> YieldPoint:
        """All requested yields at one state; skipped protocols come back as NaN."""
        unknown = [p for p in protocols if p not in PROTOCOLS]
        if unknown:
            raise UsageError(f"Unknown protocol {unknown[0]!r}; choose from {', '.join(PROTOCOLS)}")
        nan = float('nan')
        best_k, recurrence = (recurrence_schedule_yield(dist, HASHING, self.k_max)
                              if RECURRENCE in protocols else (None, nan))
        best_m, ms = best_ms_yield(dist, self.m_range) if MS in protocols else (None, nan)
        combined = (best_pipeline(dist, self.k_max, self.combined_terminals) if COMBINED in protocols
                    else {'yield_combined': nan, 'combined_k': None, 'combined_terminal': None})
        return YieldPoint(
            fidelity=dist.fidelity,
            hashing=hashing_yield(dist) if HASHING in protocols else nan,
            recurrence=recurrence,
            best_k=best_k,
            ms=ms,
            best_m=best_m,
            ls=ls_yield(dist) if LS in protocols else nan,
            combined=combined['yield_combined'],
            combined_k=combined['combined_k'],
            combined_terminal=combined['combined_terminal'],
        )

    @staticmethod
    def fidelity_grid(f_min: float, f_max: float, step: float) -> np.ndarray:
        errors = validate_grid(f_min, f_max, step)
        if errors:
            raise UsageError('; '.join(errors))
        count = int(math.floor((f_max - f_min) / step + 1e-9))
        grid = np.round(f_min + step * np.arange(count + 1), 12)
        return np.minimum(grid, f_max)

    def curve(self, f_min: float = 0.25, f_max: float = 1.0, step: float = 0.001,
              protocols: Sequence[str] = PROTOCOLS) -> pd.DataFrame:
        """Werner yield curves, one row per grid fidelity."""
        points = [
            self.evaluate_point(BellDiagonal.werner(float(f)), protocols)
            for f in self.fidelity_grid(f_min, f_max, step)
        ]
        logger.debug("curve: %d points on [%g, %g]", len(points), f_min, f_max)
        return self.points_frame(points, protocols)

    @staticmethod
    def points_frame(points: Sequence[YieldPoint], protocols: Sequence[str] = PROTOCOLS) -> pd.DataFrame:
        """Curve rows with the columns of skipped protocols left out."""
        columns = ['F'] + [c for c in CURVE_COLUMNS[1:] if CURVE_COLUMN_OWNERS[c] in protocols]
        return pd.DataFrame([p.as_row() for p in points], columns=CURVE_COLUMNS)[columns]

    def protocol_yield(self, dist: BellDiagonal, protocol: str) -> Tuple[float, Dict[str, Any]]:
        """Yield of one protocol family, optimized over its free parameters."""
        if protocol == HASHING:
            return hashing_yield(dist), {}
        if protocol == RECURRENCE:
            k, value = recurrence_schedule_yield(dist, HASHING, self.k_max)
            return value, {'best_k': k}
        if protocol == MS:
            m, value = best_ms_yield(dist, self.m_range)
            return value, {'best_m': m}
        if protocol == LS:
            return ls_yield(dist), {}
        if protocol == COMBINED:
            info = best_pipeline(dist, self.k_max, self.combined_terminals)
            return info['yield_combined'], info
        raise UsageError(f"Unknown protocol {protocol!r}; choose from {', '.join(PROTOCOLS)}")

    def competitor_yield(self, dist: BellDiagonal,
                         competitors: Sequence[str] = DEFAULT_COMPETITORS) -> Tuple[float, Dict[str, Any]]:
        best, info = 0.0, {'competitor': None}
        for protocol in competitors:
            value, details = self.protocol_yield(dist, protocol)
            info[f'yield_{protocol}'] = value
            info.update(details)
            if info['competitor'] is None or value > best:
                best, info['competitor'] = value, protocol
        return best, info

    def margin(self, fidelity: float, competitors: Sequence[str] = DEFAULT_COMPETITORS) -> float:
        """ls yield minus the best competitor at a Werner fidelity."""
        dist = BellDiagonal.werner(float(fidelity))
        best, _ = self.competitor_yield(dist, competitors)
        return ls_yield(dist) - best

    def _scan_rows(self, grid: np.ndarray, competitors: Sequence[str]) -> List[Dict[str, Any]]:
        """One pass over the grid: ls yield, best competitor and the margin between them."""
        rows = []
        for f in grid:
            dist = BellDiagonal.werner(float(f))
            best, info = self.competitor_yield(dist, competitors)
            ls = ls_yield(dist)
            rows.append({
                'F': round_sig(float(f)),
                'yield_ls': round_sig(ls),
                'best_competitor': info['competitor'],
                'yield_competitor': round_sig(best),
                'best_k': info.get('best_k'),
                'best_m': info.get('best_m'),
                'winner': LS if ls > best else info['competitor'],
                'margin': ls - best,
            })
        return rows

    @staticmethod
    def _winner_frame(rows: Sequence[Dict[str, Any]]) -> pd.DataFrame:
        return pd.DataFrame(list(rows), columns=WINNER_COLUMNS + ['margin'])[WINNER_COLUMNS]

    def winner_table(self, f_min: float, f_max: float, step: float,
                     competitors: Sequence[str] = DEFAULT_COMPETITORS) -> pd.DataFrame:
        """Per-point ls yield, best competitor and winner, for auditing a scan."""
        return self._winner_frame(self._scan_rows(self.fidelity_grid(f_min, f_max, step), competitors))

    def _refine(self, f_out: float, f_in: float, margin_out: float,
                competitors: Sequence[str]) -> float:
        """Boundary between a losing grid point and a winning one."""
        if margin_out >= 0:
            # both sides are non-negative; no strict sign change to refine
            return f_in
        lo, hi = sorted((f_out, f_in))
        return float(brentq(lambda f: self.margin(f, competitors), lo, hi, xtol=self.tol))

    def crossover_report(self, f_min: float, f_max: float, step: float,
                         competitors: Sequence[str] = DEFAULT_COMPETITORS
                         ) -> Tuple[List[Dict[str, Any]], pd.DataFrame]:
        """
        Maximal fidelity intervals where ls strictly beats every competitor,
        with endpoints refined between grid points, plus the per-point
        winner table the intervals were read from.
        """
        grid = self.fidelity_grid(f_min, f_max, step)
        rows = self._scan_rows(grid, competitors)
        margins = np.array([row['margin'] for row in rows])
        wins = margins > 0

        intervals = []
        for won, run in itertools.groupby(range(len(grid)), key=lambda i: wins[i]):
            if not won:
                continue
            run = list(run)
            i, j = run[0], run[-1]
            f_lo = float(grid[i]) if i == 0 else self._refine(grid[i - 1], grid[i], margins[i - 1], competitors)
            f_hi = float(grid[j]) if j == len(grid) - 1 else self._refine(grid[j + 1], grid[j], margins[j + 1], competitors)
            intervals.append({
                'f_lo': f_lo,
                'f_hi': f_hi,
                'grid_points': len(run),
                'lo': self.describe_endpoint(f_lo, competitors),
                'hi': self.describe_endpoint(f_hi, competitors),
            })
            logger.debug("crossover interval [%.6f, %.6f] over %d grid points", f_lo, f_hi, len(run))
        return intervals, self._winner_frame(rows)

    def crossover_scan(self, f_min: float, f_max: float, step: float,
                       competitors: Sequence[str] = DEFAULT_COMPETITORS) -> List[Dict[str, Any]]:
        intervals, _ = self.crossover_report(f_min, f_max, step, competitors)
        return intervals

    def describe_endpoint(self, fidelity: float, competitors: Sequence[str]) -> Dict[str, Any]:
        dist = BellDiagonal.werner(float(fidelity))
        best, info = self.competitor_yield(dist, competitors)
        described = {'F': round_sig(float(fidelity)), 'yield_ls': round_sig(ls_yield(dist)),
                     'yield_competitor': round_sig(best)}
        described.update({k: (round_sig(v) if isinstance(v, float) else v) for k, v in info.items()})
        return described

    def yield_threshold(self, protocol: str, lo: float = 0.25, hi: float = 1.0, xtol: float = 1e-6) -> float:
        """Lowest Werner fidelity at which the protocol's yield becomes positive."""
        if protocol == HASHING:
            return float(brentq(lambda f: 1.0 - werner_entropy(f), 0.5, 1.0, xtol=xtol))

        def positive(f: float) -> float:
            value, _ = self.protocol_yield(BellDiagonal.werner(f), protocol)
            return 1.0 if value > 0 else -1.0

        return float(bisect(positive, lo, hi, xtol=xtol))
