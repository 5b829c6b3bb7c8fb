"""
Exact checks that regenerate the reference artifacts from first principles.

Every check returns a report dict:
    target, passed, checked, matched, summary, first_mismatch
"""

import logging
import os
from typing import Any, Callable, Dict, Iterable, List, Optional

import numpy as np

from bell import BellDiagonal
from enumerator import (
    generate_table, general_table, load_reference_table, ls_exact, ls_weight_classes,
    ms_exact, recurrence_exact, table_total, werner_table
)
from polynomial import BellPolynomial, GENERAL, WERNER
from protocols import (
    iterate_recurrence, hashing_yield, ms_posterior, ms_yield, ms_yield_from, recurrence_step
)
from utils import UsageError

logger = logging.getLogger(__name__)

DEFAULT_TABLE_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), 'data', 'table1.csv')
WERNER_PASS_COEFFICIENTS = {(4, 0): 1, (2, 2): 18, (1, 3): 24, (0, 4): 21}


def _report(target: str, checked: int, matched: int, summary: str,
            first_mismatch: Optional[str] = None) -> Dict[str, Any]:
    return {
        'target': target,
        'passed': matched == checked and first_mismatch is None,
        'checked': checked,
        'matched': matched,
        'summary': summary,
        'first_mismatch': first_mismatch,
    }


def random_distributions(samples: int, seed: int = 0) -> List[BellDiagonal]:
    """Bell-diagonal states drawn uniformly from the probability simplex."""
    if samples < 1:
        raise UsageError(f"Need at least one random input, got samples={samples}")
    if seed < 0:
        raise UsageError(f"Seed must not be negative, got {seed}")
    rng = np.random.default_rng(seed)
    return [BellDiagonal.from_sequence(p) for p in rng.dirichlet(np.ones(4), size=samples)]


def verify_table(reference_path: str = DEFAULT_TABLE_PATH) -> Dict[str, Any]:
    """Regenerate the 64 passing strings and compare them per marginal group."""
    generated = generate_table()
    reference = load_reference_table(reference_path)

    def keyed(df):
        return {tuple(row) for row in df[['marginal', 'monomial', 'input', 'f_image']].itertuples(index=False)}

    gen_rows, ref_rows = keyed(generated), keyed(reference)
    matched = len(gen_rows & ref_rows)
    checked = max(len(gen_rows), len(ref_rows), 64)

    first_mismatch = None
    extra = sorted(gen_rows - ref_rows)
    missing = sorted(ref_rows - gen_rows)
    if extra:
        first_mismatch = f"generated row not in reference: {','.join(extra[0])}"
    elif missing:
        first_mismatch = f"reference row not generated: {','.join(missing[0])}"

    return _report('table', checked, matched, f"{matched}/{checked} rows match", first_mismatch)


def _check_classes(found: Dict[Any, int], expected: Dict[Any, int]) -> Optional[str]:
    for weight, count in expected.items():
        if found.get(weight) != count:
            return f"class {weight} appears {found.get(weight, 0)} times, expected {count}"
    unexpected = [w for w in found if w not in expected]
    if unexpected:
        return f"unexpected class {unexpected[0]}"
    return None


def verify_werner_closed_form() -> Dict[str, Any]:
    """Werner p_pass coefficients, Q class structure and weight conservation."""
    f, g = BellPolynomial.variables_of(WERNER)
    table = werner_table(4)
    result = ls_exact(table)
    problems = []

    coefficients = result.p_pass.coefficients()
    if result.p_pass != BellPolynomial.from_coefficients(WERNER_PASS_COEFFICIENTS, WERNER):
        problems.append(f"p_pass = {result.p_pass}, expected F^4 + 18F^2G^2 + 24FG^3 + 21G^4")

    expected_classes = {
        f ** 4 + 3 * g ** 4: 1,
        2 * f ** 2 * g ** 2 + 2 * g ** 4: 9,
        4 * f * g ** 3: 6,
    }
    mismatch = _check_classes(ls_weight_classes(result), expected_classes)
    if mismatch:
        problems.append(mismatch)

    if result.p_pass + result.p_fail != (f + 3 * g) ** 4 or table_total(table) != (f + 3 * g) ** 4:
        problems.append("p_pass + p_fail differs from (F+3G)^4")

    vector = tuple(coefficients.get(m, 0) for m in [(4, 0), (2, 2), (1, 3), (0, 4)])
    return _report('werner-closed-form', 3, 3 - len(problems),
                   f"coefficient vector {vector} confirmed" if not problems else f"coefficient vector {vector}",
                   problems[0] if problems else None)


def verify_general_closed_form() -> Dict[str, Any]:
    """Four-variable p_pass and the five Q weight classes."""
    p00, p01, p10, p11 = BellPolynomial.variables_of(GENERAL)
    p = (p00, p01, p10, p11)
    table = general_table(4)
    result = ls_exact(table)
    problems = []

    quartic = p00 ** 4 + p01 ** 4 + p10 ** 4 + p11 ** 4
    product = p00 * p01 * p10 * p11
    pair_sum = sum((2 * p[i] ** 2 * p[j] ** 2 for i in range(4) for j in range(i + 1, 4)),
                   BellPolynomial.zero(GENERAL))
    expected_pass = quartic + 24 * product + 3 * pair_sum
    if result.p_pass != expected_pass:
        problems.append(f"p_pass = {result.p_pass}, expected {expected_pass}")

    expected_classes = {
        quartic: 1,
        4 * product: 6,
        2 * p00 ** 2 * p01 ** 2 + 2 * p10 ** 2 * p11 ** 2: 3,
        2 * p00 ** 2 * p10 ** 2 + 2 * p01 ** 2 * p11 ** 2: 3,
        2 * p00 ** 2 * p11 ** 2 + 2 * p01 ** 2 * p10 ** 2: 3,
    }
    mismatch = _check_classes(ls_weight_classes(result), expected_classes)
    if mismatch:
        problems.append(mismatch)

    if result.p_pass + result.p_fail != table_total(table):
        problems.append("p_pass + p_fail differs from (p00+p01+p10+p11)^4")

    return _report('general-closed-form', 3, 3 - len(problems),
                   "p_pass and classes (1, 6, 3, 3, 3) confirmed" if not problems else "closed forms differ",
                   problems[0] if problems else None)


def verify_recurrence(samples: int = 1000, seed: int = 0, tol: float = 1e-12) -> Dict[str, Any]:
    """Printed recurrence map against the 16-outcome enumeration."""
    dists = random_distributions(samples, seed)
    matched, first_mismatch = 0, None
    for dist in dists:
        printed, printed_pass = recurrence_step(dist)
        enumerated, enumerated_pass = recurrence_exact(dist)
        diff = max(abs(printed_pass - enumerated_pass),
                   max(abs(a - b) for a, b in zip(printed.probabilities, enumerated.probabilities)))
        if diff <= tol:
            matched += 1
        elif first_mismatch is None:
            first_mismatch = f"input {dist.probabilities}: max difference {diff:.3e}"
    return _report('recurrence', samples, matched,
                   f"{matched}/{samples} random inputs within {tol:g}", first_mismatch)


def verify_ms(samples: int = 100, seed: int = 0, block_sizes: Iterable[int] = range(2, 7),
              tol: float = 1e-10) -> Dict[str, Any]:
    """
    Multinomial block yields against dense enumeration, and m = 2 against
    one recurrence round followed by hashing.
    """
    dists = random_distributions(samples, seed)
    block_sizes = list(block_sizes)
    checked = matched = 0
    first_mismatch = None
    for dist in dists:
        for m in block_sizes:
            checked += 1
            fast_pass, fast_h = ms_posterior(dist, m)
            dense_pass, dense_h = ms_exact(dist, m)
            diff = max(abs(fast_pass - dense_pass),
                       abs(ms_yield_from(fast_pass, fast_h, m) - ms_yield_from(dense_pass, dense_h, m)))
            if diff <= tol:
                matched += 1
            elif first_mismatch is None:
                first_mismatch = f"m={m}, input {dist.probabilities}: difference {diff:.3e}"

        checked += 1
        _, evolved, factor = list(iterate_recurrence(dist, 1))[-1]
        diff = abs(ms_yield(dist, 2) - factor * hashing_yield(evolved))
        if diff <= 1e-12:
            matched += 1
        elif first_mismatch is None:
            first_mismatch = f"m=2 vs recurrence+hashing, input {dist.probabilities}: difference {diff:.3e}"

    return _report('ms', checked, matched, f"{matched}/{checked} block comparisons within {tol:g}",
                   first_mismatch)


CHECKS: Dict[str, Callable[..., Dict[str, Any]]] = {
    'table': verify_table,
    'werner-closed-form': verify_werner_closed_form,
    'general-closed-form': verify_general_closed_form,
    'recurrence': verify_recurrence,
    'ms': verify_ms,
}


def run_checks(targets: Iterable[str], samples: Optional[int] = None, seed: int = 0) -> List[Dict[str, Any]]:
    reports = []
    for target in targets:
        if target not in CHECKS:
            raise UsageError(f"Unknown verification target {target!r}; choose from {', '.join(CHECKS)}")
        kwargs = {}
        if target in ('recurrence', 'ms'):
            kwargs['seed'] = seed
            if samples is not None:
                kwargs['samples'] = samples
        logger.debug("running check %s", target)
        reports.append(CHECKS[target](**kwargs))
    return reports
