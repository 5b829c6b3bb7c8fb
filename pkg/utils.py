import math
import re
from typing import Any, Dict, List, Optional, Sequence, Tuple

NORMALIZATION_TOL = 1e-12
ENTROPY_TOL = 1e-9


class PurificationError(ValueError):
    """Base class for every error raised by the analyzer."""


class DomainError(PurificationError):
    """A probability or fidelity lies outside its domain."""


class UsageError(PurificationError):
    """An argument has the wrong shape (length, name, grid)."""


class CapacityError(PurificationError):
    """Dense enumeration was asked for more pairs than it can hold."""


class DegenerateInputError(PurificationError):
    """A conditioning step would divide by a zero pass probability."""


def safe_float(value: Any) -> Optional[float]:
    """Safely convert value to float, returning None for empty/invalid values."""
    if value is None or value == '' or value == 'N/A':
        return None

    try:
        return float(value)
    except (ValueError, TypeError):
        return None


def parse_probabilities(text: str) -> Tuple[Optional[List[float]], List[str]]:
    """
    Parse a "p00,p01,p10,p11" string as given on the command line.
    Returns (values, errors); values is None when anything is wrong.
    """
    if not text or not isinstance(text, str):
        return None, ["No probabilities given"]

    parts = [part.strip() for part in re.split(r'[,\s]+', text.strip()) if part.strip()]
    if len(parts) != 4:
        return None, [f"Expected 4 probabilities, got {len(parts)}"]

    values = []
    errors = []
    for name, part in zip(('p00', 'p01', 'p10', 'p11'), parts):
        value = safe_float(part)
        if value is None:
            errors.append(f"{name} is not a number: {part!r}")
        else:
            values.append(value)

    if errors:
        return None, errors

    _, errors = validate_distribution(values, tol=ENTROPY_TOL)
    if errors:
        return None, errors
    # hand-typed values are accepted to 1e-9, then rescaled onto the simplex
    total = math.fsum(values)
    return [v / total for v in values], []


def validate_distribution(values: Sequence[float], tol: float = NORMALIZATION_TOL) -> Tuple[List[float], List[str]]:
    """
    Validate a probability vector.
    Returns (values, errors) with errors naming every violated condition.
    """
    cleaned = [float(v) for v in values]
    errors = []

    for i, value in enumerate(cleaned):
        if math.isnan(value):
            errors.append(f"Entry {i} is NaN")
        elif value < 0:
            errors.append(f"Entry {i} is negative ({value})")

    total = math.fsum(cleaned)
    if abs(total - 1.0) > tol:
        errors.append(f"Entries sum to {total!r}, not 1 (tolerance {tol})")

    return cleaned, errors


def validate_grid(f_min: float, f_max: float, step: float) -> List[str]:
    """Check a fidelity grid request; an empty list means the grid is usable."""
    errors = []
    if not 0.0 <= f_min <= 1.0:
        errors.append(f"--f-min must lie in [0, 1], got {f_min}")
    if not 0.0 <= f_max <= 1.0:
        errors.append(f"--f-max must lie in [0, 1], got {f_max}")
    if f_min >= f_max:
        errors.append(f"--f-min ({f_min}) must be below --f-max ({f_max})")
    if not step > 0:
        errors.append(f"--step must be positive, got {step}")
    return errors


def clamp_yield(value: float) -> float:
    """Yields below zero mean the protocol is not worth running."""
    return min(1.0, max(0.0, value))


def round_sig(value: float, digits: int = 12) -> float:
    """Round to a fixed number of significant digits."""
    if value == 0 or not math.isfinite(value):
        return value
    return float(f"{value:.{digits}g}")


def format_monomial(exponents: Sequence[int], names: Sequence[str]) -> str:
    """
    Render an exponent vector the way the reference table prints it.
    (4, 0) over (F, G) -> "F^4"; (1, 3) -> "FG^3"; (0, 0) -> "1".
    """
    parts = []
    for name, exponent in zip(names, exponents):
        if exponent == 1:
            parts.append(name)
        elif exponent > 1:
            parts.append(f"{name}^{exponent}")
    return ''.join(parts) or '1'


def bits_to_str(bits: Sequence[int]) -> str:
    return ''.join(str(int(b)) for b in bits)


def str_to_bits(text: str) -> List[int]:
    """Parse a bit string such as "00100111"."""
    text = text.strip()
    if not re.fullmatch(r'[01]*', text):
        raise UsageError(f"Not a bit string: {text!r}")
    return [int(c) for c in text]


def summarize_errors(errors: List[str], limit: int = 5) -> str:
    """Join validation errors into one line for exception messages."""
    shown = errors[:limit]
    extra = len(errors) - len(shown)
    summary = '; '.join(shown)
    if extra > 0:
        summary += f" (+{extra} more)"
    return summary


def describe_schedule(info: Dict[str, Any]) -> str:
    """Human-readable one-liner for a competitor configuration."""
    parts = []
    if info.get('best_k') is not None:
        parts.append(f"recurrence k={info['best_k']}")
    if info.get('best_m') is not None:
        parts.append(f"ms m={info['best_m']}")
    if info.get('combined_terminal'):
        parts.append(f"combined {info['combined_terminal']} after k={info.get('combined_k', 0)}")
    return " · ".join(parts)
