import os
from typing import List, Sequence, Tuple

from fvelab.config import get_settings
from fvelab.utils.exceptions import InvalidSchemeError, ParameterError

SCHEME_SOURCE_KINDS = ("preset", "file")


def quadrature_points(k: int) -> int:
    """Per-element Gauss rule size for order k (k+3 unless overridden)"""
    settings = get_settings()
    if settings.quad_points is None:
        return k + 3
    if settings.quad_points < k + 1:
        raise ParameterError(
            f"FVELAB_QUAD_POINTS={settings.quad_points} is below the minimum k+1={k + 1}"
        )
    return settings.quad_points


def validate_refinements(levels: Sequence[int]) -> List[int]:
    """Validate a refinement ladder: at least two strictly increasing N >= 2"""
    levels = [int(n) for n in levels]
    if len(levels) < 2:
        raise ParameterError(f"A study needs at least 2 refinement levels, got {levels}")
    if any(n < 2 for n in levels):
        raise ParameterError(f"Every refinement level must have N >= 2, got {levels}")
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise ParameterError(f"Refinement levels must be strictly increasing, got {levels}")
    return levels


def parse_scheme_source(source: str) -> Tuple[str, str]:
    """Split 'preset:<name>' or 'file:<path>' into its kind and value"""
    kind, sep, value = source.partition(":")
    if not sep or kind not in SCHEME_SOURCE_KINDS or not value:
        raise ParameterError(
            f"Scheme source must be 'preset:<name>' or 'file:<path>', got '{source}'"
        )
    if kind == "file" and not os.path.exists(value):
        raise ParameterError(f"Scheme file not found: {value}")
    return kind, value


def parse_float_list(text: str) -> List[float]:
    """Parse a comma separated list of reals (empty string gives an empty list)"""
    if text is None or not text.strip():
        return []
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ParameterError(f"Could not parse parameter list '{text}': {e}")


def parse_int_list(text: str) -> List[int]:
    """Parse a comma separated list of integers"""
    try:
        return [int(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise ParameterError(f"Could not parse integer list '{text}': {e}")


def validate_descending_params(name: str, values: Sequence[float], expected: int) -> None:
    """Check 1 > v_1 > ... > v_n > 0 with exactly `expected` entries"""
    if len(values) != expected:
        raise InvalidSchemeError(f"{name} needs {expected} entries, got {len(values)}")
    bounded = [1.0] + [float(v) for v in values] + [0.0]
    for left, right in zip(bounded, bounded[1:]):
        if not left > right:
            raise InvalidSchemeError(
                f"{name} must satisfy 1 > {name}_1 > ... > 0, got {list(values)}"
            )
