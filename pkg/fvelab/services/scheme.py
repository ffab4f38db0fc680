"""
FVE scheme design.

A scheme of order k is fixed by k symmetric dual abscissae G on the
reference element. Whether the scheme enjoys the k-r-order orthogonal
condition is a moment question: do the symmetric gaps of a node set D
(D_0 = -1, D_k = 1), used as weights at G, integrate even monomials exactly
up to degree r? The Pi* witness exists when those gaps are positive.

Designs provided here:
- Method I (odd k): any symmetric G
- Method II (even k): G = critical points of xi (xi^2 - 1) prod (xi^2 - a~_j^2)
- closed-form quartic and quintic families
- named presets (the four published schemes and Gauss-Legendre layouts)
"""

import json
import os
from dataclasses import dataclass
from functools import lru_cache
from math import sqrt
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.optimize import bisect

from fvelab.models.schemas import SchemeSpec
from fvelab.services.refelem import gauss_legendre
from fvelab.utils.exceptions import (
    DomainError,
    InvalidSchemeError,
    MethodNotApplicableError,
    NotApplicableError,
    ParameterError,
    RootFindingError,
    UnknownPresetError,
)
from fvelab.utils.logger import setup_logger
from fvelab.utils.validators import validate_descending_params

logger = setup_logger(__name__)

WEIGHT_MARGIN = 1e-10
MOMENT_TOL = 1e-10
SYMMETRY_TOL = 1e-12
BISECT_XTOL = 1e-14
BISECT_MAXITER = 200

DESIGN_METHODS = ("I", "II", "quartic", "quintic", "gauss")


@dataclass(frozen=True)
class ReferenceLayout:
    """Reference-element node sets of a scheme"""
    G: np.ndarray
    D: Optional[np.ndarray] = None
    Dtilde: Optional[np.ndarray] = None


def _symmetric_nodes(params: Sequence[float], with_zero: bool, with_ends: bool) -> np.ndarray:
    """Ascending symmetric node set from descending positive parameters"""
    params = [float(p) for p in params]
    left = [-p for p in params]
    right = [p for p in reversed(params)]
    middle = [0.0] if with_zero else []
    nodes = left + middle + right
    if with_ends:
        nodes = [-1.0] + nodes + [1.0]
    return np.array(nodes)


def reference_dual_points(spec: SchemeSpec) -> ReferenceLayout:
    """
    Assemble G, D and Dtilde on [-1, 1] from a scheme's parameters.

    G_j = -alpha_j for j <= j0, G_l = 0 for odd k, mirrored on the right.
    D and Dtilde carry the end points and, for even k, the midpoint.

    Args:
        spec: Scheme design

    Returns:
        ReferenceLayout with D / Dtilde set when the parameters are present

    Raises:
        InvalidSchemeError: If a parameter list violates its ordering
    """
    validate_descending_params("alpha", spec.alphas, spec.j0)
    G = _symmetric_nodes(spec.alphas, with_zero=spec.is_odd, with_ends=False)

    D = None
    if spec.pi_star_params is not None:
        validate_descending_params("a", spec.pi_star_params, spec.l - 1)
        D = _symmetric_nodes(spec.pi_star_params, with_zero=not spec.is_odd, with_ends=True)

    Dtilde = None
    if spec.value_node_params is not None:
        validate_descending_params("a~", spec.value_node_params, spec.l - 1)
        Dtilde = _symmetric_nodes(spec.value_node_params, with_zero=not spec.is_odd, with_ends=True)

    return ReferenceLayout(G=G, D=D, Dtilde=Dtilde)


def _validate_abscissae(G: Sequence[float]) -> np.ndarray:
    G = np.asarray(G, dtype=float)
    if G.ndim != 1 or G.size == 0:
        raise InvalidSchemeError(f"Dual abscissae must be a non-empty 1-D sequence, got shape {G.shape}")
    if np.any(np.diff(G) <= 0):
        raise InvalidSchemeError(f"Dual abscissae must be strictly increasing, got {G.tolist()}")
    if G[0] <= -1.0 or G[-1] >= 1.0:
        raise InvalidSchemeError(f"Dual abscissae must lie inside (-1, 1), got {G.tolist()}")
    if np.max(np.abs(G + G[::-1])) > SYMMETRY_TOL:
        raise InvalidSchemeError(f"Dual abscissae must be symmetric about 0, got {G.tolist()}")
    return G


def max_orthogonality_order(G: Sequence[float]) -> Tuple[int, Optional[np.ndarray]]:
    """
    Largest r for which the moment equations of the k-r-order orthogonal
    condition hold at G, with the increasing witness D when one exists.

    The l = ceil(k/2) symmetric weights w_j = D_j - D_{j-1} are fixed by the
    square moment system of degrees 0, 2, ..., 2l-2, so r >= 2l-2 always
    (r >= k-1 for odd k). r then grows through the higher even moments that
    also hold, capped at 2(k-1). D is returned only when every weight
    exceeds WEIGHT_MARGIN.

    Args:
        G: Symmetric strictly increasing abscissae in (-1, 1)

    Returns:
        (r, D) with r even; D is None when the weights do not give an
        increasing node set

    Raises:
        InvalidSchemeError: If G is not a valid dual layout
    """
    G = _validate_abscissae(G)
    k = G.size
    l = (k + 1) // 2

    t = G[:l] ** 2
    mult = np.full(l, 2.0)
    if k % 2 == 1:
        mult[-1] = 1.0  # G_l = 0 counts once

    def moments(m: int) -> np.ndarray:
        return mult * t ** m

    V = np.array([moments(m) for m in range(l)])
    rhs = np.array([2.0 / (2 * m + 1) for m in range(l)])
    w = np.linalg.solve(V, rhs)

    r = 2 * l - 2
    m = l
    while 2 * m <= 2 * (k - 1):
        residual = abs(float(np.dot(w, moments(m))) - 2.0 / (2 * m + 1))
        if residual > MOMENT_TOL:
            break
        r = 2 * m
        m += 1

    if np.any(w <= WEIGHT_MARGIN):
        logger.debug(f"G={G.tolist()} reaches r={r} without an increasing witness: weights {w.tolist()}")
        return r, None

    full = np.concatenate([w, w[: k - l][::-1]])
    D = np.concatenate([[-1.0], -1.0 + np.cumsum(full)])
    D[-1] = 1.0
    D = 0.5 * (D - D[::-1])
    logger.debug(f"G={G.tolist()} satisfies the {k}-{r}-order condition")
    return r, D


def check_orthogonality(spec: SchemeSpec, r: int) -> bool:
    """True iff the scheme satisfies the k-r-order orthogonal condition"""
    k = spec.k
    if r < k - 1 or r > 2 * k - 1:
        raise ParameterError(f"Order r must lie in [{k - 1}, {2 * k - 1}] for k={k}, got {r}")
    max_r, _ = max_orthogonality_order(reference_dual_points(spec).G)
    return max_r >= r


def quadrature_weights(G: Sequence[float]) -> np.ndarray:
    """Weights A_j = D_j - D_{j-1} of the witness D at the abscissae G"""
    r, D = max_orthogonality_order(G)
    if D is None:
        raise NotApplicableError(f"No orthogonality witness exists for G={list(G)}")
    return np.diff(D)


def _with_witness(spec: SchemeSpec) -> SchemeSpec:
    """Attach pi_star_params from the orthogonality witness when feasible"""
    G = reference_dual_points(spec).G
    r, D = max_orthogonality_order(G)
    if D is None:
        logger.warning(f"Scheme '{spec.label}' (k={spec.k}) has no increasing Pi* witness")
        return spec
    params = [float(-d) for d in D[1:spec.l]]
    logger.debug(f"Scheme '{spec.label}' reaches r={r}, witness a={params}")
    return spec.model_copy(update={"pi_star_params": params})


def design_method_I(k: int, alphas: Sequence[float]) -> SchemeSpec:
    """
    Method I: odd-order scheme with freely chosen symmetric dual points.

    Args:
        k: Odd order
        alphas: j0 = (k-1)/2 descending parameters in (0, 1)

    Returns:
        SchemeSpec with the witness Pi* parameters attached when feasible

    Raises:
        MethodNotApplicableError: If k is even
        InvalidSchemeError: If alphas violate the ordering
    """
    if k < 1 or k % 2 == 0:
        raise MethodNotApplicableError(f"Method I is only valid for odd order schemes, got k={k}")
    logger.info(f"Designing k={k} scheme by Method I with alphas={list(alphas)}")
    spec = SchemeSpec(k=k, alphas=[float(a) for a in alphas], label="method-I")
    return _with_witness(spec)


def _bisect_root(f: Callable[[float], float], a: float, b: float) -> float:
    try:
        return float(bisect(f, a, b, xtol=BISECT_XTOL, maxiter=BISECT_MAXITER))
    except (ValueError, RuntimeError) as e:
        logger.error(f"Bisection failed on [{a}, {b}]: {e}")
        raise RootFindingError(f"Bisection failed on [{a}, {b}]: {e}")


def _symmetrize(points: np.ndarray) -> np.ndarray:
    points = np.sort(points)
    return 0.5 * (points - points[::-1])


def design_method_II(k: int, value_params: Sequence[float]) -> SchemeSpec:
    """
    Method II: even-order scheme from prescribed function-value nodes.

    Builds R_k(xi) = xi (xi^2 - 1) prod (xi^2 - a~_j^2) and takes the k roots
    of R_k' as dual points; they interlace the known roots of R_k, so each
    one is bracketed.

    Args:
        k: Even order
        value_params: l-1 descending parameters a~_j in (0, 1)

    Returns:
        SchemeSpec with G, Dtilde and, when one exists, the witness Pi* parameters

    Raises:
        MethodNotApplicableError: If k is odd
        InvalidSchemeError: If value_params violate the ordering
        RootFindingError: If a bracket fails to converge
    """
    if k < 2 or k % 2 == 1:
        raise MethodNotApplicableError(f"Method II is not valid for odd order schemes, got k={k}")
    l = k // 2
    value_params = [float(a) for a in value_params]
    validate_descending_params("a~", value_params, l - 1)
    logger.info(f"Designing k={k} scheme by Method II with a~={value_params}")

    roots = _symmetric_nodes(value_params, with_zero=True, with_ends=True)
    dR = Polynomial.fromroots(roots).deriv()
    G = np.array([_bisect_root(dR, a, b) for a, b in zip(roots[:-1], roots[1:])])
    G = _symmetrize(G)

    spec = SchemeSpec(
        k=k,
        alphas=[float(-g) for g in G[: k // 2]],
        value_node_params=value_params,
        label="method-II",
    )
    return _with_witness(spec)


def quartic_family(a1: float) -> Tuple[float, float]:
    """
    Quartic dual parameters satisfying the 4-3-order condition for a given a1.

    Args:
        a1: Pi* parameter, 4/9 <= a1 < 5/6

    Returns:
        (alpha1, alpha2); alpha2 = 0 at the degenerate boundary a1 = 4/9

    Raises:
        DomainError: If a1 is outside [4/9, 5/6)
    """
    if not (4.0 / 9.0 <= a1 < 5.0 / 6.0):
        raise DomainError(f"Quartic family needs 4/9 <= a1 < 5/6, got {a1}")
    alpha1 = sqrt((1.0 + 2.0 * sqrt(a1 / (5.0 * (1.0 - a1)))) / 3.0)
    radicand = (1.0 - 2.0 * sqrt((1.0 - a1) / (5.0 * a1))) / 3.0
    alpha2 = sqrt(radicand) if radicand > 1e-14 else 0.0
    if alpha2 == 0.0:
        logger.warning(f"a1={a1} is the degenerate boundary of the quartic family (alpha2 = 0)")
    return alpha1, alpha2


def quintic_family(alpha1: float) -> float:
    """alpha2 of the quintic family satisfying the 5-5-order condition"""
    lower = sqrt(5.0 / 7.0)
    if not (lower < alpha1 < 1.0):
        raise DomainError(f"Quintic family needs sqrt(5/7) < alpha1 < 1, got {alpha1}")
    s = alpha1 ** 2
    return sqrt((s / 5.0 - 1.0 / 7.0) / (s / 3.0 - 1.0 / 5.0))


def _gauss_preset(k: int) -> SchemeSpec:
    nodes = gauss_legendre(k).nodes
    spec = SchemeSpec(k=k, alphas=[float(-g) for g in nodes[: k // 2]], label=f"gauss-{k}")
    return _with_witness(spec)


def _scheme_3_1() -> SchemeSpec:
    spec = SchemeSpec(k=3, alphas=[sqrt(5.0 / 9.0)], value_node_params=[1.0 / 3.0], label="scheme-3-1")
    return _with_witness(spec)


def _scheme_4_1() -> SchemeSpec:
    return design_method_II(4, [0.5]).model_copy(update={"label": "scheme-4-1"})


def _scheme_5_1() -> SchemeSpec:
    inner = sqrt(245953.0 / 1806336.0)
    spec = SchemeSpec(
        k=5,
        alphas=[sqrt(15.0) / 4.0, 5.0 * sqrt(7.0) / 21.0],
        value_node_params=[sqrt(673.0 / 1344.0 + inner), sqrt(673.0 / 1344.0 - inner)],
        label="scheme-5-1",
    )
    return _with_witness(spec)


def _scheme_6_1() -> SchemeSpec:
    return design_method_II(6, [19.0 / 20.0, 1.0 / 19.0]).model_copy(update={"label": "scheme-6-1"})


PRESETS: Dict[str, Callable[[], SchemeSpec]] = {
    "scheme-3-1": _scheme_3_1,
    "scheme-4-1": _scheme_4_1,
    "scheme-5-1": _scheme_5_1,
    "scheme-6-1": _scheme_6_1,
    **{f"gauss-{k}": (lambda k=k: _gauss_preset(k)) for k in range(1, 7)},
}


@lru_cache(maxsize=None)
def preset(name: str) -> SchemeSpec:
    """Named scheme: scheme-3-1, scheme-4-1, scheme-5-1, scheme-6-1 or gauss-1..gauss-6"""
    if name not in PRESETS:
        raise UnknownPresetError(f"Unknown scheme preset '{name}', available: {sorted(PRESETS)}")
    logger.debug(f"Building scheme preset '{name}'")
    return PRESETS[name]()


def function_value_points(spec: SchemeSpec) -> np.ndarray:
    """
    Function-value superconvergent points on [-1, 1].

    These are the k+1 roots of the shape polynomial R of the modified
    M-decomposition. R' vanishes at the dual points, so each interior root
    is bracketed by two consecutive G; the end points are always roots.
    Layouts whose R keeps one sign between consecutive G have complex
    interior roots and no such points.

    Raises:
        NotApplicableError: If R has no real root between two consecutive G
        IllPosedSchemeError: If the shape system is singular
        RootFindingError: If a bracket fails to converge
    """
    # mmd builds on this module
    from fvelab.services.mmd import shape_polynomial

    R = shape_polynomial(spec)
    G = reference_dual_points(spec).G
    interior = []
    for a, b in zip(G[:-1], G[1:]):
        if R(a) * R(b) > 0:
            raise NotApplicableError(
                f"Scheme '{spec.label}' has no function-value points: "
                f"the shape polynomial keeps one sign on [{a:.6g}, {b:.6g}]"
            )
        interior.append(_bisect_root(R, a, b))
    points = np.concatenate([[-1.0], interior, [1.0]])
    return _symmetrize(points)


def lagrange_nodes(spec: SchemeSpec) -> np.ndarray:
    """Reference nodes of the trial basis: Dtilde when defined, else uniform"""
    layout = reference_dual_points(spec)
    if layout.Dtilde is not None:
        return layout.Dtilde
    return np.linspace(-1.0, 1.0, spec.k + 1)


def design(k: int, method: str, params: Sequence[float]) -> SchemeSpec:
    """
    Build a scheme by one of the design methods.

    Args:
        k: Order
        method: I, II, quartic (params = [a1]), quintic (params = [alpha1]) or gauss
        params: Method parameters

    Returns:
        SchemeSpec
    """
    params = [float(p) for p in params]
    if method == "I":
        return design_method_I(k, params)
    if method == "II":
        return design_method_II(k, params)
    if method == "quartic":
        if k != 4 or len(params) != 1:
            raise ParameterError("The quartic family needs k=4 and a single parameter a1")
        alpha1, alpha2 = quartic_family(params[0])
        spec = SchemeSpec(k=4, alphas=[alpha1, alpha2], pi_star_params=params, label="quartic")
        return spec
    if method == "quintic":
        if k != 5 or len(params) != 1:
            raise ParameterError("The quintic family needs k=5 and a single parameter alpha1")
        spec = SchemeSpec(k=5, alphas=[params[0], quintic_family(params[0])], label="quintic")
        return _with_witness(spec)
    if method == "gauss":
        if params:
            raise ParameterError("The gauss layout takes no parameters")
        if k < 1 or k > 6:
            raise ParameterError(f"Gauss layouts are available for 1 <= k <= 6, got {k}")
        return preset(f"gauss-{k}")
    raise ParameterError(f"Unknown design method '{method}', expected one of {DESIGN_METHODS}")


def _format_real(x: float) -> str:
    return format(float(x), ".17g")


def _format_list(values: Optional[List[float]]) -> str:
    if values is None:
        return "null"
    return "[" + ", ".join(_format_real(v) for v in values) + "]"


def scheme_to_json(spec: SchemeSpec) -> str:
    """Scheme file text with reals at 17 significant digits"""
    return (
        "{\n"
        f'  "k": {spec.k},\n'
        f'  "alphas": {_format_list(spec.alphas)},\n'
        f'  "pi_star_params": {_format_list(spec.pi_star_params)},\n'
        f'  "value_node_params": {_format_list(spec.value_node_params)},\n'
        f'  "label": {json.dumps(spec.label)}\n'
        "}\n"
    )


def save_scheme(spec: SchemeSpec, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(scheme_to_json(spec))
    logger.info(f"Saved scheme '{spec.label}' to {path}")


def load_scheme(path: str) -> SchemeSpec:
    """Read a scheme file; ordering violations raise InvalidSchemeError"""
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ParameterError(f"Scheme file not found: {path}")
    except json.JSONDecodeError as e:
        raise InvalidSchemeError(f"Scheme file {path} is not valid JSON: {e}")
    if "k" not in data:
        raise InvalidSchemeError(f"Scheme file {path} has no 'k' entry")
    spec = SchemeSpec(**data)
    logger.info(f"Loaded scheme '{spec.label}' (k={spec.k}) from {path}")
    return spec
