"""
Error measurement and discrete-norm diagnostics.

Piecewise functions (FveSolution, SuperclosePoly) are consumed through
`element_values(e, xi)` / `element_derivatives(e, xi)` on the reference
element; exact solutions through callables u and du on physical points.
"""

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Protocol, Sequence, Tuple

import numpy as np
import pandas as pd
import scipy.linalg

from fvelab.config import get_settings
from fvelab.models.schemas import SchemeSpec
from fvelab.services.assembly import BvpProblem, TrialSpace, assemble
from fvelab.services.mesh import PrimaryMesh
from fvelab.services.refelem import gauss_legendre
from fvelab.services.scheme import function_value_points, quadrature_weights, reference_dual_points
from fvelab.utils.exceptions import GramMatrixError, NotApplicableError, ParameterError
from fvelab.utils.logger import setup_logger
from fvelab.utils.validators import quadrature_points

logger = setup_logger(__name__)

PROFILE_COLUMNS = ["xi", "abs_err_value", "abs_err_deriv", "element_index"]


class PiecewiseFunction(Protocol):
    def element_values(self, e: int, xi: np.ndarray) -> np.ndarray: ...

    def element_derivatives(self, e: int, xi: np.ndarray) -> np.ndarray: ...


def _rule(k: int):
    return gauss_legendre(quadrature_points(k))


def _integrate_squares(mesh: PrimaryMesh, k: int, local: Callable[[int, np.ndarray, np.ndarray], np.ndarray]) -> float:
    """sqrt(sum_e int_e local(e, xi, x)^2)"""
    rule = _rule(k)
    total = 0.0
    for e in range(mesh.n_elements):
        x = mesh.to_physical(e, rule.nodes)
        weights = rule.weights * 0.5 * mesh.widths[e]
        total += float(np.dot(weights, local(e, rule.nodes, x) ** 2))
    return math.sqrt(total)


def h1_seminorm_error(du: Callable, sol: PiecewiseFunction, mesh: PrimaryMesh, k: int) -> float:
    """|u - u_h|_1 by element-wise Gauss quadrature"""
    return _integrate_squares(mesh, k, lambda e, xi, x: du(x) - sol.element_derivatives(e, xi))


def l2_error(u: Callable, sol: PiecewiseFunction, mesh: PrimaryMesh, k: int) -> float:
    """||u - u_h||_0 by element-wise Gauss quadrature"""
    return _integrate_squares(mesh, k, lambda e, xi, x: u(x) - sol.element_values(e, xi))


def h1_seminorm_difference(first: PiecewiseFunction, second: PiecewiseFunction, mesh: PrimaryMesh, k: int) -> float:
    return _integrate_squares(
        mesh, k, lambda e, xi, x: first.element_derivatives(e, xi) - second.element_derivatives(e, xi)
    )


def l2_difference(first: PiecewiseFunction, second: PiecewiseFunction, mesh: PrimaryMesh, k: int) -> float:
    return _integrate_squares(
        mesh, k, lambda e, xi, x: first.element_values(e, xi) - second.element_values(e, xi)
    )


def superconv_point_errors(sol: PiecewiseFunction, u: Callable, du: Callable,
                           mesh: PrimaryMesh, spec: SchemeSpec) -> Tuple[float, Optional[float]]:
    """
    Pointwise errors at the superconvergent points.

    Returns:
        (max |u' - u_h'| over the dual points, max |u - u_h| over the value
        points); the second entry is None when the scheme has no value points
    """
    G = reference_dual_points(spec).G
    try:
        value_points = function_value_points(spec)
    except NotApplicableError as e:
        logger.warning(f"Skipping the value-point error: {e}")
        value_points = None
    err_p1 = 0.0
    err_p0 = 0.0
    for e in range(mesh.n_elements):
        x = mesh.to_physical(e, G)
        err_p1 = max(err_p1, float(np.max(np.abs(du(x) - sol.element_derivatives(e, G)))))
        if value_points is not None:
            x = mesh.to_physical(e, value_points)
            err_p0 = max(err_p0, float(np.max(np.abs(u(x) - sol.element_values(e, value_points)))))
    return err_p1, (err_p0 if value_points is not None else None)


def eoc(errors: Sequence[float], hs: Sequence[float]) -> List[float]:
    """
    Experimental orders log(e_{j-1}/e_j) / log(h_{j-1}/h_j).

    Returns:
        len(errors) - 1 orders; NaN where an error is not positive or missing
    """
    if len(errors) != len(hs) or len(errors) < 2:
        raise ParameterError(f"eoc needs two equal-length sequences of size >= 2, got {len(errors)} and {len(hs)}")
    orders = []
    for (e0, e1), (h0, h1) in zip(zip(errors, errors[1:]), zip(hs, hs[1:])):
        if not (e0 > 0 and e1 > 0) or h0 == h1:
            orders.append(float("nan"))
            continue
        orders.append(math.log(e0 / e1) / math.log(h0 / h1))
    return orders


def floor_limited(errors: Sequence[Optional[float]], floor: float) -> List[bool]:
    """
    Flags the orders whose level pair touches the round-off floor.

    Returns:
        len(errors) - 1 flags; True where either error of the pair is at or
        below `floor`. Missing errors are never flagged.
    """
    if floor < 0:
        raise ParameterError(f"Round-off floor must be non-negative, got {floor}")

    def below(value: Optional[float]) -> bool:
        return value is not None and math.isfinite(value) and value <= floor

    return [below(e0) or below(e1) for e0, e1 in zip(errors, errors[1:])]


def finest_reliable_index(flags: Sequence[bool]) -> Optional[int]:
    """Index of the last unflagged level pair, None when every pair is flagged"""
    for i in range(len(flags) - 1, -1, -1):
        if not flags[i]:
            return i
    return None


def error_profile(sol: PiecewiseFunction, u: Callable, du: Callable,
                  mesh: PrimaryMesh, samples_per_element: int = 33) -> pd.DataFrame:
    """Absolute value and derivative errors on a uniform xi grid, pooled over elements"""
    if samples_per_element < 8:
        raise ParameterError(f"An error profile needs at least 8 samples per element, got {samples_per_element}")
    xi = np.linspace(-1.0, 1.0, samples_per_element)
    frames = []
    for e in range(mesh.n_elements):
        x = mesh.to_physical(e, xi)
        frames.append(pd.DataFrame({
            "xi": xi,
            "abs_err_value": np.abs(u(x) - sol.element_values(e, xi)),
            "abs_err_deriv": np.abs(du(x) - sol.element_derivatives(e, xi)),
            "element_index": e,
        }))
    return pd.concat(frames, ignore_index=True)[PROFILE_COLUMNS]


@dataclass(frozen=True)
class DiscreteTestFunction:
    """Piecewise constant test function by its interior control-volume values"""
    mesh: PrimaryMesh
    k: int
    values: np.ndarray  # V_1 .. V_{Nk-1}

    @property
    def full_values(self) -> np.ndarray:
        """V_0 .. V_{Nk} with the two boundary volumes set to 0"""
        return np.concatenate([[0.0], self.values, [0.0]])

    @property
    def dual_widths(self) -> np.ndarray:
        """h of the element holding each dual point"""
        return np.repeat(self.mesh.widths, self.k)


def dual_norms(v: DiscreteTestFunction) -> Tuple[float, float]:
    """(|v|_{1,T*}, ||v||_{0,T*}) with jumps across every dual point"""
    V = v.full_values
    h = v.dual_widths
    jumps = np.diff(V)
    seminorm = math.sqrt(float(np.sum(jumps ** 2 / h)))
    norm = math.sqrt(float(np.sum(h * V[1:] ** 2)))
    return seminorm, norm


def _dual_derivatives(w_h: PiecewiseFunction, mesh: PrimaryMesh, spec: SchemeSpec) -> np.ndarray:
    """w_h'(g_{i,j}) in element-major order"""
    G = reference_dual_points(spec).G
    return np.concatenate([w_h.element_derivatives(e, G) for e in range(mesh.n_elements)])


def pi_T_star(w_h: PiecewiseFunction, mesh: PrimaryMesh, spec: SchemeSpec) -> DiscreteTestFunction:
    """
    Test function with jumps (h_i / 2) A_j w_h'(g_{i,j}), accumulated from the left.

    Raises:
        NotApplicableError: If the dual layout has no quadrature weights
    """
    A = quadrature_weights(reference_dual_points(spec).G)
    jumps = np.repeat(0.5 * mesh.widths, spec.k) * np.tile(A, mesh.n_elements) * _dual_derivatives(w_h, mesh, spec)
    values = np.cumsum(jumps)[:-1]
    return DiscreteTestFunction(mesh=mesh, k=spec.k, values=values)


def discrete_g_seminorm(w_h: PiecewiseFunction, mesh: PrimaryMesh, spec: SchemeSpec) -> float:
    """|w_h|_{1,G}^2 = sum_i sum_j (h_i / 2) A_j w_h'(g_{i,j})^2"""
    A = quadrature_weights(reference_dual_points(spec).G)
    weights = np.repeat(0.5 * mesh.widths, spec.k) * np.tile(A, mesh.n_elements)
    return math.sqrt(float(np.sum(weights * _dual_derivatives(w_h, mesh, spec) ** 2)))


def trial_gram(space: TrialSpace) -> np.ndarray:
    """Full H1 Gram matrix of the trial basis restricted to the interior DOFs"""
    k = space.k
    rule = gauss_legendre(k + 2)
    phi = space.values(rule.nodes)
    dphi = space.derivatives(rule.nodes)
    n = space.n_dofs
    gram = np.zeros((n, n))
    for e in range(space.mesh.n_elements):
        h = space.mesh.widths[e]
        mass = (phi.T * rule.weights) @ phi * (0.5 * h)
        stiffness = (dphi.T * rule.weights) @ dphi * (2.0 / h)
        dofs = space.element_dofs(e)
        gram[np.ix_(dofs, dofs)] += mass + stiffness
    return gram[1:-1, 1:-1]


def dual_gram(mesh: PrimaryMesh, k: int) -> np.ndarray:
    """Gram matrix of |v|_{1,T*}^2 + ||v||_{0,T*}^2 on the interior volume values"""
    h = np.repeat(mesh.widths, k)
    n = h.size - 1
    inv = 1.0 / h
    gram = np.diag(inv[:-1] + inv[1:] + h[:-1])
    off = -inv[1:-1]
    gram += np.diag(off, 1) + np.diag(off, -1)
    return gram if n > 0 else np.zeros((0, 0))


def inf_sup_estimate(problem: BvpProblem, mesh: PrimaryMesh, spec: SchemeSpec) -> float:
    """
    Discrete inf-sup constant of the FVE bilinear form.

    Smallest singular value of L_V^{-1} A L_U^{-T}, where L_U, L_V are the
    Cholesky factors of the trial H1 Gram and the test dual-norm Gram.

    Raises:
        ParameterError: If N*k exceeds FVELAB_INF_SUP_MAX_DOFS
        GramMatrixError: If a Gram matrix is not positive definite
    """
    limit = get_settings().inf_sup_max_dofs
    if mesh.n_elements * spec.k > limit:
        raise ParameterError(f"inf-sup estimate is limited to N*k <= {limit}, got {mesh.n_elements * spec.k}")

    A = assemble(problem, mesh, spec).to_dense()
    space = TrialSpace.build(mesh, spec)
    try:
        L_U = scipy.linalg.cholesky(trial_gram(space), lower=True)
        L_V = scipy.linalg.cholesky(dual_gram(mesh, spec.k), lower=True)
    except np.linalg.LinAlgError as e:
        logger.error(f"Gram matrix is not positive definite: {e}")
        raise GramMatrixError(f"Gram matrix is not positive definite: {e}")

    left = scipy.linalg.solve_triangular(L_V, A, lower=True)
    scaled = scipy.linalg.solve_triangular(L_U, left.T, lower=True).T
    sigma = float(np.min(scipy.linalg.svdvals(scaled)))
    logger.info(f"inf-sup estimate for scheme '{spec.label}' on N={mesh.n_elements}: {sigma:.6f}")
    return sigma
