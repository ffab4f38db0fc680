"""
Modified M-decomposition (MMD) and the superclose function u_I.

On each element the exact solution is expanded as

    u(xi) = b_0 + b_1 xi + sum_{i>=2} b_i M_i(xi)

and u_I keeps the coefficients up to k, except that the shape coefficients
absorb b_{k+1}: b^I = b^u - b_{k+1} c. The shape vector c makes
R = sum_t c_t M_{idx_t} + M_{k+1} stationary at the dual points, so that
u - u_I = b_{k+1} R + O(h^{k+2}) has superconvergent derivative there.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import List

import numpy as np
from numpy.polynomial import Legendre
from numpy.polynomial import legendre as leg

from fvelab.models.schemas import SchemeSpec
from fvelab.services.mesh import PrimaryMesh
from fvelab.services.refelem import gauss_legendre, m_deriv_eval, m_poly
from fvelab.services.scheme import reference_dual_points
from fvelab.utils.exceptions import IllPosedSchemeError
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)

COND_LIMIT = 1e12


@dataclass(frozen=True)
class ElementMCoefficients:
    """M-expansion coefficients b_0..b_{k+2} of u on one element"""
    element: int
    h: float
    coefficients: np.ndarray

    def reconstruct(self, xi: np.ndarray) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        return sum(b * m_poly(i)(xi) for i, b in enumerate(self.coefficients))


def element_m_coefficients(u, du, mesh: PrimaryMesh, element: int, k: int) -> ElementMCoefficients:
    """
    M-coefficients of u on one element, truncated at index k+2.

    b_1 = (u(x_i) - u(x_{i-1})) / 2, b_0 = u(x_i) - b_1, and for i >= 1
    b_{i+1} = c_i / (i-1)! with c_i the Legendre coefficients of the
    reference derivative u'(x(xi)) h / 2, integrated with k+6 points.
    """
    left, right = mesh.element_bounds(element)
    h = right - left
    u_left = float(np.asarray(u(np.array([left])))[0])
    u_right = float(np.asarray(u(np.array([right])))[0])

    b = np.zeros(k + 3)
    b[1] = 0.5 * (u_right - u_left)
    b[0] = u_right - b[1]

    rule = gauss_legendre(k + 6)
    x = mesh.to_physical(element, rule.nodes)
    du_ref = np.asarray(du(x), dtype=float) * 0.5 * h
    for i in range(1, k + 2):
        c_i = 0.5 * (2 * i + 1) * float(np.dot(rule.weights, du_ref * leg.legval(rule.nodes, np.eye(i + 1)[i])))
        b[i + 1] = c_i / factorial(i - 1)
    return ElementMCoefficients(element=element, h=h, coefficients=b)


def shape_indices(k: int) -> List[int]:
    """M-indices carried by the shape vector: even 2..k-1 (odd k), odd 3..k-1 (even k)"""
    start = 2 if k % 2 == 1 else 3
    return list(range(start, k, 2))


@lru_cache(maxsize=None)
def _shape_coefficients(k: int, G_key: tuple) -> tuple:
    G = np.array(G_key)
    indices = shape_indices(k)
    if not indices:
        return ()
    points = G[: len(indices)]
    B = np.array([[m_deriv_eval(i, g) for i in indices] for g in points])
    f_M = -np.array([m_deriv_eval(k + 1, g) for g in points])
    try:
        cond = np.linalg.cond(B)
        if not np.isfinite(cond) or cond > COND_LIMIT:
            raise np.linalg.LinAlgError(f"condition number {cond:.3e}")
        c = np.linalg.solve(B, f_M)
    except np.linalg.LinAlgError as e:
        logger.error(f"MMD shape system for k={k} is singular: {e}")
        raise IllPosedSchemeError(f"MMD shape system for k={k} is singular: {e}")
    return tuple(float(v) for v in c)


def mmd_shape_coefficients(spec: SchemeSpec) -> np.ndarray:
    """
    Shape vector c solving B c = -M'_{k+1}(G_m), m = 1..l-1.

    Raises:
        IllPosedSchemeError: If B is singular or badly conditioned
    """
    G = reference_dual_points(spec).G
    return np.array(_shape_coefficients(spec.k, tuple(G.tolist())))


def _m_matrix(k: int) -> np.ndarray:
    """Column i: Legendre coefficients of M_i, i = 0..k+1, padded to k+2 rows"""
    out = np.zeros((k + 2, k + 2))
    for i in range(k + 2):
        coef = m_poly(i).coefficients
        out[: len(coef), i] = coef
    return out


def shape_polynomial(spec: SchemeSpec) -> Legendre:
    """R = sum_t c_t M_{idx_t} + M_{k+1} as a Legendre series"""
    k = spec.k
    weights = np.zeros(k + 2)
    weights[k + 1] = 1.0
    for i, c in zip(shape_indices(k), mmd_shape_coefficients(spec)):
        weights[i] = c
    return Legendre(_m_matrix(k) @ weights)


@dataclass(frozen=True)
class SuperclosePoly:
    """Piecewise polynomial u_I with its per-element M-coefficients and correction"""
    mesh: PrimaryMesh
    k: int
    coefficients: np.ndarray  # (N, k+1) b^I_i
    correction: np.ndarray  # (N, 2) offset and slope of the affine correction in xi
    legendre: np.ndarray  # (N, k+1) Legendre coefficients of the corrected u_I

    @property
    def continuous(self) -> bool:
        left = leg.legval(1.0, self.legendre[:-1].T)
        right = leg.legval(-1.0, self.legendre[1:].T)
        scale = max(1.0, float(np.max(np.abs(self.legendre))))
        return bool(np.all(np.abs(left - right) <= 1e-12 * scale))

    def element_values(self, e: int, xi: np.ndarray, corrected: bool = True) -> np.ndarray:
        values = leg.legval(np.asarray(xi, dtype=float), self.legendre[e])
        if not corrected:
            offset, slope = self.correction[e]
            values = values - (offset + slope * np.asarray(xi, dtype=float))
        return values

    def element_derivatives(self, e: int, xi: np.ndarray) -> np.ndarray:
        return leg.legval(np.asarray(xi, dtype=float), leg.legder(self.legendre[e])) * (2.0 / self.mesh.widths[e])


def build_superclose(u, du, mesh: PrimaryMesh, spec: SchemeSpec) -> SuperclosePoly:
    """
    Superclose function u_I of the exact solution.

    Per element the constrained coefficients are copied from u, the shape
    indices take b^u - b_{k+1} c, and the affine interpolant of the
    remaining end point defects is added so that u_I(x_i) = u(x_i).

    Raises:
        IllPosedSchemeError: If the shape system is singular
    """
    k = spec.k
    c = mmd_shape_coefficients(spec)
    indices = shape_indices(k)
    m_matrix = _m_matrix(k)[: k + 1, : k + 1]
    n = mesh.n_elements

    coefficients = np.zeros((n, k + 1))
    correction = np.zeros((n, 2))
    legendre = np.zeros((n, k + 1))
    for e in range(n):
        b = element_m_coefficients(u, du, mesh, e, k).coefficients
        b_I = b[: k + 1].copy()
        if indices:
            b_I[indices] -= b[k + 1] * c
        series = m_matrix @ b_I

        left, right = mesh.element_bounds(e)
        defect_left = float(np.asarray(u(np.array([left])))[0]) - leg.legval(-1.0, series)
        defect_right = float(np.asarray(u(np.array([right])))[0]) - leg.legval(1.0, series)
        offset = 0.5 * (defect_left + defect_right)
        slope = 0.5 * (defect_right - defect_left)
        series[0] += offset
        if k >= 1:
            series[1] += slope

        coefficients[e] = b_I
        correction[e] = (offset, slope)
        legendre[e] = series

    logger.debug(f"Built u_I for k={k} on N={n}, max correction {np.max(np.abs(correction)):.2e}")
    return SuperclosePoly(mesh=mesh, k=k, coefficients=coefficients, correction=correction, legendre=legendre)
