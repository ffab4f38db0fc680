"""
Reference-element mathematics on [-1, 1].

Gauss-Legendre rules, Legendre polynomials and the integrated Legendre
M-polynomials used by the M-decomposition:

    M_0 = 1,  M_1 = xi,  M_{i+1}(xi) = (i-1)! * int_{-1}^{xi} P_i(t) dt   (i >= 1)

so that M_i(+-1) = 0 for i >= 2, M_{i+1}' = (i-1)! P_i and M_i has the
parity of i. Everything here is immutable and cached.
"""

from dataclasses import dataclass
from functools import lru_cache
from math import factorial
from typing import Callable, Tuple, Union

import numpy as np
from numpy.polynomial import legendre as leg

from fvelab.utils.exceptions import ParameterError
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)

MAX_RULE_POINTS = 32
MAX_POLY_INDEX = 12

ArrayLike = Union[float, np.ndarray]


@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre rule on [-1, 1]"""
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def degree(self) -> int:
        """Highest monomial degree integrated exactly"""
        return 2 * self.size - 1

    def mapped(self, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
        """Nodes and weights affinely mapped to [a, b]"""
        half = 0.5 * (b - a)
        return 0.5 * (a + b) + half * self.nodes, half * self.weights


@lru_cache(maxsize=None)
def gauss_legendre(n: int) -> QuadratureRule:
    """
    n-point Gauss-Legendre rule on [-1, 1].

    Nodes are the roots of P_n found by Newton's method started from the
    Chebyshev points; weights are 2 / ((1 - x^2) P_n'(x)^2).

    Args:
        n: Number of points, 1 <= n <= 32

    Returns:
        QuadratureRule with strictly increasing, symmetric nodes

    Raises:
        ParameterError: If n is out of range
    """
    if not isinstance(n, (int, np.integer)) or n < 1 or n > MAX_RULE_POINTS:
        raise ParameterError(f"Gauss-Legendre size must be in [1, {MAX_RULE_POINTS}], got {n}")
    n = int(n)

    if n == 1:
        return QuadratureRule(nodes=np.array([0.0]), weights=np.array([2.0]))

    # Chebyshev initial guesses, descending
    x = np.cos(np.pi * (np.arange(1, n + 1) - 0.25) / (n + 0.5))
    for _ in range(100):
        p, dp = legendre_eval(n, x), legendre_deriv_eval(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) < 1e-15:
            break
    else:
        logger.warning(f"Gauss-Legendre Newton iteration for n={n} hit the iteration cap")

    x = np.sort(x)
    # Enforce exact symmetry of the computed rule
    x = 0.5 * (x - x[::-1])
    if n % 2 == 1:
        x[n // 2] = 0.0
    dp = legendre_deriv_eval(n, x)
    w = 2.0 / ((1.0 - x ** 2) * dp ** 2)
    w = 0.5 * (w + w[::-1])

    logger.debug(f"Built {n}-point Gauss-Legendre rule, weight sum error {abs(w.sum() - 2.0):.2e}")
    return QuadratureRule(nodes=x, weights=w)


def _check_index(i: int) -> None:
    if i < 0 or i > MAX_POLY_INDEX:
        raise ParameterError(f"Polynomial index must be in [0, {MAX_POLY_INDEX}], got {i}")


def legendre_eval(i: int, xi: ArrayLike) -> ArrayLike:
    """Value of the Legendre polynomial P_i by the three-term recurrence"""
    if i < 0:
        raise ParameterError(f"Legendre index must be nonnegative, got {i}")
    xi = np.asarray(xi, dtype=float)
    p_prev, p = np.ones_like(xi), xi.copy()
    if i == 0:
        return p_prev if p_prev.ndim else float(p_prev)
    for n in range(1, i):
        p_prev, p = p, ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
    return p if p.ndim else float(p)


def legendre_deriv_eval(i: int, xi: ArrayLike) -> ArrayLike:
    """Derivative P_i' via P_{n+1}' = P_{n-1}' + (2n+1) P_n"""
    if i < 0:
        raise ParameterError(f"Legendre index must be nonnegative, got {i}")
    xi = np.asarray(xi, dtype=float)
    d_prev, d = np.zeros_like(xi), np.ones_like(xi)
    if i == 0:
        return d_prev if d_prev.ndim else float(d_prev)
    p_prev, p = np.ones_like(xi), xi.copy()
    for n in range(1, i):
        d_prev, d = d, d_prev + (2 * n + 1) * p
        p_prev, p = p, ((2 * n + 1) * xi * p - n * p_prev) / (n + 1)
    return d if d.ndim else float(d)


@dataclass(frozen=True)
class MPolynomial:
    """Integrated Legendre polynomial M_i stored by its Legendre coefficients"""
    index: int
    coefficients: np.ndarray

    def __call__(self, xi: ArrayLike) -> ArrayLike:
        return leg.legval(xi, self.coefficients)

    def derivative(self, xi: ArrayLike) -> ArrayLike:
        return leg.legval(xi, leg.legder(self.coefficients))

    @property
    def parity(self) -> int:
        return self.index % 2


@lru_cache(maxsize=None)
def m_poly(i: int) -> MPolynomial:
    """M-polynomial of index i, built from (i-1)! P_{i-1} integrated from -1"""
    _check_index(i)
    if i == 0:
        coef = np.array([1.0])
    elif i == 1:
        coef = np.array([0.0, 1.0])
    else:
        scaled = np.zeros(i)
        scaled[i - 1] = float(factorial(i - 2))
        coef = leg.legint(scaled, lbnd=-1.0)
    return MPolynomial(index=i, coefficients=coef)


def m_eval(i: int, xi: ArrayLike) -> ArrayLike:
    return m_poly(i)(xi)


def m_deriv_eval(i: int, xi: ArrayLike) -> ArrayLike:
    return m_poly(i).derivative(xi)


def integrate(f: Callable[[np.ndarray], np.ndarray], a: float, b: float, rule: QuadratureRule) -> float:
    """Integrate f over [a, b] with the affinely mapped rule"""
    if not a < b:
        raise ParameterError(f"Integration bounds must satisfy a < b, got [{a}, {b}]")
    x, w = rule.mapped(a, b)
    return float(np.dot(w, f(x)))
