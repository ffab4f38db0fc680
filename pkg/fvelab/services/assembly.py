"""
FVE assembly and solve for

    -(p u')' + q u' + r u = f  on (A, B),   u(A) = g_A,  u(B) = g_B.

Trial functions are continuous piecewise polynomials of degree k, test
functions are the characteristic functions of the interior control
volumes. Equation m (volume [g_m, g_{m+1}]) reads

    p(g_m) u_h'(g_m) - p(g_{m+1}) u_h'(g_{m+1}) + int (q u_h' + r u_h) = int f

with boundary degrees of freedom lifted to the right-hand side.
"""

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np
from numpy.polynomial import legendre as leg

from fvelab.models.schemas import SchemeSpec
from fvelab.services.banded_solver import BandedSystem, solve
from fvelab.services.mesh import DualMesh, PrimaryMesh, dual_mesh
from fvelab.services.refelem import QuadratureRule, gauss_legendre
from fvelab.services.scheme import lagrange_nodes
from fvelab.utils.exceptions import InvalidProblemError
from fvelab.utils.logger import setup_logger
from fvelab.utils.validators import quadrature_points

logger = setup_logger(__name__)

Func = Callable[[np.ndarray], np.ndarray]

COERCIVITY_SAMPLES = 1001


def _vectorize(fn: Func) -> Func:
    """Accept scalar-returning callables on array input"""
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(fn(x), dtype=float), x.shape).copy()
    return wrapped


@dataclass(frozen=True)
class BvpProblem:
    """Two-point boundary value problem with Dirichlet data"""
    p: Func
    q: Func
    r: Func
    f: Func
    a: float = 0.0
    b: float = 1.0
    g_a: float = 0.0
    g_b: float = 0.0
    dq: Optional[Func] = None
    u: Optional[Func] = None
    du: Optional[Func] = None
    coercive: bool = False
    name: str = ""

    def __post_init__(self):
        if not self.a < self.b:
            raise InvalidProblemError(f"Problem interval must satisfy A < B, got [{self.a}, {self.b}]")
        for attr in ("p", "q", "r", "f", "dq", "u", "du"):
            fn = getattr(self, attr)
            if fn is not None:
                object.__setattr__(self, attr, _vectorize(fn))

    @property
    def has_exact(self) -> bool:
        return self.u is not None and self.du is not None

    @classmethod
    def manufactured(
        cls,
        p: Func,
        dp: Func,
        q: Func,
        r: Func,
        u: Func,
        du: Func,
        d2u: Func,
        a: float = 0.0,
        b: float = 1.0,
        dq: Optional[Func] = None,
        coercive: bool = False,
        name: str = "",
    ) -> "BvpProblem":
        """Problem whose exact solution is u: f = -(p u')' + q u' + r u"""
        p, dp, q, r = _vectorize(p), _vectorize(dp), _vectorize(q), _vectorize(r)
        u, du, d2u = _vectorize(u), _vectorize(du), _vectorize(d2u)

        def f(x):
            return -(dp(x) * du(x) + p(x) * d2u(x)) + q(x) * du(x) + r(x) * u(x)

        return cls(
            p=p, q=q, r=r, f=f, a=a, b=b,
            g_a=float(u(np.array(a))), g_b=float(u(np.array(b))),
            dq=_vectorize(dq) if dq is not None else None,
            u=u, du=du, coercive=coercive, name=name,
        )


def check_coercivity(problem: BvpProblem) -> None:
    """
    Sample p >= p0 > 0 and, when claimed, r - q'/2 > 0 on a uniform grid.

    Raises:
        InvalidProblemError: If p is not positive somewhere on the grid
    """
    x = np.linspace(problem.a, problem.b, COERCIVITY_SAMPLES)
    p_min = float(np.min(problem.p(x)))
    if p_min <= 0:
        raise InvalidProblemError(f"Diffusion coefficient must be positive, min p = {p_min:.3e}")
    if problem.coercive:
        dq = problem.dq(x) if problem.dq is not None else 0.0
        gamma = float(np.min(problem.r(x) - 0.5 * dq))
        if gamma <= 0:
            logger.warning(f"Problem '{problem.name}' claims coercivity but min(r - q'/2) = {gamma:.3e}")


@dataclass(frozen=True)
class TrialSpace:
    """Continuous piecewise P^k with Lagrange nodes at the reference `nodes`"""
    mesh: PrimaryMesh
    spec: SchemeSpec
    nodes: np.ndarray
    basis: np.ndarray  # column n: Legendre coefficients of the n-th local basis function

    @classmethod
    def build(cls, mesh: PrimaryMesh, spec: SchemeSpec) -> "TrialSpace":
        nodes = lagrange_nodes(spec)
        vander = leg.legvander(nodes, spec.k)
        return cls(mesh=mesh, spec=spec, nodes=nodes, basis=np.linalg.inv(vander))

    @property
    def k(self) -> int:
        return self.spec.k

    @property
    def n_dofs(self) -> int:
        return self.mesh.n_elements * self.k + 1

    @property
    def n_interior(self) -> int:
        return self.n_dofs - 2

    def element_dofs(self, e: int) -> np.ndarray:
        return np.arange(e * self.k, e * self.k + self.k + 1)

    def values(self, xi: np.ndarray) -> np.ndarray:
        """Local basis values, shape (len(xi), k+1)"""
        return leg.legvander(np.atleast_1d(xi), self.k) @ self.basis

    def derivatives(self, xi: np.ndarray) -> np.ndarray:
        """Local basis derivatives in xi, shape (len(xi), k+1)"""
        dbasis = leg.legder(self.basis, axis=0)
        return leg.legvander(np.atleast_1d(xi), self.k - 1) @ dbasis

    def element_gradients(self, e: int, xi: np.ndarray) -> np.ndarray:
        """Basis derivatives in x on element e"""
        return self.derivatives(xi) * (2.0 / self.mesh.widths[e])


@dataclass(frozen=True)
class FveSolution:
    """Finite volume element solution u_h"""
    space: TrialSpace
    coefficients: np.ndarray
    residual: float = 0.0

    @property
    def mesh(self) -> PrimaryMesh:
        return self.space.mesh

    def element_values(self, e: int, xi: np.ndarray) -> np.ndarray:
        return self.space.values(xi) @ self.coefficients[self.space.element_dofs(e)]

    def element_derivatives(self, e: int, xi: np.ndarray) -> np.ndarray:
        return self.space.element_gradients(e, xi) @ self.coefficients[self.space.element_dofs(e)]

    def _evaluate(self, x, local: Callable[[int, np.ndarray], np.ndarray]) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        elements = self.mesh.locate(x)
        out = np.empty_like(x)
        for e in np.unique(elements):
            mask = elements == e
            out[mask] = local(int(e), self.mesh.to_reference(int(e), x[mask]))
        return out

    def __call__(self, x) -> np.ndarray:
        return self._evaluate(x, self.element_values)

    def derivative(self, x) -> np.ndarray:
        return self._evaluate(x, self.element_derivatives)


def _volume_pieces(dual: DualMesh, row: int) -> List[Tuple[int, float, float]]:
    """(element, left, right) pieces of an interior volume split at element boundaries"""
    left, right = dual.interior_volume(row)
    e_left, e_right = dual.element_of(row), dual.element_of(row + 1)
    if e_left == e_right:
        return [(e_left, left, right)]
    x_split = float(dual.mesh.points[e_right])
    return [(e_left, left, x_split), (e_right, x_split, right)]


def _scatter(system: BandedSystem, space: TrialSpace, problem: BvpProblem,
             row: int, e: int, local: np.ndarray) -> None:
    """Add a row of local contributions, lifting the boundary DOFs"""
    last = space.n_dofs - 1
    for dof, value in zip(space.element_dofs(e), local):
        if dof == 0:
            system.rhs[row] -= value * problem.g_a
        elif dof == last:
            system.rhs[row] -= value * problem.g_b
        else:
            system.add(row, int(dof) - 1, float(value))


def assemble(problem: BvpProblem, mesh: PrimaryMesh, spec: SchemeSpec) -> BandedSystem:
    """
    Assemble the FVE system, one equation per interior control volume.

    Args:
        problem: Boundary value problem
        mesh: Primary mesh on [problem.a, problem.b]
        spec: Scheme design

    Returns:
        BandedSystem of dimension Nk - 1 with bandwidths (k, k)
    """
    if abs(mesh.a - problem.a) > 1e-14 or abs(mesh.b - problem.b) > 1e-14:
        raise InvalidProblemError(
            f"Mesh interval [{mesh.a}, {mesh.b}] does not match problem interval [{problem.a}, {problem.b}]"
        )
    k = spec.k
    space = TrialSpace.build(mesh, spec)
    dual = dual_mesh(mesh, spec)
    rule: QuadratureRule = gauss_legendre(quadrature_points(k))
    n = dual.n_interior
    system = BandedSystem.zeros(n, lower=k, upper=k, labels=dual.volume_label)

    # Fluxes at dual points: + on the volume to the right, - on the volume to the left
    for d in range(dual.n_points):
        e = dual.element_of(d)
        g = dual.points[d]
        xi = mesh.to_reference(e, np.array([g]))
        flux = problem.p(np.array([g]))[0] * space.element_gradients(e, xi)[0]
        if d < n:
            _scatter(system, space, problem, d, e, flux)
        if d >= 1:
            _scatter(system, space, problem, d - 1, e, -flux)

    for row in range(n):
        for e, left, right in _volume_pieces(dual, row):
            if right <= left:
                continue
            x, w = rule.mapped(left, right)
            xi = mesh.to_reference(e, x)
            phi = space.values(xi)
            dphi = space.element_gradients(e, xi)
            local = (w * problem.q(x)) @ dphi + (w * problem.r(x)) @ phi
            _scatter(system, space, problem, row, e, local)
            system.rhs[row] += float(np.dot(w, problem.f(x)))

    logger.debug(f"Assembled n={n} system for k={k}, N={mesh.n_elements}")
    return system


def fve_solve(problem: BvpProblem, mesh: PrimaryMesh, spec: SchemeSpec) -> FveSolution:
    """
    Solve the FVE scheme and wrap the coefficients in an evaluator.

    Raises:
        SingularSystemError: If the assembled system is numerically singular
    """
    logger.info(f"Solving '{problem.name}' with scheme '{spec.label}' (k={spec.k}) on N={mesh.n_elements}")
    system = assemble(problem, mesh, spec)
    interior = solve(system)
    coefficients = np.concatenate([[problem.g_a], interior, [problem.g_b]])
    space = TrialSpace.build(mesh, spec)
    return FveSolution(space=space, coefficients=coefficients, residual=system.relative_residual(interior))


def flux_residuals(problem: BvpProblem, mesh: PrimaryMesh, spec: SchemeSpec,
                   solution: FveSolution) -> np.ndarray:
    """Per-volume flux balance of u_h minus the f-integral"""
    dual = dual_mesh(mesh, spec)
    rule = gauss_legendre(quadrature_points(spec.k))

    def flux(d: int) -> float:
        e = dual.element_of(d)
        g = np.array([dual.points[d]])
        return float(problem.p(g)[0] * solution.element_derivatives(e, mesh.to_reference(e, g))[0])

    residuals = np.zeros(dual.n_interior)
    for row in range(dual.n_interior):
        balance = flux(row) - flux(row + 1)
        for e, left, right in _volume_pieces(dual, row):
            if right <= left:
                continue
            x, w = rule.mapped(left, right)
            xi = mesh.to_reference(e, x)
            integrand = (problem.q(x) * solution.element_derivatives(e, xi)
                         + problem.r(x) * solution.element_values(e, xi) - problem.f(x))
            balance += float(np.dot(w, integrand))
        residuals[row] = balance
    return residuals
