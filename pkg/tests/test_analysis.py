import math

import numpy as np
import pytest
import scipy.linalg
from numpy.polynomial import legendre as leg

from fvelab.config import get_settings
from fvelab.services.analysis import (
    PROFILE_COLUMNS,
    DiscreteTestFunction,
    discrete_g_seminorm,
    dual_gram,
    dual_norms,
    eoc,
    error_profile,
    finest_reliable_index,
    floor_limited,
    h1_seminorm_error,
    inf_sup_estimate,
    l2_error,
    pi_T_star,
    superconv_point_errors,
    trial_gram,
)
from fvelab.services.assembly import BvpProblem, FveSolution, TrialSpace, fve_solve
from fvelab.services.harness import problem_preset
from fvelab.services.mesh import uniform_mesh
from fvelab.services.scheme import preset, quadrature_weights, reference_dual_points
from fvelab.utils.exceptions import ParameterError


def _zero(x):
    return np.zeros_like(x)


def _one(x):
    return np.ones_like(x)


def _interpolant(mesh, spec, u):
    """Trial function with nodal values u at the Lagrange nodes"""
    space = TrialSpace.build(mesh, spec)
    x = np.concatenate([mesh.to_physical(e, space.nodes)[:-1] for e in range(mesh.n_elements)] + [[mesh.b]])
    return FveSolution(space=space, coefficients=u(x))


# error norms

def test_norms_of_known_error():
    mesh = uniform_mesh(4)
    spec = preset("gauss-1")
    zero = FveSolution(space=TrialSpace.build(mesh, spec), coefficients=np.zeros(5))
    assert h1_seminorm_error(_one, zero, mesh, 1) == pytest.approx(1.0, abs=1e-14)
    assert l2_error(lambda x: x, zero, mesh, 1) == pytest.approx(1 / math.sqrt(3), abs=1e-14)


@pytest.mark.parametrize("name", ["scheme-3-1", "scheme-4-1"])
def test_errors_vanish_for_reproduced_polynomials(name):
    spec = preset(name)
    problem = problem_preset(f"poisson-poly-{spec.k}")
    mesh = uniform_mesh(3)
    solution = fve_solve(problem, mesh, spec)
    assert h1_seminorm_error(problem.du, solution, mesh, spec.k) < 1e-9
    assert l2_error(problem.u, solution, mesh, spec.k) < 1e-9
    err_p1, err_p0 = superconv_point_errors(solution, problem.u, problem.du, mesh, spec)
    assert err_p1 < 1e-9 and err_p0 < 1e-9


# experimental orders

def test_eoc_values():
    assert eoc([1e-2, 2.5e-3], [0.5, 0.25]) == pytest.approx([2.0])
    assert eoc([1.0, 1.0, 1.0], [0.5, 0.25, 0.125]) == pytest.approx([0.0, 0.0])
    assert eoc([7.7122e-2, 9.6579e-3], [0.25, 0.125])[0] == pytest.approx(2.9974, abs=1e-4)


def test_eoc_of_nonpositive_errors_is_nan():
    orders = eoc([1e-3, 0.0, 1e-5], [0.5, 0.25, 0.125])
    assert all(math.isnan(o) for o in orders)


def test_eoc_length_mismatch():
    with pytest.raises(ParameterError):
        eoc([1.0, 0.5], [0.5])
    with pytest.raises(ParameterError):
        eoc([1.0], [0.5])


def test_floor_limited_pairs():
    errors = [6.2e-10, 9.7e-12, 2.0e-13, 2.6e-13]
    flags = floor_limited(errors, 5e-12)
    assert flags == [False, True, True]
    assert finest_reliable_index(flags) == 0
    assert floor_limited([1e-3, None, 1e-5], 5e-12) == [False, False]
    assert all(math.isnan(o) for o in eoc([1e-3, float("nan"), 1e-5], [0.5, 0.25, 0.125]))
    assert finest_reliable_index([True, True]) is None
    with pytest.raises(ParameterError):
        floor_limited(errors, -1.0)


# error profiles

def test_error_profile_layout():
    mesh = uniform_mesh(4)
    spec = preset("scheme-4-1")
    problem = problem_preset("example-6-1")
    solution = fve_solve(problem, mesh, spec)
    frame = error_profile(solution, problem.u, problem.du, mesh, samples_per_element=9)
    assert list(frame.columns) == PROFILE_COLUMNS
    assert len(frame) == 36
    assert sorted(frame["element_index"].unique()) == [0, 1, 2, 3]
    assert (frame["abs_err_value"] >= 0).all()
    # u_h interpolates the boundary data
    assert frame["abs_err_value"].iloc[0] < 1e-14
    with pytest.raises(ParameterError):
        error_profile(solution, problem.u, problem.du, mesh, samples_per_element=7)


def test_error_profile_of_reproduced_polynomial():
    spec = preset("scheme-3-1")
    problem = problem_preset("poisson-poly-3")
    mesh = uniform_mesh(2)
    frame = error_profile(fve_solve(problem, mesh, spec), problem.u, problem.du, mesh)
    assert frame["abs_err_value"].max() < 1e-9
    assert frame["abs_err_deriv"].max() < 1e-9


# discrete norms

def test_dual_norms_of_zero():
    v = DiscreteTestFunction(mesh=uniform_mesh(3), k=2, values=np.zeros(5))
    assert dual_norms(v) == (0.0, 0.0)


def test_pi_T_star_of_linear_function():
    mesh = uniform_mesh(2)
    spec = preset("gauss-1")
    w = _interpolant(mesh, spec, lambda x: x)
    v = pi_T_star(w, mesh, spec)
    np.testing.assert_allclose(v.values, [0.5])
    np.testing.assert_allclose(v.full_values, [0.0, 0.5, 0.0])
    seminorm, norm = dual_norms(v)
    assert seminorm == pytest.approx(1.0)
    assert norm == pytest.approx(math.sqrt(0.125))
    assert discrete_g_seminorm(w, mesh, spec) == pytest.approx(1.0)


def _derivative_bounds(spec):
    """Extreme ratios of the discrete G-seminorm to the H1 seminorm on one element"""
    G = reference_dual_points(spec).G
    A = quadrature_weights(G)
    V = leg.legvander(G, spec.k - 1)
    Q = V.T @ np.diag(A) @ V
    M = np.diag(2.0 / (2 * np.arange(spec.k) + 1))
    eigenvalues = scipy.linalg.eigh(Q, M, eigvals_only=True)
    return eigenvalues.min(), eigenvalues.max()


@pytest.mark.parametrize("name", ["gauss-2", "scheme-3-1", "scheme-4-1"])
def test_discrete_norm_equivalence(name, rng):
    spec = preset(name)
    A = quadrature_weights(reference_dual_points(spec).G)
    lo1, hi1 = A.min() / 2, A.max() / 2
    lo2, hi2 = _derivative_bounds(spec)
    assert lo2 > 0
    for N in (4, 8, 16):
        mesh = uniform_mesh(N)
        space = TrialSpace.build(mesh, spec)
        for _ in range(50):
            coefficients = np.concatenate([[0.0], rng.normal(size=space.n_interior), [0.0]])
            w = FveSolution(space=space, coefficients=coefficients)
            g_norm = discrete_g_seminorm(w, mesh, spec)
            h1 = h1_seminorm_error(_zero, w, mesh, spec.k)
            star, _ = dual_norms(pi_T_star(w, mesh, spec))
            assert lo1 - 1e-10 <= (star / g_norm) ** 2 <= hi1 + 1e-10
            assert lo2 - 1e-10 <= (g_norm / h1) ** 2 <= hi2 + 1e-10


# Gram matrices and inf-sup

def test_gram_matrices_are_symmetric_positive_definite():
    mesh = uniform_mesh(4)
    spec = preset("scheme-3-1")
    for gram in (trial_gram(TrialSpace.build(mesh, spec)), dual_gram(mesh, spec.k)):
        assert gram.shape == (11, 11)
        np.testing.assert_allclose(gram, gram.T, atol=1e-14)
        assert np.linalg.eigvalsh(gram).min() > 0


def test_dual_gram_matches_norms(rng):
    mesh = uniform_mesh(3)
    values = rng.normal(size=5)
    seminorm, norm = dual_norms(DiscreteTestFunction(mesh=mesh, k=2, values=values))
    assert values @ dual_gram(mesh, 2) @ values == pytest.approx(seminorm ** 2 + norm ** 2, rel=1e-12)


def test_inf_sup_linear():
    problem = BvpProblem(p=_one, q=_zero, r=_zero, f=_zero)
    assert inf_sup_estimate(problem, uniform_mesh(8), preset("gauss-1")) > 0.1


@pytest.mark.slow
def test_inf_sup_is_mesh_independent():
    problem = BvpProblem(p=_one, q=_zero, r=_one, f=_zero)
    spec = preset("scheme-4-1")
    estimates = [inf_sup_estimate(problem, uniform_mesh(N), spec) for N in (4, 8, 16, 32)]
    assert min(estimates) > 0
    assert max(estimates) / min(estimates) <= 2.0


def test_inf_sup_scales_with_diffusion():
    spec = preset("scheme-4-1")
    mesh = uniform_mesh(8)
    base = inf_sup_estimate(BvpProblem(p=_one, q=_zero, r=_zero, f=_zero), mesh, spec)
    scaled = inf_sup_estimate(BvpProblem(p=lambda x: 10.0 + 0.0 * x, q=_zero, r=_zero, f=_zero), mesh, spec)
    assert scaled / base == pytest.approx(10.0, rel=1e-9)


def test_inf_sup_size_limit(monkeypatch):
    monkeypatch.setattr(get_settings(), "inf_sup_max_dofs", 4)
    problem = BvpProblem(p=_one, q=_zero, r=_zero, f=_zero)
    with pytest.raises(ParameterError):
        inf_sup_estimate(problem, uniform_mesh(4), preset("gauss-2"))
