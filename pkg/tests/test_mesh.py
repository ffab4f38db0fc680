import math

import numpy as np
import pytest

from fvelab.services.mesh import dual_mesh, mesh_from_points, uniform_mesh
from fvelab.services.scheme import ReferenceLayout, preset
from fvelab.utils.exceptions import ParameterError


def test_uniform_mesh():
    mesh = uniform_mesh(4, 0.0, 1.0)
    np.testing.assert_allclose(mesh.points, [0.0, 0.25, 0.5, 0.75, 1.0])
    assert mesh.n_elements == 4
    assert mesh.h == pytest.approx(0.25)
    assert mesh.regularity == pytest.approx(1.0)
    assert mesh.b == 1.0


@pytest.mark.parametrize("N, A, B", [(1, 0.0, 1.0), (0, 0.0, 1.0), (4, 1.0, 1.0), (4, 2.0, 1.0)])
def test_uniform_mesh_rejects_bad_input(N, A, B):
    with pytest.raises(ParameterError):
        uniform_mesh(N, A, B)


def test_graded_mesh():
    mesh = mesh_from_points([0.0, 0.1, 0.3, 1.0])
    np.testing.assert_allclose(mesh.widths, [0.1, 0.2, 0.7])
    assert mesh.regularity == pytest.approx(7.0)
    with pytest.raises(ParameterError):
        mesh_from_points([0.0, 0.5, 0.5, 1.0])
    with pytest.raises(ParameterError):
        mesh_from_points([0.0, 1.0])


def test_reference_maps():
    mesh = mesh_from_points([0.0, 0.2, 1.0])
    np.testing.assert_allclose(mesh.to_physical(1, [-1.0, 0.0, 1.0]), [0.2, 0.6, 1.0])
    np.testing.assert_allclose(mesh.to_reference(1, [0.2, 0.6, 1.0]), [-1.0, 0.0, 1.0])


def test_locate():
    mesh = uniform_mesh(4)
    np.testing.assert_array_equal(mesh.locate([0.0, 0.1, 0.25, 0.3, 1.0]), [0, 0, 0, 1, 3])


def test_dual_points_quadratic():
    dual = dual_mesh(uniform_mesh(2), preset("gauss-2"))
    offset = 0.25 / math.sqrt(3.0)
    expected = [0.25 - offset, 0.25 + offset, 0.75 - offset, 0.75 + offset]
    np.testing.assert_allclose(dual.points, expected, atol=1e-15)
    assert dual.n_points == 4
    assert dual.n_interior == 3


def test_dual_points_linear_are_midpoints():
    dual = dual_mesh(uniform_mesh(4), preset("gauss-1"))
    np.testing.assert_allclose(dual.points, [0.125, 0.375, 0.625, 0.875])
    np.testing.assert_allclose(dual.volume_lengths, [0.125, 0.25, 0.25, 0.25, 0.125])


@pytest.mark.parametrize("name", ["gauss-1", "scheme-3-1", "scheme-4-1", "scheme-6-1"])
def test_dual_mesh_properties(name):
    spec = preset(name)
    mesh = mesh_from_points([0.0, 0.15, 0.4, 0.7, 1.0])
    dual = dual_mesh(mesh, spec)
    assert dual.n_points == mesh.n_elements * spec.k
    assert np.all(np.diff(dual.points) > 0)
    assert dual.volume_lengths.sum() == pytest.approx(1.0, abs=1e-15)
    for e in range(mesh.n_elements):
        left, right = mesh.element_bounds(e)
        local = dual.points[e * spec.k:(e + 1) * spec.k]
        np.testing.assert_allclose(local - left, (right - local)[::-1], atol=1e-15)


def test_dual_mesh_rejects_unordered_points(monkeypatch):
    monkeypatch.setattr(
        "fvelab.services.mesh.reference_dual_points",
        lambda spec: ReferenceLayout(G=np.array([-0.5, 0.6, 0.4])),
    )
    with pytest.raises(ParameterError, match="not strictly increasing"):
        dual_mesh(uniform_mesh(4), preset("scheme-3-1"))


def test_volume_labels():
    dual = dual_mesh(uniform_mesh(3), preset("scheme-3-1"))
    assert dual.volume_label(0) == (1, 1)
    assert dual.volume_label(2) == (1, 3)
    assert dual.volume_label(3) == (2, 1)
    assert dual.element_of(5) == 1
    assert dual.interior_volume(0) == (dual.points[0], dual.points[1])
