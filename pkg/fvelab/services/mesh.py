"""
Primary and dual partitions of an interval [A, B].

Dual points are indexed element-major and zero-based: dual point d lives in
element d // k with local index d % k. Control volume m spans
[bounds[m], bounds[m + 1]] where bounds = [A, g_0, ..., g_{Nk-1}, B]; the
interior volumes m = 1..Nk-1 carry one equation each.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from fvelab.models.schemas import SchemeSpec
from fvelab.services.scheme import reference_dual_points
from fvelab.utils.exceptions import ParameterError
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)


@dataclass(frozen=True)
class PrimaryMesh:
    """Partition A = x_0 < x_1 < ... < x_N = B"""
    points: np.ndarray

    def __post_init__(self):
        points = np.asarray(self.points, dtype=float)
        if points.ndim != 1 or points.size < 3:
            raise ParameterError(f"A primary mesh needs N >= 2 elements, got {max(points.size - 1, 0)}")
        if np.any(np.diff(points) <= 0):
            raise ParameterError("Mesh points must be strictly increasing")
        object.__setattr__(self, "points", points)

    @property
    def n_elements(self) -> int:
        return self.points.size - 1

    @property
    def a(self) -> float:
        return float(self.points[0])

    @property
    def b(self) -> float:
        return float(self.points[-1])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.points)

    @property
    def h(self) -> float:
        return float(self.widths.max())

    @property
    def regularity(self) -> float:
        """max h_i / min h_i"""
        widths = self.widths
        return float(widths.max() / widths.min())

    def element_bounds(self, e: int) -> Tuple[float, float]:
        return float(self.points[e]), float(self.points[e + 1])

    def to_physical(self, e: int, xi: np.ndarray) -> np.ndarray:
        left, right = self.element_bounds(e)
        return 0.5 * (left + right) + 0.5 * (right - left) * np.asarray(xi, dtype=float)

    def to_reference(self, e: int, x: np.ndarray) -> np.ndarray:
        left, right = self.element_bounds(e)
        return (2.0 * np.asarray(x, dtype=float) - left - right) / (right - left)

    def locate(self, x: np.ndarray) -> np.ndarray:
        """Element index of each x; element end points go to the left element"""
        idx = np.searchsorted(self.points, np.asarray(x, dtype=float), side="left") - 1
        return np.clip(idx, 0, self.n_elements - 1)


@dataclass(frozen=True)
class DualMesh:
    """Dual points g_{i,j} and the control volumes they delimit"""
    mesh: PrimaryMesh
    k: int
    points: np.ndarray

    @property
    def n_points(self) -> int:
        return self.points.size

    @property
    def n_interior(self) -> int:
        """Number of test functions, Nk - 1"""
        return self.points.size - 1

    @property
    def bounds(self) -> np.ndarray:
        return np.concatenate([[self.mesh.a], self.points, [self.mesh.b]])

    @property
    def volume_lengths(self) -> np.ndarray:
        return np.diff(self.bounds)

    def element_of(self, d: int) -> int:
        return d // self.k

    def interior_volume(self, row: int) -> Tuple[float, float]:
        """Interval of the volume behind equation `row` (0-based)"""
        return float(self.points[row]), float(self.points[row + 1])

    def volume_label(self, row: int) -> Tuple[int, int]:
        """1-based (i, j) of K*_{i,j} for equation `row`"""
        return row // self.k + 1, row % self.k + 1


def uniform_mesh(N: int, A: float = 0.0, B: float = 1.0) -> PrimaryMesh:
    """x_i = A + i (B - A) / N"""
    if N < 2:
        raise ParameterError(f"A primary mesh needs N >= 2 elements, got {N}")
    if not A < B:
        raise ParameterError(f"Interval must satisfy A < B, got [{A}, {B}]")
    points = A + np.arange(N + 1) * (B - A) / N
    points[-1] = B
    return PrimaryMesh(points=points)


def mesh_from_points(points: Sequence[float]) -> PrimaryMesh:
    """Primary mesh from an explicit (possibly graded) point list"""
    mesh = PrimaryMesh(points=np.asarray(points, dtype=float))
    logger.debug(f"Mesh with N={mesh.n_elements}, regularity {mesh.regularity:.3f}")
    return mesh


def dual_mesh(mesh: PrimaryMesh, spec: SchemeSpec) -> DualMesh:
    """
    Map the reference dual abscissae into every element.

    g_{i,j} = (x_i + x_{i-1} + h_i G_j) / 2

    Args:
        mesh: Primary mesh
        spec: Scheme design

    Returns:
        DualMesh with N*k points
    """
    G = reference_dual_points(spec).G
    left = mesh.points[:-1, None]
    right = mesh.points[1:, None]
    points = (0.5 * (left + right) + 0.5 * (right - left) * G[None, :]).ravel()
    if np.any(np.diff(points) <= 0):
        logger.error(f"Dual points of scheme '{spec.label}' are not strictly increasing")
        raise ParameterError(f"Dual points of scheme '{spec.label}' are not strictly increasing on this mesh")
    return DualMesh(mesh=mesh, k=spec.k, points=points)
