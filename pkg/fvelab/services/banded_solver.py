"""
Banded linear systems with small bandwidth.

Storage follows the LAPACK convention: entry A[i, j] of a matrix with
`lower` sub- and `upper` super-diagonals lives at band[upper + i - j, j].
The direct solver is Gaussian elimination with partial pivoting restricted
to the band; row swaps widen the upper band of U to lower + upper.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg

from fvelab.utils.exceptions import ParameterError, SingularSystemError
from fvelab.utils.logger import setup_logger

logger = setup_logger(__name__)

PIVOT_TOL = 1e-14


@dataclass
class BandedSystem:
    """Square band matrix with its right-hand side"""
    n: int
    lower: int
    upper: int
    band: np.ndarray
    rhs: np.ndarray
    labels: Optional[Callable[[int], Tuple[int, int]]] = field(default=None, repr=False)

    @classmethod
    def zeros(cls, n: int, lower: int, upper: int, labels=None) -> "BandedSystem":
        if n < 1:
            raise ParameterError(f"System dimension must be positive, got {n}")
        return cls(
            n=n,
            lower=lower,
            upper=upper,
            band=np.zeros((lower + upper + 1, n)),
            rhs=np.zeros(n),
            labels=labels,
        )

    @classmethod
    def from_dense(cls, A: np.ndarray, b: np.ndarray, lower: int, upper: int) -> "BandedSystem":
        A = np.asarray(A, dtype=float)
        system = cls.zeros(A.shape[0], lower, upper)
        for i, j in zip(*np.nonzero(A)):
            system.add(int(i), int(j), A[i, j])
        system.rhs[:] = b
        return system

    @property
    def bandwidth(self) -> int:
        return self.lower + self.upper + 1

    def add(self, i: int, j: int, value: float) -> None:
        offset = j - i
        if offset < -self.lower or offset > self.upper:
            raise ParameterError(
                f"Entry ({i}, {j}) lies outside the band [-{self.lower}, {self.upper}]"
            )
        self.band[self.upper + i - j, j] += value

    def to_dense(self) -> np.ndarray:
        A = np.zeros((self.n, self.n))
        for j in range(self.n):
            i_lo = max(0, j - self.upper)
            i_hi = min(self.n, j + self.lower + 1)
            rows = np.arange(i_lo, i_hi)
            A[rows, j] = self.band[self.upper + rows - j, j]
        return A

    def matvec(self, x: np.ndarray) -> np.ndarray:
        y = np.zeros(self.n)
        for j in range(self.n):
            i_lo = max(0, j - self.upper)
            i_hi = min(self.n, j + self.lower + 1)
            y[i_lo:i_hi] += self.band[self.upper + np.arange(i_lo, i_hi) - j, j] * x[j]
        return y

    def relative_residual(self, x: np.ndarray) -> float:
        """||Ax - b||_inf / ||b||_inf (absolute when b = 0)"""
        r = np.max(np.abs(self.matvec(x) - self.rhs))
        scale = np.max(np.abs(self.rhs))
        return float(r / scale) if scale > 0 else float(r)

    def row_label(self, row: int) -> Optional[Tuple[int, int]]:
        return self.labels(row) if self.labels is not None else None


def _raise_singular(system: BandedSystem, row: int, pivot: float) -> None:
    volume = system.row_label(row)
    where = f"control volume K*_{volume}" if volume is not None else f"row {row}"
    logger.error(f"Numerically singular pivot {pivot:.3e} at {where}")
    raise SingularSystemError(f"Numerically singular system at {where}", row=row, volume=volume)


def solve(system: BandedSystem) -> np.ndarray:
    """
    Solve a banded system by band LU with partial pivoting.

    Args:
        system: Assembled banded system

    Returns:
        Solution vector

    Raises:
        SingularSystemError: If a pivot falls below 1e-14 times its row norm
    """
    n, kl, ku = system.n, system.lower, system.upper
    width = kl + ku  # upper bandwidth of U after pivoting

    # Work in a dense-row window of width 2*kl + ku + 1 per row: W[i, c] = A[i, i - kl + c]
    W = np.zeros((n, 2 * kl + ku + 1))
    for i in range(n):
        cols = np.arange(max(0, i - kl), min(n, i + ku + 1))
        W[i, cols - i + kl] = system.band[ku + i - cols, cols]
    b = system.rhs.astype(float).copy()
    row_norms = np.max(np.abs(W), axis=1)
    origin = np.arange(n)

    def window(i: int, j_lo: int, j_hi: int) -> slice:
        return slice(j_lo - i + kl, j_hi - i + kl)

    for j in range(n):
        last = min(n - 1, j + kl)
        candidates = np.array([abs(W[i, j - i + kl]) for i in range(j, last + 1)])
        p = j + int(np.argmax(candidates))
        j_hi = min(n, j + width + 1)

        if p != j:
            row_j = W[j, window(j, j, j_hi)].copy()
            W[j, window(j, j, j_hi)] = W[p, window(p, j, j_hi)]
            W[p, window(p, j, j_hi)] = row_j
            b[j], b[p] = b[p], b[j]
            origin[j], origin[p] = origin[p], origin[j]

        pivot = W[j, kl]
        if pivot == 0.0 or abs(pivot) <= PIVOT_TOL * row_norms[origin[j]]:
            _raise_singular(system, int(origin[j]), float(pivot))

        for i in range(j + 1, last + 1):
            factor = W[i, j - i + kl] / pivot
            if factor == 0.0:
                continue
            W[i, window(i, j, j_hi)] -= factor * W[j, window(j, j, j_hi)]
            b[i] -= factor * b[j]

    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        j_hi = min(n, i + width + 1)
        x[i] = (b[i] - np.dot(W[i, window(i, i + 1, j_hi)], x[i + 1: j_hi])) / W[i, kl]

    residual = system.relative_residual(x)
    logger.debug(f"Banded solve n={n} (kl={kl}, ku={ku}) relative residual {residual:.2e}")
    if residual > 1e-10:
        logger.warning(f"Banded solve residual {residual:.2e} exceeds 1e-10")
    return x


def dense_solve(system: BandedSystem) -> np.ndarray:
    """Dense oracle through scipy.linalg.solve"""
    return scipy.linalg.solve(system.to_dense(), system.rhs)


def scipy_banded_solve(system: BandedSystem) -> np.ndarray:
    """Reference through LAPACK gbsv; used to cross-check the band LU"""
    return scipy.linalg.solve_banded((system.lower, system.upper), system.band, system.rhs)
