"""Riesz kernel matrices, potentials, energies, capacities, equilibrium measures.

The kernel on an n-point cloud is the matrix |x_i - x_j|^(alpha - n) off the
diagonal. The singular diagonal is replaced by a finite cell self-energy
(sigma * cell_radius)^(alpha - n), which keeps the matrix symmetric positive
definite for non-overlapping cells; positive definiteness is checked at
assembly by a Cholesky factorization and the factor is kept for reuse.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.spatial.distance import cdist

from .core import DiscreteMeasure, PointSet, SolverError, ValidationError, _index_array
from .solvers import KKTRecord, simplex_qp


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric positive definite kernel matrix with parameter metadata.

    kind is "riesz" or "green"; factorization_cache holds the upper-triangular
    Cholesky factor computed during the definiteness check.
    """

    entries: np.ndarray
    alpha: float
    dim: int
    kind: str = "riesz"
    factorization_cache: np.ndarray | None = None

    @property
    def size(self) -> int:
        return self.entries.shape[0]

    def block(self, rows, cols=None) -> np.ndarray:
        rows = np.asarray(rows, dtype=int)
        cols = rows if cols is None else np.asarray(cols, dtype=int)
        return self.entries[np.ix_(rows, cols)]

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Solve K x = rhs using the cached factorization."""
        if self.factorization_cache is None:
            raise SolverError("kernel matrix carries no factorization")
        y = solve_triangular(self.factorization_cache, rhs, trans=1,
                             lower=False, check_finite=False)
        return solve_triangular(self.factorization_cache, y, trans=0,
                                lower=False, check_finite=False)


def make_kernel(entries: np.ndarray, alpha: float, dim: int,
                kind: str = "riesz") -> KernelMatrix:
    """Validate symmetry and positive definiteness, then wrap the matrix."""
    entries = np.asarray(entries, dtype=float)
    m = entries.shape[0]
    if entries.shape != (m, m):
        raise ValidationError(f"kernel matrix must be square, got {entries.shape}")
    if not np.array_equal(entries, entries.T):
        raise ValidationError("kernel matrix must be exactly symmetric")
    if m and np.min(np.diag(entries)) <= 0:
        raise SolverError("kernel diagonal must be strictly positive")
    try:
        factor = cholesky(entries, lower=False, check_finite=False) if m else np.zeros((0, 0))
    except np.linalg.LinAlgError as exc:
        raise SolverError(
            "kernel matrix failed the positive-definiteness check; "
            f"cells are too coarse for this sampling ({exc})") from exc
    return KernelMatrix(entries=entries, alpha=float(alpha), dim=int(dim),
                        kind=kind, factorization_cache=factor)


def assemble_riesz(ps: PointSet, alpha: float, sigma: float = 1.0) -> KernelMatrix:
    """Kernel matrix |x_i - x_j|^(alpha - n) with the cell self-energy diagonal.

    sigma in (0, 1] rescales the diagonal cell radius; smaller values raise
    the self-energy, which compensates for flat (codimension-one) cells.
    """
    n = ps.dim
    if not (0 < alpha < n and alpha <= 2):
        raise ValidationError(f"alpha={alpha} outside (0, {n}] cap 2")
    if not 0 < sigma <= 1:
        raise ValidationError(f"sigma={sigma} outside (0, 1]")
    dist = cdist(ps.points, ps.points)
    np.fill_diagonal(dist, sigma * ps.cell_radius)
    entries = dist ** (alpha - n)
    # enforce exact symmetry; cdist is symmetric up to rounding only
    i_up = np.triu_indices(len(ps), k=1)
    entries[(i_up[1], i_up[0])] = entries[i_up]
    return make_kernel(entries, alpha, n, kind="riesz")


def potential(K: KernelMatrix, mu: DiscreteMeasure) -> np.ndarray:
    """Pointwise potential U[i] = sum_j K[i,j] mu[j]."""
    if mu.weights.size != K.size:
        raise ValidationError(f"measure size {mu.weights.size} != kernel size {K.size}")
    return K.entries @ mu.weights


def mutual_energy(K: KernelMatrix, mu: DiscreteMeasure, nu: DiscreteMeasure) -> float:
    if mu.weights.size != K.size or nu.weights.size != K.size:
        raise ValidationError("measure sizes do not match kernel size")
    return float(mu.weights @ (K.entries @ nu.weights))


def energy_norm(K: KernelMatrix, mu: DiscreteMeasure) -> float:
    return float(np.sqrt(max(mutual_energy(K, mu, mu), 0.0)))


def weight_form(K: KernelMatrix, u: np.ndarray, v: np.ndarray | None = None) -> float:
    """Bilinear kernel form on raw weight vectors (signed differences allowed)."""
    u = np.asarray(u, dtype=float)
    v = u if v is None else np.asarray(v, dtype=float)
    return float(u @ (K.entries @ v))


def weight_norm(K: KernelMatrix, u: np.ndarray) -> float:
    return float(np.sqrt(max(weight_form(K, u), 0.0)))


def _simplex_minimum(K: KernelMatrix, a: np.ndarray):
    """Minimal energy over probability measures on `a`, with minimizer."""
    if a.size == 1:
        # one-point problem: the Dirac is the only probability measure
        x = np.ones(1)
        energy = float(K.entries[a[0], a[0]])
        rec = KKTRecord(0.0, 0.0, 0.0, 0.0, energy, 0, 0.0)
        return energy, x, rec
    x, rec = simplex_qp(K.block(a), None)
    energy = float(x @ K.block(a) @ x)
    return energy, x, rec


def capacity(K: KernelMatrix, a) -> tuple[float, DiscreteMeasure]:
    """Reciprocal of the minimal energy over probability measures on `a`."""
    a = _index_array(a, K.size, "a")
    if a.size == 0:
        raise ValidationError("capacity of an empty index set is undefined")
    energy, x, _ = _simplex_minimum(K, a)
    w = np.zeros(K.size)
    w[a] = x
    return 1.0 / energy, DiscreteMeasure(w)


def equilibrium_measure(K: KernelMatrix, a) -> DiscreteMeasure:
    """Measure gamma on `a` with potential 1 on its support and >= 1 on `a`.

    This is the capacity minimizer rescaled by the capacity, so its total
    mass equals the capacity whenever the potential is 1 on all of `a`.
    """
    a = _index_array(a, K.size, "a")
    if a.size == 0:
        raise ValidationError("equilibrium measure of an empty set is undefined")
    energy, x, _ = _simplex_minimum(K, a)
    w = np.zeros(K.size)
    w[a] = x / energy
    return DiscreteMeasure(w)


def save_kernel_csv(K: KernelMatrix, path) -> None:
    """Full matrix dump, 17 significant digits, one row per line."""
    with open(path, "w", newline="") as fh:
        fh.write(",".join(f"k{j}" for j in range(K.size)) + "\n")
        for row in K.entries:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
