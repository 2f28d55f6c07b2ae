"""Dense symmetric eigensolver and regularized least squares.

The eigensolver is Householder tridiagonalization followed by implicit-shift
QL sweeps (capped at 30 per eigenvalue, i.e. at most 30n overall), with the
hot loops living in the kernels package. Least squares goes through an SVD
solve of the ridge-augmented system, a deliberately different route from the
normal-equations oracle used in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import ConvergenceError, PawprintError

DEFAULT_RIDGE = 1e-6

SYMMETRY_RTOL = 1e-8


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues sorted descending with matching orthonormal columns."""

    eigenvalues: np.ndarray  # (n,)
    eigenvectors: np.ndarray  # (n, n), column i pairs with eigenvalue i


def sym_eigen(a: np.ndarray) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    Raises for non-square input, for asymmetry beyond 1e-8 relative to the
    largest entry, and for QL convergence failure (the error carries the
    sweep count).
    """
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise PawprintError(f"sym_eigen needs a square matrix, got shape {a.shape}")
    n = a.shape[0]
    scale = float(np.max(np.abs(a))) if n else 0.0
    if scale > 0.0 and float(np.max(np.abs(a - a.T))) > SYMMETRY_RTOL * scale:
        raise PawprintError("matrix is asymmetric beyond tolerance")
    w = (a + a.T) / 2.0

    d, e, q = kernels.householder_tridiag(np.ascontiguousarray(w))
    sweeps = kernels.tql_implicit(d, e, q, 30 * max(n, 1))
    if sweeps < 0:
        raise ConvergenceError(
            f"eigensolver did not converge within {-sweeps} QL sweeps",
            iterations=-sweeps,
        )
    order = np.argsort(-d, kind="stable")
    return EigenDecomposition(
        eigenvalues=np.ascontiguousarray(d[order]),
        eigenvectors=np.ascontiguousarray(q[:, order]),
    )


def solve_least_squares(x: np.ndarray, y: np.ndarray, ridge: float = 0.0) -> np.ndarray:
    """Minimize ||X a - y||^2 + ridge * ||a||^2 for a.

    With ridge = 0 and a rank-deficient X there is no unique minimizer, so
    the caller is told to pass ridge > 0 instead of silently getting one of
    infinitely many solutions.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.ndim != 2:
        raise PawprintError(f"design matrix must be 2-D, got shape {x.shape}")
    d, n = x.shape
    if y.shape[0] != d:
        raise PawprintError(f"rhs length {y.shape[0]} does not match {d} rows")
    if ridge < 0.0:
        raise PawprintError("ridge must be nonnegative")

    if ridge == 0.0:
        a, _, rank, _ = np.linalg.lstsq(x, y, rcond=None)
        if rank < n:
            raise PawprintError(
                f"design matrix is rank deficient (rank {rank} < {n} columns); "
                "pass ridge > 0 for a unique solution"
            )
        return a
    sq = np.sqrt(ridge)
    xa = np.vstack([x, sq * np.eye(n)])
    ya = np.concatenate([y, np.zeros(n)])
    a, _, _, _ = np.linalg.lstsq(xa, ya, rcond=None)
    return a


def gram_matrix(x: np.ndarray) -> np.ndarray:
    """G = X^T X, symmetrized against rounding so it is exactly symmetric."""
    x = np.asarray(x, dtype=np.float64)
    g = x.T @ x
    return (g + g.T) / 2.0
