"""Minimal sparse symmetric-positive-definite linear algebra.

Storage uses compressed sparse rows (built through scipy's COO-to-CSR
conversion, which also sums duplicate triplets from element assembly).  The
solver is a hand-rolled conjugate gradient method with Jacobi (diagonal)
preconditioning, sufficient for the well-conditioned stiffness systems this
package produces.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparseMatrix",
    "SolveReport",
    "ConvergenceError",
    "cg_solve",
]


class ConvergenceError(RuntimeError):
    """Iterative solve failed to reach the requested tolerance."""

    def __init__(self, message: str, report: "SolveReport"):
        super().__init__(message)
        self.report = report


@dataclass(frozen=True, eq=False)
class SparseMatrix:
    """Square CSR matrix (data / column indices / row pointers)."""

    dim: int
    data: np.ndarray
    indices: np.ndarray
    indptr: np.ndarray

    @classmethod
    def from_triplets(
        cls,
        dim: int,
        rows: np.ndarray,
        cols: np.ndarray,
        values: np.ndarray,
        symmetric: bool = False,
    ) -> "SparseMatrix":
        """Build from COO triplets, summing duplicates.

        With ``symmetric=True`` each strictly-off-diagonal triplet also
        contributes its transpose, so callers may assemble only one triangle.
        """
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=float)
        if symmetric:
            off = rows != cols
            rows, cols, values = (
                np.concatenate([rows, cols[off]]),
                np.concatenate([cols, rows[off]]),
                np.concatenate([values, values[off]]),
            )
        m = sp.coo_matrix((values, (rows, cols)), shape=(dim, dim)).tocsr()
        m.sum_duplicates()
        return cls(dim=dim, data=m.data, indices=m.indices, indptr=m.indptr)

    def _csr(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=(self.dim, self.dim))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self._csr() @ np.asarray(x, dtype=float)

    def diagonal(self) -> np.ndarray:
        return self._csr().diagonal()

    def toarray(self) -> np.ndarray:
        return self._csr().toarray()

    def submatrix(self, keep: np.ndarray) -> "SparseMatrix":
        """Principal submatrix on the index set ``keep`` (order preserved)."""
        sub = self._csr()[np.ix_(keep, keep)].tocsr()
        return SparseMatrix(dim=len(keep), data=sub.data, indices=sub.indices, indptr=sub.indptr)

    def columns(self, cols: np.ndarray) -> np.ndarray:
        """Dense copy of the selected columns, shape (dim, len(cols))."""
        return self._csr()[:, cols].toarray()


@dataclass(frozen=True)
class SolveReport:
    solution: np.ndarray
    iterations: int
    residual: float
    converged: bool


def cg_solve(
    matrix: SparseMatrix,
    rhs: np.ndarray,
    tol: float = 1e-12,
    max_iter: int | None = None,
    x0: np.ndarray | None = None,
) -> SolveReport:
    """Jacobi-preconditioned conjugate gradients for SPD systems.

    Stops when ||b - A x|| <= tol * ||b||; raises ConvergenceError (carrying
    the best iterate in its ``report``) if the iteration budget is exhausted.
    """
    b = np.asarray(rhs, dtype=float)
    n = matrix.dim
    if b.shape != (n,):
        raise ValueError(f"rhs has shape {b.shape}, expected ({n},)")
    if max_iter is None:
        max_iter = 10 * n
    diag = matrix.diagonal()
    if np.any(diag <= 0.0):
        raise ValueError("matrix has non-positive diagonal entries; not SPD")
    inv_diag = 1.0 / diag
    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        return SolveReport(solution=np.zeros(n), iterations=0, residual=0.0, converged=True)
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - matrix.matvec(x)
    z = inv_diag * r
    p = z.copy()
    rz = float(r @ z)
    res = float(np.linalg.norm(r))
    it = 0
    while res > tol * b_norm and it < max_iter:
        Ap = matrix.matvec(p)
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = inv_diag * r
        rz_new = float(r @ z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        res = float(np.linalg.norm(r))
        it += 1
    converged = res <= tol * b_norm
    report = SolveReport(solution=x, iterations=it, residual=res / b_norm, converged=converged)
    if not converged:
        raise ConvergenceError(
            f"conjugate gradients stalled at relative residual {res / b_norm:.3e} "
            f"after {it} iterations",
            report,
        )
    return report
