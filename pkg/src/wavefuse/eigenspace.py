"""PCA eigenspace fitted through the N x N Gram matrix.

With N training vectors of dimension d (N much smaller than d), the
nonzero eigenpairs of the covariance ``(1/N) A A^T`` come from the small
matrix ``G = (1/N) A^T A``: if ``G v = lam v`` then ``u = A v / |A v|`` is
a unit eigenvector of the covariance with the same eigenvalue.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .docio import matrix_from_doc, matrix_to_doc, require
from .errors import ConvergenceError, DimensionMismatchError, RankError, SchemaError

JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
# eigenvalues at or below this fraction of the largest count as zero
RANK_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class EigenModel:
    mean: np.ndarray
    basis: np.ndarray  # d x k, orthonormal columns
    eigenvalues: np.ndarray

    @property
    def k(self) -> int:
        return self.basis.shape[1]

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def to_doc(self):
        return {
            "k": self.k,
            "d": self.d,
            "mean": matrix_to_doc(self.mean),
            "basis": matrix_to_doc(self.basis),
            "eigenvalues": matrix_to_doc(self.eigenvalues),
        }

    @classmethod
    def from_doc(cls, doc):
        where = "eigenmodel"
        model = cls(
            mean=matrix_from_doc(require(doc, "mean", where), "eigenmodel.mean"),
            basis=matrix_from_doc(require(doc, "basis", where), "eigenmodel.basis"),
            eigenvalues=matrix_from_doc(require(doc, "eigenvalues", where), "eigenmodel.eigenvalues"),
        )
        if (require(doc, "k", where), require(doc, "d", where)) != (model.k, model.d) \
                or model.basis.shape[0] != model.d or model.eigenvalues.shape[0] != model.k:
            raise SchemaError("eigenmodel: k/d fields disagree with array shapes")
        return model


def symmetric_eigh(a, tol=JACOBI_TOL, max_sweeps=JACOBI_MAX_SWEEPS):
    """Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f"expected a square matrix, got {a.shape}")
    w, v, sweeps = kernels.jacobi_eigh(a, tol, max_sweeps)
    if sweeps < 0:
        raise ConvergenceError(f"Jacobi did not converge in {max_sweeps} sweeps")
    order = np.argsort(-w, kind="stable")
    return w[order], v[:, order]


def components_for_variance(eigenvalues, fraction=0.95) -> int:
    """Smallest k whose leading eigenvalues hold at least ``fraction`` of the total."""
    lam = np.asarray(eigenvalues, dtype=np.float64)
    if not 0.0 < fraction <= 1.0:
        raise ValueError(f"variance fraction must be in (0, 1], got {fraction}")
    cum = np.cumsum(lam) / lam.sum()
    return int(min(np.searchsorted(cum, fraction - 1e-12) + 1, lam.size))


def _fix_sign(u):
    # largest-magnitude component positive; first index wins ties
    i = int(np.argmax(np.abs(u)))
    return -u if u[i] < 0 else u


def fit_eigenspace(samples, k: int | None = None, variance: float = 0.95) -> EigenModel:
    """Fit a PCA model on the rows of ``samples`` (N x d).

    ``k`` fixes the retained dimension; when omitted, the smallest k
    reaching ``variance`` of the total eigenvalue mass is used. Covariance
    uses the 1/N convention.
    """
    X = np.asarray(samples, dtype=np.float64)
    if X.ndim != 2:
        raise DimensionMismatchError(f"samples must be an N x d array, got shape {X.shape}")
    n, d = X.shape
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if k is not None and not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k={k} outside 1..{min(n - 1, d)} for N={n}, d={d}")

    mean = X.mean(axis=0)
    A = (X - mean).T  # d x N
    scale = max(1.0, float(np.abs(X).max()))
    if float(np.abs(A).max()) <= 1e-12 * scale:
        raise RankError(0, "all samples identical: rank 0")

    gram = (A.T @ A) / n
    lam, V = symmetric_eigh(gram)
    rank = int(np.sum(lam > RANK_RTOL * lam[0]))
    if rank == 0:
        raise RankError(0)
    if k is None:
        k = components_for_variance(lam[:rank], variance)
    elif k > rank:
        raise RankError(rank, f"requested k={k} exceeds sample rank {rank}")

    lam = lam[:k]
    U = A @ V[:, :k]
    U /= np.linalg.norm(U, axis=0)
    U = np.column_stack([_fix_sign(U[:, j]) for j in range(k)])
    return EigenModel(mean=mean, basis=U, eigenvalues=np.maximum(lam, 0.0))


def project(model: EigenModel, x) -> np.ndarray:
    """Coordinates of ``x`` (one vector, or rows of a matrix) in the eigenbasis."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != model.d:
        raise DimensionMismatchError(f"vector length {x.shape[-1]} != model dimension {model.d}")
    return (x - model.mean) @ model.basis


def backproject(model: EigenModel, y) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    if y.shape[-1] != model.k:
        raise DimensionMismatchError(f"coordinate length {y.shape[-1]} != k={model.k}")
    return model.mean + y @ model.basis.T
