"""Dense matrix kernels: truncated SVD, pseudoinverse, norms, index gathering.

Matrices are plain ``numpy.ndarray`` objects of dtype float64. Functions in
this module never modify their inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal, Optional, Sequence, Union

import numpy as np

# matrices with at most this many entries get an exact LAPACK SVD
FULL_SVD_MAX_ENTRIES = 512 * 512
OVERSAMPLING = 10
POWER_ITERATIONS = 2
_SKETCH_SEED = 0x5EED

IndexLike = Union[Sequence[int], np.ndarray, None]
NormKind = Literal["spectral", "frobenius", "max_abs_entry", "l0_row_max", "l0_col_max"]


def as_matrix(A, name: str = "matrix") -> np.ndarray:
    """Return ``A`` as a 2-D float64 array, rejecting NaN/Inf entries."""
    arr = np.asarray(A, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class SvdFactors:
    """Rank-k truncated SVD ``left @ diag(values) @ right_t``."""

    left: np.ndarray
    values: np.ndarray
    right_t: np.ndarray

    @property
    def rank(self) -> int:
        return self.values.shape[0]

    @property
    def right(self) -> np.ndarray:
        return self.right_t.T

    def reconstruct(self) -> np.ndarray:
        return (self.left * self.values) @ self.right_t


def _randomized_svd(A: np.ndarray, k: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m, n = A.shape
    block = min(k + OVERSAMPLING, m, n)
    rng = np.random.Generator(np.random.Philox(_SKETCH_SEED))
    Q, _ = np.linalg.qr(A @ rng.standard_normal((n, block)))
    for _ in range(POWER_ITERATIONS):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    Ub, s, Vt = np.linalg.svd(Q.T @ A, full_matrices=False)
    return Q @ Ub, s, Vt


def svd_truncated(A, k: int, tol: float = 1e-12, method: str = "auto") -> SvdFactors:
    """Dominant ``k`` singular triplets of ``A``.

    ``method="auto"`` runs a full LAPACK SVD for matrices with at most
    ``FULL_SVD_MAX_ENTRIES`` entries and a block power iteration (oversampling
    10, two subspace iterations, fixed seed) above that. ``tol`` is accepted
    for interface symmetry with the randomized path; the exact path is
    accurate to working precision.
    """
    A = as_matrix(A, "A")
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k={k} out of range for a {m}x{n} matrix")
    if tol < 0:
        raise ValueError("tol must be non-negative")
    if method == "auto":
        method = "full" if m * n <= FULL_SVD_MAX_ENTRIES or k + OVERSAMPLING >= min(m, n) else "randomized"
    if method == "full":
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
    elif method == "randomized":
        U, s, Vt = _randomized_svd(A, k)
    else:
        raise ValueError(f"unknown SVD method {method!r}")
    return SvdFactors(np.ascontiguousarray(U[:, :k]), s[:k].copy(), np.ascontiguousarray(Vt[:k]))


def singular_values(A) -> np.ndarray:
    return np.linalg.svd(as_matrix(A, "A"), compute_uv=False)


def pseudoinverse(A, rank_tol: float = 1e-12) -> np.ndarray:
    """Moore-Penrose pseudoinverse via the SVD.

    Reciprocals of singular values ``s_i <= rank_tol * s_1`` are set to zero.
    """
    A = as_matrix(A, "A")
    if rank_tol < 0:
        raise ValueError("rank_tol must be non-negative")
    m, n = A.shape
    if A.size == 0:
        return np.zeros((n, m))
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((n, m))
    keep = s > rank_tol * s[0]
    inv = np.zeros_like(s)
    inv[keep] = 1.0 / s[keep]
    return (Vt.T * inv) @ U.T


def truncated_pseudoinverse(A, r: int) -> np.ndarray:
    """Pseudoinverse of the best rank-``r`` approximation of ``A``."""
    A = as_matrix(A, "A")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    r = min(r, s.size)
    s_r = s[:r]
    inv = np.zeros_like(s_r)
    nz = s_r > 0
    inv[nz] = 1.0 / s_r[nz]
    return (Vt[:r].T * inv) @ U[:, :r].T


def norm(A, kind: NormKind = "spectral") -> float:
    A = as_matrix(A, "A")
    if kind == "spectral":
        return float(np.linalg.norm(A, 2)) if A.size else 0.0
    if kind == "frobenius":
        return float(np.linalg.norm(A, "fro"))
    if kind == "max_abs_entry":
        return float(np.max(np.abs(A))) if A.size else 0.0
    if kind == "l0_row_max":
        return float(np.max(np.count_nonzero(A, axis=1))) if A.size else 0.0
    if kind == "l0_col_max":
        return float(np.max(np.count_nonzero(A, axis=0))) if A.size else 0.0
    raise ValueError(f"unknown norm kind {kind!r}")


def check_indices(indices: IndexLike, universe: int, axis: str = "index") -> Optional[np.ndarray]:
    """Validate an index list against ``range(universe)``; ``None`` means all."""
    if indices is None:
        return None
    idx = np.asarray(indices)
    if idx.ndim != 1:
        raise ValueError(f"{axis} set must be one-dimensional")
    if idx.size and not np.issubdtype(idx.dtype, np.integer):
        raise TypeError(f"{axis} set must contain integers")
    idx = idx.astype(np.intp, copy=False)
    if idx.size and (idx.min() < 0 or idx.max() >= universe):
        raise IndexError(f"{axis} out of bounds for universe of size {universe}")
    return idx


def submatrix(A, rows: IndexLike = None, cols: IndexLike = None) -> np.ndarray:
    """Gather ``A[rows][:, cols]`` in the listed order; ``None`` selects everything.

    Repeated indices yield repeated rows/columns.
    """
    A = np.asarray(A, dtype=np.float64)
    r = check_indices(rows, A.shape[0], "row index")
    c = check_indices(cols, A.shape[1], "column index")
    if r is not None:
        A = A[r, :]
    if c is not None:
        A = A[:, c]
    return np.array(A, copy=True)
