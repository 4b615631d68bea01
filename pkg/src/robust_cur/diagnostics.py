"""Measured quantities behind the recovery guarantees: incoherence, sparsity, beta factors, condition numbers.

Everything here is measured on matrices the caller supplies; nothing tries to
estimate properties of a hidden low-rank component from corrupted data.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Optional

import numpy as np

from .matcore import IndexLike, SvdFactors, as_matrix, check_indices, svd_truncated

RANK_TOL = 1e-10


class RankError(ValueError):
    """Numerical rank is lower than requested."""


@dataclass
class DiagnosticsReport:
    mu1: float
    mu2: float
    alpha_row: float
    alpha_col: float
    alpha: float
    kappa: float
    rank_numeric: int
    rel_spectral_error: Optional[float] = None
    beta: Optional[float] = None
    beta_prime: Optional[float] = None
    alpha_at_tol: Optional[float] = None

    def to_dict(self) -> dict:
        # JSON has no infinity; rank-deficient beta sentinels become strings
        out = {}
        for key, value in asdict(self).items():
            if isinstance(value, float) and math.isinf(value):
                value = "inf"
            out[key] = value
        return out


def numeric_rank(A, tol: float = RANK_TOL) -> int:
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def incoherence_from_factors(F: SvdFactors) -> tuple[float, float]:
    """Tightest incoherence constants (mu1, mu2) of the singular factors in ``F``."""
    m, r = F.left.shape
    n = F.right_t.shape[1]
    mu1 = m / r * float(np.max(np.sum(F.left ** 2, axis=1)))
    mu2 = n / r * float(np.max(np.sum(F.right_t ** 2, axis=0)))
    return mu1, mu2


def _rank_r_factors(A: np.ndarray, r: int) -> SvdFactors:
    F = svd_truncated(A, r, method="full")
    if F.values[0] == 0.0 or F.values[-1] <= RANK_TOL * F.values[0]:
        raise RankError(f"numerical rank is below {r}")
    return F


def incoherence(A, r: int) -> tuple[float, float]:
    """Smallest ``mu1, mu2`` such that the rank-``r`` singular factors satisfy
    ``max_i ||W^T e_i|| = sqrt(mu1 r / m)`` and likewise for ``V`` with ``n``."""
    return incoherence_from_factors(_rank_r_factors(as_matrix(A), r))


def condition_number(A, r: Optional[int] = None) -> float:
    """sigma_1 / sigma_r (``r`` defaults to the numerical rank)."""
    s = np.linalg.svd(as_matrix(A), compute_uv=False)
    if r is None:
        r = int(np.sum(s > RANK_TOL * s[0])) if s.size and s[0] > 0 else 0
    if r == 0 or s[r - 1] == 0.0:
        return math.inf
    return float(s[0] / s[r - 1])


def sparsity_level(S, tol: float = 0.0) -> tuple[float, float]:
    """``(max row nonzeros / n, max column nonzeros / m)``; entries count when ``|x| > tol``."""
    S = as_matrix(S, "S")
    m, n = S.shape
    if S.size == 0:
        return 0.0, 0.0
    nz = np.abs(S) > tol
    return float(nz.sum(axis=1).max()) / n, float(nz.sum(axis=0).max()) / m


def beta_factor(factor, indices: IndexLike, universe: Optional[int] = None) -> float:
    """``sqrt(|J| / universe) * ||factor[J, :]^+||_2`` for an orthonormal factor.

    ``factor`` is the ``universe x r`` matrix of singular vectors (``V_L`` for
    columns, ``W_L`` for rows), or an :class:`SvdFactors` whose right factor
    is used. Rank-deficient selections return ``math.inf``.
    """
    if isinstance(factor, SvdFactors):
        factor = factor.right
    factor = as_matrix(factor, "factor")
    n, r = factor.shape
    universe = n if universe is None else universe
    idx = check_indices(indices, n)
    sub = factor if idx is None else factor[idx]
    count = sub.shape[0]
    if count < r:
        return math.inf
    s = np.linalg.svd(sub, compute_uv=False)
    if s[-1] <= RANK_TOL * max(s[0], 1.0) or s[-1] == 0.0:
        return math.inf
    return math.sqrt(count / universe) / float(s[-1])


def relative_error(L, L_hat) -> float:
    L = as_matrix(L, "L")
    L_hat = as_matrix(L_hat, "L_hat")
    if L.shape != L_hat.shape:
        raise ValueError(f"shape mismatch {L.shape} vs {L_hat.shape}")
    denom = np.linalg.norm(L, 2)
    if denom == 0.0:
        raise ValueError("relative error undefined for a zero reference")
    return float(np.linalg.norm(L - L_hat, 2) / denom)


@dataclass(frozen=True)
class BoundCheck:
    name: str
    lhs: float
    rhs: float
    holds: bool


def verify_bounds(L, C, J: IndexLike, r: int, slack: float = 1e-8) -> list[BoundCheck]:
    """Evaluate the submatrix inheritance bounds for ``C = L[:, J]``.

    (i) mu1(C) <= mu1(L); (ii) mu2(C) <= beta^2 kappa(L)^2 mu2(L);
    (iii) kappa(C) <= beta sqrt(mu2(L) r) kappa(L);
    (iv) ||C|| <= sqrt(mu2(L) r |J| / n) ||L||;
    (v) ||C^+|| / ||L^+|| <= ||V_L(J,:)^+||.
    """
    L = as_matrix(L, "L")
    C = as_matrix(C, "C")
    m, n = L.shape
    idx = check_indices(J, n, "column index")
    size_j = n if idx is None else idx.size
    if numeric_rank(C) != r:
        raise RankError("C must have rank r")
    FL = _rank_r_factors(L, r)
    FC = _rank_r_factors(C, r)
    mu1_L, mu2_L = incoherence_from_factors(FL)
    mu1_C, mu2_C = incoherence_from_factors(FC)
    kappa_L = FL.values[0] / FL.values[-1]
    kappa_C = FC.values[0] / FC.values[-1]
    V_J = FL.right if idx is None else FL.right[idx]
    vj_pinv_norm = 1.0 / np.linalg.svd(V_J, compute_uv=False)[r - 1]
    beta = math.sqrt(size_j / n) * vj_pinv_norm
    checks = [
        ("mu1_inheritance", mu1_C, mu1_L),
        ("mu2_beta_bound", mu2_C, beta ** 2 * kappa_L ** 2 * mu2_L),
        ("kappa_beta_bound", kappa_C, beta * math.sqrt(mu2_L * r) * kappa_L),
        ("column_norm_bound", FC.values[0], math.sqrt(mu2_L * r * size_j / n) * FL.values[0]),
        ("pinv_ratio_bound", (1.0 / FC.values[-1]) / (1.0 / FL.values[-1]), vj_pinv_norm),
    ]
    return [BoundCheck(name, float(lhs), float(rhs), bool(lhs <= rhs * (1.0 + slack)))
            for name, lhs, rhs in checks]


def diagnose(L, r: int, S=None, L_hat=None, col_indices: IndexLike = None,
             row_indices: IndexLike = None, sparse_tol: float = 1e-12) -> DiagnosticsReport:
    """Collect the report fields for a low-rank matrix and optional companions."""
    L = as_matrix(L, "L")
    m, n = L.shape
    F = _rank_r_factors(L, r)
    mu1, mu2 = incoherence_from_factors(F)
    if S is not None:
        a_row, a_col = sparsity_level(S)
        alpha_tol = max(sparsity_level(S, sparse_tol))
    else:
        a_row = a_col = 0.0
        alpha_tol = None
    return DiagnosticsReport(
        mu1=mu1, mu2=mu2, alpha_row=a_row, alpha_col=a_col, alpha=max(a_row, a_col),
        kappa=float(F.values[0] / F.values[-1]), rank_numeric=numeric_rank(L),
        rel_spectral_error=None if L_hat is None else relative_error(L, L_hat),
        beta=None if col_indices is None else beta_factor(F.right, col_indices, n),
        beta_prime=None if row_indices is None else beta_factor(F.left, row_indices, m),
        alpha_at_tol=alpha_tol,
    )


def predicted_success(universe: int, r: int, c: float, delta: float) -> float:
    """Lower bound ``1 - r / universe**(c * (delta + (1 - delta) ln(1 - delta)))``
    on the per-side sampling success probability (reporting only)."""
    expo = c * (delta + (1.0 - delta) * math.log(1.0 - delta))
    return max(0.0, 1.0 - r / universe ** expo)


def foreground_mask(D, L_hat, frac: float = 0.25) -> np.ndarray:
    """Pixels whose residual ``|D - L_hat|`` exceeds ``frac`` of its maximum."""
    resid = np.abs(as_matrix(D, "D") - as_matrix(L_hat, "L_hat"))
    peak = resid.max() if resid.size else 0.0
    if peak == 0.0:
        return np.zeros(resid.shape, dtype=bool)
    return resid > frac * peak


def support_f1(predicted, truth) -> float:
    """F1 score of a predicted boolean support against the true one."""
    pred = np.asarray(predicted, dtype=bool)
    true = np.asarray(truth, dtype=bool)
    tp = int(np.sum(pred & true))
    fp = int(np.sum(pred & ~true))
    fn = int(np.sum(~pred & true))
    if tp == 0:
        return 1.0 if fp == 0 and fn == 0 else 0.0
    return 2 * tp / (2 * tp + fp + fn)
