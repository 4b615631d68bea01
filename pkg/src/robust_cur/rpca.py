"""Alternating-projections robust PCA (one-step initialization + stagewise AltProj)."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .diagnostics import incoherence_from_factors
from .matcore import as_matrix, svd_truncated

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RpcaConfig:
    """Solver settings.

    The sparse projection at step ``t`` of stage ``l`` keeps entries above
    ``threshold_scale * mu * r / sqrt(m n) * (s_{l+1} + threshold_decay**t * s_l)``
    where ``s_i`` are singular values of the current ``D - S``. ``mu_hint``
    fixes ``mu``; otherwise it is measured from the rank-``r`` SVD of ``D``.
    ``eta_init=None`` picks the initialization threshold automatically.
    """

    rank: int
    max_iters: int = 100
    tol: float = 1e-10
    threshold_scale: float = 1.0
    threshold_decay: float = 0.5
    stagewise: bool = True
    eta_init: Optional[float] = None
    mu_hint: Optional[float] = None

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be >= 1")
        if not 0 < self.threshold_decay < 1:
            raise ValueError("threshold_decay must lie in (0, 1)")
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.threshold_scale <= 0:
            raise ValueError("threshold_scale must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class RpcaResult:
    L_hat: np.ndarray
    S_hat: np.ndarray
    iterations: int
    converged: bool
    residual_trace: list = field(default_factory=list)
    residual_norm: float = 0.0
    trace_monotone: bool = True
    mu_used: float = 1.0


def hard_threshold(A, zeta: float) -> np.ndarray:
    """Keep entries with ``|A_ij| > zeta`` (strict), zero the rest."""
    if zeta < 0:
        raise ValueError("threshold must be non-negative")
    A = np.asarray(A, dtype=np.float64)
    return np.where(np.abs(A) > zeta, A, 0.0)


def _measured_mu(D: np.ndarray, r: int):
    F = svd_truncated(D, r)
    mu = max(incoherence_from_factors(F)) if F.values[-1] > 0 else float(max(D.shape)) / r
    return mu, F


def auto_eta(D, r: int, mu: Optional[float] = None) -> float:
    """Midpoint ``2 mu r / sqrt(mn)`` of the admissible initialization window.

    The window is stated relative to ``sigma_1(L) / sigma_1(D)``; the top
    singular value of the rank-r SVD of ``D`` stands in for ``sigma_1(L)``,
    so the ratio is 1. ``mu`` is measured on ``D`` unless given.
    """
    D = as_matrix(D, "D")
    m, n = D.shape
    if mu is None:
        mu, F = _measured_mu(D, r)
        if F.values[0] == 0.0:
            return 0.0
    return 2.0 * mu * r / math.sqrt(m * n)


def init_altproj(D, r: int, eta: Optional[float] = None) -> tuple[np.ndarray, np.ndarray]:
    """One alternating-projection step: threshold at ``eta * sigma_1(D)``, then
    project the remainder onto rank ``r``."""
    D = as_matrix(D, "D")
    if not 1 <= r <= min(D.shape):
        raise ValueError(f"rank {r} out of range for {D.shape}")
    sigma1 = float(np.linalg.norm(D, 2))
    if eta is None:
        eta = auto_eta(D, r)
    S0 = hard_threshold(D, eta * sigma1)
    L0 = svd_truncated(D - S0, r).reconstruct()
    return L0, S0


def altproj(D, config: RpcaConfig) -> RpcaResult:
    """Split ``D`` into rank-``r`` plus sparse parts by alternating projections.

    Stops once ``||D - L - S||_F / ||D||_F <= tol`` or after ``max_iters``
    low-rank projections in total.
    """
    D = as_matrix(D, "D")
    m, n = D.shape
    r = config.rank
    if r > min(m, n):
        raise ValueError(f"rank {r} out of range for {D.shape}")
    d_norm = float(np.linalg.norm(D))
    if d_norm == 0.0:
        return RpcaResult(np.zeros_like(D), np.zeros_like(D), 0, True, [0.0], 0.0)

    mu, F = _measured_mu(D, r)
    if config.mu_hint is not None:
        mu = config.mu_hint
    scale = config.threshold_scale * mu * r / math.sqrt(m * n)
    eta = 2.0 * mu * r / math.sqrt(m * n) if config.eta_init is None else config.eta_init
    S = hard_threshold(D, eta * F.values[0])
    L = np.zeros_like(D)

    trace: list[float] = []
    first_stage_end: Optional[int] = None
    converged = False
    iters = 0
    kmax = min(m, n)
    stages = range(1, r + 1) if config.stagewise else [r]
    for ell in stages:
        t = 0
        while iters < config.max_iters:
            G = svd_truncated(D - S, min(ell + 1, kmax))
            L = (G.left[:, :ell] * G.values[:ell]) @ G.right_t[:ell]
            s_next = G.values[ell] if ell < kmax else 0.0
            lead = config.threshold_decay ** t * G.values[ell - 1]
            S = hard_threshold(D - L, scale * (s_next + lead))
            iters += 1
            t += 1
            trace.append(float(np.linalg.norm(D - L - S)) / d_norm)
            if trace[-1] <= config.tol:
                converged = True
                break
            # an intermediate stage ends once the decaying term falls below the floor
            if ell < r and lead <= s_next:
                break
        if first_stage_end is None:
            first_stage_end = len(trace)
        if converged or iters >= config.max_iters:
            break

    tail = np.asarray(trace[first_stage_end:])
    monotone = bool(np.all(np.diff(tail) <= 1e-12))
    if not monotone:
        log.warning("residual trace increased after the first stage")
    return RpcaResult(L_hat=L, S_hat=S, iterations=iters, converged=converged,
                      residual_trace=trace, residual_norm=float(np.linalg.norm(D - L - S)),
                      trace_monotone=monotone, mu_used=float(mu))
