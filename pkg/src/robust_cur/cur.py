"""CUR assembly and the robust CUR pipelines (uniform and uniform + greedy)."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .diagnostics import incoherence_from_factors
from .matcore import IndexLike, as_matrix, check_indices, svd_truncated
from .rpca import RpcaConfig, RpcaResult, altproj
from .sampling import SampleConfig, SizeHeuristic, greedy_css, make_rng, sample_uniform

log = logging.getLogger(__name__)

CORE_RANK_TOL = 1e-12


class RankDeficientCore(ArithmeticError):
    """The intersection block has numerical rank below ``r``; resample."""


class InsufficientSamples(ValueError):
    """Fewer sampled rows or columns than the target rank."""


@dataclass
class CurModel:
    """Factored approximation ``C_hat @ U_pinv @ R_hat``."""

    C_hat: np.ndarray
    R_hat: np.ndarray
    row_indices: np.ndarray
    col_indices: Optional[np.ndarray]
    U_pinv: np.ndarray
    r: int

    @property
    def shape(self) -> tuple[int, int]:
        return self.C_hat.shape[0], self.R_hat.shape[1]

    def reconstruct(self) -> np.ndarray:
        return reconstruct(self)

    def matvec(self, x) -> np.ndarray:
        return self.C_hat @ (self.U_pinv @ (self.R_hat @ np.asarray(x, dtype=np.float64)))


@dataclass(frozen=True)
class RcurConfig:
    rpca: RpcaConfig
    row_sampling: SampleConfig = SampleConfig(SizeHeuristic(5.0, "log_n"))
    col_sampling: SampleConfig = SampleConfig(SizeHeuristic(5.0, "log_n"))
    theory_eps: float = 0.5
    theory_delta: float = 0.5
    retry_on_rank_deficiency: bool = True

    def __post_init__(self):
        if not 0 < self.theory_delta < 1 or not 0 < self.theory_eps < 1:
            raise ValueError("theory_eps and theory_delta must lie in (0, 1)")

    def to_dict(self) -> dict:
        def sample(cfg: SampleConfig) -> dict:
            size = cfg.size
            size = {"c": size.c, "variant": size.variant} if isinstance(size, SizeHeuristic) else size
            return {"size": size, "mode": cfg.mode, "seed": cfg.seed}
        return {"rpca": self.rpca.to_dict(), "row_sampling": sample(self.row_sampling),
                "col_sampling": sample(self.col_sampling), "theory_eps": self.theory_eps,
                "theory_delta": self.theory_delta}


@dataclass
class RcurRun:
    """Everything a robust CUR run produced, kept for reports."""

    model: CurModel
    rpca_cols: RpcaResult
    rpca_rows: RpcaResult
    mu_estimate: float = 1.0
    attempts: int = 1
    hybrid: Optional[CurModel] = None
    extra: dict = field(default_factory=dict)


def cur_assemble(C_hat, I: IndexLike, R_hat, r: int, J: IndexLike = None) -> CurModel:
    """Build the model ``C_hat (C_hat[I, :])_r^+ R_hat``.

    ``I`` indexes rows of ``C_hat`` (positions in the full row range) and must
    line up with the rows of ``R_hat``. ``J`` is stored for bookkeeping only.
    """
    C_hat = as_matrix(C_hat, "C_hat")
    R_hat = as_matrix(R_hat, "R_hat")
    idx = check_indices(I, C_hat.shape[0], "row index")
    if idx is None:
        idx = np.arange(C_hat.shape[0])
    if R_hat.shape[0] != idx.size:
        raise ValueError(f"R_hat has {R_hat.shape[0]} rows but |I| = {idx.size}")
    if not 1 <= r <= min(idx.size, C_hat.shape[1]):
        raise InsufficientSamples(f"rank {r} exceeds core size {idx.size}x{C_hat.shape[1]}")
    U = C_hat[idx, :]
    W, s, Vt = np.linalg.svd(U, full_matrices=False)
    if s[0] == 0.0 or s[r - 1] <= CORE_RANK_TOL * s[0]:
        raise RankDeficientCore(f"sigma_r of the {U.shape[0]}x{U.shape[1]} core is numerically zero")
    U_pinv = (Vt[:r].T / s[:r]) @ W[:, :r].T
    cols = None if J is None else np.asarray(J, dtype=np.intp)
    return CurModel(C_hat=C_hat, R_hat=R_hat, row_indices=idx, col_indices=cols, U_pinv=U_pinv, r=r)


def reconstruct(model: CurModel) -> np.ndarray:
    """Materialize ``C_hat @ U_pinv @ R_hat`` (cheapest association first)."""
    C, U, R = model.C_hat, model.U_pinv, model.R_hat
    if C.shape[0] >= R.shape[1]:
        return C @ (U @ R)
    return (C @ U) @ R


def error_bound_rhs(w_pinv_norm: float, v_pinv_norm: float, perturbation: float) -> float:
    """CUR perturbation bound valid when ``sigma_r(U) >= 12 * perturbation``."""
    if min(w_pinv_norm, v_pinv_norm, perturbation) < 0:
        raise ValueError("inputs must be non-negative")
    return (7.0 / 6.0 * (w_pinv_norm + v_pinv_norm)
            + 25.0 / 6.0 * w_pinv_norm * v_pinv_norm + 1.0 / 6.0) * perturbation


def estimate_mu(D, r: int) -> float:
    """Observable incoherence proxy: the larger tight incoherence constant of the rank-r SVD of ``D``."""
    return max(1.0, max(incoherence_from_factors(svd_truncated(as_matrix(D, "D"), r))))


def _draw(D: np.ndarray, r: int, config: RcurConfig, rng: np.random.Generator, mu: float):
    m, n = D.shape
    n_rows = config.row_sampling.resolve(m, r, mu)
    n_cols = config.col_sampling.resolve(n, r, mu)
    if n_rows < r or n_cols < r:
        raise InsufficientSamples(f"need at least r={r} rows and columns, got |I|={n_rows}, |J|={n_cols}")
    I = sample_uniform(m, n_rows, config.row_sampling.mode, rng)
    J = sample_uniform(n, n_cols, config.col_sampling.mode, rng)
    return I, J


def _needs_mu(config: RcurConfig) -> bool:
    return any(isinstance(s.size, SizeHeuristic) and s.size.variant != "paper_video"
               for s in (config.row_sampling, config.col_sampling))


def run_rcur(D, r: int, config: RcurConfig, mu: Optional[float] = None, hybrid: bool = False) -> RcurRun:
    """Uniformly sample rows and columns, clean both with AltProj, assemble CUR.

    Row and column draws come from one generator seeded with
    ``config.col_sampling.seed``. On a rank-deficient core the draw is
    repeated once with a fresh stream before the error propagates.
    """
    D = as_matrix(D, "D")
    if config.rpca.rank != r:
        config = RcurConfig(RpcaConfig(**{**config.rpca.to_dict(), "rank": r}), config.row_sampling,
                            config.col_sampling, config.theory_eps, config.theory_delta,
                            config.retry_on_rank_deficiency)
    if mu is None:
        mu = estimate_mu(D, r) if _needs_mu(config) else 1.0
    seeds = np.random.SeedSequence(config.col_sampling.seed).spawn(2)
    attempts = 2 if config.retry_on_rank_deficiency else 1
    for attempt in range(attempts):
        rng = np.random.Generator(np.random.Philox(seeds[attempt]))
        I, J = _draw(D, r, config, rng, mu)
        C_tilde = D[:, J]
        R_tilde = D[I, :]
        res_c = altproj(C_tilde, config.rpca)
        res_r = altproj(R_tilde, config.rpca)
        try:
            model = cur_assemble(res_c.L_hat, I, res_r.L_hat, r, J=J)
        except RankDeficientCore:
            if attempt + 1 == attempts:
                raise
            log.info("rank-deficient core, redrawing indices")
            continue
        run = RcurRun(model=model, rpca_cols=res_c, rpca_rows=res_r, mu_estimate=mu,
                      attempts=attempt + 1)
        if hybrid:
            run.hybrid = hybrid_select(model)
        return run
    raise AssertionError("unreachable")


def rcur_uniform(D, r: int, config: RcurConfig,
                 mu: Optional[float] = None) -> tuple[CurModel, tuple[RpcaResult, RpcaResult]]:
    """Uniform robust CUR; returns the model and the (column, row) AltProj results."""
    run = run_rcur(D, r, config, mu)
    return run.model, (run.rpca_cols, run.rpca_rows)


def hybrid_select(model: CurModel) -> CurModel:
    """Reduce a uniform model to exactly ``r`` columns and rows by greedy removal.

    Columns are chosen on the top-``r`` right singular vectors of ``C_hat``
    and rows on the top-``r`` left singular vectors of ``R_hat``. The returned
    index sets are positions in the original matrix.
    """
    r = model.r
    C_hat, R_hat = model.C_hat, model.R_hat
    Vc_t = np.linalg.svd(C_hat, full_matrices=False)[2][:r]
    Wr = np.linalg.svd(R_hat, full_matrices=False)[0][:, :r]
    j_local = greedy_css(Vc_t, r)
    i_local = greedy_css(Wr.T, r)
    I1 = model.row_indices[i_local]
    C1 = C_hat[:, j_local]
    R1 = R_hat[i_local, :]
    J1 = None if model.col_indices is None else model.col_indices[j_local]
    return cur_assemble(C1, I1, R1, r, J=J1)


def rcur_hybrid(D, r: int, config: RcurConfig, mu: Optional[float] = None) -> CurModel:
    """Uniform robust CUR followed by greedy selection of exactly ``r`` columns and rows."""
    return run_rcur(D, r, config, mu, hybrid=True).hybrid
