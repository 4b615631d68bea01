"""Seeded ground-truth generators: incoherent low-rank, capped sparse, synthetic video."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .sampling import make_rng


@dataclass(frozen=True)
class SynthConfig:
    m: int
    n: int
    r: int
    kappa: float = 1.0
    alpha: float = 0.0
    outlier_magnitude: float = 10.0
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.r <= min(self.m, self.n):
            raise ValueError(f"rank {self.r} out of range for {self.m}x{self.n}")
        if self.kappa < 1:
            raise ValueError("kappa must be >= 1")
        if not 0 <= self.alpha <= 1:
            raise ValueError("alpha must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class GroundTruth:
    L: np.ndarray
    S: np.ndarray
    D: np.ndarray
    foreground_mask: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)


def _orthonormal(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    # sign fix makes the factor a deterministic function of the Gaussian draw
    return Q * np.sign(np.diag(R))


def gen_lowrank(m: int, n: int, r: int, kappa: float = 1.0, seed: int = 0) -> np.ndarray:
    """Rank-``r`` matrix with random orthonormal factors and singular values
    geometrically spaced from 1 down to ``1/kappa``."""
    if not 1 <= r <= min(m, n):
        raise ValueError(f"rank {r} out of range for {m}x{n}")
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    rng = make_rng(seed)
    W = _orthonormal(rng, m, r)
    V = _orthonormal(rng, n, r)
    sigma = np.geomspace(1.0, 1.0 / kappa, r) if r > 1 else np.ones(1)
    return (W * sigma) @ V.T


def _support(m: int, n: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    per_row = math.floor(alpha * n)
    col_cap = math.floor(alpha * m)
    mask = np.zeros((m, n), dtype=bool)
    if per_row == 0 or col_cap == 0:
        return mask
    # cyclic band under random row/column relabelling
    row_perm = rng.permutation(m)
    col_perm = rng.permutation(n)
    starts = (np.arange(m) * n) // m
    band = (starts[:, None] + np.arange(per_row)[None, :]) % n
    rows = np.repeat(row_perm, per_row)
    cols = col_perm[band.ravel()]
    mask[rows, cols] = True
    # wrap-around can overfill a column by one; trim overfull columns at random
    counts = mask.sum(axis=0)
    for c in np.flatnonzero(counts > col_cap):
        hits = np.flatnonzero(mask[:, c])
        drop = rng.choice(hits, size=hits.size - col_cap, replace=False)
        mask[drop, c] = False
    return mask


def gen_sparse(m: int, n: int, alpha: float, magnitude_range: float = 10.0, seed: int = 0,
               reference_scale: float = 1.0) -> np.ndarray:
    """Sparse outlier matrix with at most ``alpha*n`` nonzeros per row and
    ``alpha*m`` per column.

    Entries have random sign and magnitude uniform on
    ``[0.5, 1.5] * magnitude_range * reference_scale``.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    if alpha > 0 and (math.floor(alpha * n) < 1 or math.floor(alpha * m) < 1):
        raise ValueError(f"alpha={alpha} admits no nonzero entries for a {m}x{n} matrix "
                         "(alpha*n < 1 or alpha*m < 1)")
    rng = make_rng(seed)
    S = np.zeros((m, n))
    if alpha == 0:
        return S
    mask = _support(m, n, alpha, rng)
    k = int(mask.sum())
    mags = rng.uniform(0.5, 1.5, size=k) * magnitude_range * reference_scale
    signs = rng.choice(np.array([-1.0, 1.0]), size=k)
    S[mask] = mags * signs
    return S


def gen_problem(config: SynthConfig) -> GroundTruth:
    """``D = L + S`` with ``L`` from :func:`gen_lowrank` and ``S`` scaled to the
    mean absolute entry of ``L``."""
    seed_l, seed_s = np.random.SeedSequence(config.seed).generate_state(2, np.uint64)
    L = gen_lowrank(config.m, config.n, config.r, config.kappa, int(seed_l))
    S = gen_sparse(config.m, config.n, config.alpha, config.outlier_magnitude, int(seed_s),
                   reference_scale=float(np.mean(np.abs(L))))
    return GroundTruth(L=L, S=S, D=L + S, meta={"kind": "problem", **config.to_dict()})


def _basis_images(height: int, width: int, r: int) -> np.ndarray:
    y = np.linspace(0.0, 1.0, height)[:, None]
    x = np.linspace(0.0, 1.0, width)[None, :]
    images = [60.0 + 40.0 * x + 30.0 * y]  # lit gradient
    # smooth "light patches" at distinct positions
    for j in range(1, r):
        cy = 0.25 + 0.5 * ((j * 0.618) % 1.0)
        cx = 0.2 + 0.6 * ((j * 0.414) % 1.0)
        images.append(50.0 * np.exp(-((y - cy) ** 2 + (x - cx) ** 2) / 0.03))
    return np.stack([im.ravel() for im in images], axis=1)


def gen_video(frames: int, height: int, width: int, r: int = 2, alpha: float = 0.05,
              blob_size: tuple[int, int] = (8, 10), seed: int = 0,
              intensity: float = 60.0) -> GroundTruth:
    """Synthetic surveillance video as a (height*width) x frames matrix.

    The background mixes ``r`` smooth basis images with per-frame weights; the
    foreground is an additive rectangular blob walking a seeded path.
    Columns are frames vectorized in row-major order.
    """
    bh, bw = blob_size
    npix = height * width
    if bh * bw > alpha * npix:
        raise ValueError(f"blob of {bh * bw} pixels exceeds alpha*height*width={alpha * npix:g}")
    if bh > height or bw > width:
        raise ValueError("blob larger than the frame")
    rng = make_rng(seed)
    basis = _basis_images(height, width, r)
    weights = np.empty((r, frames))
    weights[0] = 1.0 + 0.05 * np.sin(np.linspace(0, 2 * np.pi, frames))
    for j in range(1, r):
        # the light switches between two levels with a few random toggles
        toggles = np.sort(rng.choice(np.arange(1, frames), size=min(4, frames - 1), replace=False))
        level = np.zeros(frames)
        on = True
        prev = 0
        for t in list(toggles) + [frames]:
            level[prev:t] = 1.0 if on else 0.2
            on = not on
            prev = t
        weights[j] = level
    L = basis @ weights

    S = np.zeros((npix, frames))
    mask = np.zeros((npix, frames), dtype=bool)
    # blob bounces around the frame with a seeded velocity
    pos = np.array([rng.integers(0, height - bh + 1), rng.integers(0, width - bw + 1)], dtype=float)
    vel = rng.uniform(1.5, 3.0, size=2) * rng.choice(np.array([-1.0, 1.0]), size=2)
    limits = np.array([height - bh, width - bw], dtype=float)
    for t in range(frames):
        top, left = int(round(pos[0])), int(round(pos[1]))
        frame_mask = np.zeros((height, width), dtype=bool)
        frame_mask[top:top + bh, left:left + bw] = True
        mask[:, t] = frame_mask.ravel()
        pos = pos + vel
        for d in range(2):
            if pos[d] < 0 or pos[d] > limits[d]:
                vel[d] = -vel[d]
                pos[d] = min(max(pos[d], 0.0), limits[d])
    S[mask] = intensity
    meta = {"kind": "video", "frames": frames, "height": height, "width": width, "r": r,
            "alpha": alpha, "blob_size": [bh, bw], "seed": seed, "intensity": intensity}
    return GroundTruth(L=L, S=S, D=L + S, foreground_mask=mask, meta=meta)
