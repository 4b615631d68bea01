"""Index selection: seeded uniform draws, sample-size rules, greedy removal CSS."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional, Union

import numpy as np

from .matcore import as_matrix

Mode = Literal["with_replacement", "without_replacement"]
SizeVariant = Literal["log_n", "log_rn", "paper_video"]


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based (Philox) generator for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def split_seeds(master: int, count: int) -> list[int]:
    """Deterministic per-trial 64-bit seeds derived from ``master``."""
    children = np.random.SeedSequence(int(master)).spawn(count)
    return [int(child.generate_state(1, np.uint64)[0]) for child in children]


@dataclass(frozen=True)
class SizeHeuristic:
    c: float
    variant: SizeVariant = "log_n"

    def __post_init__(self):
        if self.c <= 0:
            raise ValueError("heuristic constant c must be positive")


@dataclass(frozen=True)
class SampleConfig:
    size: Union[int, SizeHeuristic]
    mode: Mode = "without_replacement"
    seed: int = 0

    def resolve(self, universe: int, r: int, mu: float) -> int:
        if isinstance(self.size, SizeHeuristic):
            return sample_size(universe, r, mu, self.size.c, self.size.variant)
        return min(int(self.size), universe) if self.mode == "without_replacement" else int(self.size)


def sample_uniform(universe: int, count: int, mode: Mode = "without_replacement",
                   seed: Union[int, np.random.Generator] = 0) -> np.ndarray:
    """Draw ``count`` indices from ``range(universe)`` uniformly.

    With replacement the draw order is preserved; without replacement the
    output is a random ordered subset with distinct entries.
    """
    if count < 0 or universe < 0:
        raise ValueError("universe and count must be non-negative")
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    if mode == "with_replacement":
        if universe == 0 and count > 0:
            raise ValueError("cannot draw from an empty universe")
        return rng.integers(0, universe, size=count, dtype=np.intp)
    if mode == "without_replacement":
        if count > universe:
            raise ValueError(f"cannot draw {count} distinct indices from {universe}")
        return rng.permutation(universe)[:count].astype(np.intp)
    raise ValueError(f"unknown sampling mode {mode!r}")


def sample_size(universe: int, r: int, mu: float, c: float, variant: SizeVariant = "log_n") -> int:
    """Sample count from the sizing rules, capped at ``universe``.

    ``log_rn``: c*mu*r*ln(r*universe); ``log_n``: c*mu*r*ln(universe);
    ``paper_video``: c*r*ln(universe).
    """
    if c <= 0:
        raise ValueError("c must be positive")
    if r < 1:
        raise ValueError("r must be at least 1")
    if mu < 1:
        raise ValueError("mu must be at least 1")
    if variant == "log_rn":
        raw = c * mu * r * math.log(r * universe)
    elif variant == "log_n":
        raw = c * mu * r * math.log(universe)
    elif variant == "paper_video":
        raw = c * r * math.log(universe)
    else:
        raise ValueError(f"unknown size variant {variant!r}")
    return min(universe, math.ceil(raw))


class GreedySelectionError(ValueError):
    """Greedy removal cannot proceed (rank deficiency or leverage breakdown)."""


def removal_scores(X_S: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Greedy removal criterion for every column of an r x s rank-r block.

    Returns ``(scores, leverage)`` where ``leverage[k] = ||y_k||^2`` and
    ``scores[k] = sum_j (y_kj / s_j)^2 / (1 - ||y_k||^2)`` with ``y_k`` the
    k-th column of the right singular factor. Columns with leverage >= 1 get
    ``inf``.
    """
    r = X_S.shape[0]
    _, s, Y = np.linalg.svd(X_S, full_matrices=False)
    Y = Y[:r]
    s = s[:r]
    leverage = np.sum(Y * Y, axis=0)
    weighted = np.sum((Y / s[:, None]) ** 2, axis=0)
    scores = np.full(leverage.shape, np.inf)
    # leverage is 1 up to rounding for columns that cannot be removed
    ok = leverage < 1.0 - 1e-12
    scores[ok] = weighted[ok] / (1.0 - leverage[ok])
    return scores, leverage


def greedy_css(X, k: int, trace: Optional[list] = None) -> np.ndarray:
    """Deterministic greedy removal column subset selection.

    Starting from all ``m`` columns of the ``r x m`` rank-``r`` matrix ``X``,
    repeatedly drop the column with the smallest removal score until ``k``
    remain. Guarantees are proven for (near-)orthonormal rows, but any
    full-row-rank input is accepted. Ties go to the smallest column index.
    If ``trace`` is a list, the score vector of each step is appended to it
    as ``(surviving_indices, scores)``.

    Returns the surviving column indices in ascending order.
    """
    X = as_matrix(X, "X")
    r, m = X.shape
    if k < r:
        raise GreedySelectionError(f"k={k} is smaller than the rank r={r}")
    if k > m:
        raise GreedySelectionError(f"k={k} exceeds the number of columns m={m}")
    s = np.linalg.svd(X, compute_uv=False)
    if s.size < r or s[0] == 0.0 or s[r - 1] <= 1e-10 * s[0]:
        raise GreedySelectionError("X is rank deficient")
    alive = np.arange(m)
    for _ in range(m - k):
        scores, _ = removal_scores(X[:, alive])
        if not np.any(np.isfinite(scores)):
            raise GreedySelectionError("every candidate column has leverage >= 1")
        if trace is not None:
            trace.append((alive.copy(), scores.copy()))
        drop = int(np.argmin(scores))  # first minimum -> smallest index
        alive = np.delete(alive, drop)
    return alive
