"""Continuous search for the collision-minimising body speed.

The objective (mean hits over a few seeded transits) is noisy and not
smooth, so the search refines a uniform grid instead of using a line
search. Every probed speed reuses the same seed for repeat ``k``; this
common-random-numbers scheme makes neighbouring probes directly comparable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .experiment import aggregate
from .precip import SimConfig
from .rng import derive_seed
from .transit import run_transit

# Multiplier slot reserved for optimiser seeds; sweeps use 1..trials.
OPTIMIZER_STREAM = 0


@dataclass(frozen=True)
class Comparison:
    lower: str  # "a", "b" or "tie"
    significant: bool
    delta: float
    pooled_std: float


def compare_means(sample_a: Sequence[float], sample_b: Sequence[float]) -> Comparison:
    """Which sample has the lower mean, and whether the gap beats the pooled std.

    The pooled std is the population std of both samples put together
    around their own means, ``sqrt((ss_a + ss_b) / (n_a + n_b))``.
    """
    a = np.asarray(sample_a, dtype=np.float64)
    b = np.asarray(sample_b, dtype=np.float64)
    if a.size < 2 or b.size < 2:
        raise ValueError("compare_means needs at least 2 values per sample")
    ma, mb = a.mean(), b.mean()
    pooled = float(np.sqrt((((a - ma) ** 2).sum() + ((b - mb) ** 2).sum()) / (a.size + b.size)))
    delta = float(mb - ma)
    lower = "tie" if delta == 0 else ("a" if delta > 0 else "b")
    return Comparison(lower, abs(delta) > pooled, delta, pooled)


@dataclass(frozen=True)
class OptimumReport:
    best_speed: float
    best_mean_hits: float
    bracket: tuple[float, float]
    evaluations: int
    significant: bool
    levels: tuple[tuple[tuple[float, float], ...], ...] = ()


Objective = Callable[[float, int], float]


def refine_minimum(
    cfg: SimConfig,
    speed_lo: float,
    speed_hi: float,
    levels: int = 4,
    repeats: int = 10,
    master_seed: int = 0,
    points: int = 5,
    shrink: float = 2.0,
    objective: Objective | None = None,
    detector: str = "grid",
    backend: str | None = None,
) -> OptimumReport:
    """Locate the speed with the fewest mean hits inside ``[speed_lo, speed_hi]``.

    Each level evaluates ``points`` evenly spaced speeds, then recentres the
    bracket on the best one with its half-width divided by ``shrink``
    (clipped to the current bracket). ``objective(speed, k)`` replaces the
    simulation for repeat ``k`` when given. ``significant`` is true when the
    winner beats both ends of the original bracket by more than their pooled
    std.
    """
    if not 0.0 < speed_lo < speed_hi:
        raise ValueError(f"need 0 < speed_lo < speed_hi, got [{speed_lo!r}, {speed_hi!r}]")
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels!r}")
    if points < 3:
        raise ValueError(f"points must be >= 3, got {points!r}")
    if repeats < 2:
        raise ValueError(f"repeats must be >= 2, got {repeats!r}")
    if not shrink > 1.0:
        raise ValueError(f"shrink must be > 1, got {shrink!r}")

    seeds = [derive_seed(master_seed, OPTIMIZER_STREAM, k) for k in range(1, repeats + 1)]
    cache: dict[float, tuple[float, ...]] = {}

    def sample(speed: float) -> tuple[float, ...]:
        if speed not in cache:
            if objective is not None:
                cache[speed] = tuple(float(objective(speed, k)) for k in range(repeats))
            else:
                run_cfg = cfg.replace(body_speed=speed)
                cache[speed] = tuple(
                    float(run_transit(run_cfg, s, detector, backend).total_hits) for s in seeds
                )
        return cache[speed]

    lo, hi = speed_lo, speed_hi
    history = []
    for _ in range(levels):
        grid = np.linspace(lo, hi, points).tolist()
        means = [aggregate(sample(s))[0] for s in grid]
        history.append(tuple(zip(grid, means)))
        i = int(np.argmin(means))
        best, best_mean, bracket = grid[i], means[i], (lo, hi)
        half = (hi - lo) / 2.0 / shrink
        lo, hi = max(lo, best - half), min(hi, best + half)

    best_sample = sample(best)
    edges = [compare_means(best_sample, sample(edge)) for edge in (speed_lo, speed_hi)]
    significant = all(c.lower == "a" and c.significant for c in edges)
    return OptimumReport(
        best_speed=best,
        best_mean_hits=best_mean,
        bracket=bracket,
        evaluations=repeats * len(cache),
        significant=significant,
        levels=tuple(history),
    )
