"""Speed sweeps, aggregation, figure presets and curve-feature detection."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import spearmanr

from .precip import Direction, SimConfig
from .rng import derive_seed
from .transit import run_transit

PLATEAU_STD_FLOOR = 1.0


@dataclass(frozen=True)
class SweepSpec:
    base_cfg: SimConfig
    base_speed: float
    trials: int
    repeats: int = 10
    master_seed: int = 0

    def __post_init__(self):
        # The per-run body speed comes from the multiplier; keep the template
        # pinned to multiplier 1 so equal sweeps compare equal.
        if self.base_cfg.body_speed != self.base_speed:
            object.__setattr__(self, "base_cfg", self.base_cfg.replace(body_speed=self.base_speed))

    def problems(self) -> dict[str, str]:
        out = self.base_cfg.problems() if self.base_speed > 0 else {}
        if not self.base_speed > 0:
            out["base_speed"] = f"must be > 0, got {self.base_speed!r}"
        if self.trials < 1:
            out["trials"] = f"must be >= 1, got {self.trials!r}"
        if self.repeats < 2:
            out["repeats"] = f"must be >= 2, got {self.repeats!r}"
        top = self.trials * self.base_speed
        if "body_speed" not in out and "trials" not in out and not top < 1.0:
            out["trials"] = f"top speed trials*base_speed={top!r} must stay below 1"
        return out

    def validate(self) -> "SweepSpec":
        from .precip import ConfigError

        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def speed(self, multiplier: int) -> float:
        return multiplier * self.base_speed

    def config_for(self, multiplier: int) -> SimConfig:
        return self.base_cfg.replace(body_speed=self.speed(multiplier))


@dataclass(frozen=True)
class CurveFeatures:
    local_min_index: int | None
    plateau_index: int | None
    monotone_decreasing: bool


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    multipliers: tuple[int, ...]
    speeds: tuple[float, ...]
    mean_hits: tuple[float, ...]
    std_hits: tuple[float, ...]
    raw_totals: tuple[tuple[int, ...], ...]
    features: CurveFeatures | None = field(default=None)

    @property
    def trials(self) -> int:
        return len(self.multipliers)

    def speed_x_fall(self) -> list[float]:
        return [s / self.spec.base_cfg.fall_speed for s in self.speeds]

    def speed_x_wind(self) -> list[float | None]:
        w = self.spec.base_cfg.wind_speed
        return [s / w if w > 0 else None for s in self.speeds]

    def mean_at(self, multiplier: int) -> float:
        return self.mean_hits[self.multipliers.index(multiplier)]


def aggregate(values) -> tuple[float, float]:
    """Arithmetic mean and population (divisor N) standard deviation."""
    arr = np.asarray(list(values), dtype=np.float64)
    if arr.size < 2:
        raise ValueError(f"need at least 2 values, got {arr.size}")
    mean = float(arr.mean())
    std = float(np.sqrt(np.mean((arr - mean) ** 2)))
    return mean, std


def worker_count(workers: int | None = None) -> int:
    """Resolve a worker count; ``STORMPATH_THREADS`` caps it (0 means auto)."""
    auto = os.cpu_count() or 1
    env = os.environ.get("STORMPATH_THREADS", "").strip()
    cap = int(env) if env else 0
    if workers is None or workers <= 0:
        workers = cap or auto
    elif cap:
        workers = min(workers, cap)
    return max(1, workers)


def run_sweep(
    spec: SweepSpec,
    workers: int | None = 1,
    detector: str = "grid",
    backend: str | None = None,
) -> SweepResult:
    spec.validate()
    jobs = [(j, k) for j in range(1, spec.trials + 1) for k in range(1, spec.repeats + 1)]

    def one(job: tuple[int, int]) -> int:
        j, k = job
        seed = derive_seed(spec.master_seed, j, k)
        return run_transit(spec.config_for(j), seed, detector, backend).total_hits

    n = worker_count(workers)
    if n == 1:
        totals = [one(job) for job in jobs]
    else:
        with ThreadPoolExecutor(max_workers=n) as pool:
            totals = list(pool.map(one, jobs))

    raw, means, stds = [], [], []
    for j in range(spec.trials):
        row = tuple(totals[j * spec.repeats:(j + 1) * spec.repeats])
        m, s = aggregate(row)
        raw.append(row)
        means.append(m)
        stds.append(s)
    mults = tuple(range(1, spec.trials + 1))
    return SweepResult(
        spec=spec,
        multipliers=mults,
        speeds=tuple(spec.speed(j) for j in mults),
        mean_hits=tuple(means),
        std_hits=tuple(stds),
        raw_totals=tuple(raw),
        features=curve_features(means, stds),
    )


def curve_features(means, stds) -> CurveFeatures:
    n = len(means)
    return CurveFeatures(
        local_min_index=detect_local_min(means, stds) if n >= 3 else None,
        plateau_index=detect_plateau(means, stds) if n >= 4 else None,
        monotone_decreasing=all(b <= a for a, b in zip(means, means[1:])),
    )


def detect_local_min(means, stds) -> int | None:
    """Smallest 1-based interior multiplier significantly below both neighbours.

    A point counts when it sits more than the largest of the three local
    standard deviations below each neighbour.
    """
    n = len(means)
    if n < 3 or len(stds) != n:
        raise ValueError("detect_local_min needs at least 3 means with matching stds")
    for i in range(1, n - 1):
        gate = max(stds[i - 1], stds[i], stds[i + 1])
        if means[i] < means[i - 1] - gate and means[i] < means[i + 1] - gate:
            return i + 1
    return None


def detect_plateau(means, stds, std_floor: float = PLATEAU_STD_FLOOR) -> int | None:
    """Earliest 1-based multiplier from which every mean stays near the tail.

    The tail value is the mean of the last two points; point ``i`` is near it
    when ``|means[i] - tail| < max(stds[i], std_floor)``. Returns ``None``
    when only the last two points qualify.
    """
    n = len(means)
    if n < 4 or len(stds) != n:
        raise ValueError("detect_plateau needs at least 4 means with matching stds")
    tail = (means[-1] + means[-2]) / 2.0
    first = n
    for i in range(n - 1, -1, -1):
        if abs(means[i] - tail) < max(stds[i], std_floor):
            first = i
        else:
            break
    if first >= n - 2:
        return None
    return first + 1


@dataclass(frozen=True)
class DensityRatio:
    ratios: tuple[float | None, ...]
    mean_ratio: float | None

    @property
    def undefined(self) -> tuple[int, ...]:
        return tuple(i + 1 for i, r in enumerate(self.ratios) if r is None)


def density_ratio(sweep_hi: SweepResult, sweep_lo: SweepResult) -> DensityRatio:
    if sweep_hi.trials != sweep_lo.trials:
        raise ValueError(f"trial counts differ: {sweep_hi.trials} vs {sweep_lo.trials}")
    ratios: list[float | None] = []
    for hi, lo in zip(sweep_hi.mean_hits, sweep_lo.mean_hits):
        ratios.append(hi / lo if lo != 0 else None)
    defined = [r for r in ratios if r is not None]
    return DensityRatio(tuple(ratios), float(np.mean(defined)) if defined else None)


def spearman(xs, ys) -> float:
    rho = spearmanr(xs, ys).statistic
    return float(rho)


# Wind presets step the body in half-wind increments so that matching the
# wind (multiplier 2) is an interior point of the sweep.
# figure -> (wind, trials); rain panels a/b use 250 drops, c/d use 1000.
_RAIN = {1: (0.001, 12), 2: (0.005, 8), 3: (0.01, 8), 4: (0.02, 6)}
_SNOW = {5: (0.001, 32), 6: (0.01, 8), 7: (0.05, 6), 8: (0.1, 6)}
FALL_SPEED = 0.01


def _build_presets() -> dict[str, SweepSpec]:
    out: dict[str, SweepSpec] = {}
    for fig, (wind, trials) in _RAIN.items():
        for panel, drops, direction in (
            ("a", 250, Direction.WITH_WIND),
            ("b", 250, Direction.AGAINST_WIND),
            ("c", 1000, Direction.WITH_WIND),
            ("d", 1000, Direction.AGAINST_WIND),
        ):
            cfg = SimConfig(drop_count=drops, fall_speed=FALL_SPEED, wind_speed=wind,
                            direction=direction, body_speed=wind / 2)
            out[f"fig{fig}{panel}"] = SweepSpec(cfg, base_speed=wind / 2, trials=trials)
    for fig, (wind, trials) in _SNOW.items():
        for panel, direction in (("a", Direction.WITH_WIND), ("b", Direction.AGAINST_WIND)):
            cfg = SimConfig(drop_count=250, fall_speed=FALL_SPEED, wind_speed=wind,
                            direction=direction, body_speed=wind / 2)
            out[f"fig{fig}{panel}"] = SweepSpec(cfg, base_speed=wind / 2, trials=trials)
    flurry = SimConfig(drop_count=250, angle_spread_deg=45.0, fall_speed=FALL_SPEED,
                       wind_speed=0.0, body_speed=0.1 * FALL_SPEED)
    out["fig9"] = SweepSpec(flurry, base_speed=0.1 * FALL_SPEED, trials=12)
    return out


PRESETS = _build_presets()


def preset(name: str, master_seed: int = 0, repeats: int = 10) -> SweepSpec:
    try:
        spec = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; valid names: {', '.join(PRESETS)}") from None
    return SweepSpec(spec.base_cfg, spec.base_speed, spec.trials, repeats, master_seed)
