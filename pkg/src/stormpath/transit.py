"""One complete transit of the body from x = 1 toward x = 0."""

from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass
from pathlib import Path


from .collision import detect
from .precip import (
    SimConfig,
    advance_body,
    advance_drops,
    resolve_exits,
    respawn_top,
    spawn_body,
    spawn_field,
)
from .rng import SplitMix64

try:
    if os.environ.get("STORMPATH_PURE"):
        raise ImportError("compiled kernel disabled by STORMPATH_PURE")
    from ._kernels import transit_kernel
except ImportError:
    transit_kernel = None

BACKENDS = ("compiled", "python") if transit_kernel is not None else ("python",)
DEFAULT_BACKEND = BACKENDS[0]
DETECTORS = ("grid", "brute")


class TransitFinished(RuntimeError):
    """step_frame was called on a run that has already terminated."""


@dataclass(frozen=True)
class RunResult:
    total_hits: int
    hits_per_frame: tuple[int, ...]
    mean_body_x: tuple[float, ...]
    seed: int

    @property
    def frame_count(self) -> int:
        return len(self.hits_per_frame)


@dataclass
class TransitState:
    cfg: SimConfig
    rng: SplitMix64
    body: BodyCloud
    drops: DropField
    detector: str = "grid"
    frame: int = 0

    @classmethod
    def start(cls, cfg: SimConfig, seed: int, detector: str = "grid") -> "TransitState":
        if detector not in DETECTORS:
            raise ValueError(f"unknown detector {detector!r} (expected one of {DETECTORS})")
        rng = SplitMix64(seed)
        body = spawn_body(rng, cfg)
        drops = spawn_field(rng, cfg)
        return cls(cfg, rng, body, drops, detector)

    @property
    def finished(self) -> bool:
        # The loop condition looks at the body position at frame start.
        return not self.body.mean_x() >= 0.0


def step_frame(state: TransitState) -> int:
    """Advance one frame and return the number of drops hit in it."""
    if state.finished:
        raise TransitFinished(f"transit already ended after {state.frame} frames")
    cfg = state.cfg
    advance_drops(state.drops, cfg)
    resolve_exits(state.drops, state.rng, cfg)
    hits = detect(state.body, state.drops, cfg.collision_radius, state.detector)
    respawn_top(state.drops, hits, state.rng, cfg)
    advance_body(state.body, cfg)
    state.frame += 1
    return len(hits)


def max_frames(cfg: SimConfig) -> int:
    return math.ceil((1.0 + cfg.body_width) / cfg.body_speed) + 2


def run_transit(
    cfg: SimConfig,
    seed: int,
    detector: str = "grid",
    backend: str | None = None,
    frame_dump: str | Path | None = None,
) -> RunResult:
    """Run one transit; a pure function of ``(cfg, seed, detector)``.

    ``backend`` picks the compiled kernel or the numpy path; both give
    identical results.
    """
    cfg.validate()
    backend = backend or DEFAULT_BACKEND
    if backend not in BACKENDS:
        raise ValueError(f"backend {backend!r} unavailable (have {BACKENDS})")
    state = TransitState.start(cfg, seed, detector)
    limit = max_frames(cfg)

    if backend == "compiled":
        hits, means, counter = transit_kernel(
            state.body.x, state.body.y,
            state.drops.x, state.drops.y,
            state.drops.angles_rad, state.drops.tan_angle,
            state.rng.seed, state.rng.counter,
            cfg.fall_speed, cfg.signed_wind, cfg.angle_spread_deg,
            cfg.body_speed, cfg.collision_radius,
            detector == "grid", limit,
        )
        state.rng.counter = counter
        hits_t = tuple(hits.tolist())
        means_t = tuple(means.tolist())
    else:
        h: list[int] = []
        m: list[float] = []
        while not state.finished:
            if state.frame >= limit:
                raise RuntimeError(f"transit exceeded {limit} frames")
            m.append(state.body.mean_x())
            h.append(step_frame(state))
        hits_t, means_t = tuple(h), tuple(m)

    result = RunResult(sum(hits_t), hits_t, means_t, seed)
    if frame_dump is not None:
        write_frame_dump(result, frame_dump)
    return result


def write_frame_dump(result: RunResult, path: str | Path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["frame", "mean_body_x", "hits"])
        for i, (mx, h) in enumerate(zip(result.mean_body_x, result.hits_per_frame)):
            w.writerow([i, repr(mx), h])

