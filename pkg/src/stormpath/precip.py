"""Domain types and kinematic update rules for the body and the drop field.

Coordinates are dimensionless on the unit square. The body starts at x = 1
and moves toward x = 0; drops fall at ``fall_speed`` per frame, drift by
``fall_speed * tan(angle)`` and by the signed wind.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field, fields

import numpy as np

from .rng import SplitMix64

DEG2RAD_NUM = math.pi
DEG2RAD_DEN = 180.0


class ConfigError(ValueError):
    """Raised when a configuration violates a constraint.

    ``problems`` maps each offending field name to a message.
    """

    def __init__(self, problems: dict[str, str]):
        self.problems = dict(problems)
        detail = "; ".join(f"{k}: {v}" for k, v in self.problems.items())
        super().__init__(f"invalid configuration ({detail})")


class Direction(enum.Enum):
    WITH_WIND = "with"
    AGAINST_WIND = "against"

    @classmethod
    def parse(cls, text: str) -> "Direction":
        key = text.strip().lower().replace("-", "_")
        aliases = {
            "with": cls.WITH_WIND,
            "withwind": cls.WITH_WIND,
            "with_wind": cls.WITH_WIND,
            "against": cls.AGAINST_WIND,
            "againstwind": cls.AGAINST_WIND,
            "against_wind": cls.AGAINST_WIND,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown direction {text!r} (expected 'with' or 'against')") from None


@dataclass(frozen=True)
class SimConfig:
    """All tunables of one transit run. Speeds are grid units per frame."""

    drop_count: int = 250
    angle_spread_deg: float = 0.0
    fall_speed: float = 0.01
    wind_speed: float = 0.0
    direction: Direction = Direction.WITH_WIND
    body_speed: float = 0.001
    collision_radius: float = 0.01
    body_points: int = 200
    body_width: float = 0.03
    body_height: float = 0.25

    @property
    def signed_wind(self) -> float:
        # WithWind drifts drops toward -x, the same way the body moves.
        if self.direction is Direction.WITH_WIND:
            return -self.wind_speed
        return self.wind_speed

    def problems(self) -> dict[str, str]:
        out: dict[str, str] = {}

        def finite(name: str) -> bool:
            v = getattr(self, name)
            if not math.isfinite(v):
                out[name] = f"must be finite, got {v!r}"
                return False
            return True

        if not isinstance(self.drop_count, (int, np.integer)) or self.drop_count < 0:
            out["drop_count"] = f"must be a non-negative integer, got {self.drop_count!r}"
        if not isinstance(self.body_points, (int, np.integer)) or self.body_points < 1:
            out["body_points"] = f"must be a positive integer, got {self.body_points!r}"
        if finite("angle_spread_deg") and not 0.0 <= self.angle_spread_deg < 90.0:
            out["angle_spread_deg"] = f"must lie in [0, 90), got {self.angle_spread_deg!r}"
        if finite("fall_speed") and not 0.0 < self.fall_speed < 1.0:
            out["fall_speed"] = f"must lie in (0, 1), got {self.fall_speed!r}"
        if finite("wind_speed") and not 0.0 <= self.wind_speed < 1.0:
            out["wind_speed"] = f"must lie in [0, 1), got {self.wind_speed!r}"
        if finite("body_speed") and not 0.0 < self.body_speed < 1.0:
            out["body_speed"] = f"must lie in (0, 1), got {self.body_speed!r}"
        if finite("body_width") and self.body_width < 0.0:
            out["body_width"] = f"must be >= 0, got {self.body_width!r}"
        if finite("body_height") and self.body_height < 0.0:
            out["body_height"] = f"must be >= 0, got {self.body_height!r}"
        if finite("collision_radius"):
            if self.collision_radius <= 0.0:
                out["collision_radius"] = f"must be > 0, got {self.collision_radius!r}"
            elif "body_height" not in out and self.collision_radius >= self.body_height:
                out["collision_radius"] = (
                    f"must be smaller than body_height ({self.body_height!r}), "
                    f"got {self.collision_radius!r}"
                )
        if not isinstance(self.direction, Direction):
            out["direction"] = f"must be a Direction, got {self.direction!r}"
        return out

    def validate(self) -> "SimConfig":
        problems = self.problems()
        if problems:
            raise ConfigError(problems)
        return self

    def replace(self, **changes) -> "SimConfig":
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return SimConfig(**values)


@dataclass
class BodyCloud:
    """Point-cloud pedestrian. Points translate rigidly."""

    x: np.ndarray
    y: np.ndarray

    @property
    def points(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def __len__(self) -> int:
        return len(self.x)

    def mean_x(self) -> float:
        # Sequential left-to-right sum, the same order the compiled kernel uses.
        if len(self.x) == 0:
            return 0.0
        return float(np.cumsum(self.x)[-1] / len(self.x))


@dataclass
class DropField:
    """Positions and fall angles of every drop.

    ``tan_angle`` caches ``tan(angles_rad)``; it is refreshed whenever an angle
    is redrawn.
    """

    x: np.ndarray
    y: np.ndarray
    angles_rad: np.ndarray
    tan_angle: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        if self.tan_angle is None:
            self.tan_angle = _tan(self.angles_rad)

    @property
    def positions(self) -> np.ndarray:
        return np.column_stack([self.x, self.y])

    def __len__(self) -> int:
        return len(self.x)

    def copy(self) -> "DropField":
        return DropField(self.x.copy(), self.y.copy(), self.angles_rad.copy(), self.tan_angle.copy())


@dataclass
class ExitReport:
    bottom_exits: np.ndarray
    left_exits: np.ndarray
    right_exits: np.ndarray

    @property
    def respawned(self) -> np.ndarray:
        return np.union1d(np.union1d(self.bottom_exits, self.left_exits), self.right_exits)

    def __bool__(self) -> bool:
        return bool(len(self.bottom_exits) or len(self.left_exits) or len(self.right_exits))


def _tan(angles: np.ndarray) -> np.ndarray:
    # math.tan goes through the platform libm, as does the compiled kernel;
    # np.tan may use a different SIMD implementation.
    return np.array([math.tan(a) for a in angles.tolist()], dtype=np.float64)


def draw_angles(u: np.ndarray, spread_deg: float) -> np.ndarray:
    """Map uniforms on [0, 1) to angles on [-spread, +spread) in radians."""
    return (u * spread_deg * 2.0 - spread_deg) * DEG2RAD_NUM / DEG2RAD_DEN


def spawn_body(rng: SplitMix64, cfg: SimConfig) -> BodyCloud:
    ux = rng.uniforms(cfg.body_points)
    uy = rng.uniforms(cfg.body_points)
    return BodyCloud(cfg.body_width * ux + 1.0, cfg.body_height * uy)


def spawn_field(rng: SplitMix64, cfg: SimConfig) -> DropField:
    n = cfg.drop_count
    x = rng.uniforms(n)
    y = rng.uniforms(n)
    angles = draw_angles(rng.uniforms(n), cfg.angle_spread_deg)
    return DropField(x, y, angles)


def advance_drops(drops: DropField, cfg: SimConfig) -> DropField:
    drops.x = drops.x + cfg.fall_speed * drops.tan_angle + cfg.signed_wind
    drops.y = drops.y - cfg.fall_speed
    return drops


def redraw_angles(drops: DropField, idx: np.ndarray, rng: SplitMix64, cfg: SimConfig) -> None:
    if len(idx) == 0:
        return
    angles = draw_angles(rng.uniforms(len(idx)), cfg.angle_spread_deg)
    drops.angles_rad[idx] = angles
    drops.tan_angle[idx] = _tan(angles)


def resolve_exits(drops: DropField, rng: SplitMix64, cfg: SimConfig) -> ExitReport:
    """Respawn drops that left the unit square.

    Bottom exits reappear on the top edge, left exits on the right edge and
    right exits on the left edge. A drop that left through a corner is
    treated as a side exit. Draw order: bottom x's, left y's, right y's, then
    one fresh angle per respawned drop in index order.
    """
    right = drops.x >= 1.0
    left = (drops.x <= 0.0) & ~right
    bottom = (drops.y <= 0.0) & ~left & ~right
    b_idx = np.flatnonzero(bottom)
    l_idx = np.flatnonzero(left)
    r_idx = np.flatnonzero(right)
    if len(b_idx):
        drops.x[b_idx] = rng.uniforms(len(b_idx))
        drops.y[b_idx] = 1.0
    if len(l_idx):
        drops.y[l_idx] = rng.uniforms(len(l_idx))
        drops.x[l_idx] = 1.0
    if len(r_idx):
        drops.y[r_idx] = rng.uniforms(len(r_idx))
        drops.x[r_idx] = 0.0
    report = ExitReport(b_idx, l_idx, r_idx)
    if report:
        redraw_angles(drops, np.flatnonzero(bottom | left | right), rng, cfg)
    return report


def respawn_top(drops: DropField, idx: np.ndarray, rng: SplitMix64, cfg: SimConfig) -> None:
    """Put drops back on the top edge at random x with a fresh angle."""
    if len(idx) == 0:
        return
    drops.x[idx] = rng.uniforms(len(idx))
    drops.y[idx] = 1.0
    redraw_angles(drops, idx, rng, cfg)


def advance_body(body: BodyCloud, cfg: SimConfig) -> BodyCloud:
    body.x = body.x - cfg.body_speed
    return body


def physical_to_sim(speed_mps: float, fall_anchor_mps: float = 10.0, fall_anchor_sim: float = 0.01) -> float:
    """Convert m/s to grid units per frame through a terminal-velocity anchor.

    The defaults are the rain anchor: 10 m/s corresponds to 0.01 per frame.
    """
    if not fall_anchor_mps > 0.0:
        raise ValueError(f"fall_anchor_mps must be positive, got {fall_anchor_mps!r}")
    return speed_mps / fall_anchor_mps * fall_anchor_sim
