"""``key = value`` config documents for sweeps.

One assignment per line, ``#`` starts a comment. Keys mirror the
:class:`SimConfig` and :class:`SweepSpec` fields. Speeds are grid units per
frame unless suffixed with ``mps``, in which case they go through the rain
anchor (10 m/s falls 0.01 per frame).
"""

from __future__ import annotations

from .experiment import SweepSpec
from .precip import ConfigError, Direction, SimConfig, physical_to_sim

RAIN_ANCHOR_MPS = 10.0
RAIN_ANCHOR_SIM = 0.01

DEFAULT_BASE_SPEED = 0.001
DEFAULT_TRIALS = 10
DEFAULT_REPEATS = 10

SIM_KEYS = (
    "drop_count",
    "angle_spread_deg",
    "fall_speed",
    "wind_speed",
    "direction",
    "collision_radius",
    "body_points",
    "body_width",
    "body_height",
)
SWEEP_KEYS = ("base_speed", "trials", "repeats", "master_seed")
SPEED_KEYS = {"fall_speed", "wind_speed", "base_speed"}
INT_KEYS = {"drop_count", "body_points", "trials", "repeats", "master_seed"}
KEYS = SIM_KEYS + SWEEP_KEYS


class ConfigSyntaxError(ValueError):
    def __init__(self, line: int, key: str | None, message: str):
        self.line = line
        self.key = key
        where = f"line {line}" + (f", key {key!r}" if key else "")
        super().__init__(f"{where}: {message}")


def parse_value(key: str, raw: str):
    """Convert one raw value string for ``key``; raises ValueError."""
    text = raw.strip()
    if key == "direction":
        return Direction.parse(text)
    if key in INT_KEYS:
        value = int(text, 0)
        if key == "master_seed" and not 0 <= value < 2**64:
            raise ValueError(f"seed must fit in 64 unsigned bits, got {value}")
        return value
    if key in SPEED_KEYS and text.lower().endswith("mps"):
        return physical_to_sim(float(text[:-3]), RAIN_ANCHOR_MPS, RAIN_ANCHOR_SIM)
    return float(text)


def build_spec(values: dict) -> SweepSpec:
    """SweepSpec from a partial mapping of config keys; validates it."""
    unknown = set(values) - set(KEYS)
    if unknown:
        raise ConfigError({k: "unknown key" for k in sorted(unknown)})
    base_speed = values.get("base_speed", DEFAULT_BASE_SPEED)
    sim = {k: values[k] for k in SIM_KEYS if k in values}
    cfg = SimConfig(body_speed=base_speed, **sim)
    spec = SweepSpec(
        cfg,
        base_speed=base_speed,
        trials=values.get("trials", DEFAULT_TRIALS),
        repeats=values.get("repeats", DEFAULT_REPEATS),
        master_seed=values.get("master_seed", 0),
    )
    return spec.validate()


def parse_entries(text: str) -> dict[str, tuple[int, object]]:
    """Parse a document into ``{key: (line_number, value)}`` without validating."""
    out: dict[str, tuple[int, object]] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigSyntaxError(lineno, None, f"expected 'key = value', got {body!r}")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in KEYS:
            raise ConfigSyntaxError(lineno, key, f"unknown key (valid keys: {', '.join(KEYS)})")
        if key in out:
            raise ConfigSyntaxError(lineno, key, f"duplicate key (first set on line {out[key][0]})")
        try:
            out[key] = (lineno, parse_value(key, raw))
        except ValueError as exc:
            raise ConfigSyntaxError(lineno, key, f"cannot parse {raw.strip()!r}: {exc}") from None
    return out


def parse_config(text: str, overrides: dict | None = None) -> SweepSpec:
    """Parse and validate a config document.

    ``overrides`` (already-typed values, e.g. from command-line flags) win over
    the document.
    """
    entries = parse_entries(text)
    values = {k: v for k, (_, v) in entries.items()}
    values.update(overrides or {})
    try:
        return build_spec(values)
    except ConfigError as exc:
        key = next(iter(exc.problems))
        line = entries[key][0] if key in entries and key not in (overrides or {}) else 0
        raise ConfigSyntaxError(line, key, str(exc)) from exc


def spec_values(spec: SweepSpec) -> dict:
    cfg = spec.base_cfg
    out = {k: getattr(cfg, k) for k in SIM_KEYS}
    out.update(
        base_speed=spec.base_speed,
        trials=spec.trials,
        repeats=spec.repeats,
        master_seed=spec.master_seed,
    )
    return out


def format_config(spec: SweepSpec) -> str:
    """Config document that parses back to ``spec``."""
    lines = []
    for key, value in spec_values(spec).items():
        if isinstance(value, Direction):
            text = value.value
        elif key == "master_seed":
            text = f"{value:#x}"
        else:
            text = repr(value)
        lines.append(f"{key} = {text}")
    return "\n".join(lines) + "\n"
