"""Command-line interface.

Settings are layered: built-in defaults, then ``--preset`` or ``--config``,
then individual flags. Exit status is 0 on success, 2 for usage or
validation errors and 1 for runtime failures.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import build_spec, format_config, parse_config, parse_value, spec_values
from .experiment import PRESETS, SweepSpec, preset, run_sweep
from .optimize import refine_minimum
from .precip import ConfigError
from .report import emit_csv, emit_json, emit_svg
from .transit import run_transit

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _seed(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must fit in 64 unsigned bits, got {text}")
    return value


def _typed(key: str):
    def convert(text: str):
        try:
            return parse_value(key, text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None

    convert.__name__ = key
    return convert


def _add_setup_flags(p: argparse.ArgumentParser, seed_required: bool) -> None:
    src = p.add_mutually_exclusive_group()
    src.add_argument("--preset", metavar="NAME", help="start from a figure preset")
    src.add_argument("--config", metavar="PATH", help="start from a key = value config file")
    p.add_argument("--seed", type=_seed, required=seed_required, help="master seed (u64)")
    p.add_argument("--repeats", type=int)
    p.add_argument("--trials", type=int)
    p.add_argument("--drops", type=int, dest="drop_count")
    p.add_argument("--wind", type=_typed("wind_speed"), dest="wind_speed",
                   help="wind speed, grid/frame or with an 'mps' suffix")
    p.add_argument("--fall", type=_typed("fall_speed"), dest="fall_speed")
    p.add_argument("--base-speed", type=_typed("base_speed"), dest="base_speed")
    p.add_argument("--direction", type=_typed("direction"), help="with | against")
    p.add_argument("--angle-deg", type=float, dest="angle_spread_deg")
    p.add_argument("--detector", choices=("grid", "brute"), default="grid")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stormpath", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("list-presets", help="list figure presets")
    p.add_argument("--out")

    p = sub.add_parser("preset", help="print a preset as a config document")
    p.add_argument("name")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out")

    p = sub.add_parser("run", help="one transit")
    _add_setup_flags(p, seed_required=False)
    p.add_argument("--multiplier", type=int, default=1, help="body speed = multiplier * base speed")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--frame-dump", metavar="PATH")
    p.add_argument("--out")

    p = sub.add_parser("sweep", help="speed sweep with repeats")
    _add_setup_flags(p, seed_required=True)
    p.add_argument("--format", choices=("csv", "json", "svg"), default="csv")
    p.add_argument("--workers", type=int, default=0, help="0 = auto (capped by STORMPATH_THREADS)")
    p.add_argument("--out")

    p = sub.add_parser("optimize", help="search for the speed with fewest hits")
    _add_setup_flags(p, seed_required=True)
    p.add_argument("--lo", type=_typed("base_speed"), required=True, help="lower speed bound")
    p.add_argument("--hi", type=_typed("base_speed"), required=True, help="upper speed bound")
    p.add_argument("--levels", type=int, default=4)
    p.add_argument("--points", type=int, default=5)
    p.add_argument("--format", choices=("json",), default="json")
    p.add_argument("--out")
    return parser


_OVERRIDES = ("repeats", "trials", "drop_count", "wind_speed", "fall_speed",
              "base_speed", "direction", "angle_spread_deg")


def resolve_spec(args: argparse.Namespace) -> SweepSpec:
    overrides = {k: getattr(args, k) for k in _OVERRIDES if getattr(args, k, None) is not None}
    if getattr(args, "seed", None) is not None:
        overrides["master_seed"] = args.seed
    try:
        if args.config:
            return parse_config(Path(args.config).read_text(), overrides)
        values = spec_values(preset(args.preset)) if args.preset else {}
        values.update(overrides)
        return build_spec(values)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    except OSError as exc:
        raise UsageError(f"cannot read config: {exc}") from None


def _write(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_list_presets(args) -> None:
    lines = []
    for name, spec in PRESETS.items():
        cfg = spec.base_cfg
        lines.append(
            f"{name}\tdrops={cfg.drop_count} wind={cfg.wind_speed:g} "
            f"direction={cfg.direction.value} angle={cfg.angle_spread_deg:g} "
            f"base_speed={spec.base_speed:g} trials={spec.trials}"
        )
    _write("\n".join(lines) + "\n", args.out)


def _cmd_preset(args) -> None:
    try:
        spec = preset(args.name, master_seed=args.seed or 0)
    except KeyError as exc:
        raise UsageError(exc.args[0]) from None
    _write(format_config(spec), args.out)


def _cmd_run(args) -> None:
    spec = resolve_spec(args)
    if args.multiplier < 1:
        raise UsageError("--multiplier must be >= 1")
    cfg = spec.config_for(args.multiplier)
    result = run_transit(cfg, spec.master_seed, args.detector, frame_dump=args.frame_dump)
    if args.format == "csv":
        rows = ["frame,mean_body_x,hits"]
        rows += [f"{i},{mx!r},{h}" for i, (mx, h) in
                 enumerate(zip(result.mean_body_x, result.hits_per_frame))]
        _write("\n".join(rows) + "\n", args.out)
    else:
        doc = {
            "kind": "run",
            "version": __version__,
            "config": format_config(spec),
            "multiplier": args.multiplier,
            "body_speed": cfg.body_speed,
            "seed": result.seed,
            "total_hits": result.total_hits,
            "frame_count": result.frame_count,
            "hits_per_frame": list(result.hits_per_frame),
        }
        _write(json.dumps(doc, sort_keys=True, indent=2) + "\n", args.out)


def _cmd_sweep(args) -> None:
    spec = resolve_spec(args)
    result = run_sweep(spec, workers=args.workers, detector=args.detector)
    emit = {"csv": emit_csv, "json": emit_json, "svg": emit_svg}[args.format]
    _write(emit(result), args.out)


def _cmd_optimize(args) -> None:
    spec = resolve_spec(args)
    report = refine_minimum(
        spec.base_cfg,
        args.lo,
        args.hi,
        levels=args.levels,
        repeats=spec.repeats,
        master_seed=spec.master_seed,
        points=args.points,
        detector=args.detector,
    )
    _write(emit_json(report), args.out)


COMMANDS = {
    "list-presets": _cmd_list_presets,
    "preset": _cmd_preset,
    "run": _cmd_run,
    "sweep": _cmd_sweep,
    "optimize": _cmd_optimize,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"stormpath: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        # Argument-level validation (bad bracket, bad multiplier, ...).
        print(f"stormpath: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001
        print(f"stormpath: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK
