"""CSV, JSON and SVG output. Every emitter is byte-deterministic."""

from __future__ import annotations

import json
from dataclasses import asdict
from xml.sax.saxutils import escape

from . import __version__
from .config import format_config, parse_config, spec_values
from .experiment import CurveFeatures, SweepResult
from .optimize import OptimumReport
from .precip import Direction

CSV_HEADER = "multiplier,speed,speed_x_wind,speed_x_fall,mean_hits,std_hits"


def _g6(value: float | None) -> str:
    if value is None:
        return ""
    text = f"{value:.6g}"
    return "0" if text == "-0" else text


def emit_csv(sweep: SweepResult) -> str:
    lines = [CSV_HEADER]
    for j, speed, xw, xf, m, s in zip(
        sweep.multipliers,
        sweep.speeds,
        sweep.speed_x_wind(),
        sweep.speed_x_fall(),
        sweep.mean_hits,
        sweep.std_hits,
    ):
        lines.append(",".join([str(j), _g6(speed), _g6(xw), _g6(xf), _g6(m), _g6(s)]))
    return "\n".join(lines) + "\n"


def _jsonable_spec(sweep: SweepResult) -> dict:
    values = spec_values(sweep.spec)
    values["direction"] = values["direction"].value
    return values


def sweep_to_dict(sweep: SweepResult) -> dict:
    return {
        "kind": "sweep",
        "version": __version__,
        "spec": _jsonable_spec(sweep),
        "config": format_config(sweep.spec),
        "multipliers": list(sweep.multipliers),
        "speeds": list(sweep.speeds),
        "speed_x_wind": sweep.speed_x_wind(),
        "speed_x_fall": sweep.speed_x_fall(),
        "mean_hits": list(sweep.mean_hits),
        "std_hits": list(sweep.std_hits),
        "raw_totals": [list(row) for row in sweep.raw_totals],
        "features": asdict(sweep.features) if sweep.features is not None else None,
    }


def report_to_dict(report: OptimumReport) -> dict:
    return {
        "kind": "optimum",
        "version": __version__,
        "best_speed": report.best_speed,
        "best_mean_hits": report.best_mean_hits,
        "bracket": list(report.bracket),
        "evaluations": report.evaluations,
        "significant": report.significant,
        "levels": [[list(p) for p in level] for level in report.levels],
    }


def emit_json(obj: SweepResult | OptimumReport) -> str:
    if isinstance(obj, SweepResult):
        doc = sweep_to_dict(obj)
    elif isinstance(obj, OptimumReport):
        doc = report_to_dict(obj)
    else:
        raise TypeError(f"cannot emit {type(obj).__name__} as JSON")
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def sweep_from_json(text: str) -> SweepResult:
    doc = json.loads(text)
    if doc.get("kind") != "sweep":
        raise ValueError("document is not a sweep result")
    feats = doc.get("features")
    return SweepResult(
        spec=parse_config(doc["config"]),
        multipliers=tuple(doc["multipliers"]),
        speeds=tuple(doc["speeds"]),
        mean_hits=tuple(doc["mean_hits"]),
        std_hits=tuple(doc["std_hits"]),
        raw_totals=tuple(tuple(row) for row in doc["raw_totals"]),
        features=CurveFeatures(**feats) if feats is not None else None,
    )


# Plot geometry in SVG user units.
_W, _H = 640, 420
_LEFT, _RIGHT, _TOP, _BOTTOM = 70, 20, 60, 60


def _f(v: float) -> str:
    return f"{v:.2f}"


def _nice_ceiling(v: float) -> float:
    if v <= 0:
        return 1.0
    mag = 10 ** len(str(int(v))) / 10
    for step in (1, 2, 2.5, 5, 10):
        if step * mag >= v:
            return step * mag
    return 10 * mag


def emit_svg(sweep: SweepResult, title: str | None = None) -> str:
    """Mean hits with +-1 std error bars against the speed multiplier."""
    n = sweep.trials
    if n < 1:
        raise ValueError("cannot plot an empty sweep")
    cfg = sweep.spec.base_cfg
    plot_w = _W - _LEFT - _RIGHT
    plot_h = _H - _TOP - _BOTTOM
    ymax = _nice_ceiling(max(m + s for m, s in zip(sweep.mean_hits, sweep.std_hits)) * 1.05)

    def px(j: float) -> float:
        return _LEFT + plot_w * j / (n + 1)

    def py(v: float) -> float:
        return _TOP + plot_h * (1.0 - v / ymax)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}" font-family="sans-serif" font-size="11">',
        f'<rect x="0" y="0" width="{_W}" height="{_H}" fill="white"/>',
    ]
    if title:
        out.append(f'<title>{escape(title)}</title>')
    x0, x1, y0, y1 = _LEFT, _W - _RIGHT, _TOP, _H - _BOTTOM

    # Left axis.
    out.append('<g id="axis-left" stroke="black">')
    out.append(f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}"/>')
    for i in range(6):
        v = ymax * i / 5
        out.append(f'<line x1="{x0 - 4}" y1="{_f(py(v))}" x2="{x0}" y2="{_f(py(v))}"/>')
        out.append(
            f'<text x="{x0 - 6}" y="{_f(py(v) + 4)}" text-anchor="end" stroke="none">{v:g}</text>'
        )
    out.append(
        f'<text x="18" y="{_f((y0 + y1) / 2)}" text-anchor="middle" stroke="none" '
        f'transform="rotate(-90 18 {_f((y0 + y1) / 2)})"># of hits</text>'
    )
    out.append("</g>")

    # Bottom axis: multiples of the fall speed.
    step_fall = sweep.spec.base_speed / cfg.fall_speed
    out.append('<g id="axis-bottom" stroke="black">')
    out.append(f'<line x1="{x0}" y1="{y1}" x2="{x1}" y2="{y1}"/>')
    for j, xf in zip(sweep.multipliers, sweep.speed_x_fall()):
        out.append(f'<line x1="{_f(px(j))}" y1="{y1}" x2="{_f(px(j))}" y2="{y1 + 4}"/>')
        out.append(
            f'<text x="{_f(px(j))}" y="{y1 + 16}" text-anchor="middle" stroke="none">{xf:.3g}</text>'
        )
    out.append(
        f'<text x="{_f((x0 + x1) / 2)}" y="{_H - 14}" text-anchor="middle" stroke="none">'
        f"Multiples of speed of fall (step {step_fall:.3g}X)</text>"
    )
    out.append("</g>")

    # Top axis: multiples of the wind speed.
    if cfg.wind_speed > 0:
        step_wind = sweep.spec.base_speed / cfg.wind_speed
        sense = "with" if cfg.direction is Direction.WITH_WIND else "against"
        out.append('<g id="axis-top" stroke="black">')
        out.append(f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}"/>')
        for j, xw in zip(sweep.multipliers, sweep.speed_x_wind()):
            out.append(f'<line x1="{_f(px(j))}" y1="{y0 - 4}" x2="{_f(px(j))}" y2="{y0}"/>')
            out.append(
                f'<text x="{_f(px(j))}" y="{y0 - 8}" text-anchor="middle" stroke="none">{xw:.3g}</text>'
            )
        out.append(
            f'<text x="{_f((x0 + x1) / 2)}" y="{y0 - 26}" text-anchor="middle" stroke="none">'
            f"Multiples of speed of wind (step {step_wind:.3g}X, moving {sense} the wind)</text>"
        )
        out.append("</g>")

    out.append('<g id="error-bars" stroke="black" stroke-width="1">')
    for j, m, s in zip(sweep.multipliers, sweep.mean_hits, sweep.std_hits):
        x = _f(px(j))
        out.append(
            f'<line class="error-bar" x1="{x}" y1="{_f(py(m - s))}" x2="{x}" y2="{_f(py(m + s))}"/>'
        )
    out.append("</g>")
    out.append('<g id="markers" fill="black">')
    for j, m in zip(sweep.multipliers, sweep.mean_hits):
        out.append(f'<circle class="marker" cx="{_f(px(j))}" cy="{_f(py(m))}" r="3"/>')
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"
