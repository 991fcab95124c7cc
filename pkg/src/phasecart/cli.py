"""Command-line front end.

    phasecart [--config cfg.json] trace --path path.json --steps 100 --out t.csv
    phasecart scan --rect -200 200 -200 200 --grid 128 --out s.json
    phasecart figure1 --out figs/
    phasecart reversal --via A --out r.csv
    phasecart dbeta --mode realistic_guide --range -40 40 --steps 80 --out d.csv
    phasecart spin-scan --n 3 --out s3.csv
    phasecart optics --rotation 45 --out o.json

Exit codes: 0 ok, 2 path hits a singularity, 3 bad config/arguments,
4 internal consistency failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import cartographer, phase, scenarios
from .apparatus import DEFAULT_CONFIG, NAMED_POINTS, ApparatusConfig, Mode
from .errors import ConfigError, ConsistencyError, SingularPathError

EXIT_OK = 0
EXIT_SINGULAR = 2
EXIT_CONFIG = 3
EXIT_CONSISTENCY = 4

TRACE_HEADER = ["step", "arclength", "b1y", "b2y", "re_c", "im_c", "contrast", "phase_deg"]


def fmt(x) -> str:
    return f"{float(x) + 0.0:.12g}"


def _round12(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        return float(fmt(obj))
    if isinstance(obj, dict):
        return {k: _round12(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round12(v) for v in obj]
    return obj


def write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(_round12(obj), f, indent=2, sort_keys=False)
        f.write("\n")


def write_csv(path: Path, header, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])


def write_trace_csv(path: Path, trace: phase.PhaseTrace) -> None:
    write_csv(
        path,
        TRACE_HEADER,
        (
            (s.step, s.arclength, s.point.b1y, s.point.b2y, s.c.real, s.c.imag, s.contrast, s.phase_unwrapped_deg)
            for s in trace.samples
        ),
    )


def _summary_path(out: Path) -> Path:
    return out.with_suffix(".json")


def _meta(config: ApparatusConfig) -> dict:
    return {"sign_convention": phase.SIGN_CONVENTION, "config": config.to_dict()}


def _point(text: str):
    if text in NAMED_POINTS:
        return NAMED_POINTS[text]
    try:
        b1, b2 = (float(v) for v in text.split(","))
    except ValueError:
        raise ConfigError(f"bad point {text!r}: use a name ({', '.join(NAMED_POINTS)}) or 'b1y,b2y'") from None
    return (b1, b2)


def _load_path(file: Path, steps: int | None) -> phase.ParameterPath:
    try:
        data = json.loads(Path(file).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read path file: {exc}") from None
    if isinstance(data, list):
        data = {"vertices": data}
    if not isinstance(data, dict) or "vertices" not in data:
        raise ConfigError("path file needs a 'vertices' list")
    verts = [NAMED_POINTS[v] if isinstance(v, str) and v in NAMED_POINTS else v for v in data["vertices"]]
    try:
        verts = [tuple(float(x) for x in v) for v in verts]
    except (TypeError, ValueError):
        raise ConfigError("vertices must be [b1y, b2y] pairs or point names") from None
    n = steps if steps is not None else data.get("steps_per_segment", 100)
    return phase.ParameterPath(tuple(verts), n, bool(data.get("closed", False)))


# ---------------------------------------------------------------------------
# subcommands


def cmd_trace(args, config) -> str:
    path = _load_path(args.path, args.steps)
    out = Path(args.out)
    if path.closed:
        w = phase.winding_number(path, config)
    trace = phase.trace_path(path, config)
    write_trace_csv(out, trace)
    write_json(_summary_path(out), {**trace.to_dict(), **_meta(config)})
    extra = f" winding={w}" if path.closed else ""
    return f"trace: {len(trace.samples)} samples, total_phase_deg={fmt(trace.total_phase_deg)}{extra}"


def cmd_scan(args, config) -> str:
    zeros = cartographer.find_singularities(args.rect, args.grid, config)
    write_json(Path(args.out), [z.to_dict() for z in zeros])
    charges = " ".join(f"({fmt(z.location.b1y)},{fmt(z.location.b2y)}):{z.charge:+d}" for z in zeros)
    return f"scan: {len(zeros)} singularities {charges}".rstrip()


def cmd_figure1(args, config) -> str:
    outdir = Path(args.out)
    traces = scenarios.run_figure1(config, args.steps)
    for name, trace in traces.items():
        write_trace_csv(outdir / f"{name}.csv", trace)
    totals = {name: t.total_phase_deg for name, t in traces.items()}
    split = totals["IAF"] - totals["IBF"]
    write_json(
        outdir / "summary.json",
        {
            "totals_deg": totals,
            "min_contrast": {name: t.min_contrast for name, t in traces.items()},
            "iaf_minus_ibf_deg": split,
            **_meta(config),
        },
    )
    return "figure1: " + " ".join(f"{k}={fmt(v)}" for k, v in totals.items()) + f" split={fmt(split)}"


def cmd_reversal(args, config) -> str:
    vias = [_point(v) for v in args.via]
    trace = scenarios.run_field_reversal(vias, config, args.steps)
    out = Path(args.out)
    write_trace_csv(out, trace)
    write_json(_summary_path(out), {**trace.to_dict(), **_meta(config)})
    return f"reversal: total_phase_deg={fmt(trace.total_phase_deg)}"


def _write_dbeta(out: Path, rows, config, extra) -> None:
    write_csv(out, ["delta_beta_deg", "total_deg", "dynamical_deg", "geometric_deg", "linear_deg"], rows)
    write_json(_summary_path(out), {**extra, "rows": len(rows), **_meta(config)})


def cmd_dbeta(args, config) -> str:
    rows = scenarios.run_dbeta_scan(args.mode, Fraction(args.j).limit_denominator(2), args.range, args.steps, config)
    worst = max(abs(r.total_deg - r.linear_deg) for r in rows)
    _write_dbeta(
        Path(args.out),
        rows,
        config,
        {"mode": Mode(args.mode).value, "j": args.j, "max_deviation_from_linear_deg": worst},
    )
    return f"dbeta: {len(rows)} rows, max deviation from linear {fmt(worst)} deg"


def cmd_spin_scan(args, config) -> str:
    rows = scenarios.run_spin_scan(args.n, args.range, args.steps, config=config)
    out = Path(args.out)
    write_csv(out, ["delta_beta_deg", "phase_deg", "linear_deg"], rows)
    ends = (rows[0].phase_deg, rows[-1].phase_deg)
    write_json(_summary_path(out), {"n": args.n, "endpoint_phases_deg": list(ends), **_meta(config)})
    return f"spin-scan: n={args.n} endpoints {fmt(ends[0])} .. {fmt(ends[1])} deg"


def cmd_optics(args, config) -> str:
    res = scenarios.run_optics_hwp(args.rotation, args.steps)
    out = Path(args.out)
    write_json(
        out,
        {
            "rotation_deg": res.rotation_deg,
            "phase_deg": res.phase_deg,
            "operator_sign": res.operator_sign,
            "trace": [list(p) for p in res.trace],
        },
    )
    return f"optics: phase_deg={fmt(res.phase_deg)} operator_sign={res.operator_sign}"


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="phasecart", description="Pancharatnam phase maps of a dual spin-flipper interferometer.")
    p.add_argument("--config", type=Path, help="JSON file overriding apparatus defaults")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("trace", help="trace the unwrapped phase along a polyline")
    s.add_argument("--path", type=Path, required=True)
    s.add_argument("--steps", type=int)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("scan", help="locate singularities in a rectangle")
    s.add_argument("--rect", type=float, nargs=4, required=True, metavar=("B1MIN", "B1MAX", "B2MIN", "B2MAX"))
    s.add_argument("--grid", type=int, default=128)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_scan)

    s = sub.add_parser("figure1", help="the three I->F reversal paths")
    s.add_argument("--out", required=True)
    s.add_argument("--steps", type=int, default=100)
    s.set_defaults(func=cmd_figure1)

    s = sub.add_parser("reversal", help="field reversal I -> via... -> F")
    s.add_argument("--via", action="append", required=True, help="point name or 'b1y,b2y'; repeatable")
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_reversal)

    s = sub.add_parser("dbeta", help="phase versus flipper rotation")
    s.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.IDEAL_TRANSVERSE.value)
    s.add_argument("--j", type=float, default=0.5)
    s.add_argument("--range", type=float, nargs=2, default=(-40.0, 40.0), metavar=("LO", "HI"))
    s.add_argument("--steps", type=int, default=80)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_dbeta)

    s = sub.add_parser("spin-scan", help="spin-n/2 phase versus flipper rotation")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--range", type=float, nargs=2, default=(-180.0, 180.0), metavar=("LO", "HI"))
    s.add_argument("--steps", type=int, default=360)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_spin_scan)

    s = sub.add_parser("optics", help="half-wave plate pair analogue")
    s.add_argument("--rotation", type=float, default=45.0)
    s.add_argument("--steps", type=int, default=100)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_optics)
    return p


def _load_config(file: Path | None) -> ApparatusConfig:
    if file is None:
        return DEFAULT_CONFIG
    try:
        text = Path(file).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return ApparatusConfig.from_json(text)


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = _load_config(args.config)
        print(args.func(args, config))
    except SingularPathError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except ConsistencyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONSISTENCY
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
