"""Command-line surface: reproducible runs producing JSON (+CSV/PNG) reports.

Subcommands map one-to-one onto library operations::

    gen           write a generated point configuration to a point file
    dist          bottleneck distance between two point files
    lattice-dist  displacement to the alpha-lattice
    lebesgue-dist certified distance to the uniform density
    shift-sweep   shift distances over a grid of translates (+figure)
    cesaro        shift-averaged measure diagnostics (+figure)
    bijection     optimal translate coupling as a permutation
    growth        distance growth over increasing windows (+CSV, figure)
    verify-chain  lattice vs Lebesgue constructive inequality

Exit status: 0 success, 1 validation error (bad flags, malformed files),
2 infeasibility (mass or count mismatch makes the transport impossible).
Reports are deterministic; ``--canonical`` omits the timestamp so repeated
runs are byte-identical.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional, Sequence

from .criterion import (
    SCHEMA_VERSION,
    cesaro_average,
    growth_analysis,
    lattice_displacement,
    lebesgue_distance,
    shift_bijection,
    shift_sweep,
    verify_chain,
    write_growth_csv,
)
from .errors import MassMismatchError, ValidationError
from .generators import GeneratorSpec, generate
from .geometry import PointConfiguration, Window, read_point_file, write_point_file
from .solver import bottleneck_distance


class _Parser(argparse.ArgumentParser):
    """Argparse that reports usage problems as validation errors (exit 1)."""

    def error(self, message):
        raise ValidationError(message)


def _parse_floats(text: str, what: str) -> tuple[float, ...]:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip() != "")
    except ValueError as exc:
        raise ValidationError(f"could not parse {what} {text!r}: {exc}") from exc


def _add_common(p: _Parser) -> None:
    p.add_argument("--window", default="0,8", metavar="LO,L",
                   help="window as 'lo,L': lower corner lo (all axes) and side L")
    p.add_argument("--dim", type=int, default=1, help="dimension d")
    p.add_argument("--boundary", choices=("torus", "free"), default="torus")
    p.add_argument("--out", default=None, help="output path (JSON report; stdout if omitted)")
    p.add_argument("--canonical", action="store_true",
                   help="omit the timestamp so reruns are byte-identical")
    p.add_argument("--no-fig", action="store_true", help="skip figure rendering")
    p.add_argument("--config", default=None,
                   help="JSON config file; its entries override the flags")


def _add_source(p: _Parser) -> None:
    p.add_argument("--points", default=None, help="input point file")
    p.add_argument("--kind", default=None,
                   help="generator kind (lattice|perturbed|poisson|fibonacci|density_defect)")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--intensity", type=float, default=1.0)
    p.add_argument("--densities", default="1,2", metavar="R1,R2")
    p.add_argument("--seed", type=int, default=0)


def _window_of(args) -> Window:
    pair = _parse_floats(args.window, "--window")
    if len(pair) != 2:
        raise ValidationError(f"--window expects 'lo,L', got {args.window!r}")
    lo, side = pair
    if args.dim < 1:
        raise ValidationError(f"--dim must be >= 1, got {args.dim}")
    return Window(args.dim, (lo,) * args.dim, side, args.boundary)


def _generator_spec(args, window: Window) -> GeneratorSpec:
    if args.kind is None:
        raise ValidationError("no input: give --points FILE or a generator --kind")
    return GeneratorSpec(kind=args.kind, window=window, alpha=args.alpha,
                         epsilon=args.epsilon, intensity=args.intensity,
                         densities=_parse_floats(args.densities, "--densities"),
                         seed=args.seed)


def _config_of(args) -> PointConfiguration:
    window = _window_of(args)
    if args.points is not None:
        return read_point_file(args.points, window)
    return generate(_generator_spec(args, window))


def _params_of(args) -> dict:
    skip = {"func", "out", "canonical", "no_fig", "config"}
    params = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or value is None:
            continue
        params[key] = list(value) if isinstance(value, tuple) else value
    return params


def _emit(args, report: dict, value: float, error_bound: float, t0: float,
          figures=()) -> None:
    payload = {
        "schema_version": SCHEMA_VERSION,
        "command": args.command,
        "params": _params_of(args),
        "report": report,
    }
    if not args.canonical:
        payload["timestamp"] = datetime.now(timezone.utc).isoformat()
    text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    wall = time.perf_counter() - t0
    if args.out:
        out = Path(args.out)
        out.write_text(text)
        stem = out.with_suffix("")
        if not args.no_fig:
            from . import plots
            for suffix, render in figures:
                plots.save_figure(render(), Path(f"{stem}{suffix}.png"))
        print(f"{args.command}: value={value:.12g} error_bound={error_bound:.12g} "
              f"wall={wall:.3f}s -> {out}")
    else:
        sys.stdout.write(text)
        print(f"{args.command}: value={value:.12g} error_bound={error_bound:.12g} "
              f"wall={wall:.3f}s", file=sys.stderr)


def _cmd_gen(args, t0: float) -> None:
    window = _window_of(args)
    config = generate(_generator_spec(args, window))
    if not args.out:
        raise ValidationError("gen requires --out POINTFILE")
    write_point_file(config, args.out)
    wall = time.perf_counter() - t0
    print(f"gen: wrote {len(config)} points wall={wall:.3f}s -> {args.out}")


def _cmd_dist(args, t0: float) -> None:
    window = _window_of(args)
    source = read_point_file(args.source, window)
    target = read_point_file(args.target, window)
    res = bottleneck_distance(source, target)
    _emit(args, res.to_dict(), res.value, res.error_bound, t0)


def _cmd_lattice_dist(args, t0: float) -> None:
    res = lattice_displacement(_config_of(args), args.alpha)
    _emit(args, res.to_dict(), res.value, res.error_bound, t0)


def _cmd_lebesgue_dist(args, t0: float) -> None:
    config = _config_of(args)
    res = lebesgue_distance(config, beta=args.beta, h=args.h, s=args.s)
    report = res.to_dict()
    report["beta"] = float(config.total_mass()) / config.window.volume()
    report["h"] = args.h
    report["s"] = args.s
    _emit(args, report, res.value, res.error_bound, t0)


def _cmd_shift_sweep(args, t0: float) -> None:
    config = _config_of(args)
    shifts = None
    if args.shifts is not None:
        shifts = [_parse_floats(z, "--shifts entry") for z in args.shifts.split(";") if z]
    report = shift_sweep(config, shifts=shifts, preset=args.shift_grid)
    def fig():
        from .plots import sweep_figure
        return sweep_figure(report)
    _emit(args, report.to_dict(), report.max_shift_distance, 0.0, t0,
          figures=[("", fig)])


def _cmd_cesaro(args, t0: float) -> None:
    config = _config_of(args)
    k = tuple(int(c) for c in _parse_floats(args.k, "--k")) if args.k else None
    report = cesaro_average(config, k=k, n=args.n, s=args.s)
    def fig():
        from .plots import cesaro_figure
        return cesaro_figure(report)
    _emit(args, report.to_dict(), report.distance.value, report.distance.error_bound,
          t0, figures=[("", fig)])


def _cmd_bijection(args, t0: float) -> None:
    config = _config_of(args)
    report = shift_bijection(config, _parse_floats(args.z, "--z"))
    _emit(args, report.to_dict(), report.max_displacement,
          report.distance.error_bound, t0)


def _cmd_growth(args, t0: float) -> None:
    window = _window_of(args)
    family = _generator_spec(args, window)
    sides = _parse_floats(args.sides, "--sides")
    betas = None if args.beta is None else args.beta
    report = growth_analysis(family, sides, route=args.route, betas=betas,
                             h=args.h, s=args.s, preset=args.shift_grid,
                             slope_threshold=args.slope_threshold,
                             ratio_threshold=args.ratio_threshold)
    def fig():
        from .plots import growth_figure
        return growth_figure(report)
    _emit(args, report.to_dict(), report.values[-1], report.error_bounds[-1], t0,
          figures=[("", fig)])
    if args.out:
        write_growth_csv(report, Path(args.out).with_suffix(".csv"))


def _cmd_verify_chain(args, t0: float) -> None:
    report = verify_chain(_config_of(args), args.alpha, s=args.s)
    _emit(args, report.to_dict(), report.lebesgue.value,
          report.lebesgue.error_bound, t0)


def build_parser() -> _Parser:
    parser = _Parser(prog="unispread",
                     description="Bottleneck-transport uniform-spread diagnostics")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a point configuration")
    _add_common(p)
    _add_source(p)
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("dist", help="bottleneck distance between two point files")
    _add_common(p)
    p.add_argument("source")
    p.add_argument("target")
    p.set_defaults(func=_cmd_dist)

    p = sub.add_parser("lattice-dist", help="displacement to the alpha-lattice")
    _add_common(p)
    _add_source(p)
    p.set_defaults(func=_cmd_lattice_dist)

    p = sub.add_parser("lebesgue-dist", help="certified distance to the uniform density")
    _add_common(p)
    _add_source(p)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--s", type=int, default=1)
    p.set_defaults(func=_cmd_lebesgue_dist)

    p = sub.add_parser("shift-sweep", help="shift distances over a grid of translates")
    _add_common(p)
    _add_source(p)
    p.add_argument("--shift-grid", default="coarse", choices=("coarse", "integers", "fine"))
    p.add_argument("--shifts", default=None,
                   help="explicit shifts 'z11,z12;z21,z22' (overrides --shift-grid)")
    p.set_defaults(func=_cmd_shift_sweep)

    p = sub.add_parser("cesaro", help="average over integer shifts |m-k|<=n")
    _add_common(p)
    _add_source(p)
    p.add_argument("--k", default=None, help="box center, e.g. '0,0'")
    p.add_argument("--n", type=int, default=1, help="averaging half-width")
    p.add_argument("--s", type=int, default=1)
    p.set_defaults(func=_cmd_cesaro)

    p = sub.add_parser("bijection", help="optimal translate coupling as a permutation")
    _add_common(p)
    _add_source(p)
    p.add_argument("--z", required=True, help="shift vector, e.g. '0.5,0'")
    p.set_defaults(func=_cmd_bijection)

    p = sub.add_parser("growth", help="distance growth over increasing windows")
    _add_common(p)
    _add_source(p)
    p.add_argument("--sides", default="8,16,32", help="window sides, e.g. '8,16,32'")
    p.add_argument("--route", default="lebesgue", choices=("lebesgue", "sweep"))
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--h", type=float, default=1.0)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--shift-grid", default="coarse", choices=("coarse", "integers", "fine"))
    p.add_argument("--slope-threshold", type=float, default=0.05)
    p.add_argument("--ratio-threshold", type=float, default=1.5)
    p.set_defaults(func=_cmd_growth)

    p = sub.add_parser("verify-chain", help="lattice vs Lebesgue constructive inequality")
    _add_common(p)
    _add_source(p)
    p.add_argument("--s", type=int, default=1)
    p.set_defaults(func=_cmd_verify_chain)

    return parser


def _apply_config(args) -> None:
    if not args.config:
        return
    path = Path(args.config)
    if not path.exists():
        raise ValidationError(f"config file {path} does not exist")
    try:
        overrides = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ValidationError(f"config file {path}: invalid JSON ({exc})") from exc
    if not isinstance(overrides, dict):
        raise ValidationError(f"config file {path}: expected a JSON object")
    known = set(vars(args))
    for key, value in overrides.items():
        dest = key.replace("-", "_")
        if dest not in known:
            raise ValidationError(f"config file {path}: unknown field {key!r}")
        setattr(args, dest, value)


def main(argv: Optional[Sequence[str]] = None) -> int:
    t0 = time.perf_counter()
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        _apply_config(args)
        args.func(args, t0)
        return 0
    except MassMismatchError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
