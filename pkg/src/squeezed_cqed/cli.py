"""Command-line front end: ``squeezed-cqed run|scan|compare|sweep-kappa1``."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from . import io
from .experiments import analytic_invalid_region, enhancement_scan, simulate
from .lindblad import IntegrationError
from .model import ModelError
from .presets import PRESET_NAMES, PresetError, resolve_preset

log = logging.getLogger("squeezed_cqed")

EXIT_USAGE = 2
EXIT_NUMERICS = 3


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _truncation(text: str) -> tuple[int, int]:
    try:
        n_a, n_c = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected n_a,n_c, got {text!r}")
    if n_a < 2 or n_c < 2:
        raise argparse.ArgumentTypeError("truncations must be >= 2")
    return n_a, n_c


def _outdir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_run(args) -> int:
    if (args.preset is None) == (args.config is None):
        raise PresetError("give exactly one of a preset name or --config FILE")
    preset = io.load_config(args.config) if args.config else resolve_preset(args.preset)
    if args.model:
        preset = preset.retarget(args.model)
    if args.rwa:
        if preset.model == "squeezed_full":
            preset = preset.retarget("squeezed_rotating")
        elif preset.model != "squeezed_rotating":
            raise PresetError(f"--rwa applies to the squeezed-frame models, not {preset.model}")
    if args.truncation:
        preset = preset.with_truncation(*args.truncation)
    if args.t_final is not None:
        preset = preset.with_integrator(t_final=args.t_final)
    if args.backend:
        preset = preset.with_integrator(backend=args.backend)

    out = _outdir(args.out)
    t0 = time.perf_counter()
    series = simulate(preset)
    wall = time.perf_counter() - t0
    io.write_series(out / "series.csv", series)
    io.write_json(out / "manifest.json", io.manifest(preset, series, wall))
    print(f"{preset.name}: model={preset.model} truncation={preset.truncation} "
          f"rows={len(series.times)} wall={wall:.2f}s -> {out}")
    return 0


def cmd_scan(args) -> int:
    out = _outdir(args.out)
    t0 = time.perf_counter()
    rows = enhancement_scan(args.family, args.rp, model=args.model)
    wall = time.perf_counter() - t0
    io.write_table(out / "scan.csv", ("r_p", "period", "ratio_numeric", "ratio_analytic", "flag"),
                   [(r.r_p, r.period, r.ratio_numeric, r.ratio_analytic, r.flagged) for r in rows])
    extra = {"scan": {"family": args.family, "rp_values": args.rp, "model": args.model}}
    if args.family == "fig2d":
        grid, ratios = analytic_invalid_region()
        below = grid[(ratios < 1.0) & (grid > 0)]
        extra["scan"]["invalid_region"] = [float(below.min()), float(below.max())] if below.size else None
        extra["scan"]["min_analytic_ratio"] = float(ratios.min())
    base = resolve_preset(args.family, model=args.model)
    io.write_json(out / "manifest.json", io.manifest(base, wall_time=wall, extra=extra))
    for r in rows:
        print(f"r_p={r.r_p:g} ratio_numeric={r.ratio_numeric:.6g} "
              f"ratio_analytic={r.ratio_analytic:.6g} {r.flagged}".rstrip())
    return 0


def cmd_compare(args) -> int:
    from .adiabatic import compare_full_vs_effective

    preset = resolve_preset(args.preset)
    out = _outdir(args.out)
    t0 = time.perf_counter()
    rep = compare_full_vs_effective(preset, tol=args.tol)
    wall = time.perf_counter() - t0
    io.write_series(out / "full.csv", rep.full)
    io.write_series(out / "effective.csv", rep.effective)
    extra = {"compare": {"max_abs_dev": rep.max_abs_dev, "tol": rep.tol, "passed": rep.passed,
                         "full_model": rep.full.stats.get("model"),
                         "effective_model": rep.effective.stats.get("model")}}
    io.write_json(out / "manifest.json", io.manifest(preset, wall_time=wall, extra=extra))
    devs = " ".join(f"max|d{k}|={v:.3g}" for k, v in rep.max_abs_dev.items())
    print(f"{preset.name}: {devs} tol={rep.tol:g} {'agree' if rep.passed else 'DISAGREE'}")
    return 0


def cmd_sweep(args) -> int:
    from .adiabatic import kappa1_breakdown_sweep

    out = _outdir(args.out)
    t0 = time.perf_counter()
    res = kappa1_breakdown_sweep(args.values, preset=args.preset, threshold=args.threshold,
                                 refine=args.refine)
    wall = time.perf_counter() - t0
    io.write_table(out / "sweep.csv", ("kappa1", "max_n_c_first_period"),
                   [(float(k), float(v)) for k, v in zip(res.kappa1, res.max_n_c)])
    extra = {"sweep": {"threshold": res.threshold, "crossing": res.crossing,
                       "kappa1": res.kappa1, "max_n_c": res.max_n_c}}
    io.write_json(out / "manifest.json",
                  io.manifest(resolve_preset(args.preset), wall_time=wall, extra=extra))
    for k, v in zip(res.kappa1, res.max_n_c):
        print(f"kappa1={k:g} max_n_c={v:.6g}")
    print("crossing: " + ("none in range" if res.crossing is None else f"{res.crossing:.6g}"))
    return 0


def build_parser() -> argparse.ArgumentParser:
    from .dynamics import MODELS

    ap = argparse.ArgumentParser(prog="squeezed-cqed", description=__doc__)
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="simulate one preset or config file")
    run.add_argument("preset", nargs="?", choices=PRESET_NAMES)
    run.add_argument("--config", help="JSON config (SystemParams fields, optional integrator/run)")
    run.add_argument("--out", required=True)
    run.add_argument("--rwa", action="store_true", help="drop counter-rotating terms")
    run.add_argument("--t-final", type=float)
    run.add_argument("--truncation", type=_truncation, help="n_a,n_c")
    run.add_argument("--model", choices=MODELS)
    run.add_argument("--backend", choices=("auto", "cython", "python"))
    run.set_defaults(func=cmd_run)

    scan = sub.add_parser("scan", help="period-ratio enhancement versus r_p")
    scan.add_argument("--family", required=True, choices=("fig2d", "fig3c"))
    scan.add_argument("--rp", required=True, type=_floats)
    scan.add_argument("--out", required=True)
    scan.add_argument("--model", choices=MODELS)
    scan.set_defaults(func=cmd_scan)

    cmp_ = sub.add_parser("compare", help="full versus eliminated-mode master equation")
    cmp_.add_argument("--preset", default="fig2c", choices=PRESET_NAMES)
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--tol", type=float, default=0.05)
    cmp_.set_defaults(func=cmd_compare)

    sw = sub.add_parser("sweep-kappa1", help="first-period max <c^+c> versus kappa1")
    sw.add_argument("--values", required=True, type=_floats)
    sw.add_argument("--out", required=True)
    sw.add_argument("--preset", default="fig4b", choices=PRESET_NAMES)
    sw.add_argument("--threshold", type=float, default=0.5)
    sw.add_argument("--refine", type=int, default=0)
    sw.set_defaults(func=cmd_sweep)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (PresetError, io.ConfigError, ModelError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except IntegrationError as exc:
        print(f"integration failed: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
