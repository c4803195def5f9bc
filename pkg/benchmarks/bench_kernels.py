"""Compiled versus pure-Python stepping kernels on preset workloads.

    python benchmarks/bench_kernels.py [--repeat 3] [--method rk45_adaptive|rk4_fixed]

Both backends integrate the same generator; the table reports the best wall
time of ``--repeat`` runs, the speed-up, and the largest trace difference.
"""
import argparse
import time
import warnings

import numpy as np

from squeezed_cqed import _backend
from squeezed_cqed.experiments import simulate
from squeezed_cqed.presets import resolve_preset

CASES = [
    # (preset, truncation, t_final)
    ("fig2c", (2, 3), 2.0),
    ("fig2c", (4, 5), 2.0),
    ("fig4b", (4, 5), 10.0),
    ("fig3a", (3, 3), 0.3),
]


def run(preset, backend, repeat):
    best, series = np.inf, None
    for _ in range(repeat):
        p = preset.with_integrator(backend=backend)
        t0 = time.perf_counter()
        series = simulate(p)
        best = min(best, time.perf_counter() - t0)
    return best, series


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--method", default="rk45_adaptive", choices=("rk45_adaptive", "rk4_fixed"))
    args = ap.parse_args(argv)
    if _backend.BACKEND != "cython":
        raise SystemExit("compiled kernel not available; build with `pip install -e . --no-build-isolation`")

    print(f"{'case':<22}{'dim':>6}{'steps':>9}{'cython s':>11}{'python s':>11}{'speed-up':>10}{'max diff':>11}")
    for name, trunc, t_final in CASES:
        preset = resolve_preset(name, truncation=trunc, t_final=t_final, method=args.method)
        if args.method == "rk4_fixed":
            preset = preset.with_integrator(dt=preset.integrator.dt / 200)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            t_c, s_c = run(preset, "cython", args.repeat)
            t_p, s_p = run(preset, "python", args.repeat)
        diff = max(float(np.max(np.abs(s_c[k] - s_p[k]))) for k in s_c.traces)
        dim = 2 * (trunc[0] * trunc[1] if preset.model in ("squeezed_full", "squeezed_rotating",
                                                            "lab_full") else trunc[1])
        steps = s_c.stats["n_accepted"] + s_c.stats["n_rejected"]
        label = f"{name} {preset.model[:12]}"
        print(f"{label:<22}{dim:>6}{steps:>9}{t_c:>11.3f}{t_p:>11.3f}{t_p / t_c:>10.1f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
