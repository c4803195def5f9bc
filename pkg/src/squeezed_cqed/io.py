"""Series tables, run manifests and JSON run configurations."""
from __future__ import annotations

import dataclasses
import json
import math
import platform
from pathlib import Path

import numpy as np

from . import __version__
from . import model as pm
from .lindblad import IntegratorConfig, TimeSeries

SERIES_COLUMNS = ("t", "P_e", "P_g", "n_as", "n_c", "n_a_lab")
DELIMITER = ","
SIGNIFICANT_DIGITS = 12

RUN_KEYS = ("name", "model", "truncation", "initial_state", "observables")


class ConfigError(ValueError):
    pass


def format_value(x: float) -> str:
    """Positional decimal text with 12 significant digits."""
    if not math.isfinite(x):
        return repr(float(x))
    return np.format_float_positional(float(x), precision=SIGNIFICANT_DIGITS, unique=False,
                                      fractional=False, trim="-")


def series_columns(series: TimeSeries) -> list[str]:
    return ["t"] + [c for c in SERIES_COLUMNS[1:] if c in series.traces]


def write_series(path, series: TimeSeries) -> Path:
    path = Path(path)
    cols = series_columns(series)
    data = [series.times] + [np.real(series.traces[c]) for c in cols[1:]]
    with path.open("w") as fh:
        fh.write(DELIMITER.join(cols) + "\n")
        for row in zip(*data):
            fh.write(DELIMITER.join(format_value(v) for v in row) + "\n")
    return path


def read_series(path) -> dict[str, np.ndarray]:
    path = Path(path)
    with path.open() as fh:
        header = fh.readline().strip().split(DELIMITER)
    data = np.loadtxt(path, delimiter=DELIMITER, skiprows=1, ndmin=2)
    return {name: data[:, i] for i, name in enumerate(header)}


def write_table(path, header, rows) -> Path:
    """Generic delimiter-separated table; floats use the series formatting."""
    path = Path(path)
    with path.open("w") as fh:
        fh.write(DELIMITER.join(header) + "\n")
        for row in rows:
            fh.write(DELIMITER.join(format_value(v) if isinstance(v, (float, np.floating)) else str(v)
                                    for v in row) + "\n")
    return path


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, complex):
        return {"re": x.real, "im": x.imag}
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, float) and not math.isfinite(x):
        return None
    return x


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n")
    return path


# -- run configuration -------------------------------------------------------

def preset_config(preset) -> dict:
    """Everything needed to rebuild ``preset`` exactly, in the config-file schema."""
    cfg = dict(preset.params.as_dict())
    cfg["integrator"] = dataclasses.asdict(preset.integrator)
    cfg["run"] = {"name": preset.name, "model": preset.model, "truncation": list(preset.truncation),
                  "initial_state": list(preset.initial_state), "observables": list(preset.observables)}
    return cfg


def _check_keys(section: str, given, allowed):
    unknown = sorted(set(given) - set(allowed))
    if unknown:
        raise ConfigError(f"unknown key(s) in {section}: {', '.join(unknown)}; "
                          f"allowed: {', '.join(sorted(allowed))}")


def parse_config(cfg: dict):
    """Build an ExperimentPreset from a config mapping; unknown keys are errors.

    Top-level keys are SystemParams fields plus the optional sections
    ``integrator`` (IntegratorConfig fields) and ``run`` (model, truncation,
    initial_state, observables, name).
    """
    from .dynamics import MODELS
    from .presets import ExperimentPreset, default_truncation

    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    fields = pm.SystemParams.field_names()
    _check_keys("config", cfg, tuple(fields) + ("integrator", "run"))
    try:
        params = pm.SystemParams(**{k: float(v) for k, v in cfg.items() if k in fields})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad parameter value: {exc}") from exc

    integ = cfg.get("integrator", {})
    _check_keys("integrator", integ, [f.name for f in dataclasses.fields(IntegratorConfig)])
    try:
        integrator = IntegratorConfig(**integ)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad integrator setting: {exc}") from exc

    run = cfg.get("run", {})
    _check_keys("run", run, RUN_KEYS)
    model = run.get("model", "squeezed_rotating")
    if model not in MODELS:
        raise ConfigError(f"unknown model {model!r}; expected one of {MODELS}")
    trunc = tuple(int(v) for v in run["truncation"]) if "truncation" in run \
        else default_truncation(model, params)
    init = tuple(run.get("initial_state", ("e", 0, 0)))
    observables = tuple(run.get("observables", ("P_e", "P_g", "n_c")))
    return ExperimentPreset(run.get("name", "custom"), "custom", params, init, observables, model,
                            integrator, trunc, "P_e", math.nan, math.nan)


def load_config(path):
    """Read a JSON config (or a run manifest, whose ``config`` entry is used)."""
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    if isinstance(cfg, dict) and "manifest_version" in cfg:
        cfg = cfg["config"]
    return parse_config(cfg)


# -- manifest ----------------------------------------------------------------

MANIFEST_VERSION = 1


def manifest(preset, series: TimeSeries | None = None, wall_time: float | None = None,
             extra: dict | None = None) -> dict:
    """Deterministic resolution record, plus run statistics when ``series`` is given."""
    p = preset.params
    n_s, m_s = pm.reservoir_stats(p.r_p, p.theta_p, p.r_e, p.theta_e)
    out = {
        "manifest_version": MANIFEST_VERSION,
        "preset": preset.name,
        "code_version": __version__,
        "config": preset_config(preset),
        "derived": {"delta_s": p.delta_s, "omega_p": p.omega_p, "N_s": n_s, "M_s": m_s,
                    "analytic_period": preset.analytic_period},
    }
    if series is not None:
        stats = dict(series.stats)
        out["run"] = {
            "wall_time": wall_time if wall_time is not None else stats.get("wall_time"),
            "rows": int(len(series.times)),
            "columns": series_columns(series),
            "stats": stats,
            "platform": {"python": platform.python_version(), "numpy": np.__version__},
        }
    if extra:
        out.update(extra)
    return _jsonable(out)
