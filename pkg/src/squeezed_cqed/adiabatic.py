"""Adiabatic elimination of the squeezed primary-cavity mode.

Splits the squeezed-frame interaction into rotating / counter-rotating
channels, builds the stationary Heisenberg-Langevin solutions for a_s and
the resulting reduced master equation on (atom, c).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import model as pm
from .lindblad import DissipatorSpec, master_rhs, standard
from .operators import HilbertSpace, Operator


@dataclass(frozen=True)
class EliminationParams:
    delta_r: float
    delta_cr: float
    rate_r: float
    rate_cr: float


def effective_rate(kappa1: float, detuning: float) -> float:
    """kappa1 / (detuning^2 + (kappa1/2)^2); zero when both vanish."""
    denom = detuning ** 2 + 0.25 * kappa1 ** 2
    return 0.0 if denom == 0 else kappa1 / denom


def channel_detuning(params: pm.SystemParams) -> float:
    """Common atom/hopping frequency used for both elimination channels.

    The two coincide in the near-resonant regime; otherwise they are
    averaged with a warning.
    """
    dq, dc = params.delta_q, params.delta_c
    dr = dq - params.delta_s
    if abs(dq - dc) > 1e-6 * max(abs(dr), 1e-300):
        warnings.warn(f"Delta_q and Delta_c differ by {abs(dq - dc):.3g}; using their mean "
                      "for the elimination channels", stacklevel=3)
        return 0.5 * (dq + dc)
    return dq


def elimination_params(params: pm.SystemParams, delta_r=None, delta_cr=None) -> EliminationParams:
    if delta_r is None or delta_cr is None:
        w = channel_detuning(params)
        delta_r = w - params.delta_s if delta_r is None else delta_r
        delta_cr = w + params.delta_s if delta_cr is None else delta_cr
    k1 = params.kappa1
    return EliminationParams(delta_r, delta_cr, effective_rate(k1, delta_r), effective_rate(k1, delta_cr))


def collapse_operators(params: pm.SystemParams, space: HilbertSpace):
    """(g cosh sigma- + J cosh c,  g sinh sigma+ + J sinh c^+) on (atom, c)."""
    o = pm.ModeOps(space)
    ch, sh = math.cosh(params.r_p), math.sinh(params.r_p)
    op_r = (params.g * ch) * o.sm + (params.J * ch) * o.c
    op_cr = (params.g * sh) * o.sp + (params.J * sh) * o.c.dag()
    return op_r, op_cr


def split_hamiltonian(params: pm.SystemParams, space: HilbertSpace):
    """Interaction-picture rotating and counter-rotating parts as (freq, Operator) lists."""
    if params.theta_p != 0.0:
        raise pm.UnsupportedPhaseError("channel split assumes theta_p = 0")
    o = pm.ModeOps(space)
    a, c = o.a, o.c
    ch, sh = math.cosh(params.r_p), math.sinh(params.r_p)
    ds, dq, dc = params.delta_s, params.delta_q, params.delta_c

    def with_hc(coef, op, w):
        return [(w, coef * op), (-w, np.conj(coef) * op.dag())]

    h_r = (with_hc(params.g * ch, a @ o.sp, dq - ds)
           + with_hc(params.J * ch, a @ c.dag(), dc - ds))
    h_cr = (with_hc(params.g * sh, a.dag() @ o.sp, dq + ds)
            + with_hc(params.J * sh, a.dag() @ c.dag(), dc + ds))
    return h_r, h_cr


def rotated_h_r(params: pm.SystemParams, space: HilbertSpace) -> Operator:
    """Static rotating-channel Hamiltonian with the a_s mode detuned by -Delta_r."""
    o = pm.ModeOps(space)
    a, c = o.a, o.c
    ch = math.cosh(params.r_p)
    dr = channel_detuning(params) - params.delta_s
    return ((params.g * ch) * (a @ o.sp + o.sm @ a.dag())
            + (params.J * ch) * (a @ c.dag() + c @ a.dag())
            - dr * (a.dag() @ a))


def rotated_h_cr(params: pm.SystemParams, space: HilbertSpace) -> Operator:
    o = pm.ModeOps(space)
    a, c = o.a, o.c
    sh = math.sinh(params.r_p)
    dcr = channel_detuning(params) + params.delta_s
    return ((params.g * sh) * (a.dag() @ o.sp + o.sm @ a)
            + (params.J * sh) * (a.dag() @ c.dag() + c @ a)
            + dcr * (a.dag() @ a))


@dataclass(frozen=True)
class LangevinSolution:
    """a_s = (c_sigma * S + c_c * C) / denominator, with S, C = (sigma-, c) for the
    rotating channel and (sigma+, c^+) for the counter channel."""

    channel: str
    c_sigma: float
    c_c: float
    denominator: complex

    def operator(self, space: HilbertSpace) -> Operator:
        o = pm.ModeOps(space)
        if self.channel == "rotating":
            s, cc = o.sm, o.c
        else:
            s, cc = o.sp, o.c.dag()
        return (self.c_sigma * s + self.c_c * cc) / self.denominator


def langevin_effective_operator(channel: str, params: pm.SystemParams) -> LangevinSolution:
    ch, sh = math.cosh(params.r_p), math.sinh(params.r_p)
    w = channel_detuning(params)
    if channel == "rotating":
        den = complex(w - params.delta_s, 0.5 * params.kappa1)
        coeffs = (params.g * ch, params.J * ch)
    elif channel == "counter":
        den = complex(-(w + params.delta_s), 0.5 * params.kappa1)
        coeffs = (params.g * sh, params.J * sh)
    else:
        raise ValueError(f"channel must be 'rotating' or 'counter', got {channel!r}")
    if abs(den) == 0.0:
        raise pm.DegenerateDetuningError(f"{channel} channel denominator vanishes")
    return LangevinSolution(channel, coeffs[0], coeffs[1], den)


def langevin_residual(sol: LangevinSolution, params: pm.SystemParams, convention: str = "standard"):
    """Coefficients (on sigma, c) of da_s/dt evaluated at the stationary solution.

    ``standard``: da/dt = i[H, a] - (kappa1/2) a.  ``doubled``: the same
    equation multiplied by two, i.e. 2i(...) - kappa1 a.
    """
    w = channel_detuning(params)
    # i[H, a] = i(-X + d a) with d = +Delta_r (rotating) or -Delta_cr (counter)
    d = (w - params.delta_s) if sol.channel == "rotating" else -(w + params.delta_s)
    x = np.array([sol.c_sigma, sol.c_c], dtype=complex)
    a = x / sol.denominator
    res = 1j * (-x + d * a) - 0.5 * params.kappa1 * a
    if convention == "doubled":
        res = 2.0 * res
    elif convention != "standard":
        raise ValueError(convention)
    return res


class EffectiveGenerator:
    """Reduced master equation on (atom, c) after eliminating a_s."""

    def __init__(self, params: pm.SystemParams, space: HilbertSpace, delta_r=None, delta_cr=None):
        from .dynamics import effective_dissipators

        self.params = params
        self.space = space
        self.elimination = elimination_params(params, delta_r, delta_cr)
        self.hamiltonian = pm.h_eff_1(params, space, frame="static")
        self.dissipators: list[DissipatorSpec] = effective_dissipators(
            params, pm.ModeOps(space), delta_r, delta_cr)

    def __call__(self, rho, t: float = 0.0) -> np.ndarray:
        return master_rhs(self.hamiltonian, self.dissipators, rho, t)


def effective_master_rhs(params: pm.SystemParams, reduced_space: HilbertSpace,
                         delta_r=None, delta_cr=None) -> EffectiveGenerator:
    if reduced_space.n_factors != 2:
        raise ValueError("effective master equation acts on the (atom, c) space")
    return EffectiveGenerator(params, reduced_space, delta_r, delta_cr)


# -- comparison harness and kappa1 sweep ------------------------------------

@dataclass
class ComparisonReport:
    max_abs_dev: dict
    passed: bool
    tol: float
    full: object
    effective: object


def compare_full_vs_effective(preset, tol: float = 0.05, full_model: str = "squeezed_rotating",
                              delta_r=None, delta_cr=None) -> ComparisonReport:
    """Run the full and the eliminated model on the same grid and compare P_e, n_c."""
    from .experiments import simulate

    full = simulate(preset, model=full_model)
    eff = simulate(preset, model="effective_appendix", delta_r=delta_r, delta_cr=delta_cr)
    dev = {}
    for name in ("P_e", "n_c"):
        dev[name] = float(np.max(np.abs(full.traces[name] - eff.traces[name])))
    return ComparisonReport(dev, all(v < tol for v in dev.values()), tol, full, eff)


@dataclass
class SweepResult:
    kappa1: np.ndarray
    max_n_c: np.ndarray
    crossing: float | None
    threshold: float


def crossing_below(xs, ys, level: float):
    """First x where ys drops below ``level`` by linear interpolation (None if never)."""
    xs, ys = np.asarray(xs, float), np.asarray(ys, float)
    for i in range(1, len(xs)):
        if ys[i - 1] >= level > ys[i]:
            return float(xs[i - 1] + (level - ys[i - 1]) * (xs[i] - xs[i - 1]) / (ys[i] - ys[i - 1]))
    return None


def kappa1_breakdown_sweep(kappa1_values, preset="fig4b", threshold: float = 0.5,
                           refine: int = 0) -> SweepResult:
    """First-period maximum of <c^+c> under the effective master equation per kappa1.

    ``refine`` adds bisection-style points around the first crossing.
    """
    from .experiments import simulate
    from .presets import resolve_preset

    base = resolve_preset(preset) if isinstance(preset, str) else preset

    def first_period_max(k1):
        p = base.with_params(kappa1=float(k1))
        series = simulate(p, model="effective_appendix")
        return float(np.max(series.traces["n_c"]))

    ks = sorted(float(k) for k in kappa1_values)
    vals = [first_period_max(k) for k in ks]
    for _ in range(refine):
        cross = crossing_below(ks, vals, threshold)
        if cross is None:
            break
        i = next(i for i in range(1, len(ks)) if vals[i - 1] >= threshold > vals[i])
        mid = 0.5 * (ks[i - 1] + ks[i])
        ks.insert(i, mid)
        vals.insert(i, first_period_max(mid))
    return SweepResult(np.array(ks), np.array(vals), crossing_below(ks, vals, threshold), threshold)
