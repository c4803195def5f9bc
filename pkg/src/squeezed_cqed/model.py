"""Closed-form relations and Hamiltonians of the squeezed coupled-cavity model.

Frequencies are in units of the atom-cavity coupling ``g`` (so ``g = 1``
by default) and times in units of ``1/g``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, fields, replace

import numpy as np

from .operators import (HilbertSpace, Operator, atom_op, embed, fock_destroy,
                        identity)

ATOM, MODE_A, MODE_C = 0, 1, 2

# relative scale below which a detuning denominator counts as zero
DEGENERATE_RTOL = 1e-9


class ModelError(ValueError):
    pass


class AboveThresholdError(ModelError):
    """Pump amplitude at or above the parametric threshold |Omega_p| >= |Delta_a|."""


class DegenerateDetuningError(ModelError):
    pass


class NoResonanceError(ModelError):
    pass


class UnsupportedPhaseError(ModelError):
    pass


@dataclass(frozen=True)
class SystemParams:
    g: float = 1.0
    J: float = 2.0
    kappa1: float = 0.0
    kappa2: float = 0.0
    gamma: float = 0.0
    r_p: float = 0.0
    theta_p: float = 0.0
    r_e: float = 0.0
    theta_e: float = 0.0
    delta_a: float = 0.0
    delta_c: float = 0.0
    delta_q: float = 0.0

    def __post_init__(self):
        for name in ("kappa1", "kappa2", "gamma", "r_p", "r_e"):
            if getattr(self, name) < 0:
                raise ModelError(f"{name} must be >= 0, got {getattr(self, name)}")

    @property
    def delta_s(self) -> float:
        return squeezed_detuning(self.delta_a, self.r_p)

    @property
    def omega_p(self) -> float:
        return pump_from_squeeze(self.r_p, self.delta_a)

    def replace(self, **changes) -> "SystemParams":
        return replace(self, **changes)

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


@dataclass(frozen=True)
class DerivedParams:
    delta_s: float
    omega_p_amp: float
    n_s: float
    m_s: complex
    delta_c_prime: float
    delta_e: float
    g_eff: float
    g_eff_prime: float


# -- parameter relations -----------------------------------------------------

def squeeze_from_pump(omega_p_amp: float, delta_a: float) -> float:
    """r_p = arctanh(Omega_p / Delta_a) / 2."""
    if delta_a == 0 or abs(omega_p_amp) >= abs(delta_a):
        raise AboveThresholdError(
            f"|Omega_p|={abs(omega_p_amp)} must be below |Delta_a|={abs(delta_a)}")
    return 0.5 * math.atanh(omega_p_amp / delta_a)


def pump_from_squeeze(r_p: float, delta_a: float) -> float:
    return delta_a * math.tanh(2.0 * r_p)


def squeezed_detuning(delta_a: float, r_p: float) -> float:
    """Delta_s = Delta_a sech(2 r_p)."""
    return delta_a / math.cosh(2.0 * r_p)


def lab_detuning(delta_s: float, r_p: float) -> float:
    """Inverse of :func:`squeezed_detuning`."""
    return delta_s * math.cosh(2.0 * r_p)


def _half_angle_trig(phi: float):
    """(cos^2(phi/2), sin(phi)) with phases within a few ulps of a multiple of
    pi/2 snapped to the exact value, so that matching at theta_e + theta_p = pi
    cancels exactly even though pi itself is not representable."""
    quarter = phi / (0.5 * math.pi)
    k = round(quarter)
    if abs(quarter - k) < 8 * np.finfo(float).eps * max(1.0, abs(quarter)):
        k %= 4
        return (1.0, 0.5, 0.0, 0.5)[k], (0.0, 1.0, 0.0, -1.0)[k]
    return math.cos(0.5 * phi) ** 2, math.sin(phi)


def reservoir_stats(r_p: float, theta_p: float, r_e: float, theta_e: float):
    """Thermal occupation N_s and two-photon correlation M_s seen by a_s.

    Evaluated in the algebraically equivalent forms
      N_s = sinh^2(r_e - r_p) + sinh(2r_e) sinh(2r_p) cos^2(phi/2)
      M_s = e^{i theta_p}/2 [sinh(2r_p - 2r_e) + 2 cos^2(phi/2) sinh(2r_e) cosh(2r_p)
                            + i sinh(2r_e) sin(phi)],   phi = theta_e + theta_p,
    which avoid the catastrophic cancellation of the textbook expressions
    near the matching point.
    """
    c2, s1 = _half_angle_trig(theta_e + theta_p)
    she, shp = math.sinh(2 * r_e), math.sinh(2 * r_p)
    n_s = math.sinh(r_e - r_p) ** 2 + she * shp * c2
    re_part = math.sinh(2 * (r_p - r_e)) + 2.0 * c2 * she * math.cosh(2 * r_p)
    m_s = np.exp(1j * theta_p) * 0.5 * complex(re_part, she * s1)
    return float(n_s), complex(m_s)


def reservoir_stats_direct(r_p: float, theta_p: float, r_e: float, theta_e: float):
    """Term-by-term evaluation of N_s, M_s (reference route for tests)."""
    phi = theta_e + theta_p
    n_s = (math.sinh(r_e) ** 2 * math.cosh(2 * r_p) + math.sinh(r_p) ** 2
           + 0.5 * math.sinh(2 * r_e) * math.sinh(2 * r_p) * math.cos(phi))
    m_s = np.exp(1j * theta_p) * (
        0.5 * math.sinh(2 * r_p) * math.cosh(2 * r_e)
        + 0.5 * math.sinh(2 * r_e) * (np.exp(1j * phi) * math.cosh(r_p) ** 2
                                       + np.exp(-1j * phi) * math.sinh(r_p) ** 2))
    return float(n_s), complex(m_s)


def lab_reservoir_stats(r_e: float, theta_e: float):
    """N and M of the injected squeezed vacuum, as seen by the lab-frame mode."""
    return math.sinh(r_e) ** 2, complex(math.cosh(r_e) * math.sinh(r_e) * np.exp(1j * theta_e))


def _check_denominator(value: float, scale: float, what: str):
    if abs(value) < DEGENERATE_RTOL * max(abs(scale), 1.0):
        raise DegenerateDetuningError(f"{what} is (numerically) zero: {value!r}")


def effective_detunings_and_coupling_1(params: SystemParams):
    """(Delta_c', Delta_e, g_eff) of the rotating-channel effective Hamiltonian."""
    ds = params.delta_s
    scale = max(abs(ds), abs(params.delta_c), abs(params.delta_q))
    dc, dq = params.delta_c - ds, params.delta_q - ds
    _check_denominator(dc, scale, "Delta_c - Delta_s")
    _check_denominator(dq, scale, "Delta_q - Delta_s")
    ch2 = math.cosh(params.r_p) ** 2
    delta_c_prime = params.J ** 2 * ch2 / dc
    delta_e = params.g ** 2 * ch2 / dq
    g_eff = 0.5 * params.g * params.J * ch2 * (1.0 / dc + 1.0 / dq)
    return delta_c_prime, delta_e, g_eff


def resonance_roots(params: SystemParams):
    """Both roots of (Dq + De - Dc)(Dc - Ds) = J^2 cosh^2(r_p), nearest to Dq first."""
    ds, dq = params.delta_s, params.delta_q
    _check_denominator(dq - ds, max(abs(ds), abs(dq)), "Delta_q - Delta_s")
    ch2 = math.cosh(params.r_p) ** 2
    u = dq + params.g ** 2 * ch2 / (dq - ds)
    # -Dc^2 + (u + Ds) Dc - u Ds - J^2 ch2 = 0
    b = u + ds
    c = u * ds + params.J ** 2 * ch2
    disc = b * b - 4.0 * c
    if disc < 0:
        raise NoResonanceError(f"resonance condition has complex roots (discriminant {disc:.3e})")
    sq = math.sqrt(disc)
    # numerically stable pair
    q = 0.5 * (b + math.copysign(sq, b))
    r1 = q
    r2 = c / q if q != 0 else 0.5 * (b - sq)
    roots = sorted((r1, r2), key=lambda x: abs(x - dq))
    return roots[0], roots[1]


def solve_resonance_delta_c(params: SystemParams) -> float:
    """Delta_c satisfying Delta_e - Delta_c' + Delta_q - Delta_c = 0 (root nearest Delta_q)."""
    return resonance_roots(params)[0]


def resonance_residual(params: SystemParams) -> float:
    dcp, de, _ = effective_detunings_and_coupling_1(params)
    return de - dcp + params.delta_q - params.delta_c


def g_eff_prime(params: SystemParams, warn: bool = True) -> float:
    """Counter-rotating-channel coupling g J cosh sinh / (Delta_s + Delta_q)."""
    ds = params.delta_s
    denom = ds + params.delta_q
    _check_denominator(denom, max(abs(ds), abs(params.delta_q)), "Delta_s + Delta_q")
    if warn and (not math.isclose(params.delta_q, -params.delta_c, rel_tol=1e-9, abs_tol=1e-12)
                 or not math.isclose(params.g, params.J, rel_tol=1e-12)):
        warnings.warn("counter-rotating effective coupling assumes Delta_q = -Delta_c and g = J",
                      stacklevel=2)
    return params.g * params.J * math.cosh(params.r_p) * math.sinh(params.r_p) / denom


def derived(params: SystemParams) -> DerivedParams:
    n_s, m_s = reservoir_stats(params.r_p, params.theta_p, params.r_e, params.theta_e)
    try:
        dcp, de, ge = effective_detunings_and_coupling_1(params)
    except DegenerateDetuningError:
        dcp = de = ge = float("nan")
    try:
        gp = g_eff_prime(params, warn=False)
    except DegenerateDetuningError:
        gp = float("nan")
    return DerivedParams(params.delta_s, params.omega_p, n_s, m_s, dcp, de, ge, gp)


# -- operators on the composite space ---------------------------------------

def full_space(n_a: int = 4, n_c: int = 5) -> HilbertSpace:
    return HilbertSpace((2, n_a, n_c))


def reduced_space(n_c: int = 5) -> HilbertSpace:
    """(atom, c) space left after eliminating the primary cavity mode."""
    return HilbertSpace((2, n_c))


class ModeOps:
    """Embedded ladder/atom operators for a (atom, [a_s], c) space."""

    def __init__(self, space: HilbertSpace):
        self.space = space
        if space.n_factors == 3:
            self.a = embed(fock_destroy(space.factor_dims[MODE_A]), MODE_A, space)
            c_slot = MODE_C
        elif space.n_factors == 2:
            self.a = None
            c_slot = 1
        else:
            raise ModelError(f"expected (atom, a, c) or (atom, c) space, got {space.factor_dims}")
        if space.factor_dims[0] != 2:
            raise ModelError("first factor must be the two-level atom")
        self.c = embed(fock_destroy(space.factor_dims[c_slot]), c_slot, space)
        self.sm = embed(atom_op("sigma_minus"), ATOM, space)
        self.sp = self.sm.dag()
        self.sz = embed(atom_op("sigma_z"), ATOM, space)
        self.pe = embed(atom_op("projector_e"), ATOM, space)
        self.pg = embed(atom_op("projector_g"), ATOM, space)
        self.eye = identity(space)

    def excitation_number(self) -> Operator:
        n = self.pe + self.c.dag() @ self.c
        if self.a is not None:
            n = n + self.a.dag() @ self.a
        return n


def hamiltonian_lab(params: SystemParams, space: HilbertSpace) -> Operator:
    """Lab-frame Hamiltonian (frame rotating at half the pump frequency)."""
    o = ModeOps(space)
    if o.a is None:
        raise ModelError("lab-frame Hamiltonian needs the primary cavity mode")
    a, c = o.a, o.c
    wp = params.omega_p
    h = (params.delta_a * (a.dag() @ a) + params.delta_c * (c.dag() @ c)
         + (params.delta_q / 2) * o.sz
         + params.g * (o.sp @ a + a.dag() @ o.sm)
         + params.J * (c.dag() @ a + a.dag() @ c))
    if wp != 0.0:
        sq = np.exp(1j * params.theta_p) * (a @ a)
        h = h + (wp / 2) * (sq + sq.dag())
    return h


def _squeezed_parts(params: SystemParams, space: HilbertSpace):
    """Diagonal, rotating and counter-rotating pieces of the squeezed-frame H."""
    if params.theta_p != 0.0:
        raise UnsupportedPhaseError("squeezed-frame Hamiltonian is only available for theta_p = 0")
    o = ModeOps(space)
    if o.a is None:
        raise ModelError("squeezed-frame Hamiltonian needs the a_s mode")
    a, c = o.a, o.c
    ch, sh = math.cosh(params.r_p), math.sinh(params.r_p)
    diag = (params.delta_s * (a.dag() @ a) + params.delta_c * (c.dag() @ c)
            + (params.delta_q / 2) * o.sz)
    rot = (params.g * ch) * (a @ o.sp + a.dag() @ o.sm) + (params.J * ch) * (a @ c.dag() + a.dag() @ c)
    counter = (params.g * sh) * (a.dag() @ o.sp + a @ o.sm) + (params.J * sh) * (a.dag() @ c.dag() + a @ c)
    return diag, rot, counter


def hamiltonian_squeezed(params: SystemParams, space: HilbertSpace,
                         rwa_flag: str = "full") -> Operator:
    """Squeezed-frame Hamiltonian; ``rwa_flag`` is 'full' or 'rotating_only'.

    The two interaction brackets (g/2)[e^r (a+a^+)(s+ + s-) - e^-r (a^+ - a)(s+ - s-)]
    expand to g cosh(r)(a s+ + h.c.) + g sinh(r)(a^+ s+ + h.c.), likewise for J.
    """
    diag, rot, counter = _squeezed_parts(params, space)
    if rwa_flag == "full":
        return diag + rot + counter
    if rwa_flag == "rotating_only":
        return diag + rot
    raise ValueError(f"rwa_flag must be 'full' or 'rotating_only', got {rwa_flag!r}")


def resonant_offset(params: SystemParams) -> float:
    """Static c-mode detuning left in H_eff^1 after moving to the co-rotating frame.

    Zero when the resonance condition holds.
    """
    dcp, de, _ = effective_detunings_and_coupling_1(params)
    return (params.delta_c + dcp) - (params.delta_q + de)


def h_eff_1(params: SystemParams, space: HilbertSpace, t: float | None = 0.0,
            frame: str = "interaction") -> Operator:
    """Rotating-channel effective Hamiltonian on (atom, c).

    ``frame='interaction'`` gives the explicitly time-dependent form with phase
    exp[i(Dq - Dc)t]; ``frame='static'`` removes all bare energies and keeps
    only the residual resonance offset on the c mode.
    """
    o = ModeOps(space)
    dcp, de, ge = effective_detunings_and_coupling_1(params)
    if frame == "interaction":
        ph = np.exp(1j * (params.delta_q - params.delta_c) * (t or 0.0))
        cpl = ge * ph * (o.sp @ o.c)
        return dcp * (o.c.dag() @ o.c) + de * o.pe + cpl + cpl.dag()
    if frame == "static":
        return resonant_offset(params) * (o.c.dag() @ o.c) + ge * (o.sp @ o.c + o.c.dag() @ o.sm)
    raise ValueError(f"unknown frame {frame!r}")


def h_eff_1_terms(params: SystemParams, space: HilbertSpace):
    """H_eff^1 in the interaction frame as (frequency, operator) terms."""
    o = ModeOps(space)
    dcp, de, ge = effective_detunings_and_coupling_1(params)
    w = params.delta_q - params.delta_c
    cpl = ge * (o.sp @ o.c)
    return [(0.0, dcp * (o.c.dag() @ o.c) + de * o.pe), (w, cpl), (-w, cpl.dag())]


def h_eff_2(params: SystemParams, space: HilbertSpace) -> Operator:
    o = ModeOps(space)
    gp = g_eff_prime(params)
    return gp * (o.sp @ o.c.dag() + o.c @ o.sm)


def lab_photon_observable(r_p: float, theta_p: float, space: HilbertSpace,
                          slot: int = MODE_A) -> Operator:
    """a^+ a of the lab-frame primary mode written in terms of a_s."""
    a = embed(fock_destroy(space.factor_dims[slot]), slot, space)
    ad = a.dag()
    ch, sh = math.cosh(r_p), math.sinh(r_p)
    return (ch ** 2 * (ad @ a) + sh ** 2 * (a @ ad)
            - (ch * sh) * (np.exp(-1j * theta_p) * (ad @ ad) + np.exp(1j * theta_p) * (a @ a)))


def squeeze_matrix(n: int, r_p: float, theta_p: float = 0.0) -> np.ndarray:
    """Truncated single-mode squeeze unitary exp[(r/2)(e^{i th} a^2 - e^{-i th} a^+2)]."""
    from scipy.linalg import expm

    a = fock_destroy(n).matrix
    gen = 0.5 * r_p * (np.exp(1j * theta_p) * a @ a - np.exp(-1j * theta_p) * a.conj().T @ a.conj().T)
    return expm(gen)
