"""Master-equation integration, state diagnostics and period extraction."""
from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import _backend
from .generator import (assemble, commutator_superop, standard_dissipator_superop,
                        two_photon_dissipator_superop)
from .operators import HilbertSpace, Operator, StateVector, number_diagonal

log = logging.getLogger(__name__)


class GeneratorError(ValueError):
    """Dissipator set does not define a Hermiticity-preserving generator."""


class IntegrationError(RuntimeError):
    pass


class NoOscillationError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    space: HilbertSpace
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        mat = np.array(self.matrix, dtype=complex)
        if mat.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"density matrix shape {mat.shape} != space dimension {self.space.dim}")
        mat.setflags(write=False)
        object.__setattr__(self, "matrix", mat)

    @classmethod
    def from_state(cls, psi: StateVector) -> "DensityMatrix":
        return cls(psi.space, psi.density_matrix())

    @classmethod
    def maximally_mixed(cls, space: HilbertSpace) -> "DensityMatrix":
        return cls(space, np.eye(space.dim) / space.dim)

    def purity(self) -> float:
        return float(np.real(np.sum(self.matrix * self.matrix.T)))


@dataclass(frozen=True, eq=False)
class DissipatorSpec:
    """One dissipative term.

    ``standard``:   coefficient * (o rho o^+ - {o^+ o, rho}/2), coefficient real >= 0
    ``two_photon``: -coefficient * (o rho o - {o o, rho}/2)

    ``freq`` multiplies the term by exp(i freq t); it is only non-zero for
    two-photon terms seen from a rotating frame.
    """

    kind: str
    operator: Operator
    coefficient: complex
    freq: float = 0.0

    def __post_init__(self):
        if self.kind == "standard":
            c = complex(self.coefficient)
            if abs(c.imag) > 0 or c.real < 0:
                raise GeneratorError(f"standard dissipator needs a real rate >= 0, got {self.coefficient}")
            if self.freq != 0.0:
                raise GeneratorError("standard dissipators are frame invariant; freq must be 0")
        elif self.kind != "two_photon":
            raise GeneratorError(f"unknown dissipator kind {self.kind!r}")


def standard(op: Operator, rate: float) -> DissipatorSpec:
    return DissipatorSpec("standard", op, float(rate))


def two_photon_pair(op: Operator, mu: complex) -> list[DissipatorSpec]:
    """-mu L'[o] - mu* L'[o^+], the Hermiticity-preserving pair."""
    mu = complex(mu)
    return [DissipatorSpec("two_photon", op, mu), DissipatorSpec("two_photon", op.dag(), mu.conjugate())]


def check_pairing(dissipators: Sequence[DissipatorSpec], tol: float = 1e-12):
    twos = [d for d in dissipators if d.kind == "two_photon" and d.coefficient != 0]
    used = [False] * len(twos)
    for i, d in enumerate(twos):
        if used[i]:
            continue
        partner = None
        for j in range(len(twos)):
            if j == i or used[j]:
                continue
            e = twos[j]
            if (abs(e.coefficient - np.conj(d.coefficient)) <= tol * max(1.0, abs(d.coefficient))
                    and abs(e.freq + d.freq) <= 1e-9 * max(1.0, abs(d.freq))
                    and np.allclose(e.operator.matrix, d.operator.matrix.conj().T, atol=tol, rtol=0)):
                partner = j
                break
        if partner is None:
            raise GeneratorError("two-photon dissipator without its conjugate partner")
        used[i] = used[partner] = True


# -- Hamiltonian input normalisation ----------------------------------------

def hamiltonian_terms(h_of_t) -> list[tuple[float, Operator]]:
    """Normalise a Hamiltonian given as an Operator or [(freq, Operator), ...]."""
    if isinstance(h_of_t, Operator):
        return [(0.0, h_of_t)]
    terms = [(float(w), op) for w, op in h_of_t]
    if not terms:
        raise ValueError("empty Hamiltonian term list")
    return terms


def _h_matrix(h_of_t, t: float) -> np.ndarray:
    if callable(h_of_t) and not isinstance(h_of_t, Operator):
        h = h_of_t(t)
        return getattr(h, "matrix", h)
    return sum(np.exp(1j * w * t) * op.matrix if w else op.matrix
               for w, op in hamiltonian_terms(h_of_t))


def master_rhs(h_of_t, dissipators: Sequence[DissipatorSpec], rho, t: float = 0.0) -> np.ndarray:
    """d rho / dt = i[rho, H] + standard terms + two-photon terms (dense matrix form)."""
    check_pairing(dissipators)
    r = np.asarray(getattr(rho, "matrix", rho), dtype=complex)
    h = _h_matrix(h_of_t, t)
    out = 1j * (r @ h - h @ r)
    for d in dissipators:
        o = d.operator.matrix
        c = complex(d.coefficient) * (np.exp(1j * d.freq * t) if d.freq else 1.0)
        if d.kind == "standard":
            od = o.conj().T
            odo = od @ o
            out += c.real * (o @ r @ od - 0.5 * (odo @ r + r @ odo))
        else:
            oo = o @ o
            out -= c * (o @ r @ o - 0.5 * (oo @ r + r @ oo))
    return out


def build_generator(h_of_t, dissipators: Sequence[DissipatorSpec], dim: int):
    check_pairing(dissipators)
    terms = [(w, commutator_superop(op.matrix)) for w, op in hamiltonian_terms(h_of_t)]
    for d in dissipators:
        if d.coefficient == 0:
            continue
        if d.kind == "standard":
            terms.append((0.0, standard_dissipator_superop(d.operator.matrix, complex(d.coefficient).real)))
        else:
            terms.append((d.freq, two_photon_dissipator_superop(d.operator.matrix, d.coefficient)))
    return assemble(terms, dim)


# -- rotating frames ----------------------------------------------------------

@dataclass(frozen=True)
class RotatingFrame:
    """Frame exp(-i omega N t) with N = sum_k weights[k] n_k (integer weights)."""

    weights: tuple[int, ...]
    omega: float

    def number_diagonal(self, space: HilbertSpace) -> np.ndarray:
        return number_diagonal(space, self.weights)


def split_by_charge(op: Operator, ndiag: np.ndarray) -> dict[int, Operator]:
    """Decompose ``op`` into pieces that change N by a fixed integer k = n_row - n_col."""
    m = op.matrix
    kmat = np.rint(ndiag[:, None] - ndiag[None, :]).astype(int)
    nz = np.abs(m) > 0
    out = {}
    for k in np.unique(kmat[nz]):
        piece = np.where(kmat == k, m, 0.0)
        out[int(k)] = Operator(op.space, piece)
    return out


def to_rotating_frame(h_of_t, dissipators, observables, space: HilbertSpace, frame: RotatingFrame):
    """Transform Hamiltonian terms, dissipators and observables into ``frame``."""
    nd = frame.number_diagonal(space)
    w = frame.omega
    new_h = []
    for f, op in hamiltonian_terms(h_of_t):
        for k, piece in split_by_charge(op, nd).items():
            new_h.append((f + k * w, piece))
    new_h.append((0.0, Operator(space, -w * np.diag(nd))))
    new_d = []
    for d in dissipators:
        pieces = split_by_charge(d.operator, nd)
        if len(pieces) > 1:
            raise GeneratorError("dissipator operator mixes excitation-number changes; frame not applicable")
        (k,) = pieces or {0: None}
        if d.kind == "standard":
            new_d.append(d)
        else:
            new_d.append(DissipatorSpec("two_photon", d.operator, d.coefficient, d.freq + 2 * k * w))
    new_obs = {}
    for name, ob in observables.items():
        terms = []
        for f, op in hamiltonian_terms(ob):
            for k, piece in split_by_charge(op, nd).items():
                terms.append((f + k * w, piece))
        new_obs[name] = terms
    return new_h, new_d, new_obs


# -- integration --------------------------------------------------------------

@dataclass(frozen=True)
class IntegratorConfig:
    method: str = "rk45_adaptive"
    t_final: float = 10.0
    dt: float = 0.01
    rtol: float = 1e-8
    atol: float = 1e-10
    record_stride: int = 1
    hermitize_every: int = 100
    max_steps: int = 200_000_000
    validate_every: int = 1
    backend: str = "auto"

    def __post_init__(self):
        if self.method not in ("rk45_adaptive", "rk4_fixed"):
            raise ValueError(f"unknown integration method {self.method!r}")
        if not (self.dt > 0 and self.t_final > 0 and self.rtol > 0 and self.atol > 0):
            raise ValueError("dt, t_final, rtol and atol must all be positive")
        if self.record_stride < 1:
            raise ValueError("record_stride must be >= 1")

    @property
    def record_dt(self) -> float:
        return self.dt * self.record_stride

    def record_times(self) -> np.ndarray:
        n = int(math.floor(self.t_final / self.record_dt * (1 + 1e-12)))
        return np.arange(n + 1) * self.record_dt


@dataclass
class StateDiagnostics:
    trace_err: float
    herm_err: float
    min_eig: float
    failed: bool


def validate_state(rho, tol: float = 1e-7) -> StateDiagnostics:
    """Deviation of ``rho`` from a unit-trace Hermitian positive matrix."""
    m = np.asarray(getattr(rho, "matrix", rho))
    trace_err = abs(np.trace(m) - 1.0)
    herm_err = float(np.max(np.abs(m - m.conj().T), initial=0.0))
    min_eig = float(np.linalg.eigvalsh(0.5 * (m + m.conj().T))[0])
    failed = trace_err > tol or herm_err > tol or min_eig < -tol
    return StateDiagnostics(float(trace_err), herm_err, min_eig, bool(failed))


@dataclass
class TimeSeries:
    times: np.ndarray
    traces: dict[str, np.ndarray]
    diagnostics: dict[str, np.ndarray] = field(default_factory=dict)
    stats: dict = field(default_factory=dict)
    final_state: DensityMatrix | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if self.times.ndim != 1 or np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be a strictly increasing 1-d grid")
        for name, tr in self.traces.items():
            if len(tr) != len(self.times):
                raise ValueError(f"trace {name!r} has {len(tr)} samples for {len(self.times)} times")

    def __getitem__(self, name: str) -> np.ndarray:
        return self.traces[name]


def _initial_matrix(rho0, space):
    if isinstance(rho0, StateVector):
        return rho0.density_matrix()
    m = np.asarray(getattr(rho0, "matrix", rho0), dtype=complex)
    if m.ndim == 1:
        m = np.outer(m, m.conj())
    if m.shape != (space.dim, space.dim):
        raise ValueError("initial state does not match the operator space")
    return m


def _space_of(h_of_t) -> HilbertSpace:
    return hamiltonian_terms(h_of_t)[0][1].space


def evolve(rho0, h_of_t, dissipators: Sequence[DissipatorSpec], config: IntegratorConfig,
           observables: Mapping[str, object], frame: RotatingFrame | None = None) -> TimeSeries:
    """Integrate the master equation and sample observables on the record grid.

    ``h_of_t`` is an Operator or a list of (freq, Operator) terms meaning
    H(t) = sum exp(i freq t) O.  Observables accept the same two forms.
    With ``frame`` the integration runs in that rotating frame; observables
    are transformed accordingly so traces refer to the original frame.
    """
    space = _space_of(h_of_t)
    dim = space.dim
    rho_init = _initial_matrix(rho0, space)
    obs = {k: hamiltonian_terms(v) for k, v in observables.items()}
    if frame is not None:
        h_of_t, dissipators, obs = to_rotating_frame(h_of_t, dissipators, obs, space, frame)
    gen = build_generator(h_of_t, dissipators, dim)
    obs_vecs = {name: [(w, np.ascontiguousarray(op.matrix.T).reshape(-1)) for w, op in terms]
                for name, terms in obs.items()}
    dopri5, rk4 = _backend.get(config.backend)
    backend = _backend.BACKEND if config.backend == "auto" else config.backend

    times = config.record_times()
    y = np.ascontiguousarray(rho_init.reshape(-1), dtype=complex).copy()
    traces = {name: np.empty(len(times)) for name in obs_vecs}
    diag = {"trace_err": [], "herm_err": [], "min_eig": [], "index": []}
    scale = max(1.0, float(np.max(np.abs(gen.freqs), initial=0.0)))
    h = min(config.record_dt, _initial_step(gen, y, config))
    hmin = 1e-14 * max(1.0, config.t_final)
    steps = n_acc = n_rej = 0
    smallest = math.inf
    t_wall = time.perf_counter()

    def record(i, t):
        for name, terms in obs_vecs.items():
            val = 0j
            for w, v in terms:
                val += (np.exp(1j * w * t) if w else 1.0) * np.dot(v, y)
            traces[name][i] = val.real
        if config.validate_every and i % config.validate_every == 0:
            d = validate_state(y.reshape(dim, dim))
            diag["trace_err"].append(d.trace_err)
            diag["herm_err"].append(d.herm_err)
            diag["min_eig"].append(d.min_eig)
            diag["index"].append(i)

    record(0, times[0])
    for i in range(1, len(times)):
        t0, t1 = times[i - 1], times[i]
        if config.method == "rk45_adaptive":
            h, steps, acc, rej, small, status = dopri5(
                gen, y, t0, t1, h, config.rtol, config.atol, hmin,
                config.max_steps - n_acc - n_rej, dim, config.hermitize_every, steps)
            n_acc += acc
            n_rej += rej
            smallest = min(smallest, small)
            if status == 1:
                raise IntegrationError(
                    f"step size underflow near t={t0:.6g}: smallest step reached {small:.3e}")
            if status == 2:
                raise IntegrationError(f"step budget of {config.max_steps} exhausted near t={t0:.6g}")
        else:
            before = steps
            steps = rk4(gen, y, t0, t1, config.dt, dim, config.hermitize_every, steps)
            n_acc += steps - before
            smallest = config.dt
        if not np.all(np.isfinite(y)):
            raise IntegrationError(f"non-finite state at t={t1:.6g} (unstable step size?)")
        record(i, t1)

    wall = time.perf_counter() - t_wall
    log.debug("evolve: %d accepted, %d rejected steps in %.2fs (%s)", n_acc, n_rej, wall, backend)
    stats = {"n_accepted": n_acc, "n_rejected": n_rej, "smallest_step": smallest,
             "wall_time": wall, "backend": backend, "generator_nnz": gen.nnz,
             "max_frequency": scale}
    return TimeSeries(times, traces, {k: np.asarray(v) for k, v in diag.items()}, stats,
                      DensityMatrix(space, y.reshape(dim, dim).copy()))


def _initial_step(gen, y, config) -> float:
    f0 = gen.apply(0.0, y)
    d0 = np.max(np.abs(y))
    d1 = np.max(np.abs(f0))
    if d1 < 1e-300:
        return config.record_dt
    fmax = float(np.max(np.abs(gen.freqs), initial=0.0))
    h = 0.01 * d0 / d1
    if fmax > 0:
        h = min(h, 0.1 / fmax)
    return max(h, 1e-12)


# -- period extraction --------------------------------------------------------

@dataclass(frozen=True)
class PeriodEstimate:
    period: float
    uncertainty: float
    extremum_time: float
    kind: str  # "min" or "max"


def first_extremum(times, x, rel_threshold: float = 0.05):
    """First turning point of ``x`` confirmed by a reversal of at least
    ``rel_threshold`` times the overall range (suppresses small ripples)."""
    t = np.asarray(times, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(x) < 3:
        raise NoOscillationError("need at least three samples")
    span = float(np.max(x) - np.min(x))
    if span <= 1e-14 * max(1.0, float(np.max(np.abs(x)))):
        raise NoOscillationError("trace is constant")
    delta = rel_threshold * span
    x0 = x[0]
    # direction of the first significant excursion
    moved = np.nonzero(np.abs(x - x0) > delta)[0]
    if moved.size == 0:
        raise NoOscillationError("trace never leaves its initial value")
    going_down = x[moved[0]] < x0
    sign = 1.0 if going_down else -1.0
    y = sign * x  # look for a minimum of y
    best = 0
    for i in range(1, len(y)):
        if y[i] < y[best]:
            best = i
        elif y[i] > y[best] + delta:
            break
    else:
        raise NoOscillationError("no interior extremum within the record window")
    if best == 0 or best == len(y) - 1:
        raise NoOscillationError("extremum sits on the window boundary")
    # 3-point parabola through (best-1, best, best+1)
    ym, y0, yp = y[best - 1], y[best], y[best + 1]
    denom = ym - 2 * y0 + yp
    h = t[best + 1] - t[best]
    shift = 0.5 * (ym - yp) / denom if denom > 0 else 0.0
    shift = max(-1.0, min(1.0, shift))
    return t[best] + shift * h, ("min" if going_down else "max"), h


def extract_period(series: TimeSeries, trace_name: str, rel_threshold: float = 0.05) -> PeriodEstimate:
    """Period from the first interior extremum of a trace starting at its own extremum."""
    t_ext, kind, h = first_extremum(series.times, series.traces[trace_name], rel_threshold)
    t_ext -= series.times[0]
    return PeriodEstimate(2.0 * t_ext, h, t_ext, kind)
