import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from squeezed_cqed import model as pm
from squeezed_cqed.operators import HilbertSpace, embed, fock_destroy
from squeezed_cqed.presets import fig2_params, fig3_params

radius = st.floats(0.0, 3.0)
phase = st.floats(-math.pi, math.pi)


def bogoliubov_moments(r_p, theta_p, n, m):
    """<a_s^+ a_s>, <a_s a_s> for a_s = cosh a + e^{-i theta} sinh a^+ given <a^+a> = n, <aa> = m."""
    ch, sh = math.cosh(r_p), math.sinh(r_p)
    e = np.exp(-1j * theta_p)
    n_s = ch ** 2 * n + sh ** 2 * (n + 1) + 2 * ch * sh * np.real(np.conj(e) * m)
    m_s = ch ** 2 * m + e ** 2 * sh ** 2 * np.conj(m) + e * ch * sh * (2 * n + 1)
    return n_s, m_s


# -- squeezing relations -------------------------------------------------------

def test_squeezed_detuning_round_trip():
    for r in (0.0, 0.3, 1.0, 4.0):
        da = 1234.5
        ds = pm.squeezed_detuning(da, r)
        assert math.isclose(ds, da / math.cosh(2 * r), rel_tol=1e-15)
        assert math.isclose(pm.lab_detuning(ds, r), da, rel_tol=1e-14)
        assert math.isclose(pm.squeeze_from_pump(pm.pump_from_squeeze(r, da), da), r,
                            rel_tol=1e-9, abs_tol=1e-15)


def test_pump_above_threshold_rejected():
    with pytest.raises(pm.AboveThresholdError):
        pm.squeeze_from_pump(2.0, 2.0)
    with pytest.raises(pm.AboveThresholdError):
        pm.squeeze_from_pump(-3.0, 2.0)


# -- reservoir statistics ---------------------------------------------------------

@pytest.mark.parametrize("r", [0.5, 1.0, 2.0, 4.0])
def test_matched_reservoir_vanishes_exactly(r):
    n_s, m_s = pm.reservoir_stats(r, 0.0, r, math.pi)
    assert abs(n_s) <= 1e-14 and abs(m_s) <= 1e-14


def test_matched_reservoir_other_odd_multiples():
    for theta_p, theta_e in [(0.3, math.pi - 0.3), (0.0, -math.pi), (0.0, 3 * math.pi)]:
        n_s, m_s = pm.reservoir_stats(1.5, theta_p, 1.5, theta_e)
        assert abs(n_s) < 1e-9 and abs(m_s) < 1e-9


def test_unsqueezed_cavity_sees_bare_reservoir():
    n_s, m_s = pm.reservoir_stats(0.0, 0.0, 0.8, 0.4)
    n, m = pm.lab_reservoir_stats(0.8, 0.4)
    assert math.isclose(n_s, n, rel_tol=1e-14)
    assert abs(m_s - m) < 1e-14


def test_mismatched_reservoir_at_rp4_is_huge():
    n_s, _ = pm.reservoir_stats(4.0, 0.0, 0.0, 0.0)
    assert math.isclose(n_s, math.sinh(4.0) ** 2, rel_tol=1e-12)


@settings(max_examples=200, deadline=None)
@given(radius, phase, radius, phase)
def test_occupation_matches_bogoliubov_oracle(r_p, theta_p, r_e, theta_e):
    n, m = pm.lab_reservoir_stats(r_e, theta_e)
    n_ref, _ = bogoliubov_moments(r_p, theta_p, n, m)
    n_s, _ = pm.reservoir_stats(r_p, theta_p, r_e, theta_e)
    assert math.isclose(n_s, n_ref, rel_tol=1e-9, abs_tol=1e-9 * (1 + math.cosh(2 * r_p) * math.cosh(2 * r_e)))


@settings(max_examples=200, deadline=None)
@given(radius, radius, phase)
def test_correlation_matches_bogoliubov_oracle_at_zero_pump_phase(r_p, r_e, theta_e):
    n, m = pm.lab_reservoir_stats(r_e, theta_e)
    _, m_ref = bogoliubov_moments(r_p, 0.0, n, m)
    _, m_s = pm.reservoir_stats(r_p, 0.0, r_e, theta_e)
    assert abs(m_s - m_ref) <= 1e-9 * (1 + math.cosh(2 * r_p) * math.cosh(2 * r_e))


@settings(max_examples=200, deadline=None)
@given(radius, phase, radius, phase)
def test_stable_and_direct_forms_agree(r_p, theta_p, r_e, theta_e):
    a = pm.reservoir_stats(r_p, theta_p, r_e, theta_e)
    b = pm.reservoir_stats_direct(r_p, theta_p, r_e, theta_e)
    scale = 1 + math.cosh(2 * r_p) * math.cosh(2 * r_e)
    assert abs(a[0] - b[0]) <= 1e-11 * scale
    assert abs(a[1] - b[1]) <= 1e-11 * scale


@settings(max_examples=200, deadline=None)
@given(radius, phase, radius, phase)
def test_reservoir_stays_pure_gaussian(r_p, theta_p, r_e, theta_e):
    # a unitary Bogoliubov map keeps a pure squeezed vacuum pure: |M|^2 = N (N + 1)
    n_s, m_s = pm.reservoir_stats(r_p, theta_p, r_e, theta_e)
    assert n_s >= -1e-12
    lhs, rhs = abs(m_s) ** 2, n_s * (n_s + 1)
    assert abs(lhs - rhs) <= 1e-8 * (1 + rhs)


# -- effective couplings and resonance -------------------------------------------

def _fig2(r_p=0.0):
    return fig2_params(r_p, r_p, math.pi, 10.0, 1e-3, 1e-3)


def test_fig2_detuning_arithmetic():
    p = _fig2(0.0)
    assert math.isclose(p.delta_s, 525.0, rel_tol=1e-14)
    assert math.isclose(p.delta_q, 475.0, rel_tol=1e-14)


@pytest.mark.parametrize("r_p", [0.0, 0.5, 1.0, 2.0, 4.0])
def test_resonance_root_satisfies_quadratic(r_p):
    p = _fig2(r_p)
    ch2 = math.cosh(r_p) ** 2
    de = p.g ** 2 * ch2 / (p.delta_q - p.delta_s)
    lhs = (p.delta_q + de - p.delta_c) * (p.delta_c - p.delta_s)
    assert math.isclose(lhs, p.J ** 2 * ch2, rel_tol=1e-9)
    assert abs(pm.resonance_residual(p)) < 1e-10 * abs(p.delta_q)
    # independent root finder agrees and the nearest-to-Delta_q root was taken
    b = de + p.delta_q + p.delta_s
    c = (p.delta_q + de) * p.delta_s + p.J ** 2 * ch2
    roots = np.roots([1.0, -b, c])
    nearest = roots[np.argmin(np.abs(roots - p.delta_q))].real
    assert math.isclose(p.delta_c, nearest, rel_tol=1e-10)


def test_no_resonance_raises():
    p = pm.SystemParams(g=1.0, J=400.0, delta_a=525.0, delta_q=475.0)
    with pytest.raises(pm.NoResonanceError):
        pm.solve_resonance_delta_c(p)


def test_degenerate_detuning_raises():
    p = pm.SystemParams(delta_a=500.0, delta_q=500.0, delta_c=400.0)
    with pytest.raises(pm.DegenerateDetuningError):
        pm.effective_detunings_and_coupling_1(p)


@pytest.mark.parametrize("r_p", [0.0, 1.0, 2.0, 4.0])
def test_g_eff_matches_single_excitation_splitting(r_p):
    # exact 3-level sector {|e,0,0>, |g,1,0>, |g,0,1>} of the rotating Hamiltonian
    p = _fig2(r_p)
    ch = math.cosh(r_p)
    dq, ds, dc = p.delta_q, p.delta_s, p.delta_c
    h = np.array([[dq / 2, p.g * ch, 0], [p.g * ch, ds - dq / 2, p.J * ch], [0, p.J * ch, dc - dq / 2]])
    w = np.linalg.eigvalsh(h)
    half_gap = min(np.diff(w)) / 2
    g_eff = abs(pm.effective_detunings_and_coupling_1(p)[2])
    assert math.isclose(half_gap, g_eff, rel_tol=3e-3)


@pytest.mark.parametrize("r_p", [1.0, 2.0, 3.0, 4.0])
def test_counter_rotating_coupling_against_sector_splitting(r_p):
    # sector {|g,0,0>, |e,1,0>, |g,1,1>, |e,0,1>} coupled by the counter-rotating terms
    p = fig3_params(r_p, r_p, math.pi, 100.0, 0.1, 0.1)
    ch, sh = math.cosh(r_p), math.sinh(r_p)
    dq, ds, dc, g, J = p.delta_q, p.delta_s, p.delta_c, p.g, p.J
    h = np.diag([-dq / 2, dq / 2 + ds, -dq / 2 + ds + dc, dq / 2 + dc])
    h[0, 1] = h[1, 0] = g * sh
    h[0, 2] = h[2, 0] = J * sh
    h[1, 3] = h[3, 1] = J * ch
    h[2, 3] = h[3, 2] = g * ch
    half_gap = min(np.diff(np.linalg.eigvalsh(h))) / 2
    gp = pm.g_eff_prime(p)
    # the closed form keeps only the |e,1,0> path; the |g,1,1> path adds (Ds+Dq)/(Ds-Dq) = 1/20
    two_path = gp * (1 + 1 / 20)
    assert abs(half_gap - two_path) < abs(half_gap - gp)
    assert math.isclose(half_gap, two_path, rel_tol=0.04)
    assert math.isclose(half_gap, gp, rel_tol=0.1)


def test_g_eff_prime_warns_off_condition():
    p = fig3_params(2.0, 2.0, math.pi, 100.0, 0.1, 0.1).replace(delta_c=10.0)
    with pytest.warns(UserWarning):
        pm.g_eff_prime(p)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        pm.g_eff_prime(fig3_params(2.0, 2.0, math.pi, 100.0, 0.1, 0.1))


def test_fig2_invalid_region_exists():
    g0 = abs(pm.effective_detunings_and_coupling_1(_fig2(0.0))[2])
    ratios = [abs(pm.effective_detunings_and_coupling_1(_fig2(r))[2]) / g0
              for r in np.linspace(0.05, 0.6, 12)]
    assert min(ratios) < 1.0
    assert abs(pm.effective_detunings_and_coupling_1(_fig2(4.0))[2]) / g0 > 10


# -- Hamiltonians ------------------------------------------------------------------

def test_squeezed_hamiltonian_is_bogoliubov_image_of_lab_hamiltonian():
    # the squeezed-frame Hamiltonian equals S^+ H_lab S with S = S(r, pi), applied to a lab
    # Hamiltonian whose pump phase is pi; compared away from the truncation edge.
    n_a, r = 40, 0.4
    params = pm.SystemParams(g=1.3, J=0.7, r_p=r, delta_a=pm.lab_detuning(30.0, r),
                             delta_c=27.0, delta_q=25.0)
    space = pm.full_space(n_a, 2)
    h_lab = pm.hamiltonian_lab(params.replace(theta_p=math.pi), space).matrix
    s = np.kron(np.kron(np.eye(2), pm.squeeze_matrix(n_a, r, math.pi)), np.eye(2))
    h_img = s.conj().T @ h_lab @ s
    h_sq = pm.hamiltonian_squeezed(params, space).matrix
    keep = np.nonzero(np.kron(np.kron(np.ones(2), np.arange(n_a) < 6), np.ones(2)))[0]
    block = np.ix_(keep, keep)
    diff = h_img[block] - h_sq[block]
    shift = diff[0, 0]
    assert np.allclose(diff, shift * np.eye(len(keep)), atol=1e-8)
    # constant offset of the Bogoliubov map: -Delta_s sinh^2(r) (zero-point energy)
    assert math.isclose(shift.real, params.delta_a * math.sinh(r) ** 2
                        - params.omega_p * math.sinh(r) * math.cosh(r), rel_tol=1e-8)


def test_rotating_only_conserves_excitations():
    p = _fig2(2.0)
    space = pm.full_space(3, 3)
    o = pm.ModeOps(space)
    n = o.excitation_number().matrix
    h_rot = pm.hamiltonian_squeezed(p, space, "rotating_only").matrix
    h_full = pm.hamiltonian_squeezed(p, space, "full").matrix
    assert np.allclose(h_rot @ n - n @ h_rot, 0)
    assert not np.allclose(h_full @ n - n @ h_full, 0)


def test_full_squeezed_hamiltonian_conserves_parity():
    p = _fig2(2.0)
    space = pm.full_space(4, 3)
    o = pm.ModeOps(space)
    parity = np.diag(np.exp(1j * np.pi * np.real(np.diag(o.excitation_number().matrix))))
    h = pm.hamiltonian_squeezed(p, space, "full").matrix
    assert np.allclose(h @ parity - parity @ h, 0)


def test_squeezed_hamiltonian_needs_zero_pump_phase():
    with pytest.raises(pm.UnsupportedPhaseError):
        pm.hamiltonian_squeezed(_fig2(1.0).replace(theta_p=0.2), pm.full_space(2, 2))


def test_effective_hamiltonian_static_form_on_resonance():
    p = _fig2(4.0)
    space = pm.reduced_space(3)
    h = pm.h_eff_1(p, space, frame="static").matrix
    _, _, ge = pm.effective_detunings_and_coupling_1(p)
    o = pm.ModeOps(space)
    # resonance puts the whole static Hamiltonian into the exchange term
    assert np.allclose(h, ge * (o.sp @ o.c + o.c.dag() @ o.sm).matrix, atol=1e-9 * abs(p.delta_q))


def test_interaction_frame_terms_match_time_dependent_form():
    p = _fig2(1.0)
    space = pm.reduced_space(3)
    terms = pm.h_eff_1_terms(p, space)
    for t in (0.0, 0.37, 2.1):
        h_t = pm.h_eff_1(p, space, t=t).matrix
        h_sum = sum(np.exp(1j * w * t) * op.matrix for w, op in terms)
        assert np.allclose(h_t, h_sum, atol=1e-12)


def test_h_eff_2_exchange_structure():
    p = fig3_params(4.0, 4.0, math.pi, 100.0, 0.1, 0.1)
    space = pm.reduced_space(3)
    h = pm.h_eff_2(p, space)
    assert h.is_hermitian()
    o = pm.ModeOps(space)
    # couples |g,0> to |e,1> only: conserves (c^+c - P_e)
    q = (o.c.dag() @ o.c - o.pe).matrix
    assert np.allclose(h.matrix @ q - q @ h.matrix, 0)


def test_lab_photon_observable_vacuum_value():
    space = HilbertSpace((2, 8))
    obs = pm.lab_photon_observable(1.1, 0.0, space, slot=1)
    vac = np.zeros(space.dim)
    vac[0] = 1.0
    assert math.isclose(np.real(vac @ obs.matrix @ vac), math.sinh(1.1) ** 2, rel_tol=1e-12)


def test_squeeze_matrix_transforms_ladder_operator():
    n, r = 120, 0.5
    s = pm.squeeze_matrix(n, r, 0.0)
    a = fock_destroy(n).matrix
    img = s.conj().T @ a @ s
    ref = math.cosh(r) * a - math.sinh(r) * a.T
    assert np.allclose(img[:10, :10], ref[:10, :10], atol=1e-9)
    assert embed(fock_destroy(n), 0, HilbertSpace((n,))).dim == n
