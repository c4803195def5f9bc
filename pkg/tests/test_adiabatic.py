import math
import warnings

import numpy as np
import pytest
from scipy.linalg import expm

from squeezed_cqed import adiabatic as ad
from squeezed_cqed import model as pm
from squeezed_cqed.presets import fig2_params, resolve_preset


def fig2c_params(r_p=4.0, kappa1=100.0):
    return fig2_params(r_p, r_p, math.pi, kappa1, 0.1, 0.1)


def test_effective_rate_formula():
    assert math.isclose(ad.effective_rate(100.0, 50.0), 100.0 / (2500.0 + 2500.0))
    assert ad.effective_rate(0.0, 0.0) == 0.0


def test_collapse_operators_structure():
    p = fig2c_params(1.0)
    space = pm.reduced_space(3)
    o = pm.ModeOps(space)
    op_r, op_cr = ad.collapse_operators(p, space)
    ch, sh = math.cosh(1.0), math.sinh(1.0)
    assert np.allclose(op_r.matrix, (p.g * ch * o.sm + p.J * ch * o.c).matrix)
    assert np.allclose(op_cr.matrix, (p.g * sh * o.sp + p.J * sh * o.c.dag()).matrix)


def test_channel_split_reproduces_interaction_picture():
    # e^{i H0 t} (H - H0) e^{-i H0 t} must equal the phased rotating + counter terms
    p = fig2c_params(0.7).replace(delta_c=480.0)
    space = pm.full_space(3, 2)
    h_full = pm.hamiltonian_squeezed(p, space, "full").matrix
    o = pm.ModeOps(space)
    h0 = (p.delta_s * (o.a.dag() @ o.a) + p.delta_c * (o.c.dag() @ o.c) + (p.delta_q / 2) * o.sz).matrix
    h_r, h_cr = ad.split_hamiltonian(p, space)
    for t in (0.0, 1.3e-3, 0.02):
        u = expm(1j * h0 * t)
        ref = u @ (h_full - h0) @ u.conj().T
        got = sum(np.exp(1j * w * t) * op.matrix for w, op in h_r + h_cr)
        assert np.allclose(got, ref, atol=1e-9)


@pytest.mark.parametrize("channel", ["rotating", "counter"])
def test_langevin_solution_is_stationary(channel):
    p = fig2c_params(2.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        sol = ad.langevin_effective_operator(channel, p)
        res = ad.langevin_residual(sol, p)
        doubled = ad.langevin_residual(sol, p, convention="doubled")
    assert np.max(np.abs(res)) < 1e-12
    assert np.max(np.abs(doubled)) < 1e-12


def test_langevin_solution_against_direct_heisenberg_equation():
    # da/dt = i[H_r, a] - kappa/2 a with H_r the static rotating-channel Hamiltonian; a is
    # replaced by the stationary solution on the right-hand side, in the low-excitation block
    p = fig2c_params(1.0).replace(delta_c=fig2c_params(1.0).delta_q)
    space = pm.full_space(3, 3)
    o = pm.ModeOps(space)
    h = ad.rotated_h_r(p, space).matrix
    comm = 1j * (h @ o.a.matrix - o.a.matrix @ h)
    sol = ad.langevin_effective_operator("rotating", p)
    ch = math.cosh(1.0)
    # i[H, a] = -i(g ch sigma- + J ch c) + i Delta_r a  ->  a_st = (g ch s + J ch c) / (Delta_r + i kappa/2)
    x = (p.g * ch * o.sm + p.J * ch * o.c).matrix
    # keep columns below the a_s truncation edge, where [a, a^+] = 1 holds exactly
    low = np.diag(np.kron(np.kron(np.ones(2), [1.0, 1.0, 0.0]), np.ones(3)))
    ref = -1j * x + 1j * (p.delta_q - p.delta_s) * o.a.matrix
    assert np.allclose(comm @ low, ref @ low, atol=1e-9)
    a_st = (sol.c_sigma * o.sm + sol.c_c * o.c).matrix / sol.denominator
    lhs = -1j * x + 1j * (p.delta_q - p.delta_s) * a_st - 0.5 * p.kappa1 * a_st
    assert np.allclose(lhs, 0, atol=1e-12)


def test_effective_dissipator_equals_eliminated_mode_decay():
    # kappa1 a_st^+ a_st must equal rate * L^+ L for each channel
    p = fig2c_params(2.0).replace(delta_c=fig2c_params(2.0).delta_q)
    space = pm.reduced_space(3)
    ep = ad.elimination_params(p)
    ops = ad.collapse_operators(p, space)
    for channel, op, rate in zip(("rotating", "counter"), ops, (ep.rate_r, ep.rate_cr)):
        a_st = ad.langevin_effective_operator(channel, p).operator(space)
        lhs = p.kappa1 * (a_st.dag() @ a_st).matrix
        assert np.allclose(lhs, rate * (op.dag() @ op).matrix, atol=1e-14)


def test_channel_detuning_warns_on_mismatch():
    p = fig2c_params(4.0)
    assert p.delta_q != p.delta_c
    with pytest.warns(UserWarning):
        w = ad.channel_detuning(p)
    assert math.isclose(w, 0.5 * (p.delta_q + p.delta_c))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert ad.channel_detuning(p.replace(delta_c=p.delta_q)) == p.delta_q


def test_effective_generator_is_a_valid_lindbladian():
    p = fig2c_params(4.0)
    space = pm.reduced_space(4)
    rng = np.random.default_rng(5)
    m = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    rho = m @ m.conj().T
    rho /= np.trace(rho)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        gen = ad.effective_master_rhs(p, space)
    d = gen(rho)
    assert abs(np.trace(d)) < 1e-12
    assert np.allclose(d, d.conj().T, atol=1e-12)
    with pytest.raises(ValueError):
        ad.effective_master_rhs(p, pm.full_space(2, 2))


def test_crossing_below_interpolates():
    assert ad.crossing_below([0, 1, 2], [1.0, 0.6, 0.2], 0.5) == pytest.approx(1.25)
    assert ad.crossing_below([0, 1], [1.0, 0.9], 0.5) is None


def test_kappa1_sweep_is_monotone():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = ad.kappa1_breakdown_sweep([100.0, 1000.0, 3000.0])
    assert np.all(np.diff(res.max_n_c) < 0)
    # kappa2 = gamma = 0.1 already cap the first-period maximum near 0.7
    assert res.max_n_c[0] > 0.65


def test_full_and_effective_agree_over_one_period():
    preset = resolve_preset("fig4a", model="squeezed_rotating")
    preset = preset.with_integrator(t_final=preset.analytic_period)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = ad.compare_full_vs_effective(preset)
    assert rep.passed
    assert rep.max_abs_dev["P_e"] < 0.05 and rep.max_abs_dev["n_c"] < 0.05
