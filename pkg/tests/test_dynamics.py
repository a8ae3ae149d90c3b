import math

import numpy as np
import pytest

import quoptics as q
from quoptics.dynamics import jc_hamiltonian, rwa_bloch_matrix
from quoptics.operators import ValidationError


def test_free_precession():
    eps = 2.0
    t = np.linspace(0, 4.0, 41)
    b0 = np.array([1.0, 0.0, 0.3]) / math.sqrt(1.09)
    traj = q.integrate_bloch(b0, lambda _: np.array([0.0, 0.0, eps]), t)
    assert np.abs(traj[:, 2] - b0[2]).max() < 1e-9
    expected_x = b0[0] * np.cos(eps * t) - b0[1] * np.sin(eps * t)
    assert np.abs(traj[:, 0] - expected_x).max() < 1e-8
    norms = np.linalg.norm(traj, axis=1)
    assert np.abs(norms - norms[0]).max() < 1e-9


def test_zero_drive_is_constant():
    t = np.linspace(0, 3.0, 7)
    b0 = np.array([0.2, -0.4, 0.5])
    traj = q.integrate_bloch(b0, lambda _: np.zeros(3), t)
    assert np.abs(traj - b0).max() < 1e-12


def test_rwa_resonant_full_transfer():
    omega_rabi = 1.0
    t = np.linspace(0, 2 * math.pi, 201)
    sol = q.rabi_rwa([0, 0, -1.0], 0.0, omega_rabi, t)
    expected = 0.5 * (1 - np.cos(omega_rabi * t))
    assert np.abs(sol.p_e - expected).max() < 1e-12
    assert sol.p_e.max() == pytest.approx(1.0, abs=1e-10)


def test_rwa_detuned_transfer():
    omega_rabi, delta = 1.0, 1.7
    dn = delta / omega_rabi
    omega_r = math.hypot(omega_rabi, delta)
    t = np.linspace(0, 12.0, 301)
    sol = q.rabi_rwa([0, 0, -1.0], delta, omega_rabi, t)
    expected = (1 - np.cos(omega_r * t)) / (2 * (1 + dn * dn))
    assert np.abs(sol.p_e - expected).max() < 1e-12


def test_rwa_far_detuned_is_free_evolution():
    sol = q.rabi_rwa([0.6, 0.0, 0.8], delta=400.0, omega_rabi=1.0,
                     t_grid=np.linspace(0, 1.0, 50))
    # corrections enter at order Omega/|delta|
    assert np.abs(sol.slow[:, 2] - 0.8).max() < 5e-3
    assert np.abs(np.hypot(sol.slow[:, 0], sol.slow[:, 1]) - 0.6).max() < 5e-3


def test_full_bloch_vs_rwa_scaling():
    omega_rabi = 1.0
    t = np.linspace(0, 2 * math.pi / omega_rabi, 400)
    devs = []
    for ratio in (25.0, 50.0):
        eps = ratio * omega_rabi
        full = q.integrate_bloch(
            [0, 0, -1.0],
            lambda tt: np.array([2 * omega_rabi * math.cos(eps * tt), 0, eps]),
            t, rtol=1e-10)
        rwa = q.rabi_rwa([0, 0, -1.0], 0.0, omega_rabi, t)
        devs.append(np.abs(0.5 * (1 + full[:, 2]) - rwa.p_e).max())
    assert devs[1] < devs[0] / 1.8


def test_printed_rabi_eigensystem_diagonalizes_the_bloch_matrix():
    # The textbook eigensystem is written for the rescaled variables
    # (b, b*, b_z/2); undoing that scaling it must diagonalize our matrix.
    delta, omega_rabi = 0.8, 1.3
    dn = delta / omega_rabi
    omega_r = math.hypot(omega_rabi, delta)
    mat = rwa_bloch_matrix(delta, omega_rabi)
    root = math.sqrt(1 + dn * dn)
    s = 0.5 * np.array([
        [1.0, dn - root, dn + root],
        [1.0, dn + root, dn - root],
        [-dn, 1.0, 1.0],
    ], dtype=complex)
    s_ours = np.diag([1.0, 1.0, 2.0]) @ s
    d = np.linalg.solve(s_ours, mat @ s_ours)
    off = d - np.diag(np.diag(d))
    assert np.abs(off).max() < 1e-12
    assert np.allclose(sorted(np.diag(d).imag), [-omega_r, 0.0, omega_r])


def test_solve_linear_reproduces_rwa():
    delta, omega_rabi = 0.6, 0.9
    t = np.linspace(0, 8.0, 81)
    b0 = np.array([0.3, -0.2, 0.5])
    x0 = [0.5 * (b0[0] - 1j * b0[1]), 0.5 * (b0[0] + 1j * b0[1]), b0[2]]
    sol_lin = q.solve_linear(q.LinearSystem(rwa_bloch_matrix(delta, omega_rabi)),
                             x0, t)
    sol_rwa = q.rabi_rwa(b0, delta, omega_rabi, t)
    assert np.abs(sol_lin[:, 2].real - sol_rwa.slow[:, 2]).max() < 1e-10


def test_solve_linear_scalar_and_forced():
    t = np.linspace(0, 5.0, 11)
    gamma = 0.7
    out = q.solve_linear(q.LinearSystem(np.array([[-gamma]])), [2.0], t)
    assert np.abs(out[:, 0] - 2.0 * np.exp(-gamma * t)).max() < 1e-12

    b = np.array([[-1.0, 0.3], [0.0, -2.0]])
    y = np.array([0.5, -1.0])
    out = q.solve_linear(q.LinearSystem(b, y), [0.0, 0.0],
                         np.linspace(0, 30.0, 16))
    steady = -np.linalg.solve(b, y)
    assert np.abs(out[-1] - steady).max() < 1e-10

    # callable forcing agrees with the closed-form exponential route
    mu = -0.2 + 0.9j
    vec = np.array([1.0, 0.4])
    t_short = np.linspace(0, 2.0, 5)
    closed = q.solve_linear(q.LinearSystem(b, (vec, mu)), [0.1, 0.2], t_short)
    quaded = q.solve_linear(
        q.LinearSystem(b, lambda u: vec * np.exp(mu * u)), [0.1, 0.2], t_short)
    assert np.abs(closed - quaded).max() < 1e-8


def test_jc_dressed_levels():
    p = q.JCParams(omega=1.0, epsilon=1.0, g=0.05)
    for n in (1, 2, 5):
        d = q.jc_dressed(n, p)
        assert d.e_plus - d.e_minus == pytest.approx(2 * math.sqrt(n) * p.g)
        assert d.theta == pytest.approx(math.pi / 4)
    pg0 = q.JCParams(omega=1.2, epsilon=0.9, g=0.0)
    d = q.jc_dressed(3, pg0)
    assert {round(d.e_plus, 12), round(d.e_minus, 12)} == {
        round(3 * 1.2 - 0.45, 12), round(2 * 1.2 + 0.45, 12)}


def test_jc_dressed_matches_dense_diagonalization():
    p = q.JCParams(omega=1.0, epsilon=0.85, g=0.07)
    n_max = 20
    h = jc_hamiltonian(n_max, p)
    evals = np.linalg.eigvalsh(h.entries)
    expected = [-0.5 * p.epsilon]
    for n in range(1, n_max + 1):
        d = q.jc_dressed(n, p)
        expected += [d.e_minus, d.e_plus]
    # the truncated top manifold is spurious; compare the rest
    expected = np.sort(np.array(expected))[: 2 * n_max - 1]
    got = np.sort(evals)[: 2 * n_max - 1]
    assert np.abs(got - expected).max() < 1e-10


def test_jc_dressed_vectors_diagonalize_the_block():
    p = q.JCParams(omega=1.1, epsilon=0.9, g=0.04)
    for n in (1, 4):
        d = q.jc_dressed(n, p)
        block = np.array([
            [n * p.omega - p.epsilon / 2, 1j * math.sqrt(n) * p.g],
            [-1j * math.sqrt(n) * p.g, (n - 1) * p.omega + p.epsilon / 2],
        ])
        for vec, energy in ((d.v_plus, d.e_plus), (d.v_minus, d.e_minus)):
            assert np.abs(block @ vec - energy * vec).max() < 1e-12
            assert np.linalg.norm(vec) == pytest.approx(1.0, abs=1e-12)
        assert abs(np.vdot(d.v_plus, d.v_minus)) < 1e-12
        # global phase fixed: first nonzero amplitude real positive
        assert d.v_plus[0].imag == 0.0 and d.v_plus[0].real > 0


def test_jc_population_limits():
    p = q.JCParams(omega=1.0, epsilon=0.8, g=0.06)
    t = np.linspace(0, 50.0, 101)
    ground = np.zeros(5)
    ground[0] = 1.0
    assert np.abs(q.jc_excited_population(ground, p, t)).max() == 0.0

    n_f = 4
    fock = np.zeros(8)
    fock[n_f] = 1.0
    pe = q.jc_excited_population(fock, p, t)
    delta = p.omega - p.epsilon
    p_max = 1.0 / (1.0 + delta**2 / (4 * n_f * p.g**2))
    assert pe.max() == pytest.approx(p_max, abs=1e-3)


def test_collapse_revival_matches_population_series():
    nbar, g = 9.0, 1.0
    t = np.linspace(0, 12.0, 100)
    cr = q.collapse_revival(nbar, g, t)
    n_top = int(nbar + 10 * math.sqrt(nbar)) + 1
    n = np.arange(n_top + 1)
    from scipy.special import gammaln
    amps = np.exp(0.5 * (n * math.log(nbar) - nbar - gammaln(n + 1)))
    amps /= np.linalg.norm(amps)
    pe = q.jc_excited_population(amps, q.JCParams(1.0, 1.0, g), t)
    assert np.abs(cr.series - pe).max() < 1e-12
    assert cr.series[0] == pytest.approx(0.0)
    assert cr.gamma_c == pytest.approx(g / math.sqrt(2.0))


def test_collapse_envelope_short_time_agreement():
    nbar, g = 100.0, 1.0
    t = np.linspace(0, 1.0, 400)
    cr = q.collapse_revival(nbar, g, t)
    assert np.abs(cr.series - cr.envelope).max() < 0.02
    longer = q.collapse_revival(nbar, g, np.linspace(0, 130.0, 50))
    assert np.allclose(longer.t_revivals, [math.pi * 20.0, math.pi * 40.0])
    # no revival at half the spacing: adjacent terms are in antiphase there
    half = q.collapse_revival(nbar, g, np.linspace(29.0, 34.0, 800))
    assert np.abs(half.series - 0.5).max() < 0.01


def test_pdc_analysis_branches():
    g = 0.5
    stable = q.pdc_analysis(q.PDCParams(delta=2 * g, g=g))
    assert stable.phase == "stable"
    assert math.cosh(2 * stable.r) == pytest.approx(2 / math.sqrt(3.0))
    assert stable.rate == pytest.approx(math.sqrt(3.0) * g)

    free = q.pdc_analysis(q.PDCParams(delta=1.3, g=0.0))
    assert free.phase == "stable" and free.r == 0.0
    assert free.rate == pytest.approx(1.3)

    unstable = q.pdc_analysis(q.PDCParams(delta=0.0, g=g))
    assert unstable.phase == "unstable"
    assert unstable.r == 0.0
    assert unstable.rate == pytest.approx(g)

    crit = q.pdc_analysis(q.PDCParams(delta=g, g=g))
    assert crit.phase == "critical"


def test_pdc_photon_number_formulas():
    g = 1.0
    t = np.linspace(0, 1.0, 11)
    stable = q.pdc_photon_number(q.PDCParams(2 * g, g), t)
    assert stable[0] == 0.0
    omega = math.sqrt(3.0)
    assert np.abs(stable - (1 / 3.0) * np.sin(omega * t) ** 2).max() < 1e-12
    assert stable.max() <= 1 / 3.0 + 1e-12

    unstable = q.pdc_photon_number(q.PDCParams(0.5 * g, g), t)
    kappa = math.sqrt(0.75)
    assert np.abs(unstable - (4 / 3.0) * np.sinh(kappa * t) ** 2).max() < 1e-12

    crit = q.pdc_photon_number(q.PDCParams(g, g), t)
    assert np.abs(crit - (g * t) ** 2).max() < 1e-12


def test_pdc_truncated_fock_oracle():
    g = 1.0
    n_max = 60
    ops = q.fock_ops(n_max)
    a2 = ops.a.entries @ ops.a.entries
    t = np.linspace(0, 1.0, 21)
    for delta in (2.0, 0.5):
        h = q.Operator(q.fock_basis(n_max),
                       delta * ops.n.entries - 0.5 * g * (a2 + a2.conj().T))
        w, v = np.linalg.eigh(h.entries)
        psi0 = np.zeros(n_max + 1, dtype=complex)
        psi0[0] = 1.0
        coeff = v.conj().T @ psi0
        numbers = []
        for tv in t:
            psi = v @ (np.exp(-1j * w * tv) * coeff)
            numbers.append(float(np.real(psi.conj() @ ops.n.entries @ psi)))
        analytic = q.pdc_photon_number(q.PDCParams(delta, g), t)
        assert np.abs(np.array(numbers) - analytic).max() < 1e-4


def test_bloch_vector_validation():
    with pytest.raises(ValidationError):
        q.integrate_bloch([1.2, 0, 0.4], lambda _: np.zeros(3),
                          np.linspace(0, 1, 3))


def test_collapse_revival_small_nbar_keeps_tail_bound():
    t = np.linspace(0, 5.0, 20)
    cr = q.collapse_revival(0.3, 1.0, t)
    assert np.all(np.isfinite(cr.series))
    pe = q.jc_excited_population(
        _poisson_amplitudes(0.3, 15), q.JCParams(1.0, 1.0, 1.0), t)
    assert np.abs(cr.series - pe).max() < 1e-12


def _poisson_amplitudes(nbar, n_top):
    from scipy.special import gammaln
    n = np.arange(n_top + 1)
    amps = np.exp(0.5 * (n * math.log(nbar) - nbar - gammaln(n + 1)))
    return amps / np.linalg.norm(amps)


def test_solve_linear_rejects_ill_conditioned_eigenbasis():
    b = np.array([[1.0, 1.0], [0.0, 1.0 + 1e-14]])  # near-defective
    with pytest.raises(q.QuopticsError):
        q.solve_linear(q.LinearSystem(b), [1.0, 0.0], np.linspace(0, 1, 3))
