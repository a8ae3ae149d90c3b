"""Adiabatic-elimination machinery: second-order effective Hamiltonians by
projectors, effective master equations from environment correlators, the
single-excitation decay problem, and the derived cooling/shift rate formulas.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .lindblad import LindbladModel
from .operators import (
    BasisSpec,
    Operator,
    QuopticsError,
    ValidationError,
    herm_residual,
)
from .settings import DEFAULT, Settings


# ---------------------------------------------------------------------------
# Projector-based effective Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ProjectorPair:
    """Hermitian projector P (Q = 1 - P implicit)."""

    p: Operator

    def __post_init__(self):
        m = self.p.entries
        if herm_residual(m) > DEFAULT.eps_herm:
            raise ValidationError("projector must be Hermitian")
        if np.abs(m @ m - m).max() > 1e3 * DEFAULT.eps_herm:
            raise ValidationError("projector must satisfy P^2 = P")

    @property
    def q(self) -> Operator:
        d = self.p.dim
        return Operator(self.p.basis, np.eye(d, dtype=complex) - self.p.entries)


@dataclass(frozen=True)
class EffectiveHamiltonian:
    """Second-order effective Hamiltonian with its elimination residuals.

    ``secular`` is the time-averaged generator, the piece normally kept as
    the effective model; ``hamiltonian`` is the full second-order form at the
    requested horizon.  ``hermiticity_residual`` is the worst |H - H^dag|
    entry over the horizon and ``time_dependent_tail`` bounds the oscillatory
    part dropped by the secular form; both are reported, never zeroed.
    """

    hamiltonian: Operator
    secular: Operator
    hermiticity_residual: float
    time_dependent_tail: float


def effective_hamiltonian_2nd(h0: Operator, h1: Operator, proj: ProjectorPair,
                              t_horizon: float,
                              settings: Settings = DEFAULT,
                              n_residual_samples: int = 201) -> EffectiveHamiltonian:
    """Eliminate the complement of P to second order in H1.

    Builds P H0 P + Int_0^t (dtau / i) P H1 H1(tau) P with
    H1(tau) = e^{-i H0 tau} H1 e^{i H0 tau} in the H0 eigenbasis, which makes
    the time integral analytic: the secular weight of a virtual transition of
    energy gap w is -1/w (the standard second-order level shift) and the
    oscillatory remainder carries e^{-i w t} / w.  Requires [P, H0] = 0; a
    nonzero P H1 P block is moved into H0 first.
    """
    p = proj.p.entries
    h0m = h0.entries.copy()
    h1m = h1.entries.copy()
    scale = max(1.0, float(np.abs(h0m).max()))
    if np.abs(p @ h0m - h0m @ p).max() > 1e3 * settings.eps_herm * scale:
        raise QuopticsError("P does not commute with H0")
    php = p @ h1m @ p
    if np.abs(php).max() > settings.eps_herm:
        h0m = h0m + php
        h1m = h1m - php

    w, u = np.linalg.eigh(0.5 * (h0m + h0m.conj().T))
    h1e = u.conj().T @ h1m @ u
    pe = u.conj().T @ p @ u
    gaps = w[:, None] - w[None, :]  # w_{mk} = E_m - E_k
    small = np.abs(gaps) < 1e-12 * max(1.0, float(np.abs(gaps).max()))
    inv_gaps = np.where(small, 0.0, 1.0 / np.where(small, 1.0, gaps))

    def second_order(fmat: np.ndarray) -> np.ndarray:
        # (P H1)_{jm} (H1)_{mk} f(w_{mk}) (P)_{k.}; f enters on the m->k gap
        return pe @ (h1e @ (h1e * fmat)) @ pe

    def osc_factor(t: float) -> np.ndarray:
        out = np.where(small, -1j * t, np.exp(-1j * gaps * t) * inv_gaps)
        return out

    h0_proj = pe @ np.diag(w).astype(complex) @ pe
    sec = h0_proj + second_order(-inv_gaps)
    full = h0_proj + second_order(-inv_gaps + osc_factor(t_horizon))

    resid = 0.0
    for t in np.linspace(0.0, t_horizon, n_residual_samples):
        ht = h0_proj + second_order(-inv_gaps + osc_factor(t))
        resid = max(resid, float(np.abs(ht - ht.conj().T).max()))
    pe_abs = np.abs(pe)
    envelope = pe_abs @ (np.abs(h1e) @ (np.abs(h1e) * np.abs(inv_gaps))) @ pe_abs
    tail = float(envelope.max())

    back = lambda m: Operator(h0.basis, u @ m @ u.conj().T)
    return EffectiveHamiltonian(
        hamiltonian=back(full),
        secular=back(sec),
        hermiticity_residual=resid,
        time_dependent_tail=tail,
    )


# ---------------------------------------------------------------------------
# Generator -> Lindblad-form refit
# ---------------------------------------------------------------------------

def _reshuffle(t_matrix: np.ndarray, d: int) -> np.ndarray:
    """Map a column-stacked superoperator to the Hermitian sandwich matrix R
    with T[rho] = sum_mu lam_mu A_mu rho A_mu^dag for R = sum lam vec(A)vec(A)^dag."""
    t4 = t_matrix.reshape(d, d, d, d)        # axes (j, i, l, k)
    r4 = np.transpose(t4, (3, 1, 2, 0))      # axes (k, i, l, j)
    return r4.reshape(d * d, d * d)


def _hermitian_basis(d: int) -> list[np.ndarray]:
    """Identity-first orthonormal (Frobenius) Hermitian basis of d x d."""
    basis = [np.eye(d, dtype=complex) / math.sqrt(d)]
    for j in range(d):
        for k in range(j + 1, d):
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = m[k, j] = 1.0 / math.sqrt(2.0)
            basis.append(m)
            m = np.zeros((d, d), dtype=complex)
            m[j, k] = -1j / math.sqrt(2.0)
            m[k, j] = 1j / math.sqrt(2.0)
            basis.append(m)
    for j in range(1, d):
        m = np.zeros((d, d), dtype=complex)
        m[:j, :j] = np.eye(j)
        m[j, j] = -j
        basis.append(m / math.sqrt(j * (j + 1)))
    return basis


def lindblad_decompose(t_matrix: np.ndarray, basis: BasisSpec,
                       rate_tol: float = 1e-12):
    """Split a Hermiticity- and trace-preserving generator into a Hamiltonian
    commutator plus jump dissipators (our 2 J rho J^dag convention).

    Expands T[rho] = sum_ab c_ab G_a rho G_b over an identity-first Hermitian
    operator basis; the traceless block of c is the Kossakowski matrix whose
    eigen-directions become jump operators, the identity cross terms carry
    the Hamiltonian.  Significantly negative dissipation directions are
    dropped and reported, never silently absorbed.
    """
    d = basis.total_dim
    r2 = _reshuffle(t_matrix, d)
    herm_res = float(np.abs(r2 - r2.conj().T).max())
    ops = _hermitian_basis(d)
    b_mat = np.stack([g.reshape(-1, order="F") for g in ops], axis=1)
    c = b_mat.conj().T @ (0.5 * (r2 + r2.conj().T)) @ b_mat
    scale = max(1.0, float(np.abs(c).max()))

    # K rho + rho K^dag collects the identity cross terms
    sqrt_d = math.sqrt(d)
    k_op = (c[0, 0] / (2.0 * d)) * np.eye(d, dtype=complex)
    for a_idx in range(1, len(ops)):
        k_op += (np.conj(c[0, a_idx]) / sqrt_d) * ops[a_idx]
    h = 0.5j * (k_op - k_op.conj().T)

    chi = 0.5 * (c[1:, 1:] + c[1:, 1:].conj().T)
    evals, evecs = np.linalg.eigh(chi)
    jumps = []
    dropped = 0.0
    for val, v in zip(evals, evecs.T):
        if abs(val) < rate_tol * scale:
            continue
        if val < 0:
            dropped = max(dropped, float(-val))
            continue
        j = sum(vq * g for vq, g in zip(v, ops[1:]))
        jumps.append((float(val) / 2.0, Operator(basis, j)))

    eye = np.eye(d, dtype=complex)
    rebuilt = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in jumps:
        j = op.entries
        jdj = j.conj().T @ j
        rebuilt += rate * (2.0 * np.kron(j.conj(), j) - np.kron(eye, jdj)
                           - np.kron(jdj.T, eye))
    report = {
        "choi_hermiticity_residual": herm_res,
        "refit_residual": float(np.abs(rebuilt - t_matrix).max()),
        "dropped_negative_weight": dropped,
    }
    return Operator(basis, h), jumps, report


# ---------------------------------------------------------------------------
# Effective master equations from environment correlators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExponentialCorrelator:
    """amp * exp(-rate * tau) with Re rate > 0."""

    amp: complex
    rate: complex

    def __post_init__(self):
        if complex(self.rate).real <= 0:
            raise ValidationError("correlators must decay")


@dataclass(frozen=True)
class EffectiveMasterResult:
    model: LindbladModel
    report: dict = field(default_factory=dict)


def effective_master_2nd(system: LindbladModel, interaction,
                         c_corr: dict, k_corr: dict,
                         h_slow: Operator | None = None,
                         settings: Settings = DEFAULT) -> EffectiveMasterResult:
    """Second-order time-local master equation from environment correlators.

    ``interaction`` lists (g_m, S_m) system couplings to environment
    operators E_m; ``c_corr[(m, n)]`` and ``k_corr[(n, m)]`` hold
    ExponentialCorrelator entries for <E_m(t) E_n(t+tau)> and
    <E_n(t+tau) E_m(t)>.  The tau integrals are taken to their long-time
    limits analytically in the eigenbasis of ``h_slow`` (the system
    Hamiltonian that survives on the correlator timescale); the assembled
    generator is refit into Lindblad form and returned together with a
    self-consistency report comparing correlator decay to effective rates.
    """
    basis = system.basis
    d = basis.total_dim
    if h_slow is None:
        h_slow = Operator(basis, np.zeros((d, d), dtype=complex))
    w, u = np.linalg.eigh(0.5 * (h_slow.entries + h_slow.entries.conj().T))
    gaps = w[:, None] - w[None, :]

    def tilde_integral(corr: ExponentialCorrelator, s_op: np.ndarray) -> np.ndarray:
        """Int_0^inf corr(tau) S(tau) dtau, S(tau) = e^{-iH tau} S e^{iH tau}."""
        se = u.conj().T @ s_op @ u
        integ = corr.amp / (corr.rate + 1j * gaps)
        return u @ (se * integ) @ u.conj().T

    eye = np.eye(d, dtype=complex)
    t_matrix = np.zeros((d * d, d * d), dtype=complex)
    couplings = list(interaction)
    for m_idx, (g_m, s_m) in enumerate(couplings):
        for n_idx, (g_n, s_n) in enumerate(couplings):
            gg = g_m * g_n
            cc = c_corr.get((m_idx, n_idx))
            if cc is not None:
                a_mn = tilde_integral(cc, s_m.entries)
                # + gg S_n rho A_mn, plus the Hermitian conjugate term
                t_matrix += gg * np.kron(a_mn.T, s_n.entries)
                t_matrix += np.conj(gg) * np.kron(
                    s_n.entries.conj(), a_mn.conj().T)
            kk = k_corr.get((n_idx, m_idx))
            if kk is not None:
                b_nm = tilde_integral(kk, s_m.entries)
                # - gg S_n B_nm rho, plus the Hermitian conjugate term
                t_matrix -= gg * np.kron(eye, s_n.entries @ b_nm)
                t_matrix -= np.conj(gg) * np.kron(
                    (s_n.entries @ b_nm).conj(), eye)

    h_fit, jumps, decomp = lindblad_decompose(t_matrix, basis)
    h_total = Operator(basis, system.h.entries + h_fit.entries)
    model = LindbladModel(basis, h_total, tuple(system.jumps) + tuple(jumps))

    corr_rate = min(
        min((complex(c.rate).real for c in c_corr.values()), default=math.inf),
        min((complex(k.rate).real for k in k_corr.values()), default=math.inf),
    )
    eff_rate = max(
        (rate * float(np.linalg.norm(op.entries, 2)) ** 2
         for rate, op in jumps), default=0.0,
    )
    report = dict(decomp)
    report.update({
        "correlator_decay_rate": corr_rate,
        "max_effective_rate": eff_rate,
        "rate_separation": corr_rate / eff_rate if eff_rate else math.inf,
    })
    if eff_rate and corr_rate / eff_rate < 10.0:
        report["warning"] = (
            "effective rates are not well separated from the correlator decay"
        )
        warnings.warn(report["warning"], stacklevel=2)
    return EffectiveMasterResult(model=model, report=report)


def purcell_effective_model(g: float, kappa: float, gamma: float, delta: float,
                            nbar: float,
                            settings: Settings = DEFAULT) -> EffectiveMasterResult:
    """Assemble the cavity-cooled atom model by eliminating the cavity.

    System: hot two-level emitter (rates gamma (nbar+1) on sigma and
    gamma nbar on sigma^dag, frame rotating at the transition).  Environment:
    a damped cavity mode detuned by ``delta`` whose only surviving
    correlator is <a(t) a^dag(t+tau)> = e^{-(kappa - i delta) tau}.
    """
    from .operators import pauli_ops, two_level_basis

    pl = pauli_ops()
    basis = two_level_basis()
    h0 = Operator(basis, np.zeros((2, 2), dtype=complex))
    jumps = [(gamma * (nbar + 1.0), pl.sm)]
    if nbar > 0:
        jumps.append((gamma * nbar, pl.sp))
    system = LindbladModel(basis, h0, tuple(jumps))
    interaction = [(g, pl.sp), (g, pl.sm)]   # couples to (a, a^dag)
    c_corr = {(0, 1): ExponentialCorrelator(1.0, kappa - 1j * delta)}
    k_corr = {(0, 1): ExponentialCorrelator(1.0, kappa + 1j * delta)}
    return effective_master_2nd(system, interaction, c_corr, k_corr,
                                settings=settings)


# ---------------------------------------------------------------------------
# Closed-form rate formulas
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PurcellRates:
    gamma_eff: float
    nbar_eff: float
    delta_eps: float
    cooperativity: float


def purcell_rates(g: float, kappa: float, gamma: float, delta: float,
                  nbar: float) -> PurcellRates:
    """Cavity-enhanced decay of a hot two-level emitter.

    Gamma_eff = gamma [1 + C / (1 + (Delta/kappa)^2)] with cooperativity
    C = g^2 / (kappa gamma); nbar_eff = nbar / (1 + C / (1 + (Delta/kappa)^2));
    level shift delta_eps = -g^2 Delta / (kappa^2 + Delta^2), entering the
    effective Hamiltonian as +(epsilon + delta_eps)/2 sigma_z.
    """
    if g < 0 or kappa <= 0 or gamma <= 0 or nbar < 0:
        raise ValidationError("rates must be positive (g, nbar >= 0)")
    coop = g * g / (kappa * gamma)
    enh = coop / (1.0 + (delta / kappa) ** 2)
    return PurcellRates(
        gamma_eff=gamma * (1.0 + enh),
        nbar_eff=nbar / (1.0 + enh),
        delta_eps=-g * g * delta / (kappa * kappa + delta * delta),
        cooperativity=coop,
    )


@dataclass(frozen=True)
class OptomechRates:
    gamma_minus_opt: float   # cooling sideband rate
    gamma_plus_opt: float    # heating sideband rate
    domega_minus: float
    domega_plus: float
    gamma_eff: float
    nbar_eff: float


def optomech_rates(g: complex, kappa: float, gamma: float, delta: float,
                   omega_m: float, nbar: float) -> OptomechRates:
    """Sideband cooling rates of a mechanical mode driven through a cavity.

    Gamma_-^opt carries the (Delta + Omega_m) resonance (cooling) and
    Gamma_+^opt the (Delta - Omega_m) one (heating); in the red-sideband
    resolved regime nbar_eff bottoms out at nbar/C + kappa^2/(4 Omega_m^2).
    """
    if kappa <= 0 or gamma <= 0 or nbar < 0 or omega_m <= 0:
        raise ValidationError("rates must be positive (nbar >= 0)")
    g2 = abs(g) ** 2

    def lorentz(shift: float) -> float:
        return (g2 / kappa) / (1.0 + (shift / kappa) ** 2)

    def pull(shift: float) -> float:
        return g2 * shift / (kappa * kappa + shift * shift)

    gm = lorentz(delta + omega_m)
    gp = lorentz(delta - omega_m)
    gamma_eff = gamma + gm - gp
    nbar_eff = (gamma * nbar + gp) / gamma_eff
    return OptomechRates(
        gamma_minus_opt=gm, gamma_plus_opt=gp,
        domega_minus=pull(delta + omega_m), domega_plus=pull(delta - omega_m),
        gamma_eff=gamma_eff, nbar_eff=nbar_eff,
    )


# ---------------------------------------------------------------------------
# Single-excitation decay into a continuum
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WWResult:
    t: np.ndarray
    k: np.ndarray
    alpha_t: np.ndarray          # excited amplitude e^{-gamma t}
    beta_k_t: np.ndarray         # photon amplitudes, shape (nt, nk)
    norm_residual: float


def default_k_grid(gamma: float, epsilon: float, span: float = 100.0,
                   n_core: int = 4001) -> np.ndarray:
    """Uniform grid over the emission line, [epsilon - span*gamma, +span*gamma].

    The default span keeps the analytic-tail error of the norm identity below
    1e-6 whenever the transition sits well above the linewidth.
    """
    lo = max(epsilon - span * gamma, 1e-3 * gamma)
    return np.linspace(lo, epsilon + span * gamma, n_core)


def _osc_tail(a_over: float, t: np.ndarray, gamma: float) -> np.ndarray:
    """Int_a^inf cos(x t)/(gamma^2 + x^2) dx for a >> gamma, via 1/x^2."""
    from scipy.special import sici

    out = np.empty_like(t)
    for i, tv in enumerate(t):
        if tv == 0.0:
            out[i] = 1.0 / a_over
        else:
            si, _ = sici(a_over * tv)
            out[i] = math.cos(a_over * tv) / a_over - tv * (math.pi / 2 - si)
    return out


def wigner_weisskopf(gamma: float, epsilon: float, k_grid=None, t_grid=None,
                     settings: Settings = DEFAULT) -> WWResult:
    """Closed-form single-excitation dynamics of an emitter in a 1-D continuum.

    alpha(t) = e^{-gamma t} and beta(k, t) = sqrt(gamma/2pi)
    (1 - e^{-(gamma - i(|k| - epsilon)) t}) / (gamma - i(|k| - epsilon))
    (unit propagation speed; both directions counted, so the k grid covers
    positive wavevectors only).  The norm identity
    |alpha|^2 + Int |beta|^2 dk = 1 is checked on the grid with analytic
    Lorentzian tails beyond the edges.
    """
    if gamma <= 0 or epsilon <= 0:
        raise ValidationError("gamma and epsilon must be positive")
    t = (np.linspace(0.0, 5.0 / gamma, 51) if t_grid is None
         else np.asarray(t_grid, dtype=float))
    if k_grid is None:
        k = default_k_grid(gamma, epsilon)
    else:
        k = np.asarray(k_grid, dtype=float)
        if k.min() > epsilon - 30.0 * gamma or k.max() < epsilon + 30.0 * gamma:
            raise QuopticsError(
                "k grid must span at least +-30 gamma around the transition"
            )
    dk = float(np.max(np.diff(k)))
    t_max = float(np.max(t))
    if t_max > 0 and dk > math.pi / (4.0 * t_max):
        raise QuopticsError(
            f"k spacing {dk:.3g} aliases oscillations up to t={t_max:.3g}"
        )
    detune = np.abs(k) - epsilon
    denom = gamma - 1j * detune
    alpha_t = np.exp(-gamma * t)
    beta = (math.sqrt(gamma / (2.0 * math.pi))
            * (1.0 - np.exp(-np.outer(t, denom))) / denom)
    norm_k = np.trapezoid(2.0 * np.abs(beta) ** 2, k, axis=1)

    # analytic continuation of the line shape beyond the grid edges
    hi = float(detune.max())
    lo = float(-detune.min())
    lorentz_tail = (1.0 / math.pi) * (
        (math.pi / 2 - math.atan(hi / gamma))
        + (math.pi / 2 - math.atan(lo / gamma))
    )
    osc = _osc_tail(hi, t, gamma) + _osc_tail(lo, t, gamma)
    tail = ((1.0 + alpha_t**2) * lorentz_tail
            - (2.0 * gamma / math.pi) * alpha_t * osc)
    total = alpha_t**2 + norm_k + tail
    resid = float(np.max(np.abs(total - 1.0)))
    if resid > max(settings.eps_ww, 1e-3):
        raise QuopticsError(f"norm deficit {resid:.2e}: k span insufficient")
    return WWResult(t=t, k=k, alpha_t=alpha_t, beta_k_t=beta,
                    norm_residual=resid)


def lamb_shift_estimate(gamma: float, epsilon: float, lam: float) -> float:
    """Logarithmic level-shift estimate -(gamma / pi) ln(Lambda / epsilon)."""
    if not lam >= epsilon > 0:
        raise ValidationError("need Lambda >= epsilon > 0")
    return -(gamma / math.pi) * math.log(lam / epsilon)
