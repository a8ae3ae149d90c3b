"""Two-time correlation functions, photon statistics, and noise spectra.

Stationary correlators are evaluated in the Schroedinger picture as
tr{B exp(L tau)[C rho A]}; closed operator sets go through the moment-matrix
shortcut after an explicit closure verification.  Spectra are one-sided
Fourier transforms of stationary covariances, exploiting c(-tau) = c(tau)*.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from .lindblad import (
    LangevinLinearModel,
    LindbladModel,
    _propagate_matrix_series,
    build_liouvillian,
    langevin_steady,
    moment_rhs,
    steady_state,
)
from .operators import (
    BasisMismatchError,
    DensityMatrix,
    Operator,
    QuopticsError,
    ValidationError,
    fock_basis,
    fock_ops,
)
from .settings import DEFAULT, Settings


# ---------------------------------------------------------------------------
# Series containers
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationSeries:
    tau: np.ndarray
    values: np.ndarray
    kind: str = "G2"
    normalization: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        tau = np.array(self.tau, dtype=float)
        vals = np.array(self.values, dtype=complex)
        if tau[0] != 0.0 or np.any(np.diff(tau) <= 0):
            raise ValidationError("tau grid must increase strictly from 0")
        if vals.shape != tau.shape:
            raise ValidationError("tau/values length mismatch")
        tau.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "values", vals)
        if self.kind == "G2" and np.max(np.abs(vals.imag)) > 1e-8 * max(
            1.0, np.max(np.abs(vals))
        ):
            raise ValidationError("G2 correlators must be real")


@dataclass(frozen=True)
class SpectrumSeries:
    omega: np.ndarray
    values: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        om = np.array(self.omega, dtype=float)
        vals = np.array(self.values, dtype=float)
        if not (np.all(np.isfinite(om)) and np.all(np.isfinite(vals))):
            raise ValidationError("spectrum values must be finite")
        om.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "values", vals)


# ---------------------------------------------------------------------------
# Quantum regression
# ---------------------------------------------------------------------------

def regression_correlator(a: Operator, b: Operator, c: Operator,
                          m: LindbladModel, tau_grid,
                          initial="steady", kind: str = "generic",
                          settings: Settings = DEFAULT) -> CorrelationSeries:
    """lim_t <A(t) B(t+tau) C(t)> = tr{B exp(L tau)[C rho A]}.

    ``initial`` is the steady state by default; pass a DensityMatrix to
    correlate from a specific state instead.
    """
    for op in (a, b, c):
        if op.basis != m.basis:
            raise BasisMismatchError("operator/model basis mismatch")
    rho = steady_state(m, settings) if initial == "steady" else initial
    seed = c.entries @ rho.entries @ a.entries
    tau = np.asarray(tau_grid, dtype=float)
    mats = _propagate_matrix_series(m, seed, tau, settings)
    values = np.array([np.trace(b.entries @ s) for s in mats])
    return CorrelationSeries(tau=tau, values=values, kind=kind)


def g2_normalized(series: CorrelationSeries, n_mean: float) -> CorrelationSeries:
    """Divide an intensity correlator by the squared mean photon number."""
    if n_mean <= 0:
        raise ValidationError("normalization requires a positive emission rate")
    return CorrelationSeries(
        tau=series.tau, values=series.values / n_mean**2, kind="G2",
        normalization={"n_mean": n_mean},
    )


def regression_formula(ops, coeff: np.ndarray, a: Operator, c: Operator,
                       m: LindbladModel, tau_grid,
                       initial="steady", n_check: int = 12,
                       rng_seed: int = 7,
                       settings: Settings = DEFAULT) -> list[CorrelationSeries]:
    """Two-time correlators of a closed operator set from its moment matrix.

    Verifies (on random states) that d<B_j>/dt = sum_k M_jk <B_k> before
    solving d/dtau <A B_j(t+tau) C> = M <A B(t+tau) C> with initial
    condition tr{A B_j C rho}.
    """
    coeff = np.asarray(coeff, dtype=complex)
    dim = m.basis.total_dim
    rng = np.random.default_rng(rng_seed)
    # random check states are damped toward high indices: moment equations
    # on a truncated ladder only close away from the cutoff
    envelope = np.exp(-0.5 * np.arange(dim))
    for _ in range(n_check):
        r = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        r *= envelope[:, None]
        rho_m = r @ r.conj().T
        rho = DensityMatrix(m.basis, rho_m / rho_m.trace())
        moments = np.array([np.trace(op.entries @ rho.entries) for op in ops])
        rhs = np.array([moment_rhs(op, m, rho) for op in ops])
        resid = np.max(np.abs(rhs - coeff @ moments))
        scale = max(1.0, float(np.max(np.abs(moments))),
                    float(np.max(np.abs(coeff))))
        if resid > settings.eps_close * scale:
            raise QuopticsError(
                f"operator set does not close: residual {resid:.3e}"
            )
    rho = steady_state(m, settings) if initial == "steady" else initial
    g0 = np.array([
        np.trace(a.entries @ op.entries @ c.entries @ rho.entries) for op in ops
    ])
    tau = np.asarray(tau_grid, dtype=float)
    w, s = np.linalg.eig(coeff)
    c0 = np.linalg.solve(s, g0)
    g = (np.exp(np.outer(tau, w)) * c0) @ s.T
    return [
        CorrelationSeries(tau=tau, values=g[:, j], kind="generic")
        for j in range(len(ops))
    ]


# ---------------------------------------------------------------------------
# Resonance fluorescence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RFParams:
    """Saturation parameter P = |E|^2 / (gamma^2 + Delta^2) plus decay rate."""

    p_sat: float
    gamma: float
    resonant: bool = True

    def __post_init__(self):
        if self.p_sat < 0 or self.gamma <= 0:
            raise ValidationError("need P >= 0 and gamma > 0")


@dataclass(frozen=True)
class RFAnalytics:
    pe_bar: float
    g2: CorrelationSeries


def _rf_oscillatory(x: np.ndarray, q: float) -> np.ndarray:
    """cosh(q x) + 5 sinh(q x)/q for q >= 0 (q -> 0 limit included)."""
    if q > 1e-7:
        return np.cosh(q * x) + 5.0 * np.sinh(q * x) / q
    return 1.0 + 5.0 * x


def rf_analytics(p: RFParams, tau_grid) -> RFAnalytics:
    """Steady excitation and the antibunched intensity correlation.

    pe_bar = P / (2 (1 + P)).  On resonance the normalized correlation obeys
    p'' + 5 gamma p' + 4 gamma^2 (1+P) p = 2 gamma^2 P with p(0) = p'(0) = 0,
    whose solution is 1 - e^{-5 gamma tau / 2} [cosh(r gamma tau / 2)
    + 5 sinh(r gamma tau / 2) / r], r = sqrt(9 - 16 P); for P > 9/16 the
    hyperbolic pair turns trigonometric, so values stay real by construction.
    """
    tau = np.asarray(tau_grid, dtype=float)
    pe_bar = p.p_sat / (2.0 * (1.0 + p.p_sat))
    if not p.resonant:
        raise ValidationError("the closed-form g2 is resonant only")
    disc = 9.0 - 16.0 * p.p_sat
    x = 0.5 * p.gamma * tau
    if disc > 1e-12:
        r = math.sqrt(disc)
        body = _rf_oscillatory(x, r)
    elif disc < -1e-12:
        s = math.sqrt(-disc)
        body = np.cos(s * x) + 5.0 * np.sin(s * x) / s
    else:
        body = 1.0 + 5.0 * x
    vals = 1.0 - np.exp(-5.0 * x) * body
    g2 = CorrelationSeries(tau=tau, values=vals.astype(complex), kind="G2",
                           normalization={"pe_bar": pe_bar})
    return RFAnalytics(pe_bar=pe_bar, g2=g2)


# ---------------------------------------------------------------------------
# Below-threshold OPO
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OPOParams:
    gamma: float
    g: float

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValidationError("gamma must be positive")
        if not 0.0 <= self.g < self.gamma:
            raise ValidationError("below threshold requires 0 <= g < gamma")

    @property
    def sigma(self) -> float:
        return self.g / self.gamma


def opo_spectra(p: OPOParams, omega_grid) -> tuple[SpectrumSeries, SpectrumSeries]:
    """Output quadrature noise spectra of the resonant below-threshold OPO.

    V0 = 1 + 4 sigma / ((1-sigma)^2 + (w/gamma)^2) (antisqueezed) and
    Vpi2 = 1 - 4 sigma / ((1+sigma)^2 + (w/gamma)^2); their product is 1.
    """
    om = np.asarray(omega_grid, dtype=float)
    s = p.sigma
    x2 = (om / p.gamma) ** 2
    v0 = 1.0 + 4.0 * s / ((1.0 - s) ** 2 + x2)
    vpi2 = 1.0 - 4.0 * s / ((1.0 + s) ** 2 + x2)
    meta = {"sigma": s, "phase": 0.0}
    return (
        SpectrumSeries(om, v0, meta=meta),
        SpectrumSeries(om, vpi2, meta={"sigma": s, "phase": math.pi / 2}),
    )


def opo_g2(p: OPOParams, tau_grid) -> CorrelationSeries:
    """Steady intensity correlator assembled by Gaussian factorization:
    G2(tau) = |<a^dag(t) a^dag(t+tau)>|^2 + |<a^dag(t) a(t+tau)>|^2 + n^2."""
    tau = np.asarray(tau_grid, dtype=float)
    s = p.sigma
    g_ = p.gamma
    anon = 0.25 * (s / (1.0 - s) * np.exp(-(1.0 - s) * g_ * tau)
                   + s / (1.0 + s) * np.exp(-(1.0 + s) * g_ * tau))
    norm = 0.25 * (s / (1.0 - s) * np.exp(-(1.0 - s) * g_ * tau)
                   - s / (1.0 + s) * np.exp(-(1.0 + s) * g_ * tau))
    n_ss = s * s / (2.0 * (1.0 - s * s))
    vals = anon**2 + norm**2 + n_ss**2
    return CorrelationSeries(tau=tau, values=vals.astype(complex), kind="G2",
                             normalization={"n_steady": n_ss})


def opo_lindblad_model(gamma: float, g: float, n_max: int) -> LindbladModel:
    """Fock-truncated resonant OPO: H = i g (a^dag^2 - a^2)/2, decay gamma."""
    ops = fock_ops(n_max)
    a2 = ops.a.entries @ ops.a.entries
    h = Operator(fock_basis(n_max), 0.5j * g * (a2.conj().T - a2))
    return LindbladModel(fock_basis(n_max), h, ((gamma, ops.a),))


# ---------------------------------------------------------------------------
# Numeric noise spectra
# ---------------------------------------------------------------------------

def _mode_two_time(model: LangevinLinearModel, tau: np.ndarray) -> np.ndarray:
    """G(tau) = <delta v(t+tau) delta v(t)^dag> = exp(A tau) M, stacked."""
    moments = langevin_steady(model).second
    w, s = np.linalg.eig(model.a)
    sinv = np.linalg.solve(s, moments)
    # G(tau) = S diag(e^{w tau}) S^-1 M for every tau at once
    phases = np.exp(np.outer(tau, w))                     # (nt, n)
    return np.einsum("ij,tj,jk->tik", s, phases, sinv)


def _normally_ordered_quadrature_cov(g_tau: np.ndarray, phase: float) -> np.ndarray:
    """Output-field <: dX^phi(t) dX^phi(t+tau) :> from the system (a, a^dag)
    two-time matrix, tau > 0.

    The vacuum input contributions cancel only for specific time orders:
    the annihilator pair needs the later time on the left (causality), the
    creator pair the earlier time on the left, and both orders of the
    number-like pair appear.  In terms of G(tau) = <v(t+tau) v(t)^dag>:
    c = e^{-2i phi} G_12 + e^{+2i phi} G_12^* + G_22 + G_22^*.
    """
    g12 = g_tau[:, 0, 1]   # <a(t+tau) a(t)>
    g22 = g_tau[:, 1, 1]   # <a^dag(t+tau) a(t)>
    e2 = np.exp(-2j * phase)
    return e2 * g12 + np.conj(e2 * g12) + g22 + np.conj(g22)


def _one_sided_ft(tau: np.ndarray, cov: np.ndarray,
                  omega: np.ndarray) -> np.ndarray:
    """2 Re Int_0^taumax e^{-i w tau} cov(tau) dtau, composite Simpson."""
    dtau = tau[1] - tau[0]
    weights = np.full(tau.size, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    weights *= dtau / 3.0
    kernel = np.exp(-1j * np.outer(omega, tau))
    return 2.0 * np.real(kernel @ (cov * weights))


def spectrum_numeric(model, phase: float, omega_grid,
                     mode_op: Operator | None = None,
                     kappa_out: float | None = None,
                     tau_points_per_period: int = 60,
                     settings: Settings = DEFAULT) -> SpectrumSeries:
    """Quadrature noise spectrum V = 1 + kappa_out * FT of the normally
    ordered stationary quadrature covariance.

    Accepts a LangevinLinearModel in the (a, a^dag) mode convention or a
    LindbladModel together with the monitored ``mode_op`` and its
    input-output rate ``kappa_out``.  The tau window runs 20 decay times of
    the slowest mode with a rectangular window; the recorded leakage bound
    is attached to the metadata.
    """
    omega = np.asarray(omega_grid, dtype=float)
    if isinstance(model, LangevinLinearModel):
        if model.kappa_out is None and kappa_out is None:
            raise ValidationError("kappa_out required for the spectrum scale")
        kappa = kappa_out if kappa_out is not None else model.kappa_out
        rates = np.linalg.eigvals(model.a)
        if np.any(rates.real >= 0):
            raise QuopticsError("non-decaying correlations: drift not Hurwitz")
        tau, dtau, tail = _spectrum_tau_grid(rates, omega,
                                             tau_points_per_period)
        g_tau = _mode_two_time(model, tau)
        cov = _normally_ordered_quadrature_cov(g_tau, phase)
    elif isinstance(model, LindbladModel):
        if mode_op is None or kappa_out is None:
            raise ValidationError(
                "LindbladModel spectra need mode_op and kappa_out"
            )
        kappa = kappa_out
        liouv = build_liouvillian(model, settings).matrix
        ev = np.linalg.eigvals(liouv)
        nonzero = ev[np.abs(ev) > 1e-9 * max(1.0, np.abs(ev).max())]
        if np.any(nonzero.real > 1e-12 * max(1.0, np.abs(ev).max())):
            raise QuopticsError("non-decaying correlations in the Liouvillian")
        tau, dtau, tail = _spectrum_tau_grid(nonzero, omega,
                                             tau_points_per_period)
        cov = _lindblad_quadrature_cov(model, mode_op, phase, tau, settings)
    else:
        raise ValidationError("unsupported model type")
    values = 1.0 + kappa * _one_sided_ft(tau, cov, omega)
    return SpectrumSeries(omega, values, meta={
        "phase": phase, "kappa_out": kappa, "tau_max": float(tau[-1]),
        "dtau": dtau, "window_leakage_bound": tail,
    })


def _spectrum_tau_grid(rates: np.ndarray, omega: np.ndarray,
                       points_per_period: int):
    decay = -rates.real
    slowest = float(decay[decay > 0].min())
    tau_max = 20.0 / slowest
    f_max = max(float(np.abs(rates.imag).max()), float(np.abs(omega).max()),
                float(decay.max()), slowest)
    dtau = 2.0 * math.pi / (f_max * points_per_period)
    n = int(math.ceil(tau_max / dtau)) + 1
    if n % 2 == 0:  # Simpson weights need an odd point count
        n += 1
    tau = np.linspace(0.0, tau_max, n)
    tail = math.exp(-20.0) / slowest
    return tau, float(tau[1] - tau[0]), tail


def _lindblad_quadrature_cov(model: LindbladModel, mode_op: Operator,
                             phase: float, tau: np.ndarray,
                             settings: Settings) -> np.ndarray:
    rho = steady_state(model, settings)
    mean = np.trace(mode_op.entries @ rho.entries)
    da = mode_op.entries - mean * np.eye(mode_op.dim)
    da_dag = da.conj().T

    # regression seeds; time orders chosen so the vacuum-input terms of the
    # output covariance cancel (see _normally_ordered_quadrature_cov)
    mats_rho_dag = _propagate_matrix_series(
        model, rho.entries @ da_dag, tau, settings)
    mats_da_rho = _propagate_matrix_series(
        model, da @ rho.entries, tau, settings)
    g_dag_da = np.array([np.trace(da @ s) for s in mats_rho_dag])
    # <da(t+tau) da(t)> = tr{da e^{L tau}[da rho]}
    g_da_da = np.array([np.trace(da @ s) for s in mats_da_rho])
    e2 = np.exp(-2j * phase)
    # <:dX(t) dX(t+tau):> with X = e^{-i phi} a + e^{i phi} a^dag
    return e2 * g_da_da + np.conj(e2 * g_da_da) + g_dag_da + np.conj(g_dag_da)


# ---------------------------------------------------------------------------
# Input-output scaling
# ---------------------------------------------------------------------------

def input_output_scale(series: CorrelationSeries, kappa: float,
                       counts: tuple[int, int]) -> CorrelationSeries:
    """Scale a system correlator with N daggered and M plain operators to
    the output field: multiply by kappa^{(N+M)/2}.

    The caller picks kappa = 2 gamma for a cavity and kappa = gamma for an
    atom (half of the atomic radiation reaches the collected direction);
    normalized correlators are unchanged by this scaling.
    """
    n, m_ = counts
    factor = kappa ** (0.5 * (n + m_))
    meta = dict(series.normalization)
    meta.update({"kappa": kappa, "counts": (n, m_),
                 "convention": "cavity kappa=2*gamma, atom kappa=gamma"})
    return CorrelationSeries(tau=series.tau, values=series.values * factor,
                             kind=series.kind, normalization=meta)
