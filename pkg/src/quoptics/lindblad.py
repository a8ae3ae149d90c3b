"""Lindblad master-equation engine and the linear quantum-Langevin engine.

Superoperators act on column-stacked density matrices: vec(rho) stacks the
columns of rho (Fortran order), so vec(A rho B) = (B^T kron A) vec(rho).
The identities implied by that convention are unit-tested against direct
dissipator application.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm, solve_continuous_lyapunov

from .operators import (
    BasisMismatchError,
    BasisSpec,
    DensityMatrix,
    KetState,
    Operator,
    QuopticsError,
    ValidationError,
    fock_basis,
    fock_ops,
    herm_residual,
)
from .settings import DEFAULT, Settings


def vec(rho: np.ndarray) -> np.ndarray:
    return rho.reshape(-1, order="F")


def unvec(v: np.ndarray) -> np.ndarray:
    d = int(round(math.sqrt(v.size)))
    return v.reshape(d, d, order="F")


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DriveTerm:
    """Injection term amp * e^{-i freq t} A^dag + amp* e^{+i freq t} A."""

    op: Operator
    amp: complex
    frequency: float


@dataclass(frozen=True)
class LindbladModel:
    """Hamiltonian plus (rate, jump-operator) pairs, all on one basis.

    The dissipator convention is kappa * (2 J rho J^dag - J^dag J rho
    - rho J^dag J); an optional monochromatic drive keeps time dependence
    explicit until a frame change removes it.
    """

    basis: BasisSpec
    h: Operator
    jumps: tuple
    drive: DriveTerm | None = None

    def __post_init__(self):
        object.__setattr__(self, "jumps", tuple(self.jumps))
        if self.h.basis != self.basis:
            raise BasisMismatchError("Hamiltonian basis mismatch")
        for rate, op in self.jumps:
            if rate < 0:
                raise ValidationError("jump rates must be non-negative")
            if op.basis != self.basis:
                raise BasisMismatchError("jump-operator basis mismatch")
        if self.drive is not None and self.drive.op.basis != self.basis:
            raise BasisMismatchError("drive-operator basis mismatch")

    def validate(self, settings: Settings = DEFAULT) -> None:
        res = herm_residual(self.h.entries)
        if res > settings.eps_herm:
            raise ValidationError(f"Hamiltonian residual {res:.3e}")


@dataclass(frozen=True)
class Superoperator:
    matrix: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def trace_residual(self) -> float:
        d = self.basis.total_dim
        row = vec(np.eye(d, dtype=complex)).conj() @ self.matrix
        return float(np.max(np.abs(row)))


@dataclass(frozen=True)
class CavityParams:
    """Driven, damped cavity in the frame rotating at the laser frequency."""

    omega_c: float
    gamma: float
    delta: float          # laser frequency minus cavity frequency
    drive: complex        # injection rate E
    nbar: float = 0.0

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValidationError("gamma must be positive")
        if self.nbar < 0:
            raise ValidationError("nbar must be >= 0")


def driven_cavity_model(p: CavityParams, n_max: int) -> LindbladModel:
    """Rotating-frame Lindblad model of the driven cavity."""
    ops = fock_ops(n_max)
    basis = fock_basis(n_max)
    h = (-p.delta) * ops.n + 1j * p.drive * ops.a_dag - 1j * np.conj(p.drive) * ops.a
    jumps = [((p.nbar + 1.0) * p.gamma, ops.a)]
    if p.nbar > 0:
        jumps.append((p.nbar * p.gamma, ops.a_dag))
    return LindbladModel(basis, h, tuple(jumps))


# ---------------------------------------------------------------------------
# Superoperator construction and propagation
# ---------------------------------------------------------------------------

def dissipator_apply(j: np.ndarray, rho: np.ndarray) -> np.ndarray:
    jd = j.conj().T
    jdj = jd @ j
    return 2.0 * (j @ rho @ jd) - jdj @ rho - rho @ jdj


def lindblad_rhs(m: LindbladModel, rho: np.ndarray) -> np.ndarray:
    h = m.h.entries
    out = -1j * (h @ rho - rho @ h)
    for rate, op in m.jumps:
        out += rate * dissipator_apply(op.entries, rho)
    return out


def build_liouvillian(m: LindbladModel, settings: Settings = DEFAULT) -> Superoperator:
    """Matrix of rho -> -i[H, rho] + sum_j kappa_j D_{J_j}[rho]."""
    if m.drive is not None:
        raise QuopticsError(
            "time-dependent drive present; frame_transform the model first"
        )
    m.validate(settings)
    d = m.basis.total_dim
    eye = np.eye(d, dtype=complex)
    h = m.h.entries
    liouv = -1j * (np.kron(eye, h) - np.kron(h.T, eye))
    for rate, op in m.jumps:
        j = op.entries
        jd = j.conj().T
        jdj = jd @ j
        liouv += rate * (
            2.0 * np.kron(j.conj(), j)
            - np.kron(eye, jdj)
            - np.kron(jdj.T, eye)
        )
    sup = Superoperator(liouv, m.basis)
    res = sup.trace_residual()
    if res > settings.eps_sup * max(1.0, np.abs(liouv).max()):
        raise ValidationError(f"Liouvillian trace residual {res:.3e}")
    return sup


def _propagate_matrix_series(m: LindbladModel, s0: np.ndarray, t_grid,
                             settings: Settings) -> list[np.ndarray]:
    """Propagate an arbitrary matrix under exp(L t) along t_grid."""
    t = np.asarray(t_grid, dtype=float)
    d = m.basis.total_dim
    if d <= settings.max_dense_expm_dim:
        liouv = build_liouvillian(m, settings).matrix
        out = []
        v = vec(s0)  # s0 is the state at t_grid[0]
        props: dict[float, np.ndarray] = {}
        prev_t = t[0]
        out.append(unvec(v))
        for tk in t[1:]:
            dt = tk - prev_t
            key = round(dt, 15)
            if key not in props:
                props[key] = expm(liouv * dt)
            v = props[key] @ v
            prev_t = tk
            out.append(unvec(v))
        return out

    def rhs(_, y):
        rho = unvec(y.view(complex))
        return vec(lindblad_rhs(m, rho)).view(float)

    y0 = vec(s0.astype(complex)).view(float)
    sol = solve_ivp(rhs, (t[0], t[-1]), y0, t_eval=t, method="DOP853",
                    rtol=1e-10, atol=1e-12)
    if not sol.success:
        raise QuopticsError(f"master-equation integration failed: {sol.message}")
    return [unvec(np.ascontiguousarray(col).view(complex)) for col in sol.y.T]


def evolve_master(rho0: DensityMatrix, m: LindbladModel, t_grid,
                  settings: Settings = DEFAULT,
                  check: bool = True) -> list[DensityMatrix]:
    """Master-equation evolution sampled on t_grid (t_grid[0] is the
    initial time); each output is re-validated as a density matrix."""
    rho0.validate(settings)
    if rho0.basis != m.basis:
        raise BasisMismatchError("state/model basis mismatch")
    mats = _propagate_matrix_series(m, np.array(rho0.entries), t_grid, settings)
    out = []
    for k, mat in enumerate(mats):
        rho = DensityMatrix(m.basis, mat)
        if check:
            try:
                rho.validate(Settings(eps_herm=1e-9, eps_tr=1e-9,
                                      eps_psd=settings.eps_psd))
            except ValidationError as err:
                raise ValidationError(
                    f"state invariant violated at t={np.asarray(t_grid)[k]}: {err}"
                ) from err
        out.append(rho)
    return out


def steady_state(m: LindbladModel, settings: Settings = DEFAULT) -> DensityMatrix:
    """Null vector of the Liouvillian, Hermitized and trace-normalized.

    Uniqueness of the zero eigenvalue is checked through the singular
    spectrum; degeneracy raises with the detected null dimension.
    """
    liouv = build_liouvillian(m, settings).matrix
    d = m.basis.total_dim
    scale = np.abs(liouv).max()
    svals = np.linalg.svd(liouv, compute_uv=False)
    null_dim = int(np.sum(svals < 1e-10 * scale))
    if null_dim != 1:
        raise QuopticsError(
            f"Liouvillian null space has dimension {null_dim}, expected 1"
        )
    # replace one row by the trace functional and solve L x = e
    a = liouv.copy()
    rhs_vec = np.zeros(d * d, dtype=complex)
    a[0, :] = vec(np.eye(d, dtype=complex)).conj()
    rhs_vec[0] = 1.0
    x = np.linalg.solve(a, rhs_vec)
    rho = unvec(x)
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / rho.trace().real
    out = DensityMatrix(m.basis, rho)
    res = np.max(np.abs(lindblad_rhs(m, rho)))
    if res > 1e-9 * max(scale, 1.0):
        raise QuopticsError(f"steady-state residual {res:.3e}")
    return out


def moment_rhs(a: Operator, m: LindbladModel, state) -> complex:
    """d<A>/dt evaluated on a given state:
    <[A, H]> / i + sum_j kappa_j (<[J^dag, A] J> + <J^dag [A, J]>)."""
    if a.basis != m.basis:
        raise BasisMismatchError("operator/model basis mismatch")
    rho = state.entries if isinstance(state, DensityMatrix) else \
        state.to_density_matrix().entries
    h = m.h.entries
    am = a.entries
    total = np.trace((am @ h - h @ am) @ rho) / 1j
    for rate, op in m.jumps:
        j = op.entries
        jd = j.conj().T
        total += rate * np.trace(((jd @ am - am @ jd) @ j
                                  + jd @ (am @ j - j @ am)) @ rho)
    return complex(total)


# ---------------------------------------------------------------------------
# Frame changes
# ---------------------------------------------------------------------------

def _proportionality(commutator: np.ndarray, op: np.ndarray) -> float | None:
    """Return c with commutator = c * op, or None if not proportional."""
    norm = np.abs(op).max()
    if norm == 0:
        return 0.0 if np.abs(commutator).max() == 0 else None
    c = np.vdot(op, commutator) / np.vdot(op, op)
    if np.abs(commutator - c * op).max() > 1e-10 * max(1.0, np.abs(commutator).max()):
        return None
    return complex(c)


def frame_transform(m: LindbladModel, generator: Operator,
                    frequency: float, settings: Settings = DEFAULT) -> LindbladModel:
    """Move to the frame rotating at ``frequency`` along a Hermitian generator.

    Requires [G, H] = 0 (so the static part is frame invariant) and each jump
    to satisfy [G, J] = c J (jumps only pick up phases, leaving dissipators
    unchanged).  A drive with matching frequency and [G, A] = -A becomes the
    static term amp A^dag + amp* A.
    """
    g = generator.entries
    if herm_residual(g) > settings.eps_herm:
        raise ValidationError("frame generator must be Hermitian")
    h = m.h.entries
    if np.abs(g @ h - h @ g).max() > 1e-10 * max(1.0, np.abs(h).max()):
        raise QuopticsError("Hamiltonian does not commute with the generator")
    for _, op in m.jumps:
        if _proportionality(g @ op.entries - op.entries @ g, op.entries) is None:
            raise QuopticsError(
                "a jump operator is not phase-covariant under the generator"
            )
    h_new = h - frequency * g
    if m.drive is not None:
        if abs(m.drive.frequency - frequency) > 0:
            raise QuopticsError(
                "drive frequency differs from the frame frequency; "
                "residual time dependence would remain"
            )
        a_op = m.drive.op.entries
        c = _proportionality(g @ a_op - a_op @ g, a_op)
        if c is None or abs(c + 1.0) > 1e-9:
            raise QuopticsError("drive operator must satisfy [G, A] = -A")
        amp = m.drive.amp
        h_new = h_new + amp * a_op.conj().T + np.conj(amp) * a_op
    return LindbladModel(m.basis, Operator(m.basis, h_new), m.jumps, drive=None)


# ---------------------------------------------------------------------------
# Driven-cavity closed forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CavityMoments:
    t: np.ndarray
    mean_a: np.ndarray     # <a>(t) in the rotating frame
    var_a: np.ndarray      # <d a^2>(t)
    n_fluct: np.ndarray    # <d a^dag d a>(t)
    steady_mean: complex
    steady_var: complex
    steady_n_fluct: float


def driven_cavity_analytic(p: CavityParams, t_grid, mean0: complex = 0.0,
                           var0: complex = 0.0,
                           nfluct0: float = 0.0) -> CavityMoments:
    """Closed-form first and second moments in the rotating frame.

    The steady amplitude is E / (gamma - i Delta), the sign fixed by the
    moment equation d<a>/dt = E - (gamma - i Delta) <a>.
    """
    t = np.asarray(t_grid, dtype=float)
    lam = p.gamma - 1j * p.delta
    decay = np.exp(-lam * t)
    mean = decay * mean0 + p.drive * (1.0 - decay) / lam
    var = np.exp(-2.0 * lam * t) * var0
    nf = np.exp(-2.0 * p.gamma * t) * nfluct0 + p.nbar * (
        1.0 - np.exp(-2.0 * p.gamma * t)
    )
    return CavityMoments(
        t=t, mean_a=mean, var_a=var, n_fluct=nf,
        steady_mean=complex(p.drive / lam), steady_var=0.0,
        steady_n_fluct=float(p.nbar),
    )


# ---------------------------------------------------------------------------
# Monte Carlo wave function
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MCWFResult:
    t: np.ndarray
    populations: np.ndarray       # ensemble-averaged |amplitude|^2, (nt, dim)
    n_traj: int
    n_jumps: np.ndarray           # jump count per trajectory
    dt: float
    seed: int


def mcwf_evolve(psi0: KetState, m: LindbladModel, t_grid, n_traj: int,
                seed: int, dt_max: float | None = None,
                settings: Settings = DEFAULT) -> MCWFResult:
    """First-order jump/no-jump unraveling of the master equation.

    No-jump segments evolve under the non-Hermitian H_eff = H - i sum_j
    kappa_j J_j^dag J_j (applied exactly through its eigendecomposition) with
    renormalization; jumps fire with probability p = 2 kappa dt <J^dag J>.
    The step is chosen so the worst-case p stays at or below 0.05.  Each
    trajectory draws from its own counter-split random stream, so the
    ensemble is reproducible for a fixed seed regardless of batching.
    """
    psi0.validate(settings)
    if psi0.basis != m.basis:
        raise BasisMismatchError("state/model basis mismatch")
    t = np.asarray(t_grid, dtype=float)
    d = m.basis.total_dim
    jump_ops = [(rate, op.entries) for rate, op in m.jumps]

    # worst-case total jump rate over the truncated space sets the step;
    # an explicit dt_max overrides it (the runtime p < 0.1 guard still holds)
    if dt_max is not None:
        dt = dt_max
    else:
        rate_bound = 0.0
        for rate, j in jump_ops:
            rate_bound += 2.0 * rate * float(
                np.linalg.eigvalsh(j.conj().T @ j).max()
            )
        dt = 0.05 / rate_bound if rate_bound > 0 else (t[-1] - t[0])
    # commensurate substepping of the output grid
    steps = np.maximum(1, np.ceil(np.diff(t) / dt).astype(int))
    dts = np.diff(t) / steps

    h_eff = m.h.entries.astype(complex).copy()
    for rate, j in jump_ops:
        h_eff = h_eff - 1j * rate * (j.conj().T @ j)
    # exact no-jump propagators per distinct substep
    props = {}
    for dtk in set(np.round(dts, 15)):
        props[dtk] = expm(-1j * h_eff * dtk)

    n_steps_total = int(steps.sum())
    # two uniforms per step per trajectory: jump decision, channel choice
    streams = np.random.SeedSequence(seed).spawn(n_traj)
    uniforms = np.empty((n_traj, n_steps_total, 2))
    for i, ss in enumerate(streams):
        uniforms[i] = np.random.default_rng(ss).random((n_steps_total, 2))

    psi = np.tile(psi0.amplitudes, (n_traj, 1)).astype(complex)
    pops = np.empty((t.size, d))
    pops[0] = np.mean(np.abs(psi) ** 2, axis=0)
    n_jumps = np.zeros(n_traj, dtype=int)

    step_idx = 0
    for seg, n_sub in enumerate(steps):
        dtk = round(dts[seg], 15)
        u_no_jump = props[dtk]
        for _ in range(n_sub):
            u1 = uniforms[:, step_idx, 0]
            u2 = uniforms[:, step_idx, 1]
            step_idx += 1
            # channel probabilities p_j = 2 kappa_j dt <J^dag J>
            probs = np.empty((len(jump_ops), n_traj))
            jpsi_all = []
            for jidx, (rate, j) in enumerate(jump_ops):
                jpsi = psi @ j.T
                jpsi_all.append(jpsi)
                probs[jidx] = 2.0 * rate * dts[seg] * np.sum(
                    np.abs(jpsi) ** 2, axis=1
                )
            p_tot = probs.sum(axis=0)
            if p_tot.max() > 0.1:
                raise QuopticsError(
                    f"jump probability {p_tot.max():.3f} exceeds 0.1; "
                    "reduce dt_max"
                )
            do_jump = u1 < p_tot
            # no-jump branch: exact effective evolution + renormalization
            no_jump = ~do_jump
            if np.any(no_jump):
                evolved = psi[no_jump] @ u_no_jump.T
                norms = np.linalg.norm(evolved, axis=1, keepdims=True)
                psi[no_jump] = evolved / norms
            if np.any(do_jump):
                # pick the channel proportionally to its weight
                cum = np.cumsum(probs[:, do_jump], axis=0)
                cum /= cum[-1]
                choice = (u2[do_jump][None, :] > cum).sum(axis=0)
                idx_traj = np.nonzero(do_jump)[0]
                for jidx in range(len(jump_ops)):
                    sel = idx_traj[choice == jidx]
                    if sel.size:
                        jumped = jpsi_all[jidx][sel]
                        norms = np.linalg.norm(jumped, axis=1, keepdims=True)
                        psi[sel] = jumped / norms
                n_jumps[idx_traj] += 1
        pops[seg + 1] = np.mean(np.abs(psi) ** 2, axis=0)
    return MCWFResult(t=t, populations=pops, n_traj=n_traj,
                      n_jumps=n_jumps, dt=float(dts.min()), seed=seed)


# ---------------------------------------------------------------------------
# Linear quantum-Langevin engine
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LangevinLinearModel:
    """dv/dt = A v + drive + noise with <xi(t) xi^dag(t')> = D delta(t-t').

    ``v`` collects mode operators (e.g. (a, a^dag) or quadratures); second
    moments are ordered as M = <v v^dag>.  ``kappa_out`` records the
    input-output scaling of the monitored mode (2 gamma for a cavity).
    """

    a: np.ndarray
    d: np.ndarray
    drive: np.ndarray | None = None
    kappa_out: float | None = None

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        d = np.array(self.d, dtype=complex)
        if a.shape != d.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError("A and D must be square and equal-shaped")
        a.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "d", d)
        if self.drive is not None:
            dr = np.array(self.drive, dtype=complex).reshape(a.shape[0])
            dr.setflags(write=False)
            object.__setattr__(self, "drive", dr)

    def hurwitz(self) -> bool:
        return bool(np.all(np.linalg.eigvals(self.a).real < 0))


@dataclass(frozen=True)
class SteadyMoments:
    mean: np.ndarray
    second: np.ndarray   # steady <delta v delta v^dag>


def langevin_steady(m: LangevinLinearModel) -> SteadyMoments:
    """Steady first/second moments: mean = -A^-1 drive and the solution of
    the continuous Lyapunov equation A M + M A^dag + D = 0."""
    if not m.hurwitz():
        raise QuopticsError("drift matrix is not Hurwitz; no steady state")
    mean = (np.linalg.solve(-m.a, m.drive) if m.drive is not None
            else np.zeros(m.a.shape[0], dtype=complex))
    second = solve_continuous_lyapunov(m.a, -m.d)
    return SteadyMoments(mean=mean, second=second)


def cavity_langevin_model(gamma: float, delta: float, drive: complex = 0.0,
                          nbar: float = 0.0) -> LangevinLinearModel:
    """Mode-vector (a, a^dag) model of the damped, driven cavity."""
    a = np.diag([-(gamma - 1j * delta), -(gamma + 1j * delta)]).astype(complex)
    d = 2.0 * gamma * np.diag([nbar + 1.0, nbar]).astype(complex)
    dr = np.array([drive, np.conj(drive)], dtype=complex)
    return LangevinLinearModel(a, d, drive=dr, kappa_out=2.0 * gamma)


def opo_langevin_model(gamma: float, g: float) -> LangevinLinearModel:
    """Mode-vector (a, a^dag) model of the resonant below-threshold OPO."""
    if not 0.0 <= g < gamma:
        raise ValidationError("below-threshold regime requires 0 <= g < gamma")
    a = np.array([[-gamma, g], [g, -gamma]], dtype=complex)
    d = 2.0 * gamma * np.diag([1.0, 0.0]).astype(complex)
    return LangevinLinearModel(a, d, kappa_out=2.0 * gamma)
