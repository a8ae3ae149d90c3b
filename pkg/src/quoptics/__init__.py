"""quoptics: desk-scale numerical quantum optics.

Dense operator algebra on truncated Fock / two-level spaces, Wigner and
Gaussian phase-space calculus, closed and Lindblad dynamics, two-time
correlations and noise spectra, adiabatic-elimination machinery, and a
scenario CLI.  Conventions: hbar = 1, [X, P] = 2i, vacuum variance 1,
dissipators kappa (2 J rho J^dag - J^dag J rho - rho J^dag J).
"""

from .settings import DEFAULT, Settings
from .operators import (
    BasisMismatchError,
    BasisSpec,
    DensityMatrix,
    Fock,
    FockOps,
    KetState,
    Operator,
    PauliOps,
    QuopticsError,
    TwoLevel,
    ValidationError,
    coherent_state,
    displacement_op,
    expectation,
    fock_basis,
    fock_ops,
    identity,
    partial_trace,
    pauli_ops,
    propagator,
    squeeze_op,
    squeezed_vacuum,
    tensor_embed,
    thermal_state,
    two_level_basis,
    variance,
)
from .phasespace import (
    GaussianState,
    GridTooCoarseError,
    PhaseGrid,
    SymplecticMap,
    WignerGrid,
    default_grid,
    displacement_map,
    gaussian_from_complex_moments,
    gaussian_moment,
    marginal,
    overlap_wigner,
    rotation_map,
    squeeze_map,
    symplectic_apply,
    vacuum_gaussian,
    wigner_fock,
    wigner_gaussian,
    wigner_numeric,
)
from .dynamics import (
    CollapseRevival,
    JCParams,
    LinearSystem,
    PDCParams,
    RabiParams,
    collapse_revival,
    integrate_bloch,
    jc_dressed,
    jc_excited_population,
    pdc_analysis,
    pdc_photon_number,
    rabi_rwa,
    solve_linear,
)
from .lindblad import (
    CavityParams,
    DriveTerm,
    LangevinLinearModel,
    LindbladModel,
    MCWFResult,
    Superoperator,
    build_liouvillian,
    cavity_langevin_model,
    driven_cavity_analytic,
    driven_cavity_model,
    evolve_master,
    frame_transform,
    langevin_steady,
    mcwf_evolve,
    moment_rhs,
    opo_langevin_model,
    steady_state,
)
from .correlations import (
    CorrelationSeries,
    OPOParams,
    RFParams,
    SpectrumSeries,
    g2_normalized,
    input_output_scale,
    opo_g2,
    opo_lindblad_model,
    opo_spectra,
    regression_correlator,
    regression_formula,
    rf_analytics,
    spectrum_numeric,
)
from .effective import (
    EffectiveHamiltonian,
    ExponentialCorrelator,
    ProjectorPair,
    PurcellRates,
    WWResult,
    effective_hamiltonian_2nd,
    effective_master_2nd,
    lamb_shift_estimate,
    optomech_rates,
    purcell_rates,
    wigner_weisskopf,
)

__version__ = "0.1.0"
