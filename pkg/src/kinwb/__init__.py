"""Well-balanced, asymptotic-preserving kinetic schemes built on scattering
matrices, with the exponential-fitting drift-diffusion schemes they relax to.
"""

from .diagnostics import (
    ApReport,
    CheckResult,
    ExpPolyTerm,
    KernelRangeReport,
    StochasticityReport,
    ap_consistency,
    exp_poly_roots,
    haar_det,
    kernel_range_check,
    orthogonality_check,
    run_verification,
    stochasticity_check,
    well_balanced_residual,
)
from .errors import (
    BracketFailure,
    ConfigError,
    DegenerateDenominator,
    IllConditioned,
    InfeasibleNodes,
    KinwbError,
    NegativeWeight,
    NonPositiveRate,
    PoleHit,
    SingularBasis,
    SolveFailure,
    TangentRootWarning,
)
from .kinetic import (
    KineticGrid,
    KineticModel,
    MacroField,
    assemble_cell_matrix,
    assemble_interfaces,
    cfl_check,
    chemo_drift,
    chemoattractant_update,
    density,
    equilibrium_state,
    grid_to_csv,
    imex_step,
    interface_grad,
    phi_tanh,
    total_mass,
)
from .macrolimit import (
    DriftDiffusionParams,
    bernoulli,
    heat_step,
    rho_to_csv,
    sg_chemo_step,
    sg_flux,
    sg_step,
    sg_vfp_step,
)
from .quadrature import (
    MomentReport,
    VelocityQuadrature,
    gauss_symmetric,
    moment_report,
    vfp_preset_nodes,
    vfp_quadrature,
)
from .runner import (
    ExperimentConfig,
    ap_error_table,
    ap_gap,
    run_experiment,
    sweep_experiment,
)
from .scattering import (
    ClosureCoefficients,
    ScatteringDecomposition,
    chemo_interfaces,
    chemo_smatrix,
    matrix_to_csv,
    rte_closure,
    rte_smatrix,
    vfp_closure,
    vfp_smatrix,
)
from .spectral import (
    DispersionSpectrum,
    VfpModeTable,
    case_phi,
    chemo_eigen_expansion,
    dispersion_roots,
    hermite_poly,
    vfp_modes,
    vfp_psi0,
)
from .twostream import TwoStreamState, state_to_csv, ts_mass, ts_smatrix, ts_step

__all__ = [name for name in dir() if not name.startswith("_")]
