"""Entangled-atom-pair preparation in a lossy cavity and CHSH-type Bell tests.

Units: hbar = 1, the atom-cavity coupling g = 1; all rates and frequencies
are dimensionless multiples of g and times are multiples of 1/g.
"""

from .bell import (
    AngleScheme,
    BellScanResult,
    TSIRELSON_BOUND,
    bell_s,
    bell_s_simplified,
    bell_surface,
    correlation_analytic,
    correlation_expectation,
    observed_bell_with_failures,
    sigma_theta,
)
from .core import (
    ConvergenceError,
    DensityMatrix,
    HilbertDims,
    OperatorMatrix,
    StateVector,
    basis_index,
    basis_labels,
    basis_state,
    evolve_nojump,
    expm_oracle,
    lindblad_reference,
    survival_probability,
)
from .models import (
    FourLevelParams,
    RegimeReport,
    RegimeThresholds,
    TwoLevelParams,
    dfs_projector,
    effective_params,
    h_cond_four_level,
    h_cond_two_level,
    h_eff_four_level,
    h_eff_zeno,
    h_laser_two_level,
    validate_regime,
)
from .montecarlo import (
    BellEstimate,
    CorrelationEstimate,
    FourLevelPreparation,
    IdealPreparation,
    TrajectoryRecord,
    TwoLevelPreparation,
    estimate_bell,
    estimate_correlation,
    trajectory_ensemble,
    trajectory_run,
)
from .protocols import (
    PreparationResult,
    PulseSpec,
    RotationSpec,
    ShelvingOutcome,
    ShelvingParams,
    four_level_pulse_duration,
    prepare_four_level,
    prepare_two_level,
    pulse_duration_for_alpha,
    rotation_operator,
    rotation_pulse_four_level,
    rotation_pulse_two_level,
    shelving_measure,
    shelving_physical_sim,
)

__version__ = "0.1.0"
