"""Numerical laboratory for discretized adiabatic evolution.

Interpolate between two Hamiltonians along a schedule, discretize the
evolution into walk operators (exact exponentials or product formulas),
and measure what the discreteness does: angular spectral gaps, adiabatic
error bounds, where along the schedule the error is generated, and the
step counts unstructured search actually needs.
"""

from .linalg import (
    BranchCutWarning,
    EigensolverError,
    HermitianOperator,
    NormalEigenDecomposition,
    UnitaryOperator,
    angular_distance,
    arc_distance_angles,
    chain_product,
    expm_i_hermitian,
    hermitian_eig,
    logm_unitary,
    normal_eig,
    operator_norm,
)
from .schedules import (
    Schedule,
    ScheduleSample,
    bc_composite_schedule,
    build_grover_schedule,
    eval_schedule,
    glue_constant_ce,
    glue_schedule,
    grover_d_constant,
    grover_gap_of_f,
    linear_schedule,
    schedule_from_dict,
    schedule_to_dict,
    schedule_values,
    tabulated_schedule,
)
from .integrators import (
    EXP_INTEGRATOR,
    PF1,
    PF2,
    PF2_SIMPLIFIED,
    GaplessError,
    IntegratorKind,
    ProblemConstants,
    SplittingCoefficients,
    WalkFamily,
    build_walk_family,
    commutator_combo,
    exact_step_propagator,
    nested_commutator_sum,
    parse_integrator_tag,
    problem_constants,
    recommended_step_size,
    spf,
    suzuki_coefficients,
    walk_family_from_operators,
    walk_operator,
)
from .spectral import (
    EigenpathTrack,
    GapProfile,
    StepCountWarning,
    TrackingAmbiguityError,
    adiabatic_error_bound,
    ck_profiles,
    discrete_adiabatic_bound,
    finite_difference_norm,
    gap_perturbation_bounds,
    hamiltonian_gap_profile,
    track_eigenpaths,
    walk_gap_profile,
)
from .evolution import (
    EvolutionResult,
    GapCollapseError,
    IdealAdiabaticFamily,
    ScalingReport,
    VolterraDiagnostics,
    boundary_vs_interior_scaling,
    evolve,
    ground_state,
    ideal_adiabatic_family,
    spectral_projector,
    volterra_diagnostics,
)
from .grover import (
    GroverInstance,
    QaoaAngleSet,
    ScalingCell,
    SearchResult,
    ThresholdWarning,
    effective_hamiltonians,
    gap_closed_forms,
    qaoa_angles,
    qaoa_replay,
    run_search,
    scaling_experiment,
    walk_closed_form,
)
from .toymodels import (
    DEFAULT_EPSILONS,
    FidelityRow,
    GapTableRow,
    ToyModel,
    build_toy,
    fidelity_sweep,
    four_level_pair,
    gap_table,
    qr_basis,
)

__version__ = "0.1.0"
