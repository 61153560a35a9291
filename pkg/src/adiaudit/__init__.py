"""Numerical audit of adiabatic approximations and their dual-system limits.

The package propagates finite-dimensional quantum systems exactly, tracks
their instantaneous spectra, evaluates the standard quantitative adiabaticity
conditions, and constructs for any system a dual partner that satisfies the
same conditions while its adiabatic approximation fails — a numerical
counterexample machine, with a closed-form spin-half model as the worked
reference case.
"""

from .audit import (
    AdiabaticTrajectory,
    ConditionReport,
    FidelityResult,
    LidarCondition,
    MarzlinSandersChain,
    PointwiseConditions,
    adiabatic_phase,
    adiabatic_state,
    adiabatic_trajectory,
    audit_conditions,
    condition_lidar,
    condition_pointwise,
    condition_pointwise_hdot,
    condition_roland,
    marzlin_sanders_residual,
    reduced_fidelity_initial_overlap,
    reduced_fidelity_propagated,
    validity_fidelity,
)
from .core import (
    HamiltonianModel,
    QuantumState,
    TimeGrid,
    UnitaryMatrix,
    fidelity,
    inner_product,
    validate_hermitian,
)
from .dual import (
    CouplingIdentityReport,
    ConditionEquivalence,
    DualSystem,
    EigenCorrespondence,
    build_dual_system,
    dual_hamiltonian,
    match_levels,
    transported_dual_path,
    verify_condition_equivalence,
    verify_coupling_identity,
    verify_eigen_correspondence,
)
from .errors import (
    DegeneracyError,
    GaugeCorruptionError,
    NumericalFailureError,
    TrackingError,
    UsageError,
)
from .propagator import (
    PropagatorPath,
    StateTrajectory,
    evolve_state,
    hermitian_conjugate_path,
    propagate,
    step_unitary,
)
from .runner import (
    RunConfig,
    RunSummary,
    load_run_config,
    run_simulate,
    run_sweep,
    run_verify,
)
from .spectral import (
    SpectralFrame,
    SpectralPath,
    coupling_matrix,
    coupling_moduli,
    coupling_via_hdot,
    decompose,
    eigen_derivative,
    eigenvector_derivatives,
    hdot_coupling_matrix,
    realign_phases,
    track,
)
from .spinhalf import (
    SpinHalfParams,
    ascending_index,
    dual_adiabatic_state,
    dual_exact_state,
    dual_fidelity_law,
    eigenpairs_analytic,
    propagator_analytic,
    propagator_path_closed_form,
    rotating_field_hamiltonian,
    spectral_path_closed_form,
)
from .tolerances import DEFAULT_TOLERANCES, Tolerances

__version__ = "0.1.0"

__all__ = [
    "AdiabaticTrajectory",
    "ConditionEquivalence",
    "ConditionReport",
    "CouplingIdentityReport",
    "DEFAULT_TOLERANCES",
    "DegeneracyError",
    "DualSystem",
    "EigenCorrespondence",
    "FidelityResult",
    "GaugeCorruptionError",
    "HamiltonianModel",
    "LidarCondition",
    "MarzlinSandersChain",
    "NumericalFailureError",
    "PointwiseConditions",
    "PropagatorPath",
    "QuantumState",
    "RunConfig",
    "RunSummary",
    "SpectralFrame",
    "SpectralPath",
    "SpinHalfParams",
    "StateTrajectory",
    "TimeGrid",
    "Tolerances",
    "TrackingError",
    "UnitaryMatrix",
    "UsageError",
    "adiabatic_phase",
    "adiabatic_state",
    "adiabatic_trajectory",
    "ascending_index",
    "audit_conditions",
    "build_dual_system",
    "condition_lidar",
    "condition_pointwise",
    "condition_pointwise_hdot",
    "condition_roland",
    "coupling_matrix",
    "coupling_moduli",
    "coupling_via_hdot",
    "decompose",
    "dual_adiabatic_state",
    "dual_exact_state",
    "dual_fidelity_law",
    "dual_hamiltonian",
    "eigen_derivative",
    "eigenpairs_analytic",
    "eigenvector_derivatives",
    "evolve_state",
    "fidelity",
    "hdot_coupling_matrix",
    "hermitian_conjugate_path",
    "inner_product",
    "load_run_config",
    "marzlin_sanders_residual",
    "match_levels",
    "propagate",
    "propagator_analytic",
    "propagator_path_closed_form",
    "realign_phases",
    "reduced_fidelity_initial_overlap",
    "reduced_fidelity_propagated",
    "rotating_field_hamiltonian",
    "run_simulate",
    "run_sweep",
    "run_verify",
    "spectral_path_closed_form",
    "step_unitary",
    "track",
    "transported_dual_path",
    "validate_hermitian",
    "validity_fidelity",
    "verify_condition_equivalence",
    "verify_coupling_identity",
    "verify_eigen_correspondence",
]
