"""Measurement-based Gaussian computation on continuous-variable
cluster states: a covariance-matrix simulation engine, a truncated
number-basis oracle to check it against, and batch experiment tooling.
"""

from .cluster import (
    ClusterGraph,
    NullifierReport,
    attach,
    build_cluster,
    nullifier_variances,
)
from .distortion import (
    AccumulatedDistortion,
    DistortionEnvelope,
    LinearFormEnvelope,
    NoiseBudget,
    SweepPoint,
    apply_envelope,
    apply_input_noise,
    apply_position_envelope,
    apply_qnd_noise,
    decompose_distortion,
    fidelity_vs_squeezing,
    state_from_wavefunction,
    wavefunction_parameters,
)
from .exceptions import (
    ConfigError,
    CVClusterError,
    FrameError,
    InvalidOperationError,
    InvalidStateError,
    MeasurementError,
    ScheduleError,
    TruncationError,
)
from .experiment import (
    ExperimentConfig,
    PostSelectionSummary,
    StrategySummary,
    TomographySummary,
    TrialRecord,
    replay_trial,
    run_postselection_experiment,
    run_program,
    tomography_summary,
    trial_rng,
)
from .gaussian import (
    GaussianState,
    HomodyneResult,
    apply_affine,
    coherent,
    fidelity,
    homodyne,
    homodyne_marginal,
    squeezed_vacuum_p,
    vacuum,
    wigner,
)
from .mbqc import (
    Basis,
    ByproductFrame,
    CompiledProgram,
    CzStepResult,
    GateProgram,
    Instruction,
    MeasurementSchedule,
    RunResult,
    TeleportResult,
    basis_for_diagonal,
    compile_program,
    cz_step,
    instruction_affine,
    intended_affine,
    prepare_cluster_state,
    resolve_frame,
    run_schedule,
    teleport_step,
)
from .symplectic import (
    SymplecticAffine,
    controlled_addition,
    controlled_phase,
    fourier,
    fourier_inverse,
    gate_matrices,
    quadratic_phase,
    rotation,
    shift_p,
    shift_q,
    symplectic_form,
)
from .validate import CheckResult, run_validation_suite

__all__ = [
    "AccumulatedDistortion",
    "Basis",
    "ByproductFrame",
    "CVClusterError",
    "CheckResult",
    "ClusterGraph",
    "CompiledProgram",
    "ConfigError",
    "CzStepResult",
    "DistortionEnvelope",
    "ExperimentConfig",
    "FrameError",
    "GateProgram",
    "GaussianState",
    "HomodyneResult",
    "Instruction",
    "InvalidOperationError",
    "InvalidStateError",
    "LinearFormEnvelope",
    "MeasurementError",
    "MeasurementSchedule",
    "NoiseBudget",
    "NullifierReport",
    "PostSelectionSummary",
    "RunResult",
    "ScheduleError",
    "StrategySummary",
    "SweepPoint",
    "SymplecticAffine",
    "TeleportResult",
    "TomographySummary",
    "TrialRecord",
    "TruncationError",
    "apply_affine",
    "apply_envelope",
    "apply_input_noise",
    "apply_position_envelope",
    "apply_qnd_noise",
    "attach",
    "basis_for_diagonal",
    "build_cluster",
    "coherent",
    "compile_program",
    "controlled_addition",
    "controlled_phase",
    "cz_step",
    "decompose_distortion",
    "fidelity",
    "fidelity_vs_squeezing",
    "fourier",
    "fourier_inverse",
    "gate_matrices",
    "homodyne",
    "homodyne_marginal",
    "instruction_affine",
    "intended_affine",
    "nullifier_variances",
    "prepare_cluster_state",
    "quadratic_phase",
    "replay_trial",
    "resolve_frame",
    "rotation",
    "run_postselection_experiment",
    "run_program",
    "run_schedule",
    "run_validation_suite",
    "shift_p",
    "shift_q",
    "squeezed_vacuum_p",
    "state_from_wavefunction",
    "symplectic_form",
    "teleport_step",
    "tomography_summary",
    "trial_rng",
    "vacuum",
    "wavefunction_parameters",
    "wigner",
]
