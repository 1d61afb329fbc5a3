"""Homodyne trajectories of a two-photon driven Kerr resonator and
machine-learned readout of a dispersively coupled qubit."""

from .config import ExperimentConfig, reference_params
from .errors import (
    ConvergenceError,
    NumericalError,
    StepFailureError,
    SteadyStateError,
    TraceDriftError,
)
from .hilbert import (
    SystemParams,
    annihilation,
    critical_frequency,
    hamiltonian_dispersive,
    hamiltonian_full,
    kron,
    qubit_ops,
)
from .learner import (
    CvReport,
    SvcModel,
    decision_function,
    predict,
    rbf_kernel,
    read_cv_report,
    repeated_cv,
    train_svc,
    write_cv_report,
)
from .master import (
    ObservableSeries,
    evolve_master,
    expect,
    lindblad_rhs,
    rk4_step,
    steady_state,
)
from .signal import (
    FeatureMatrix,
    FeatureSpec,
    read_features,
    rife_features,
    smooth,
    tab_features,
    write_features,
)
from .trajectory import (
    TrajectoryDataset,
    TrajectoryRecord,
    config_hash,
    generate_dataset,
    homodyne_step,
    read_dataset,
    record_seed,
    simulate_trajectory,
    write_dataset,
)

__version__ = "0.1.0"

__all__ = [
    "ConvergenceError",
    "CvReport",
    "ExperimentConfig",
    "FeatureMatrix",
    "FeatureSpec",
    "NumericalError",
    "ObservableSeries",
    "StepFailureError",
    "SteadyStateError",
    "SvcModel",
    "SystemParams",
    "TraceDriftError",
    "TrajectoryDataset",
    "TrajectoryRecord",
    "annihilation",
    "config_hash",
    "critical_frequency",
    "decision_function",
    "evolve_master",
    "expect",
    "generate_dataset",
    "hamiltonian_dispersive",
    "hamiltonian_full",
    "homodyne_step",
    "kron",
    "lindblad_rhs",
    "predict",
    "qubit_ops",
    "rbf_kernel",
    "read_cv_report",
    "read_dataset",
    "read_features",
    "record_seed",
    "reference_params",
    "repeated_cv",
    "rife_features",
    "rk4_step",
    "simulate_trajectory",
    "smooth",
    "steady_state",
    "tab_features",
    "train_svc",
    "write_cv_report",
    "write_dataset",
    "write_features",
]
