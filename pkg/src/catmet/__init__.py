"""Phase-estimation precision of two-mode spin cat states under one-body loss."""

from .channels import (
    LossModel,
    NumericalFailureError,
    lindblad_evolve,
    loss_channel,
    phase_rotation,
    pi2_pulse,
    trace_distance,
)
from .fisher import (
    DegenerateStateError,
    QfiResult,
    hermitian_eig,
    pure_qfi,
    qfi,
    rho_derivative,
)
from .hilbert import (
    BlockOperator,
    DensityMatrix,
    SectorBasis,
    apply,
    build_basis,
    build_operator,
)
from .measure import (
    DegenerateWorkingPointError,
    NoWorkingPointError,
    Observable,
    WorkingPoint,
    best_working_point,
    expectation,
    phase_uncertainty,
)
from .states import CatParams, PureState, cat, husimi_q, scs
from .sweep import (
    OptimalTheta,
    PrecisionRecord,
    SweepConfig,
    measurement_compare,
    optimal_theta,
    theta_scan,
    time_scan,
)

__version__ = "0.1.0"

__all__ = [
    "BlockOperator",
    "CatParams",
    "DegenerateStateError",
    "DegenerateWorkingPointError",
    "DensityMatrix",
    "LossModel",
    "NoWorkingPointError",
    "NumericalFailureError",
    "Observable",
    "OptimalTheta",
    "PrecisionRecord",
    "PureState",
    "QfiResult",
    "SectorBasis",
    "SweepConfig",
    "WorkingPoint",
    "apply",
    "best_working_point",
    "build_basis",
    "build_operator",
    "cat",
    "expectation",
    "hermitian_eig",
    "husimi_q",
    "lindblad_evolve",
    "loss_channel",
    "measurement_compare",
    "optimal_theta",
    "phase_rotation",
    "phase_uncertainty",
    "pi2_pulse",
    "pure_qfi",
    "qfi",
    "rho_derivative",
    "scs",
    "theta_scan",
    "time_scan",
    "trace_distance",
]
