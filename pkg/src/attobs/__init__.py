"""Geometry-free attitude and gyro-bias observer with Lyapunov certification."""

from ._kernels import NUMBA_ENABLED
from .lyapunov import (
    DecreaseReport,
    ErrorState,
    LyapunovParams,
    StrictnessCoefficients,
    compute_mu,
    find_certificate,
    lyapunov_pieces,
    lyapunov_value,
    simulate_error_system,
    strictness_coefficients,
    verify_decrease,
)
from .observer import (
    Gains,
    ObserverState,
    VectorChannel,
    observer_derivative,
    observer_history,
    observer_step,
    observer_step_n,
)
from .reconstruct import (
    ReconstructedAttitude,
    ReferenceBasis,
    attitude_error_angle,
    project_polar,
    reconstruct,
    reconstruct_tilde,
)
from .scenario import (
    ConfigError,
    ScenarioConfig,
    ScenarioResult,
    paper_scenario,
    paper_sim,
    parse_config,
    run_scenario,
    serialize_config,
    write_csv,
)
from .signals import SignalSpec
from .so3 import euler_to_rot, random_rotation, rot_to_euler, rotate_exp, skew
from .truth import (
    Measurement,
    NoiseSpec,
    TruthSignals,
    TruthState,
    propagate_truth,
    sample_sensors,
    truth_trajectory,
)

__version__ = "0.1.0"
