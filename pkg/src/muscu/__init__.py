"""Feed-forward position control of a one-link, two-muscle arm with routing points.

Muscle geometry, torque and potential, penalised RK4 simulation, and a
closed-form certificate for the asymptotic stability of a target angle,
cross-checked by numerical oracles.
"""

from .config import ScenarioConfig, load_config, parse_config
from .dynamics import (
    DynParams,
    InternalForce,
    State,
    decompose_tension,
    internal_force,
    ode_rhs,
    potential,
    torque,
)
from .errors import (
    ConfigurationError,
    DomainError,
    IntegrationDiverged,
    MuscuError,
    SoundnessFailure,
)
from .geometry import (
    MuscleModel,
    SegmentCoeffs,
    SystemParams,
    compute_alpha,
    derive_coeffs,
    example1_params,
    muscle_jacobian,
    muscle_length,
    raw_segment_length,
    segment_length,
    segment_length_d1,
    segment_length_d2,
)
from .integrate import Trajectory, simulate, step
from .stability import AngleInterval, StabilityReport, Verdict, certified_interval, check_equilibrium

__version__ = "0.1.0"
