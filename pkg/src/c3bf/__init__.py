"""Collision cone control barrier function safety filters for reduced-order
legged-robot models."""

from .constraints import (
    ClassK,
    ConstraintEval,
    ObstacleState,
    eval_constraint_horizontal,
    eval_constraint_vertical,
    relative_state_horizontal,
    relative_state_vertical,
)
from .errors import (
    C3BFError,
    ConfigError,
    DegenerateVelocityError,
    InvalidConstraintError,
    InvalidGeometryError,
    PenetrationError,
    SafetyInfeasibleError,
)
from .geometry import cos_half_angle, effective_radius, h_value
from .models import (
    EgoParams,
    PlanarInput,
    PlanarState,
    UnicycleInput,
    UnicycleState,
    planar_dynamics,
    step,
    unicycle_dynamics,
)
from .safety_filter import FilterResult, InputBounds, filter_closed_form, filter_qp

__version__ = "0.1.0"
