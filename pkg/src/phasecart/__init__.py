"""Pancharatnam phase, phase singularities and unwrapped phase traces for a
dual spin-flipper neutron interferometer."""

from .apparatus import (
    DEFAULT_CONFIG,
    GUIDE_FIELD,
    POINT_A,
    POINT_B,
    POINT_C,
    POINT_F,
    POINT_I,
    Q,
    ApparatusConfig,
    FlipperOrientation,
    Mode,
    ParameterPoint,
    pancharatnam_amplitude,
    q,
    relative_unitary,
)
from .cartographer import Singularity, charge_sum, find_singularities
from .errors import ConfigError, ConsistencyError, PhasecartError, SingularPathError
from .phase import ParameterPath, PhaseTrace, trace_path, winding_number
from .spin import Rotation, SpinState, compose, rotation_from_axis_angle, wigner_d

__version__ = "0.1.0"
