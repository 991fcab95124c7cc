"""Dual spin-flipper interferometer model.

Field strengths are given in precession degrees: a region whose total field
vector is ``F`` rotates the spin about ``F`` by ``|F|`` degrees.  Each coil
region carries the coil field ``b * coil_axis`` on top of the guide field
``g * z`` with ``g = 180/sqrt(2)``, so a coil set to ``+-g`` is an exact pi
flip about ``(0, +-1, 1)/sqrt(2)``.

One arm holds a dual flipper at the variable point ``(b1y, b2y)``; the other
arm holds an identical flipper frozen at ``fixed_point``.  The interference
amplitude is ``c = <in| D^j(U_fixed^-1 U_var) |in>``.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from . import spin
from .errors import ConfigError
from .spin import PancharatnamAmplitude, Rotation, SpinState

Q = 1.0 / math.sqrt(2.0)
GUIDE_FIELD = 180.0 / math.sqrt(2.0)


class ParameterPoint(NamedTuple):
    b1y: float
    b2y: float

    def __neg__(self) -> ParameterPoint:
        return ParameterPoint(-self.b1y, -self.b2y)


def q(a: float, b: float) -> ParameterPoint:
    """The point written ``q(a, b)``, i.e. ``(a/sqrt2, b/sqrt2)``."""
    return ParameterPoint(a * Q, b * Q)


POINT_I = q(-180, 180)
POINT_F = q(180, -180)
POINT_A = q(179, 179)
POINT_B = q(181, 181)
POINT_C = q(1, 1)
NAMED_POINTS = {"I": POINT_I, "F": POINT_F, "A": POINT_A, "B": POINT_B, "C": POINT_C}


class Mode(str, enum.Enum):
    REALISTIC_GUIDE = "realistic_guide"
    IDEAL_TRANSVERSE = "ideal_transverse"


CONFIG_KEYS = ("guide_field", "coil_axis", "fixed_point", "input_j", "input_m", "mode")


@dataclass(frozen=True)
class ApparatusConfig:
    guide_field: float = GUIDE_FIELD
    coil_axis: tuple[float, float, float] = (0.0, 1.0, 0.0)
    fixed_point: ParameterPoint = POINT_I
    input_j: Fraction = Fraction(1, 2)
    input_m: Fraction = Fraction(1, 2)
    mode: Mode = Mode.REALISTIC_GUIDE
    _input: SpinState = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = float(self.guide_field)
        if not math.isfinite(g) or g < 0:
            raise ConfigError("guide_field must be a finite non-negative number")
        axis = tuple(float(v) for v in self.coil_axis)
        if len(axis) != 3 or abs(math.hypot(*axis) - 1.0) > 1e-12 or abs(axis[2]) > 1e-12:
            raise ConfigError("coil_axis must be a unit vector orthogonal to z")
        fp = ParameterPoint(*(float(v) for v in self.fixed_point))
        if not all(math.isfinite(v) for v in fp):
            raise ConfigError("fixed_point must be finite")
        try:
            mode = Mode(self.mode)
        except ValueError:
            raise ConfigError(f"unknown mode {self.mode!r}") from None
        state = SpinState.basis(self.input_j, self.input_m)
        object.__setattr__(self, "guide_field", g)
        object.__setattr__(self, "coil_axis", axis)
        object.__setattr__(self, "fixed_point", fp)
        object.__setattr__(self, "input_j", state.j)
        object.__setattr__(self, "input_m", Fraction(self.input_m).limit_denominator(2))
        object.__setattr__(self, "mode", mode)
        object.__setattr__(self, "_input", state)

    @property
    def input_state(self) -> SpinState:
        return self._input

    def to_dict(self) -> dict:
        return {
            "guide_field": self.guide_field,
            "coil_axis": list(self.coil_axis),
            "fixed_point": list(self.fixed_point),
            "input_j": float(self.input_j),
            "input_m": float(self.input_m),
            "mode": self.mode.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> ApparatusConfig:
        """Build a config from a (possibly partial) JSON object; missing keys keep defaults."""
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(CONFIG_KEYS)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs = dict(data)
        try:
            if "fixed_point" in kwargs:
                fp = kwargs["fixed_point"]
                kwargs["fixed_point"] = NAMED_POINTS[fp] if isinstance(fp, str) else ParameterPoint(*fp)
            for key in ("input_j", "input_m"):
                if key in kwargs:
                    kwargs[key] = Fraction(kwargs[key]).limit_denominator(2)
        except (TypeError, KeyError, ValueError) as exc:
            raise ConfigError(f"bad config value: {exc}") from None
        return cls(**kwargs)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> ApparatusConfig:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(data)


DEFAULT_CONFIG = ApparatusConfig()


# ---------------------------------------------------------------------------
# field plane


def _coil_quats(b, config: ApparatusConfig) -> np.ndarray:
    b = np.asarray(b, dtype=float)
    fields = b[..., None] * np.asarray(config.coil_axis) + np.array([0.0, 0.0, config.guide_field])
    return spin.quat_from_vector(fields)


def dual_flipper_quats(b1y, b2y, config: ApparatusConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Vectorised dual-flipper quaternions, coil 1 traversed first."""
    return spin.quat_multiply(_coil_quats(b2y, config), _coil_quats(b1y, config))


def relative_quats(b1y, b2y, config: ApparatusConfig = DEFAULT_CONFIG) -> np.ndarray:
    fixed = dual_flipper_quats(*config.fixed_point, config)
    return spin.quat_multiply(spin.quat_conjugate(fixed), dual_flipper_quats(b1y, b2y, config))


def amplitude_array(b1y, b2y, config: ApparatusConfig = DEFAULT_CONFIG) -> np.ndarray:
    """Complex overlap c on arrays of field settings."""
    rel = relative_quats(b1y, b2y, config)
    m = config.input_m
    return spin.wigner_d_element(config.input_j, m, m, rel)


def coil_unitary(b: float, config: ApparatusConfig = DEFAULT_CONFIG) -> Rotation:
    return Rotation.from_array(_coil_quats(b, config))


def dual_flipper_unitary(p, config: ApparatusConfig = DEFAULT_CONFIG) -> Rotation:
    p = ParameterPoint(*p)
    return spin.compose(coil_unitary(p.b2y, config), coil_unitary(p.b1y, config))


def relative_unitary(p, config: ApparatusConfig = DEFAULT_CONFIG) -> Rotation:
    fixed = dual_flipper_unitary(config.fixed_point, config)
    return spin.compose(fixed.inverse(), dual_flipper_unitary(p, config))


def pancharatnam_amplitude(p, config: ApparatusConfig = DEFAULT_CONFIG) -> PancharatnamAmplitude:
    p = ParameterPoint(*p)
    return PancharatnamAmplitude.of(complex(amplitude_array(p.b1y, p.b2y, config)))


# ---------------------------------------------------------------------------
# rotated flippers


class Region(NamedTuple):
    """Piecewise-constant field region: rotation about ``axis`` by ``angle_deg``."""

    axis: tuple[float, float, float]
    angle_deg: float

    def rotation(self) -> Rotation:
        return spin.rotation_from_axis_angle(self.axis, self.angle_deg)


@dataclass(frozen=True)
class FlipperOrientation:
    delta_beta_deg: float

    def __post_init__(self):
        if not math.isfinite(self.delta_beta_deg):
            raise ConfigError("delta_beta_deg must be finite")


def flipper_regions(orientation, config: ApparatusConfig = DEFAULT_CONFIG) -> list[Region]:
    """The two flips of a dual flipper turned by delta-beta.

    Flip axes lie in the transverse plane at azimuths 0 and 90 + delta-beta.
    In realistic mode each flip angle shrinks to ``180 cos(delta-beta/2)``.
    """
    if not isinstance(orientation, FlipperOrientation):
        orientation = FlipperOrientation(float(orientation))
    dbeta = orientation.delta_beta_deg
    azimuth = math.radians(90.0 + dbeta)
    flip = 180.0
    if config.mode is Mode.REALISTIC_GUIDE:
        flip = 180.0 * math.cos(math.radians(dbeta) / 2.0)
    return [
        Region((1.0, 0.0, 0.0), flip),
        Region((math.cos(azimuth), math.sin(azimuth), 0.0), flip),
    ]


def compose_regions(regions) -> Rotation:
    total = spin.IDENTITY
    for region in regions:
        total = spin.compose(region.rotation(), total)
    return total


def rotated_flipper_unitary(orientation, config: ApparatusConfig = DEFAULT_CONFIG) -> Rotation:
    return compose_regions(flipper_regions(orientation, config))


def relative_flipper_unitary(orientation, config: ApparatusConfig = DEFAULT_CONFIG) -> Rotation:
    """Rotated flipper measured against the unrotated one in the other arm."""
    fixed = rotated_flipper_unitary(FlipperOrientation(0.0), config)
    return spin.compose(fixed.inverse(), rotated_flipper_unitary(orientation, config))
