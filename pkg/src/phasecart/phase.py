"""Continuous (absolute) phase of the overlap along parameter-space paths.

Phases are carried as real numbers that keep their multiples of 360 degrees.
Consecutive samples are joined by nearest-branch continuation; a step whose
jump looks unsafe is bisected until the branch choice is unambiguous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import spin
from .apparatus import DEFAULT_CONFIG, ApparatusConfig, ParameterPoint, Region, amplitude_array
from .errors import ConfigError, ConsistencyError, SingularPathError
from .spin import SpinState

JUMP_LIMIT_DEG = 90.0
LOW_CONTRAST = 0.05
LOW_CONTRAST_JUMP_DEG = 20.0
MAX_DEPTH = 24
SINGULAR_CONTRAST = 1e-9
WINDING_TOL = 1e-6

# charge = SIGN_CONVENTION * (counterclockwise winding of arg c in the
# (b1y right, b2y up) plane); +1 makes the origin a -1 singularity.
SIGN_CONVENTION = 1


def _wrap_rad(x: float) -> float:
    """Map an angle difference to (-pi, pi]."""
    y = math.remainder(x, 2.0 * math.pi)
    return math.pi if y == -math.pi else y


def _needs_split(ca: complex, cb: complex) -> bool:
    jump = abs(math.degrees(_wrap_rad(math.atan2(cb.imag, cb.real) - math.atan2(ca.imag, ca.real))))
    if jump >= JUMP_LIMIT_DEG:
        return True
    return min(abs(ca), abs(cb)) < LOW_CONTRAST and jump >= LOW_CONTRAST_JUMP_DEG


def _check_contrast(t: float, c: complex) -> None:
    if abs(c) < SINGULAR_CONTRAST:
        raise SingularPathError(
            f"path passes through a phase singularity; phase undefined (|c|={abs(c):.3g} at t={t:.12g})"
        )


def continue_phase(
    amplitude: Callable[[np.ndarray], np.ndarray], ts: Sequence[float]
) -> list[tuple[float, complex, float, bool]]:
    """Sample ``amplitude`` on the grid ``ts`` and continue its phase.

    ``amplitude`` maps an array of parameters to complex overlaps.  Returns
    ``(t, c, unwrapped_phase_rad, refined)`` tuples in parameter order; refined
    samples are the points bisection inserted between grid points.
    """
    ts = np.asarray(ts, dtype=float)
    cs = np.asarray(amplitude(ts), dtype=complex)
    for t, c in zip(ts, cs):
        _check_contrast(float(t), complex(c))

    def single(t: float) -> complex:
        c = complex(np.asarray(amplitude(np.array([t]))).reshape(-1)[0])
        _check_contrast(t, c)
        return c

    points: list[tuple[float, complex, bool]] = [(float(ts[0]), complex(cs[0]), False)]

    def refine(ta, ca, tb, cb, depth):
        if depth >= MAX_DEPTH or not _needs_split(ca, cb):
            return
        tm = 0.5 * (ta + tb)
        cm = single(tm)
        refine(ta, ca, tm, cm, depth + 1)
        points.append((tm, cm, True))
        refine(tm, cm, tb, cb, depth + 1)

    for k in range(1, len(ts)):
        refine(float(ts[k - 1]), complex(cs[k - 1]), float(ts[k]), complex(cs[k]), 0)
        points.append((float(ts[k]), complex(cs[k]), False))

    out = []
    phase = math.atan2(points[0][1].imag, points[0][1].real)
    prev = points[0][1]
    for t, c, refined in points:
        phase += _wrap_rad(math.atan2(c.imag, c.real) - math.atan2(prev.imag, prev.real))
        prev = c
        out.append((t, c, phase, refined))
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ParameterPath:
    vertices: tuple[ParameterPoint, ...]
    steps_per_segment: int = 100
    closed: bool = False

    def __post_init__(self):
        verts = tuple(ParameterPoint(*(float(x) for x in v)) for v in self.vertices)
        if len(verts) < (3 if self.closed else 2):
            raise ConfigError("path needs at least 2 vertices (3 when closed)")
        if not all(math.isfinite(x) for v in verts for x in v):
            raise ConfigError("path vertices must be finite")
        if any(a == b for a, b in zip(verts, verts[1:])):
            raise ConfigError("consecutive path vertices must differ")
        if self.closed and verts[0] == verts[-1]:
            verts = verts[:-1]
            if len(verts) < 3:
                raise ConfigError("closed path needs at least 3 distinct vertices")
        if int(self.steps_per_segment) != self.steps_per_segment or self.steps_per_segment < 1:
            raise ConfigError("steps_per_segment must be a positive integer")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "steps_per_segment", int(self.steps_per_segment))

    @property
    def segments(self) -> list[tuple[ParameterPoint, ParameterPoint]]:
        verts = self.vertices + (self.vertices[:1] if self.closed else ())
        return list(zip(verts, verts[1:]))

    def reversed(self) -> ParameterPath:
        return ParameterPath(self.vertices[::-1], self.steps_per_segment, self.closed)

    def with_steps(self, steps: int) -> ParameterPath:
        return ParameterPath(self.vertices, steps, self.closed)

    def to_dict(self) -> dict:
        return {
            "vertices": [list(v) for v in self.vertices],
            "steps_per_segment": self.steps_per_segment,
            "closed": self.closed,
        }


def rectangle_path(b1_min, b1_max, b2_min, b2_max, steps_per_segment: int = 100) -> ParameterPath:
    """Counterclockwise closed rectangle."""
    return ParameterPath(
        ((b1_min, b2_min), (b1_max, b2_min), (b1_max, b2_max), (b1_min, b2_max)),
        steps_per_segment,
        closed=True,
    )


@dataclass(frozen=True)
class PhaseSample:
    step: float
    arclength: float
    point: ParameterPoint
    c: complex
    contrast: float
    phase_unwrapped_deg: float
    refined: bool = False


@dataclass(frozen=True)
class PhaseTrace:
    path: ParameterPath
    samples: tuple[PhaseSample, ...]
    total_phase_deg: float
    min_contrast: float

    @property
    def phases(self) -> np.ndarray:
        return np.array([s.phase_unwrapped_deg for s in self.samples])

    @property
    def arclengths(self) -> np.ndarray:
        return np.array([s.arclength for s in self.samples])

    def to_dict(self) -> dict:
        return {
            "path": self.path.to_dict(),
            "samples": [
                {
                    "step": s.step,
                    "arclength": s.arclength,
                    "b1y": s.point.b1y,
                    "b2y": s.point.b2y,
                    "re_c": s.c.real,
                    "im_c": s.c.imag,
                    "contrast": s.contrast,
                    "phase_deg": s.phase_unwrapped_deg,
                    "refined": s.refined,
                }
                for s in self.samples
            ],
            "total_phase_deg": self.total_phase_deg,
            "min_contrast": self.min_contrast,
            "sign_convention": SIGN_CONVENTION,
        }


def trace_path(path: ParameterPath, config: ApparatusConfig = DEFAULT_CONFIG) -> PhaseTrace:
    n = path.steps_per_segment
    samples: list[PhaseSample] = []
    offset_len = 0.0
    phase_offset = None
    for k, (p0, p1) in enumerate(path.segments):
        d = np.subtract(p1, p0)
        length = float(np.hypot(*d))

        def amp(ts, p0=p0, d=d):
            return amplitude_array(p0[0] + ts * d[0], p0[1] + ts * d[1], config)

        seg = continue_phase(amp, np.linspace(0.0, 1.0, n + 1))
        if phase_offset is None:
            phase_offset = 0.0
        else:
            # the segment start coincides with the previous end
            prev = samples[-1].phase_unwrapped_deg
            phase_offset = prev - math.degrees(seg[0][2])
            seg = seg[1:]
        for t, c, ph, refined in seg:
            samples.append(
                PhaseSample(
                    step=k * n + (t * n if refined else round(t * n)),
                    arclength=offset_len + t * length,
                    point=ParameterPoint(p0[0] + t * d[0], p0[1] + t * d[1]),
                    c=c,
                    contrast=abs(c),
                    phase_unwrapped_deg=phase_offset + math.degrees(ph),
                    refined=refined,
                )
            )
        offset_len += length
    total = samples[-1].phase_unwrapped_deg - samples[0].phase_unwrapped_deg
    return PhaseTrace(path, tuple(samples), total, min(s.contrast for s in samples))


def winding_number(path: ParameterPath, config: ApparatusConfig = DEFAULT_CONFIG) -> int:
    """Signed charge enclosed by a closed path (counterclockwise positive orientation)."""
    if not path.closed:
        raise ConfigError("winding number needs a closed path")
    total = trace_path(path, config).total_phase_deg
    turns = total / 360.0
    n = round(turns)
    if abs(turns - n) > WINDING_TOL:
        raise ConsistencyError(f"non-integer winding: total phase {total!r} deg")
    return SIGN_CONVENTION * int(n)


# ---------------------------------------------------------------------------
# dynamical / geometric split for piecewise-constant evolutions


def _as_regions(regions) -> list[Region]:
    return [r if isinstance(r, Region) else Region(tuple(r[0]), float(r[1])) for r in regions]


def dynamical_phase(regions, state: SpinState) -> float:
    """``-sum theta_i <psi_i| n_i.J |psi_i>`` in degrees, psi_i the state entering region i."""
    jx, jy, jz = spin.spin_operators(state.j)
    total = 0.0
    psi = state
    for region in _as_regions(regions):
        axis = np.asarray(region.axis, dtype=float)
        norm = np.linalg.norm(axis)
        if region.angle_deg == 0 or norm == 0:
            continue
        n = axis / norm
        gen = n[0] * jx + n[1] * jy + n[2] * jz
        total -= region.angle_deg * psi.expectation(gen).real
        psi = psi.rotated(region.rotation())
    return total


def total_phase(regions, state: SpinState, substeps: int = 100) -> float:
    """Unwrapped phase of ``<psi_in|psi(s)>`` at the end of the evolution, degrees."""
    if substeps < 100:
        raise ConfigError("at least 100 sub-steps per region are required")
    j = state.j
    psi_ref = state.amplitudes
    phase = 0.0
    current = spin.IDENTITY
    for region in _as_regions(regions):
        axis = np.asarray(region.axis, dtype=float)
        if region.angle_deg == 0 or not np.any(axis):
            continue
        start = current

        def amp(ts, axis=axis, angle=region.angle_deg, start=start):
            out = []
            for t in ts:
                r = spin.compose(spin.rotation_from_axis_angle(axis, t * angle), start)
                out.append(np.vdot(psi_ref, spin.wigner_d(j, r) @ psi_ref))
            return np.array(out)

        seg = continue_phase(amp, np.linspace(0.0, 1.0, substeps + 1))
        phase += math.degrees(seg[-1][2] - seg[0][2])
        current = spin.compose(region.rotation(), start)
    return phase


def geometric_phase(regions, state: SpinState, substeps: int = 100) -> float:
    try:
        total = total_phase(regions, state, substeps)
    except SingularPathError as exc:
        raise SingularPathError(f"evolution reaches a state orthogonal to the input: {exc}") from None
    return total - dynamical_phase(regions, state)
