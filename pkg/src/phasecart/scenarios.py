"""End-to-end experiment drivers."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np

from . import spin
from .apparatus import (
    DEFAULT_CONFIG,
    POINT_A,
    POINT_B,
    POINT_C,
    POINT_F,
    POINT_I,
    ApparatusConfig,
    FlipperOrientation,
    Mode,
    ParameterPoint,
    flipper_regions,
    relative_flipper_unitary,
)
from .errors import ConfigError
from .phase import ParameterPath, PhaseTrace, continue_phase, dynamical_phase, trace_path

FIGURE1_VIAS = {"IAF": POINT_A, "IBF": POINT_B, "ICF": POINT_C}


def run_figure1(config: ApparatusConfig = DEFAULT_CONFIG, steps: int = 100) -> dict[str, PhaseTrace]:
    """Field-reversal traces I -> {A, B, C} -> F."""
    return {
        name: trace_path(ParameterPath((POINT_I, via, POINT_F), steps), config)
        for name, via in FIGURE1_VIAS.items()
    }


def run_field_reversal(via, config: ApparatusConfig = DEFAULT_CONFIG, steps: int = 100) -> PhaseTrace:
    """Trace I -> via -> F; ``via`` is one point or a sequence of intermediate points."""
    via = np.asarray(via, dtype=float)
    mids = [tuple(via)] if via.ndim == 1 else [tuple(v) for v in via]
    return trace_path(ParameterPath((POINT_I, *mids, POINT_F), steps), config)


def loop_vias(center, half_width: float, turns: int = 1) -> list[ParameterPoint]:
    """Intermediate points that circle ``center`` |turns| times before heading to F.

    The excursion starts and ends at the lower-left corner of the square;
    positive ``turns`` run counterclockwise.
    """
    cx, cy = center
    h = half_width
    ccw = [(cx - h, cy - h), (cx + h, cy - h), (cx + h, cy + h), (cx - h, cy + h)]
    corners = ccw if turns >= 0 else [ccw[0]] + ccw[:0:-1]
    pts = []
    for _ in range(abs(turns)):
        pts.extend(corners)
    pts.append(corners[0])
    return [ParameterPoint(*p) for p in pts]


# ---------------------------------------------------------------------------
# flipper rotation scans


class DbetaRow(NamedTuple):
    delta_beta_deg: float
    total_deg: float
    dynamical_deg: float
    geometric_deg: float
    linear_deg: float


def _scan_grid(lo: float, hi: float, steps: int) -> np.ndarray:
    if not (-180.0 <= lo < hi <= 180.0):
        raise ConfigError("scan range must satisfy -180 <= lo < hi <= 180")
    if steps < 1:
        raise ConfigError("steps must be positive")
    return np.linspace(lo, hi, steps + 1)


def _continued_from_zero(amplitude, grid: np.ndarray) -> np.ndarray:
    """Unwrapped phase (deg) at ``grid``, continued outward from delta-beta = 0."""
    out = np.empty(len(grid))
    for side in (grid >= 0, grid < 0):
        pts = grid[side]
        if not len(pts):
            continue
        order = np.argsort(np.abs(pts), kind="stable")
        walk = np.concatenate([[0.0], pts[order]])
        keep = np.concatenate([[True], np.diff(walk) != 0])
        res = continue_phase(amplitude, walk[keep])
        by_t = {t: math.degrees(ph) for t, _, ph, refined in res if not refined}
        out[np.flatnonzero(side)[order]] = [by_t[t] for t in pts[order]]
    return out


def _flipper_amplitude(j, m, config: ApparatusConfig):
    def amplitude(dbetas):
        quats = np.array([relative_flipper_unitary(FlipperOrientation(float(d)), config).as_array() for d in dbetas])
        return spin.wigner_d_element(j, m, m, quats)

    return amplitude


def run_dbeta_scan(
    mode=Mode.IDEAL_TRANSVERSE,
    j=Fraction(1, 2),
    range_deg: Sequence[float] = (-40.0, 40.0),
    steps: int = 80,
    config: ApparatusConfig = DEFAULT_CONFIG,
) -> list[DbetaRow]:
    """Phase of a flipper turned by delta-beta against an unturned one, input |j, j>.

    ``total`` is continued along delta-beta from 0; ``dynamical`` is the
    difference of the two arms' dynamical phases; ``geometric`` is the rest.
    ``linear`` is the textbook line ``-2 j delta-beta``.
    """
    jf = Fraction(j).limit_denominator(2)
    cfg = replace(config, mode=Mode(mode), input_j=jf, input_m=jf)
    grid = _scan_grid(*range_deg, steps)
    totals = _continued_from_zero(_flipper_amplitude(jf, jf, cfg), grid)
    state = cfg.input_state
    fixed_dyn = dynamical_phase(flipper_regions(FlipperOrientation(0.0), cfg), state)
    rows = []
    for d, total in zip(grid, totals):
        dyn = dynamical_phase(flipper_regions(FlipperOrientation(float(d)), cfg), state) - fixed_dyn
        rows.append(DbetaRow(float(d), float(total), dyn, float(total) - dyn, -2.0 * float(jf) * float(d)))
    return rows


class SpinRow(NamedTuple):
    delta_beta_deg: float
    phase_deg: float
    linear_deg: float


def run_spin_scan(
    n: int,
    range_deg: Sequence[float] = (-180.0, 180.0),
    steps: int = 360,
    mode=Mode.IDEAL_TRANSVERSE,
    config: ApparatusConfig = DEFAULT_CONFIG,
) -> list[SpinRow]:
    """Unwrapped interference phase for spin n/2 in the stretched state |j, j>."""
    if int(n) != n or not 1 <= n <= 50:
        raise ConfigError("n must be an integer in 1..50")
    rows = run_dbeta_scan(mode, Fraction(int(n), 2), range_deg, steps, config)
    return [SpinRow(r.delta_beta_deg, r.total_deg, r.linear_deg) for r in rows]


# ---------------------------------------------------------------------------
# optical analogue


@dataclass(frozen=True)
class OpticsResult:
    rotation_deg: float
    phase_deg: float
    operator_sign: int | None
    trace: tuple[tuple[float, float], ...]


def half_wave_plate(azimuth_deg: float) -> spin.Rotation:
    """Half-wave plate with fast axis at ``azimuth_deg``: a pi turn about the Poincare axis at 2*azimuth."""
    a = math.radians(2.0 * azimuth_deg)
    return spin.rotation_from_axis_angle((math.cos(a), math.sin(a), 0.0), 180.0)


def plate_pair(first_deg: float, second_deg: float) -> spin.Rotation:
    return spin.compose(half_wave_plate(second_deg), half_wave_plate(first_deg))


def run_optics_hwp(rotation_deg: float = 45.0, steps: int = 100) -> OpticsResult:
    """Circular light through plates at (0, 45) deg, turned to (r, 45 - r).

    The phase is the continued Pancharatnam phase of the turned pair against
    the original pair.  ``operator_sign`` is +1/-1 when the two plate
    operators are equal / opposite, None otherwise.
    """
    reference = plate_pair(0.0, 45.0)
    circular = spin.SPIN_UP.amplitudes

    def amplitude(ts):
        out = []
        for t in ts:
            rel = spin.compose(reference.inverse(), plate_pair(t * rotation_deg, 45.0 - t * rotation_deg))
            out.append(np.vdot(circular, rel.matrix() @ circular))
        return np.array(out)

    res = continue_phase(amplitude, np.linspace(0.0, 1.0, steps + 1))
    trace = tuple((t * rotation_deg, math.degrees(ph)) for t, _, ph, _ in res)
    final = plate_pair(rotation_deg, 45.0 - rotation_deg).as_array()
    ref = reference.as_array()
    sign = None
    if np.allclose(final, ref, rtol=0, atol=1e-12):
        sign = 1
    elif np.allclose(final, -ref, rtol=0, atol=1e-12):
        sign = -1
    return OpticsResult(rotation_deg, trace[-1][1] - trace[0][1], sign, trace)
