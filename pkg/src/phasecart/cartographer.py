"""Locate zeros of the overlap in the field plane and assign their charges."""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .apparatus import DEFAULT_CONFIG, ApparatusConfig, ParameterPoint, amplitude_array
from .errors import ConfigError, ConsistencyError, SingularPathError
from .phase import rectangle_path, winding_number

SEED_THRESHOLD = 0.2
ZERO_TOL = 1e-9
MERGE_RADIUS = 1e-6
MAX_ITER = 200
MIN_CHARGE_HALF_WIDTH = 1e-3


class Rect(NamedTuple):
    b1_min: float
    b1_max: float
    b2_min: float
    b2_max: float

    def contains(self, p, tol: float = 0.0) -> bool:
        return (
            self.b1_min - tol <= p[0] <= self.b1_max + tol
            and self.b2_min - tol <= p[1] <= self.b2_max + tol
        )


@dataclass(frozen=True)
class Singularity:
    location: ParameterPoint
    charge: int
    localization_radius: float
    unresolved: bool = False

    def to_dict(self) -> dict:
        return {
            "b1y": self.location.b1y,
            "b2y": self.location.b2y,
            "charge": self.charge,
            "radius": self.localization_radius,
            "unresolved": self.unresolved,
        }


def _as_rect(rect) -> Rect:
    r = Rect(*(float(v) for v in rect))
    if not all(math.isfinite(v) for v in r) or r.b1_max <= r.b1_min or r.b2_max <= r.b2_min:
        raise ConfigError(f"degenerate rectangle {tuple(rect)}")
    return r


def _residual(p, config) -> np.ndarray:
    c = complex(amplitude_array(p[0], p[1], config))
    return np.array([c.real, c.imag])


def _jacobian(p, config) -> np.ndarray:
    h = 1e-6 * max(1.0, abs(p[0]), abs(p[1]))
    jac = np.empty((2, 2))
    for k in range(2):
        dp = np.zeros(2)
        dp[k] = h
        jac[:, k] = (_residual(p + dp, config) - _residual(p - dp, config)) / (2 * h)
    return jac


def _newton(p0, config, max_iter: int = MAX_ITER):
    """Damped Newton on (Re c, Im c).  Returns (point, |c|, radius, converged)."""
    p = np.asarray(p0, dtype=float)
    f = _residual(p, config)
    fn = float(np.hypot(*f))
    scale = max(1.0, float(np.hypot(*p)))
    step_len = math.inf
    for _ in range(max_iter):
        # flat (higher-order) zeros meet the |c| target far from the root,
        # so stop on step length too
        if fn < ZERO_TOL * 1e-3 and step_len < 1e-10 * scale:
            break
        jac = _jacobian(p, config)
        try:
            step = np.linalg.solve(jac, -f)
        except np.linalg.LinAlgError:
            break
        lam = 1.0
        while lam > 1e-6:
            trial = p + lam * step
            ft = _residual(trial, config)
            ftn = float(np.hypot(*ft))
            if ftn < fn:
                break
            lam *= 0.5
        else:
            break
        step_len = float(np.hypot(*(trial - p)))
        p, f, fn = trial, ft, ftn
        if step_len < 1e-14 * scale:
            break
    smin = float(np.linalg.svd(_jacobian(p, config), compute_uv=False)[-1])
    radius = fn / smin if smin > 0 else math.inf
    if math.isfinite(step_len):
        radius = max(radius, step_len)
    return p, fn, radius, fn < ZERO_TOL


def _quadrisect(center, half, config, levels: int = 40):
    """Shrink a cell around ``center`` by keeping the quarter with the smallest |c|."""
    c = np.asarray(center, dtype=float)
    h = float(half)
    offsets = np.linspace(-1.0, 1.0, 5)
    for _ in range(levels):
        best = None
        for sx in (-0.5, 0.5):
            for sy in (-0.5, 0.5):
                qc = c + h * np.array([sx, sy])
                xs, ys = np.meshgrid(qc[0] + 0.5 * h * offsets, qc[1] + 0.5 * h * offsets)
                m = float(np.abs(amplitude_array(xs, ys, config)).min())
                if best is None or m < best[0]:
                    best = (m, qc)
        c = best[1]
        h *= 0.5
    return c


def _refine_seed(seed, spacing, config):
    p, fn, radius, ok = _newton(seed, config)
    if not ok:
        p, fn, radius, ok = _newton(_quadrisect(seed, spacing, config), config)
    return p, fn, radius, ok


def _grid_seeds(rect: Rect, grid_n: int, config) -> tuple[list[np.ndarray], float]:
    xs = np.linspace(rect.b1_min, rect.b1_max, grid_n)
    ys = np.linspace(rect.b2_min, rect.b2_max, grid_n)
    bx, by = np.meshgrid(xs, ys, indexing="ij")
    mag = np.abs(amplitude_array(bx, by, config))
    padded = np.pad(mag, 1, constant_values=np.inf)
    is_min = mag < SEED_THRESHOLD
    for dx in (-1, 0, 1):
        for dy in (-1, 0, 1):
            if dx or dy:
                neigh = padded[1 + dx : 1 + dx + grid_n, 1 + dy : 1 + dy + grid_n]
                is_min &= mag <= neigh
    seeds = [np.array([xs[i], ys[k]]) for i, k in zip(*np.nonzero(is_min))]
    spacing = max(xs[1] - xs[0], ys[1] - ys[0])
    return seeds, spacing


def _charge(loc: ParameterPoint, half: float, max_half: float, config) -> int | None:
    """Winding around a small square; higher-order zeros are flat enough to
    touch the singular floor, so the square grows until the trace is clean."""
    while True:
        square = rectangle_path(loc.b1y - half, loc.b1y + half, loc.b2y - half, loc.b2y + half)
        try:
            return winding_number(square, config)
        except SingularPathError:
            if half >= max_half:
                return None
            half = min(4.0 * half, max_half)


def _workers() -> int:
    raw = os.environ.get("PHASECART_THREADS", "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def find_singularities(
    rect, grid_n: int = 128, config: ApparatusConfig = DEFAULT_CONFIG, workers: int | None = None
) -> list[Singularity]:
    rect = _as_rect(rect)
    if grid_n < 16:
        raise ConfigError("grid_n must be at least 16")
    seeds, spacing = _grid_seeds(rect, int(grid_n), config)
    workers = workers or _workers()
    if workers > 1 and len(seeds) > 1:
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(lambda s: _refine_seed(s, spacing, config), seeds))
    else:
        results = [_refine_seed(s, spacing, config) for s in seeds]

    found: list[tuple[np.ndarray, float, bool]] = []
    for seed, (p, fn, radius, ok) in zip(seeds, results):
        if ok and not rect.contains(p):
            continue
        if not ok:
            # keep the seed location: that is what the grid saw
            p, radius = seed, spacing
        dup = next((k for k, (q, _, qok) in enumerate(found) if qok == ok and np.hypot(*(q - p)) < MERGE_RADIUS), None)
        if dup is None:
            found.append((p, radius, ok))
        elif radius < found[dup][1]:
            found[dup] = (p, radius, ok)

    out = []
    for p, radius, ok in found:
        loc = ParameterPoint(float(p[0]), float(p[1]))
        if not ok:
            out.append(Singularity(loc, 0, float(radius), unresolved=True))
            continue
        charge = _charge(loc, max(MIN_CHARGE_HALF_WIDTH, 2.0 * radius), 0.5 * spacing, config)
        if charge is None:
            out.append(Singularity(loc, 0, float(radius), unresolved=True))
        else:
            out.append(Singularity(loc, charge, float(radius)))
    out.sort(key=lambda s: (s.location.b1y, s.location.b2y))
    return out


def charge_sum(rect, config: ApparatusConfig = DEFAULT_CONFIG, grid_n: int = 128) -> int:
    """Net charge inside ``rect``, cross-checked between boundary winding and interior zeros."""
    rect = _as_rect(rect)
    boundary = winding_number(rectangle_path(*rect), config)
    zeros = find_singularities(rect, grid_n, config)
    if any(z.unresolved for z in zeros):
        raise ConsistencyError("unresolved zero candidates inside the rectangle")
    interior = sum(z.charge for z in zeros)
    if interior != boundary:
        raise ConsistencyError(f"boundary winding {boundary} != interior charge sum {interior}")
    return boundary


def boundary_is_regular(rect, config: ApparatusConfig = DEFAULT_CONFIG) -> bool:
    """True when the rectangle's boundary can be traced without touching a zero."""
    try:
        winding_number(rectangle_path(*_as_rect(rect)), config)
    except (SingularPathError, ConsistencyError):
        return False
    return True

