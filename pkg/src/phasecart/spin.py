"""SU(2) rotations, spin-j representation matrices and spinor overlaps.

A rotation by ``theta`` about the unit axis ``n`` is stored as the unit
quaternion ``(cos(theta/2), sin(theta/2) * n)`` and acts on spin-1/2 as
``exp(-i theta/2 n.sigma)``.  The quaternion sign is kept: ``q`` and ``-q``
are different SU(2) elements (a 360 degree turn is ``-I``).

Angles are degrees at every public entry point and radians inside.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import ConfigError

J_MAX = 25
ZERO_CONTRAST = 1e-12

# factorials up to 100! in double precision
_FACT = np.array([float(math.factorial(k)) for k in range(101)])

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)


def deg2rad(angle_deg):
    return np.multiply(angle_deg, math.pi / 180.0)


def rad2deg(angle_rad):
    return np.multiply(angle_rad, 180.0 / math.pi)


# ---------------------------------------------------------------------------
# vectorised quaternion kernels, arrays of shape (..., 4) ordered (w, x, y, z)


def quat_multiply(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Hamilton product ``a * b`` broadcast over leading axes."""
    aw, ax, ay, az = np.moveaxis(np.asarray(a, dtype=float), -1, 0)
    bw, bx, by, bz = np.moveaxis(np.asarray(b, dtype=float), -1, 0)
    return np.stack(
        [
            aw * bw - ax * bx - ay * by - az * bz,
            aw * bx + ax * bw + ay * bz - az * by,
            aw * by - ax * bz + ay * bw + az * bx,
            aw * bz + ax * by - ay * bx + az * bw,
        ],
        axis=-1,
    )


def quat_conjugate(q: np.ndarray) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    return q * np.array([1.0, -1.0, -1.0, -1.0])


def quat_from_vector(field: np.ndarray) -> np.ndarray:
    """Rotation about ``field`` by ``|field|`` degrees, for an array of 3-vectors.

    A zero vector gives the identity.
    """
    field = np.asarray(field, dtype=float)
    norm = np.linalg.norm(field, axis=-1)
    half = 0.5 * deg2rad(norm)
    safe = np.where(norm > 0.0, norm, 1.0)
    axis = field / safe[..., None]
    return np.concatenate([np.cos(half)[..., None], np.sin(half)[..., None] * axis], axis=-1)


def quat_to_su2(q: np.ndarray) -> np.ndarray:
    """2x2 complex matrices ``w - i (x sx + y sy + z sz)`` for an array of quaternions."""
    q = np.asarray(q, dtype=float)
    w, x, y, z = np.moveaxis(q, -1, 0)
    out = np.empty(q.shape[:-1] + (2, 2), dtype=complex)
    out[..., 0, 0] = w - 1j * z
    out[..., 0, 1] = -y - 1j * x
    out[..., 1, 0] = y - 1j * x
    out[..., 1, 1] = w + 1j * z
    return out


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Rotation:
    """Element of SU(2) as a unit quaternion."""

    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_array(cls, q) -> Rotation:
        w, x, y, z = (float(v) for v in q)
        return cls(w, x, y, z)

    def as_array(self) -> np.ndarray:
        return np.array([self.w, self.x, self.y, self.z])

    def matrix(self) -> np.ndarray:
        return quat_to_su2(self.as_array())

    def inverse(self) -> Rotation:
        return Rotation(self.w, -self.x, -self.y, -self.z)

    def __matmul__(self, other: Rotation) -> Rotation:
        return compose(self, other)

    def __neg__(self) -> Rotation:
        return Rotation(-self.w, -self.x, -self.y, -self.z)


IDENTITY = Rotation(1.0, 0.0, 0.0, 0.0)


def rotation_from_axis_angle(axis, angle_deg: float) -> Rotation:
    axis = np.asarray(axis, dtype=float)
    norm = float(np.linalg.norm(axis))
    if angle_deg == 0:
        return IDENTITY
    if norm == 0.0:
        raise ConfigError("undefined rotation axis")
    half = 0.5 * float(deg2rad(angle_deg))
    s = math.sin(half) / norm
    return Rotation(math.cos(half), s * axis[0], s * axis[1], s * axis[2])


def compose(second: Rotation, first: Rotation) -> Rotation:
    """Operator product ``second * first`` (``first`` acts first)."""
    q = quat_multiply(second.as_array(), first.as_array())
    return Rotation.from_array(q / np.linalg.norm(q))


def axis_angle_of(r: Rotation) -> tuple[np.ndarray, float]:
    """Axis and angle in [0, 360] degrees; the sign of ``w`` picks the half of the range."""
    v = np.array([r.x, r.y, r.z])
    s = float(np.linalg.norm(v))
    angle = float(rad2deg(2.0 * math.atan2(s, r.w)))
    if s < 1e-15:
        return np.array([0.0, 0.0, 1.0]), (0.0 if r.w > 0 else 360.0)
    return v / s, angle


# ---------------------------------------------------------------------------
# spin-j representation


def _check_j(j) -> Fraction:
    jf = Fraction(j).limit_denominator(2)
    if jf.denominator not in (1, 2) or abs(float(jf) - float(j)) > 1e-12:
        raise ConfigError(f"spin must be a half-integer, got {j}")
    if jf <= 0 or jf > J_MAX:
        raise ConfigError(f"spin j={j} outside supported range 1/2..{J_MAX}")
    return jf


def m_values(j) -> list[Fraction]:
    """Magnetic quantum numbers j, j-1, ..., -j (basis ordering)."""
    jf = _check_j(j)
    return [jf - k for k in range(int(2 * jf) + 1)]


def euler_zyz(q: np.ndarray):
    """Half-sum, half-difference and middle Euler angles of an SU(2) element.

    Returns ``(s, d, beta)`` with ``alpha = s + d`` and ``gamma = s - d`` so that
    the spin-1/2 matrix reads
    ``[[e^{-is} cos(beta/2), -e^{-id} sin(beta/2)], [e^{id} sin(beta/2), e^{is} cos(beta/2)]]``.
    Keeping the half angles preserves the SU(2) sign for half-integer j.
    """
    m = quat_to_su2(q)
    a = m[..., 0, 0]
    b = m[..., 1, 0]
    beta = 2.0 * np.arctan2(np.abs(b), np.abs(a))
    return -np.angle(a), np.angle(b), beta


@lru_cache(maxsize=None)
def _little_d_terms(j2: int, mp2: int, m2: int):
    """(sign*coefficient, cos power, sin power) triples of the Wigner sum.

    Arguments are doubled quantum numbers so everything stays integral.
    """
    jpm, jmm = (j2 + m2) // 2, (j2 - m2) // 2
    jpmp, jmmp = (j2 + mp2) // 2, (j2 - mp2) // 2
    dm = (mp2 - m2) // 2
    root = math.sqrt(_FACT[jpmp] * _FACT[jmmp] * _FACT[jpm] * _FACT[jmm])
    terms = []
    for k in range(max(0, -dm), min(jpm, jmmp) + 1):
        denom = _FACT[jpm - k] * _FACT[k] * _FACT[jmmp - k] * _FACT[k + dm]
        sign = -1.0 if (k + dm) % 2 else 1.0
        terms.append((sign * root / denom, j2 - 2 * k - dm, 2 * k + dm))
    return tuple(terms)


def wigner_d_element(j, mp, m, q) -> np.ndarray:
    """Matrix element ``<j mp| D^j(q) |j m>`` for an array of quaternions."""
    jf = _check_j(j)
    j2, mp2, m2 = int(2 * jf), int(2 * Fraction(mp)), int(2 * Fraction(m))
    if abs(mp2) > j2 or abs(m2) > j2 or (j2 - mp2) % 2 or (j2 - m2) % 2:
        raise ConfigError(f"invalid magnetic numbers ({mp}, {m}) for j={j}")
    s, d, beta = euler_zyz(q)
    c, sn = np.cos(beta / 2), np.sin(beta / 2)
    little = np.zeros_like(beta)
    for coef, pc, ps in _little_d_terms(j2, mp2, m2):
        little = little + coef * c**pc * sn**ps
    alpha, gamma = s + d, s - d
    return np.exp(-0.5j * (mp2 * alpha + m2 * gamma)) * little


@lru_cache(maxsize=None)
def _little_d_table(j2: int):
    """All terms of the (2j+1)^2 little-d sums as flat arrays."""
    rows, cols, coefs, pcs, pss = [], [], [], [], []
    for r in range(j2 + 1):
        for c in range(j2 + 1):
            for coef, pc, ps in _little_d_terms(j2, j2 - 2 * r, j2 - 2 * c):
                rows.append(r)
                cols.append(c)
                coefs.append(coef)
                pcs.append(pc)
                pss.append(ps)
    return tuple(np.array(a) for a in (rows, cols, coefs, pcs, pss))


def wigner_d(j, r: Rotation) -> np.ndarray:
    """Spin-j representation matrix of ``r`` in the basis m = j..-j."""
    j2 = int(2 * _check_j(j))
    s, d, beta = (float(v) for v in euler_zyz(r.as_array()))
    rows, cols, coefs, pcs, pss = _little_d_table(j2)
    little = np.zeros((j2 + 1, j2 + 1))
    np.add.at(little, (rows, cols), coefs * math.cos(beta / 2) ** pcs * math.sin(beta / 2) ** pss)
    m2 = j2 - 2 * np.arange(j2 + 1)
    alpha, gamma = s + d, s - d
    return np.exp(-0.5j * m2[:, None] * alpha) * little * np.exp(-0.5j * m2[None, :] * gamma)


@lru_cache(maxsize=None)
def _spin_ops(j2: int):
    j = j2 / 2
    ms = np.array([j - k for k in range(j2 + 1)])
    jz = np.diag(ms).astype(complex)
    # <m+1|J+|m> on the superdiagonal (basis ordered by decreasing m)
    jp = np.diag(np.sqrt(j * (j + 1) - ms[1:] * (ms[1:] + 1)), 1).astype(complex)
    jx = 0.5 * (jp + jp.conj().T)
    jy = -0.5j * (jp - jp.conj().T)
    return jx, jy, jz


def spin_operators(j) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Angular momentum matrices (Jx, Jy, Jz) with hbar = 1."""
    return _spin_ops(int(2 * _check_j(j)))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SpinState:
    j: Fraction
    amplitudes: np.ndarray

    def __post_init__(self):
        jf = _check_j(self.j)
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (int(2 * jf) + 1,):
            raise ConfigError(f"spin-{jf} state needs {int(2 * jf) + 1} amplitudes")
        norm = np.linalg.norm(amps)
        if abs(norm**2 - 1.0) > 1e-12:
            raise ConfigError(f"state is not normalised (|psi|^2 = {norm**2!r})")
        object.__setattr__(self, "j", jf)
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def basis(cls, j, m) -> SpinState:
        ms = m_values(j)
        mf = Fraction(m).limit_denominator(2)
        if mf not in ms:
            raise ConfigError(f"m={m} is not a valid projection for j={j}")
        amps = np.zeros(len(ms), dtype=complex)
        amps[ms.index(mf)] = 1.0
        return cls(j, amps)

    def rotated(self, r: Rotation) -> SpinState:
        return SpinState(self.j, wigner_d(self.j, r) @ self.amplitudes)

    def phased(self, phase_deg: float) -> SpinState:
        return SpinState(self.j, np.exp(1j * deg2rad(phase_deg)) * self.amplitudes)

    def expectation(self, op: np.ndarray) -> complex:
        return complex(np.vdot(self.amplitudes, op @ self.amplitudes))


SPIN_UP = SpinState.basis(Fraction(1, 2), Fraction(1, 2))
SPIN_DOWN = SpinState.basis(Fraction(1, 2), Fraction(-1, 2))


@dataclass(frozen=True)
class PancharatnamAmplitude:
    """Complex overlap ``c`` with its modulus and principal argument (radians).

    ``principal_phase`` is NaN when the states are orthogonal.
    """

    value: complex
    contrast: float
    principal_phase: float

    @classmethod
    def of(cls, value: complex) -> PancharatnamAmplitude:
        value = complex(value)
        contrast = abs(value)
        phase = math.atan2(value.imag, value.real) if contrast > ZERO_CONTRAST else math.nan
        return cls(value, contrast, phase)

    @property
    def phase_defined(self) -> bool:
        return not math.isnan(self.principal_phase)

    @property
    def phase_deg(self) -> float:
        return float(rad2deg(self.principal_phase))


def pancharatnam_overlap(reference: SpinState, target: SpinState) -> PancharatnamAmplitude:
    if reference.j != target.j:
        raise ConfigError("overlap needs states of equal spin")
    return PancharatnamAmplitude.of(np.vdot(reference.amplitudes, target.amplitudes))
