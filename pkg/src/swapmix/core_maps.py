"""Affine Bloch-vector maps for a qubit colliding with polarized ancillas.

A qubit state is written as rho = (I + r.sigma)/2 and carried around as the
four-vector (1, r). Every channel in this module is then a real 4x4 matrix

    E = [[1, 0],
         [s, T]]

acting on (1, r) by plain matrix multiplication: r -> T r + s. The collision
unit is a partial swap with an ancilla polarized along u; repeated collisions
and their continuous-time interpolation admit closed forms, which is what this
module implements. Everything here is single-u; convex mixtures over u live in
:mod:`swapmix.mixture`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularMap",
    "CollisionParams",
    "ContinuousParams",
    "AffineQubitMap",
    "as_bloch_vector",
    "density_from_bloch",
    "bloch_from_density",
    "validate_density",
    "single_collision_map",
    "n_collision_map",
    "continuous_params",
    "continuous_map",
    "continuous_map_derivative",
    "continuous_map_inverse",
    "invert_map",
    "apply_map",
    "determinant_tolerance",
]

_I2 = np.eye(2, dtype=complex)
_SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
PAULI = (_SIGMA_X, _SIGMA_Y, _SIGMA_Z)

# Below this polarization length the rotation axis is numerically undefined
# and the zero-polarization limit (pure isotropic decay) is used instead.
TINY_POLARIZATION = 1e-9

_BALL_TOL = 1e-12


class SingularMap(Exception):
    """Raised when a map's linear block is not invertible at the working tolerance."""


@dataclass(frozen=True)
class CollisionParams:
    """Partial-swap strength and collision period.

    :param eta: swap angle per collision, in (0, pi/2); eta -> pi/2 is a full swap
    :param tau: duration of one collision, > 0
    """

    eta: float
    tau: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 < self.eta < math.pi / 2:
            raise ValueError(f"eta must lie in (0, pi/2), got {self.eta}")
        if not self.tau > 0.0:
            raise ValueError(f"tau must be positive, got {self.tau}")

    @property
    def cos_eta(self) -> float:
        return math.cos(self.eta)

    @property
    def sin_eta(self) -> float:
        return math.sin(self.eta)

    @property
    def relaxation_rate(self) -> float:
        """Longitudinal relaxation rate of the interpolated dynamics."""
        return -2.0 * math.log(math.cos(self.eta)) / self.tau


@dataclass(frozen=True)
class ContinuousParams:
    """Rates of the continuous-time interpolation for one ancilla polarization.

    relaxation_rate is the decay rate toward the ancilla polarization,
    transverse_rate the (slower) decay rate of the components orthogonal to
    it, rotation_rate the precession frequency about it, and rotation_angle
    the precession angle accumulated per collision.
    """

    relaxation_rate: float
    transverse_rate: float
    rotation_rate: float
    rotation_angle: float


def as_bloch_vector(r) -> np.ndarray:
    """Validate and return a Bloch vector as a float array of shape (3,)."""
    v = np.asarray(r, dtype=float)
    if v.shape != (3,):
        raise ValueError(f"Bloch vector must have shape (3,), got {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValueError("Bloch vector must be finite")
    n = float(np.linalg.norm(v))
    if n > 1.0 + _BALL_TOL:
        raise ValueError(f"Bloch vector must lie in the unit ball, |r| = {n}")
    return v


def density_from_bloch(r) -> np.ndarray:
    """Return the 2x2 density matrix (I + r.sigma)/2."""
    r = as_bloch_vector(r)
    return 0.5 * (_I2 + r[0] * _SIGMA_X + r[1] * _SIGMA_Y + r[2] * _SIGMA_Z)


def bloch_from_density(rho) -> np.ndarray:
    """Return the Bloch vector Tr(rho sigma_j) of a 2x2 matrix."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got {rho.shape}")
    return np.array([np.trace(rho @ s).real for s in PAULI])


def validate_density(rho, atol: float = 1e-10) -> np.ndarray:
    """Check Hermiticity, unit trace and positivity; return rho as an array."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise ValueError(f"density matrix must be 2x2, got {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > atol:
        raise ValueError("density matrix must be Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol:
        raise ValueError("density matrix must have unit trace")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density matrix must be positive semidefinite")
    return rho


class AffineQubitMap:
    """A trace-preserving affine map on Bloch vectors, stored as a 4x4 matrix.

    The first row is pinned to (1, 0, 0, 0); the remaining block is the
    translation column s and the 3x3 linear part T. Instances are immutable
    and compose with ``@`` (``a @ b`` applies ``b`` first).
    """

    __slots__ = ("_m",)

    def __init__(self, matrix) -> None:
        m = np.array(matrix, dtype=float)
        if m.shape != (4, 4):
            raise ValueError(f"affine map must be 4x4, got {m.shape}")
        if m[0, 0] != 1.0 or np.any(m[0, 1:] != 0.0):
            raise ValueError("first row of an affine qubit map must be (1, 0, 0, 0)")
        if not np.all(np.isfinite(m)):
            raise ValueError("affine map entries must be finite")
        m.setflags(write=False)
        self._m = m

    @property
    def matrix(self) -> np.ndarray:
        return self._m

    @property
    def translation(self) -> np.ndarray:
        """The translation column s (copy)."""
        return self._m[1:, 0].copy()

    @property
    def linear(self) -> np.ndarray:
        """The 3x3 linear block T (copy)."""
        return self._m[1:, 1:].copy()

    @classmethod
    def identity(cls) -> "AffineQubitMap":
        return cls(np.eye(4))

    def __matmul__(self, other: "AffineQubitMap") -> "AffineQubitMap":
        if not isinstance(other, AffineQubitMap):
            return NotImplemented
        return AffineQubitMap(self._m @ other._m)

    def __call__(self, r) -> np.ndarray:
        r = as_bloch_vector(r)
        return self._m[1:, 1:] @ r + self._m[1:, 0]

    def __repr__(self) -> str:
        return f"AffineQubitMap({self._m.tolist()!r})"


def _assemble(translation, block) -> AffineQubitMap:
    m = np.zeros((4, 4))
    m[0, 0] = 1.0
    m[1:, 0] = translation
    m[1:, 1:] = block
    return AffineQubitMap(m)


def _cross_matrix(v) -> np.ndarray:
    """Matrix K with K r = r x v."""
    return np.array(
        [
            [0.0, v[2], -v[1]],
            [-v[2], 0.0, v[0]],
            [v[1], -v[0], 0.0],
        ]
    )


def single_collision_map(u, params: CollisionParams) -> AffineQubitMap:
    """Bloch-vector channel of one partial-swap collision.

    The qubit exchanges a fraction of its state with an ancilla polarized
    along ``u``: r -> c^2 r + s^2 u - c s (u x r) with c = cos(eta),
    s = sin(eta).
    """
    u = as_bloch_vector(u)
    c, s = params.cos_eta, params.sin_eta
    block = c * c * np.eye(3) + c * s * _cross_matrix(u)
    return _assemble(s * s * u, block)


def _radial_rates(u_norm, params: CollisionParams):
    """Per-collision rotation angle and continuous rates as functions of |u|.

    Works elementwise on arrays. Returns (rotation_angle, transverse_rate,
    rotation_rate); the relaxation rate does not depend on |u|.
    """
    c, s = params.cos_eta, params.sin_eta
    angle = np.arctan2(s * np.asarray(u_norm, dtype=float), c)
    # cos(angle) = c / hypot(c, s u), so the transverse decay rate
    # relaxation_rate - (-log cos(angle))/tau collapses to -log(c*hypot)/tau.
    transverse = -np.log(c * np.hypot(c, s * np.asarray(u_norm, dtype=float))) / params.tau
    return angle, transverse, angle / params.tau


def continuous_params(u, params: CollisionParams) -> ContinuousParams:
    """Decay/precession rates of the interpolated single-polarization dynamics."""
    u = as_bloch_vector(u)
    angle, transverse, rotation = _radial_rates(float(np.linalg.norm(u)), params)
    return ContinuousParams(
        relaxation_rate=params.relaxation_rate,
        transverse_rate=float(transverse),
        rotation_rate=float(rotation),
        rotation_angle=float(angle),
    )


def _split_polarization(u):
    """Return (|u|, unit vector or zero, tiny flag)."""
    n = float(np.linalg.norm(u))
    if n < TINY_POLARIZATION:
        return n, np.zeros(3), True
    return n, u / n, False


def n_collision_map(u, params: CollisionParams, n: int) -> AffineQubitMap:
    """Closed form of ``n`` identical collisions with polarization ``u``.

    Equal to the n-fold composition of :func:`single_collision_map` but
    evaluated directly: the linear block is a damped rotation about u plus a
    rank-one piece along u, and the translation saturates toward u.
    """
    u = as_bloch_vector(u)
    if not isinstance(n, (int, np.integer)) or n < 0:
        raise ValueError(f"collision count must be a nonnegative integer, got {n!r}")
    c, s = params.cos_eta, params.sin_eta
    norm, unit, tiny = _split_polarization(u)
    longitudinal = (c * c) ** n
    if tiny:
        return _assemble(u * (1.0 - longitudinal), longitudinal * np.eye(3))
    angle = math.atan2(s * norm, c)
    transverse_amp = (c * math.hypot(c, s * norm)) ** n
    cos_n, sin_n = math.cos(n * angle), math.sin(n * angle)
    block = (
        transverse_amp * (cos_n * np.eye(3) + sin_n * _cross_matrix(unit))
        + (longitudinal - transverse_amp * cos_n) * np.outer(unit, unit)
    )
    return _assemble(u * (1.0 - longitudinal), block)


def _continuous_coefficients(u_norm, params: CollisionParams, t):
    """Scalar weights (longitudinal, cosine, sine, rank-one) at time t.

    The linear block of the continuous map is cosine * I + sine * (cross
    matrix of the unit polarization) + rank_one * (unit outer product);
    elementwise on arrays.
    """
    _, transverse, rotation = _radial_rates(u_norm, params)
    longitudinal = np.exp(-params.relaxation_rate * np.asarray(t, dtype=float))
    amp = np.exp(-transverse * np.asarray(t, dtype=float))
    phase = rotation * np.asarray(t, dtype=float)
    cosine = amp * np.cos(phase)
    sine = amp * np.sin(phase)
    return longitudinal, cosine, sine, longitudinal - cosine


def continuous_map(u, params: CollisionParams, t: float) -> AffineQubitMap:
    """Interpolated collision channel at continuous time ``t`` >= 0.

    At t = n*tau this coincides with :func:`n_collision_map`. For |u| below
    ``TINY_POLARIZATION`` the rotation axis is undefined and the map reduces
    to uniform decay toward u = 0.
    """
    u = as_bloch_vector(u)
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    norm, unit, tiny = _split_polarization(u)
    longitudinal, cosine, sine, rank_one = _continuous_coefficients(norm, params, t)
    translation = u * (1.0 - longitudinal)
    if tiny:
        return _assemble(translation, longitudinal * np.eye(3))
    block = (
        cosine * np.eye(3)
        + sine * _cross_matrix(unit)
        + rank_one * np.outer(unit, unit)
    )
    return _assemble(translation, block)


def continuous_map_derivative(u, params: CollisionParams, t: float) -> np.ndarray:
    """Entrywise time derivative of :func:`continuous_map`; plain 4x4 array.

    The first row is zero, so this is not itself an affine map.
    """
    u = as_bloch_vector(u)
    if t < 0.0:
        raise ValueError(f"time must be nonnegative, got {t}")
    norm, unit, tiny = _split_polarization(u)
    rate = params.relaxation_rate
    longitudinal, cosine, sine, _ = _continuous_coefficients(norm, params, t)
    d = np.zeros((4, 4))
    d[1:, 0] = u * rate * longitudinal
    if tiny:
        d[1:, 1:] = -rate * longitudinal * np.eye(3)
        return d
    _, transverse, rotation = _radial_rates(norm, params)
    d_cos = -transverse * cosine - rotation * sine
    d_sin = -transverse * sine + rotation * cosine
    d_rank = -rate * longitudinal - d_cos
    d[1:, 1:] = (
        d_cos * np.eye(3)
        + d_sin * _cross_matrix(unit)
        + d_rank * np.outer(unit, unit)
    )
    return d


def determinant_tolerance(linear_block) -> float:
    """Singularity threshold for a 3x3 linear block, scaled by its magnitude."""
    scale = float(np.abs(linear_block).max())
    return 1e-12 * max(1.0, scale**3)


def _invert_block(block: np.ndarray) -> np.ndarray:
    """3x3 inverse by cofactor expansion; raises SingularMap near det = 0."""
    a, b, c = block[0]
    d, e, f = block[1]
    g, h, i = block[2]
    cof = np.array(
        [
            [e * i - f * h, f * g - d * i, d * h - e * g],
            [c * h - b * i, a * i - c * g, b * g - a * h],
            [b * f - c * e, c * d - a * f, a * e - b * d],
        ]
    )
    det = a * cof[0, 0] + b * cof[0, 1] + c * cof[0, 2]
    if abs(det) < determinant_tolerance(block):
        raise SingularMap(f"linear block determinant {det:.3e} below tolerance")
    return cof.T / det


def invert_map(m: AffineQubitMap) -> AffineQubitMap:
    """Inverse affine map: (s, T) -> (-T^-1 s, T^-1).

    :raises SingularMap: if |det T| falls below :func:`determinant_tolerance`.
    """
    block_inv = _invert_block(m.matrix[1:, 1:])
    return _assemble(-block_inv @ m.matrix[1:, 0], block_inv)


def continuous_map_inverse(u, params: CollisionParams, t: float) -> AffineQubitMap:
    """Inverse of :func:`continuous_map` via the rank-one update identity.

    The linear block is C + rank_one * (unit outer product) with
    C = cosine * I + sine * K, whose inverse is known in closed form; the
    rank-one part is then folded in with the Sherman-Morrison formula. Kept
    as an independent cross-check of :func:`invert_map`.
    """
    u = as_bloch_vector(u)
    norm, unit, tiny = _split_polarization(u)
    longitudinal, cosine, sine, rank_one = _continuous_coefficients(norm, params, t)
    tol = determinant_tolerance(continuous_map(u, params, t).matrix[1:, 1:])
    if tiny:
        if longitudinal < tol:
            raise SingularMap("longitudinal decay factor below tolerance")
        return _assemble(-u * (1.0 - longitudinal) / longitudinal, np.eye(3) / longitudinal)
    planar = cosine * cosine + sine * sine
    # C is singular on the rotation plane when both trig weights vanish, and
    # the update denominator cosine + rank_one equals the longitudinal factor.
    if abs(cosine) < tol or planar < tol or longitudinal < tol:
        raise SingularMap("rank-one update form not invertible at this time")
    outer = np.outer(unit, unit)
    c_inv = (
        cosine * np.eye(3)
        - sine * _cross_matrix(unit)
        + (sine * sine / cosine) * outer
    ) / planar
    block_inv = c_inv - (rank_one / (cosine * longitudinal)) * outer
    translation = u * (1.0 - longitudinal)
    return _assemble(-block_inv @ translation, block_inv)


def apply_map(m: AffineQubitMap, rho) -> np.ndarray:
    """Apply an affine map to a 2x2 density matrix."""
    r = bloch_from_density(rho)
    return density_from_bloch(m(r))
