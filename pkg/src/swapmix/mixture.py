"""Convex mixtures of collision channels over random ancilla polarizations.

The environment polarization is drawn from a probability distribution on the
closed unit ball, discretized as weighted nodes (a ``BallDistribution``). The
mixture channel at time t is the weight-averaged single-polarization channel,

    mixture_map = sum_i w_i * continuous_map(u_i, params, t),

which is again trace preserving and completely positive. Gaussian profiles are
discretized on an origin-anchored cubic lattice.

Nodes sharing the same |u| are aggregated into radial shells internally: the
time-dependent scalar weights depend only on |u|, so a shell contributes
through its total weight and its first/second direction moments. This is an
exact regrouping of the node sum and is what keeps dense lattices cheap.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .core_maps import (
    TINY_POLARIZATION,
    AffineQubitMap,
    CollisionParams,
    _assemble,
    _radial_rates,
)

__all__ = [
    "EmptySupport",
    "GaussianSpec",
    "BallDistribution",
    "point_mass",
    "build_gaussian",
    "mix",
    "mixture_map",
    "mixture_map_derivative",
    "mixture_map_series",
    "write_distribution_csv",
]

DEFAULT_GRID_SPACING = 0.05
PRUNE_RATIO = 1e-15

_BALL_TOL = 1e-12
_WEIGHT_SUM_TOL = 1e-12
# nodes whose |u| agrees to this many decimals share one radial shell
_SHELL_DECIMALS = 12


class EmptySupport(Exception):
    """Raised when a requested distribution has no representable weight."""


@dataclass(frozen=True)
class GaussianSpec:
    """Axis-aligned Gaussian profile on the polarization ball.

    :param center: mean polarization (may lie anywhere; support is clipped
        to the unit ball)
    :param widths: per-axis standard deviations, all positive
    :param grid_spacing: lattice pitch of the discretization
    """

    center: tuple[float, float, float]
    widths: tuple[float, float, float]
    grid_spacing: float = DEFAULT_GRID_SPACING

    def __post_init__(self) -> None:
        center = tuple(float(x) for x in self.center)
        widths = tuple(float(x) for x in self.widths)
        if len(center) != 3 or len(widths) != 3:
            raise ValueError("center and widths must have three components")
        if not all(np.isfinite(center)) or not all(np.isfinite(widths)):
            raise ValueError("center and widths must be finite")
        if any(w <= 0.0 for w in widths):
            raise ValueError(f"widths must be positive, got {widths}")
        if not 0.0 < self.grid_spacing <= 1.0:
            raise ValueError(f"grid_spacing must lie in (0, 1], got {self.grid_spacing}")
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "widths", widths)
        object.__setattr__(self, "grid_spacing", float(self.grid_spacing))


class BallDistribution:
    """Weighted polarization nodes inside the closed unit ball.

    Nodes are (N, 3) vectors with |u_i| <= 1; weights are nonnegative and
    sum to one. Instances are immutable.
    """

    __slots__ = ("_nodes", "_weights", "__dict__")

    def __init__(self, nodes, weights) -> None:
        nodes = np.array(nodes, dtype=float, ndmin=2)
        weights = np.array(weights, dtype=float, ndmin=1)
        if nodes.ndim != 2 or nodes.shape[1] != 3:
            raise ValueError(f"nodes must have shape (N, 3), got {nodes.shape}")
        if weights.shape != (nodes.shape[0],):
            raise ValueError("weights must match nodes one to one")
        if nodes.shape[0] == 0:
            raise EmptySupport("distribution has no nodes")
        if not (np.all(np.isfinite(nodes)) and np.all(np.isfinite(weights))):
            raise ValueError("nodes and weights must be finite")
        if np.any(np.linalg.norm(nodes, axis=1) > 1.0 + _BALL_TOL):
            raise ValueError("all nodes must lie in the closed unit ball")
        if np.any(weights < 0.0):
            raise ValueError("weights must be nonnegative")
        total = float(weights.sum())
        if abs(total - 1.0) > _WEIGHT_SUM_TOL:
            raise ValueError(f"weights must sum to 1, got {total!r}")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        self._nodes = nodes
        self._weights = weights

    @property
    def nodes(self) -> np.ndarray:
        return self._nodes

    @property
    def weights(self) -> np.ndarray:
        return self._weights

    def __len__(self) -> int:
        return self._nodes.shape[0]

    @property
    def mean_polarization(self) -> np.ndarray:
        """First moment sum_i w_i u_i."""
        return self._weights @ self._nodes

    @cached_property
    def _shells(self):
        """Aggregate nodes by |u|: (radii, weights, first moments, second moments).

        Second moments are packed as (xx, yy, zz, xy, xz, yz) of the unit
        directions; nodes with |u| below TINY_POLARIZATION carry no direction
        and enter through the weight column alone.
        """
        norms = np.linalg.norm(self._nodes, axis=1)
        safe = np.where(norms > TINY_POLARIZATION, norms, 1.0)
        unit = self._nodes / safe[:, None]
        unit[norms <= TINY_POLARIZATION] = 0.0
        keys = np.round(norms, _SHELL_DECIMALS)
        _, inverse = np.unique(keys, return_inverse=True)
        count = int(inverse.max()) + 1
        w = self._weights
        shell_w = np.bincount(inverse, weights=w, minlength=count)
        # weighted mean radius keeps shell rates at node precision
        radii = np.bincount(inverse, weights=w * norms, minlength=count)
        radii = np.where(shell_w > 0.0, radii / np.where(shell_w > 0.0, shell_w, 1.0), 0.0)
        first = np.stack(
            [np.bincount(inverse, weights=w * unit[:, k], minlength=count) for k in range(3)],
            axis=1,
        )
        pairs = ((0, 0), (1, 1), (2, 2), (0, 1), (0, 2), (1, 2))
        second = np.stack(
            [
                np.bincount(inverse, weights=w * unit[:, a] * unit[:, b], minlength=count)
                for a, b in pairs
            ],
            axis=1,
        )
        return radii, shell_w, first, second


def point_mass(u) -> BallDistribution:
    """Distribution concentrated on a single polarization."""
    return BallDistribution(np.asarray(u, dtype=float)[None, :], np.array([1.0]))


def build_gaussian(spec: GaussianSpec) -> BallDistribution:
    """Discretize a Gaussian profile on the origin-anchored cubic lattice.

    Lattice nodes k * grid_spacing (the origin is always a node) are kept
    when they lie in the closed unit ball; weights follow the Gaussian
    density, are pruned below PRUNE_RATIO of the peak and renormalized.

    :raises EmptySupport: if every lattice weight underflows to zero.
    """
    h = spec.grid_spacing
    k_max = int(np.floor(1.0 / h + 1e-9))
    axis = np.arange(-k_max, k_max + 1, dtype=float) * h
    grid = np.stack(np.meshgrid(axis, axis, axis, indexing="ij"), axis=-1).reshape(-1, 3)
    grid = grid[np.linalg.norm(grid, axis=1) <= 1.0 + _BALL_TOL]
    center = np.asarray(spec.center)
    widths = np.asarray(spec.widths)
    weights = np.exp(-0.5 * np.sum(((grid - center) / widths) ** 2, axis=1))
    peak = float(weights.max())
    if not peak > 0.0:
        raise EmptySupport("gaussian weights underflow to zero everywhere on the ball")
    keep = weights >= PRUNE_RATIO * peak
    grid, weights = grid[keep], weights[keep]
    return BallDistribution(grid, weights / weights.sum())


def mix(distributions, coefficients) -> BallDistribution:
    """Convex combination of distributions, concatenating their nodes."""
    coefficients = np.asarray(coefficients, dtype=float)
    if len(distributions) != len(coefficients) or len(coefficients) == 0:
        raise ValueError("need one coefficient per distribution")
    if np.any(coefficients < 0.0) or abs(coefficients.sum() - 1.0) > _WEIGHT_SUM_TOL:
        raise ValueError("coefficients must be a convex combination")
    nodes = np.concatenate([d.nodes for d in distributions], axis=0)
    weights = np.concatenate(
        [c * d.weights for c, d in zip(coefficients, distributions)]
    )
    return BallDistribution(nodes, weights)


def _series_kernel(dist: BallDistribution, params: CollisionParams, times, want_derivative: bool):
    """Shell-aggregated evaluation of the mixture map (and derivative) stack."""
    radii, shell_w, first, second = dist._shells
    _, transverse, rotation = _radial_rates(radii, params)
    rate = params.relaxation_rate
    mean = dist.mean_polarization

    longitudinal = np.exp(-rate * times)                      # (T,)
    amp = np.exp(-np.outer(transverse, times))                # (S, T)
    phase = np.outer(rotation, times)
    cosine = amp * np.cos(phase)
    sine = amp * np.sin(phase)
    rank_one = longitudinal[None, :] - cosine

    def assemble(iso, vec, sym, col):
        # iso: (T,), vec/col: (3, T), sym: (6, T)
        T = times.shape[0]
        out = np.zeros((T, 4, 4))
        out[:, 1, 1] = iso + sym[0]
        out[:, 2, 2] = iso + sym[1]
        out[:, 3, 3] = iso + sym[2]
        out[:, 1, 2] = sym[3] + vec[2]
        out[:, 2, 1] = sym[3] - vec[2]
        out[:, 1, 3] = sym[4] - vec[1]
        out[:, 3, 1] = sym[4] + vec[1]
        out[:, 2, 3] = sym[5] + vec[0]
        out[:, 3, 2] = sym[5] - vec[0]
        out[:, 1:, 0] = col.T
        return out

    maps = assemble(
        shell_w @ cosine,
        first.T @ sine,
        second.T @ rank_one,
        np.outer(mean, 1.0 - longitudinal),
    )
    maps[:, 0, 0] = 1.0
    if not want_derivative:
        return maps, None

    d_cos = -transverse[:, None] * cosine - rotation[:, None] * sine
    d_sin = -transverse[:, None] * sine + rotation[:, None] * cosine
    d_rank = -rate * longitudinal[None, :] - d_cos
    derivs = assemble(
        shell_w @ d_cos,
        first.T @ d_sin,
        second.T @ d_rank,
        np.outer(mean, rate * longitudinal),
    )
    return maps, derivs


def mixture_map_series(
    dist: BallDistribution,
    params: CollisionParams,
    times,
    derivatives: bool = False,
    chunk: int = 4096,
):
    """Evaluate the mixture channel on a whole time grid.

    Returns a (T, 4, 4) stack of affine-map matrices, or a tuple of that
    stack and the matching stack of entrywise time derivatives when
    ``derivatives`` is true. Times must be nonnegative; evaluation is
    chunked to bound memory.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1:
        raise ValueError("times must be one dimensional")
    if times.size and times.min() < 0.0:
        raise ValueError("times must be nonnegative")
    maps = np.empty((times.shape[0], 4, 4))
    derivs = np.empty_like(maps) if derivatives else None
    for lo in range(0, times.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        m, d = _series_kernel(dist, params, times[sl], derivatives)
        maps[sl] = m
        if derivatives:
            derivs[sl] = d
    return (maps, derivs) if derivatives else maps


def mixture_map(dist: BallDistribution, params: CollisionParams, t: float) -> AffineQubitMap:
    """Mixture channel at a single time."""
    maps = mixture_map_series(dist, params, np.array([float(t)]))
    return AffineQubitMap(maps[0])


def mixture_map_derivative(dist: BallDistribution, params: CollisionParams, t: float) -> np.ndarray:
    """Entrywise time derivative of the mixture channel at a single time."""
    _, derivs = mixture_map_series(dist, params, np.array([float(t)]), derivatives=True)
    return derivs[0]


def write_distribution_csv(dist: BallDistribution, path) -> None:
    """Dump nodes and weights as CSV columns u_x, u_y, u_z, weight."""
    with open(path, "w", encoding="ascii", newline="") as fh:
        fh.write("u_x,u_y,u_z,weight\n")
        for node, w in zip(dist.nodes, dist.weights):
            fh.write(f"{node[0]:.17g},{node[1]:.17g},{node[2]:.17g},{w:.17g}\n")
