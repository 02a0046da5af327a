"""Time-local generators and their canonical master-equation form.

An invertible affine family E_t determines the time-local generator
L_t = (dE_t/dt) E_t^{-1} acting on the (1, r) 4-vector; its first row
vanishes because every E_t preserves the trace row. The generator in turn
fixes a Hamiltonian vector h and a Hermitian noise matrix c such that

    d(rho)/dt = -i [h . sigma, rho]
                + (1/2) sum_jk c_jk ([sigma_j rho, sigma_k] + [sigma_j, rho sigma_k]).

Diagonalizing c yields canonical rates and orthonormal noise operators; a
negative rate at some time is the standard marker of CP indivisibility.
"""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .core_maps import (
    PAULI,
    AffineQubitMap,
    SingularMap,
    bloch_from_density,
    density_from_bloch,
)

__all__ = [
    "IntegrationThroughSingularity",
    "GKSLCoefficients",
    "CanonicalDecomposition",
    "generator",
    "generator_series",
    "gksl_coefficients",
    "canonical_decomposition",
    "canonical_rate_series",
    "evolve_master_equation",
]

_DET_TOL_SCALE = 1e-12


class IntegrationThroughSingularity(Exception):
    """Raised when master-equation integration hits an undefined generator."""


@dataclass(frozen=True)
class GKSLCoefficients:
    """Hamiltonian vector and noise-coefficient matrix of a generator.

    ``hamiltonian`` holds the coefficients h_j of H = sum_j h_j sigma_j;
    ``noise`` is the Hermitian 3x3 coefficient matrix in the Pauli basis.
    """

    hamiltonian: np.ndarray
    noise: np.ndarray


@dataclass(frozen=True)
class CanonicalDecomposition:
    """Spectral form of the noise matrix.

    ``rates`` are the eigenvalues of the noise matrix in descending order;
    ``operators`` stacks the matching noise operators zeta_alpha, each
    normalized to Tr(zeta^dag zeta) = 1.
    """

    rates: np.ndarray
    operators: np.ndarray
    hamiltonian: np.ndarray


def generator(derivative: np.ndarray, inverse_map: AffineQubitMap) -> np.ndarray:
    """Time-local generator from a map derivative and the map inverse."""
    gen = np.asarray(derivative, dtype=float) @ inverse_map.matrix
    gen[0, :] = 0.0
    return gen


def generator_series(maps: np.ndarray, derivatives: np.ndarray):
    """Generators for whole stacks of maps and derivatives.

    Returns (generators, valid): samples whose linear block determinant
    falls below the scaled tolerance get NaN generators and valid=False.
    """
    maps = np.asarray(maps, dtype=float)
    derivatives = np.asarray(derivatives, dtype=float)
    if maps.shape != derivatives.shape or maps.shape[-2:] != (4, 4):
        raise ValueError("maps and derivatives must be matching (T, 4, 4) stacks")
    blocks = maps[:, 1:, 1:]
    scale = np.abs(blocks).max(axis=(1, 2))
    tol = _DET_TOL_SCALE * np.maximum(1.0, scale) ** 3
    valid = np.abs(np.linalg.det(blocks)) >= tol
    gens = np.full(maps.shape, np.nan)
    if np.any(valid):
        inv = np.linalg.inv(blocks[valid])
        lin = derivatives[valid][:, 1:, 1:] @ inv
        sub = np.zeros((int(valid.sum()), 4, 4))
        sub[:, 1:, 1:] = lin
        sub[:, 1:, 0] = derivatives[valid][:, 1:, 0] - np.einsum(
            "tij,tj->ti", lin, maps[valid][:, 1:, 0]
        )
        gens[valid] = sub
    return gens, valid


def gksl_coefficients(gen: np.ndarray) -> GKSLCoefficients:
    """Extract (h, c) from a generator on the (1, r) 4-vector."""
    gen = np.asarray(gen, dtype=float)
    if gen.shape != (4, 4):
        raise ValueError(f"generator must be 4x4, got {gen.shape}")
    lin = gen[1:, 1:]
    aff = gen[1:, 0]
    hamiltonian = 0.25 * np.array(
        [lin[2, 1] - lin[1, 2], lin[0, 2] - lin[2, 0], lin[1, 0] - lin[0, 1]]
    )
    noise = np.empty((3, 3), dtype=complex)
    noise[0, 0] = lin[0, 0] - lin[1, 1] - lin[2, 2]
    noise[1, 1] = lin[1, 1] - lin[2, 2] - lin[0, 0]
    noise[2, 2] = lin[2, 2] - lin[0, 0] - lin[1, 1]
    noise[0, 1] = lin[0, 1] + lin[1, 0] - 1j * aff[2]
    noise[0, 2] = lin[0, 2] + lin[2, 0] + 1j * aff[1]
    noise[1, 2] = lin[1, 2] + lin[2, 1] - 1j * aff[0]
    noise[1, 0] = np.conj(noise[0, 1])
    noise[2, 0] = np.conj(noise[0, 2])
    noise[2, 1] = np.conj(noise[1, 2])
    return GKSLCoefficients(hamiltonian=hamiltonian, noise=0.25 * noise)


def canonical_decomposition(coeffs: GKSLCoefficients) -> CanonicalDecomposition:
    """Diagonalize the noise matrix into rates and noise operators."""
    vals, vecs = np.linalg.eigh(coeffs.noise)
    order = np.argsort(vals)[::-1]
    vals = vals[order]
    vecs = vecs[:, order]
    sigma = np.stack(PAULI)
    operators = np.einsum("ja,jkl->akl", vecs, sigma) / math.sqrt(2.0)
    return CanonicalDecomposition(
        rates=vals, operators=operators, hamiltonian=coeffs.hamiltonian
    )


def canonical_rate_series(gens: np.ndarray, valid=None) -> np.ndarray:
    """Descending canonical rates for a stack of generators; NaN when invalid."""
    gens = np.asarray(gens, dtype=float)
    if valid is None:
        valid = np.all(np.isfinite(gens), axis=(1, 2))
    rates = np.full((gens.shape[0], 3), np.nan)
    if not np.any(valid):
        return rates
    lin = gens[valid][:, 1:, 1:]
    aff = gens[valid][:, 1:, 0]
    noise = np.empty(lin.shape, dtype=complex)
    noise[:, 0, 0] = lin[:, 0, 0] - lin[:, 1, 1] - lin[:, 2, 2]
    noise[:, 1, 1] = lin[:, 1, 1] - lin[:, 2, 2] - lin[:, 0, 0]
    noise[:, 2, 2] = lin[:, 2, 2] - lin[:, 0, 0] - lin[:, 1, 1]
    noise[:, 0, 1] = lin[:, 0, 1] + lin[:, 1, 0] - 1j * aff[:, 2]
    noise[:, 0, 2] = lin[:, 0, 2] + lin[:, 2, 0] + 1j * aff[:, 1]
    noise[:, 1, 2] = lin[:, 1, 2] + lin[:, 2, 1] - 1j * aff[:, 0]
    noise[:, 1, 0] = np.conj(noise[:, 0, 1])
    noise[:, 2, 0] = np.conj(noise[:, 0, 2])
    noise[:, 2, 1] = np.conj(noise[:, 1, 2])
    rates[valid] = 0.25 * np.linalg.eigvalsh(noise)[:, ::-1]
    return rates


def evolve_master_equation(generator_at, rho0: np.ndarray, times, step: float) -> np.ndarray:
    """Integrate d(rho)/dt = L_t rho with classic fixed-step RK4.

    ``generator_at`` maps a time to the 4x4 generator on the (1, r)
    4-vector. Each grid interval is split into equal substeps no longer
    than ``step``. Returns the (T, 2, 2) stack of states on ``times``;
    the first grid point returns rho0 itself (as a density matrix).

    :raises IntegrationThroughSingularity: when the generator is undefined
        (raises SingularMap) at a required quadrature time.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("times must be a nonempty 1-d grid")
    if np.any(np.diff(times) <= 0.0):
        raise ValueError("times must be strictly increasing")
    if not step > 0.0:
        raise ValueError(f"step must be positive, got {step}")

    def fetch(t):
        try:
            return np.asarray(generator_at(t), dtype=float)
        except SingularMap as exc:
            raise IntegrationThroughSingularity(
                f"generator undefined at t = {t!r}: {exc}"
            ) from exc

    y = np.empty(4)
    y[0] = 1.0
    y[1:] = bloch_from_density(rho0)
    out = np.empty((times.shape[0], 2, 2), dtype=complex)
    out[0] = density_from_bloch(y[1:])
    cached_t, cached_g = None, None
    for k in range(1, times.shape[0]):
        t0, t1 = times[k - 1], times[k]
        nsub = max(1, math.ceil((t1 - t0) / step))
        for i in range(nsub):
            ta = t0 + (t1 - t0) * (i / nsub)
            tb = t1 if i == nsub - 1 else t0 + (t1 - t0) * ((i + 1) / nsub)
            h = tb - ta
            ga = cached_g if cached_t == ta else fetch(ta)
            gm = fetch(0.5 * (ta + tb))
            gb = fetch(tb)
            k1 = ga @ y
            k2 = gm @ (y + 0.5 * h * k1)
            k3 = gm @ (y + 0.5 * h * k2)
            k4 = gb @ (y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
            cached_t, cached_g = tb, gb
        # generator rows start with zeros, so y[0] stays exactly 1
        out[k] = density_from_bloch(y[1:])
    return out
