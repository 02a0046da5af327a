"""Distinguishability, complete positivity and divisibility diagnostics.

Three probes of a time-dependent qubit channel family are collected here:

* trace-distance series between two evolved states, with detection of any
  revival (an increase flags information backflow);
* the Choi matrix and its spectrum, certifying complete positivity of the
  map at a fixed time;
* determinant tracking of the linear block, locating the singular times
  where the time-local generator blows up, plus a verdict on CP- versus
  P-divisibility from the canonical rate series.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .core_maps import PAULI, AffineQubitMap, determinant_tolerance

__all__ = [
    "NM_TOL",
    "CP_TOL",
    "RATE_TOL_SCALE",
    "MIN_VALID_SAMPLES",
    "TraceDistanceSeries",
    "ChoiSpectrum",
    "DeterminantSeries",
    "DivisibilityReport",
    "trace_distance",
    "trace_distance_series",
    "choi_matrix",
    "choi_spectrum",
    "choi_spectrum_series",
    "cp_check",
    "determinant_series",
    "pairwise_rate_sums",
    "divisibility_report",
]

# smallest trace-distance increase between consecutive samples that counts
# as a non-Markovian revival rather than roundoff
NM_TOL = 1e-8

# Choi eigenvalues above -CP_TOL certify complete positivity
CP_TOL = 1e-9

# canonical-rate sign tolerance, relative to the largest observed rate
RATE_TOL_SCALE = 1e-7

# fewer usable rate samples than this yields an UNDETERMINED verdict
MIN_VALID_SAMPLES = 10

CP_DIVISIBLE = "CP_DIVISIBLE"
P_DIVISIBLE_ONLY = "P_DIVISIBLE_ONLY"
NEITHER = "NEITHER"
UNDETERMINED = "UNDETERMINED"


def trace_distance(rho_a, rho_b) -> float:
    """Trace distance (1/2) ||rho_a - rho_b||_1 of two matrices."""
    delta = np.asarray(rho_a, dtype=complex) - np.asarray(rho_b, dtype=complex)
    return 0.5 * float(np.linalg.svd(delta, compute_uv=False).sum())


@dataclass(frozen=True)
class TraceDistanceSeries:
    """Trace distance of an evolved state pair on a time grid.

    ``max_increase`` is the largest rise between consecutive samples and
    ``witness_time`` the first grid time where that rise exceeds the
    revival tolerance (None when the series never rises above it).
    """

    times: np.ndarray
    values: np.ndarray
    max_increase: float
    witness_time: float | None


def trace_distance_series(maps, r_a, r_b, times, tol: float = NM_TOL) -> TraceDistanceSeries:
    """Trace distance between the two evolved states of a map stack.

    ``maps`` is a (T, 4, 4) stack of affine-map matrices; for a qubit the
    trace distance is half the Euclidean distance of the Bloch vectors, and
    the common translation cancels, leaving half the image of r_a - r_b.
    """
    maps = np.asarray(maps, dtype=float)
    times = np.asarray(times, dtype=float)
    delta = np.asarray(r_a, dtype=float) - np.asarray(r_b, dtype=float)
    values = 0.5 * np.linalg.norm(maps[:, 1:, 1:] @ delta, axis=1)
    if values.shape[0] >= 2:
        steps = np.diff(values)
        max_increase = float(steps.max())
        above = np.nonzero(steps > tol)[0]
        witness = float(times[above[0] + 1]) if above.size else None
    else:
        max_increase, witness = 0.0, None
    return TraceDistanceSeries(
        times=times, values=values, max_increase=max_increase, witness_time=witness
    )


@dataclass(frozen=True)
class ChoiSpectrum:
    """Eigenvalues (ascending) and trace of a Choi matrix."""

    eigenvalues: np.ndarray
    trace: float

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues[0])


def _choi_stack(maps: np.ndarray) -> np.ndarray:
    """Choi matrices sum_ij E_ij (x) Lambda(E_ij) for a (T, 4, 4) map stack."""
    blocks = maps[:, 1:, 1:]
    trans = maps[:, 1:, 0]
    sigma = np.stack(PAULI)
    choi = np.empty((maps.shape[0], 4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            # E_ij has Bloch data x0 = delta_ij, x_k = sigma_k[j, i]
            x = sigma[:, j, i]
            y = blocks @ x
            if i == j:
                y = y + trans
            img = 0.5 * np.einsum("tk,kab->tab", y, sigma)
            if i == j:
                img[:, 0, 0] += 0.5
                img[:, 1, 1] += 0.5
            choi[:, 2 * i : 2 * i + 2, 2 * j : 2 * j + 2] = img
    return 0.5 * (choi + np.conj(np.swapaxes(choi, 1, 2)))


def choi_matrix(m: AffineQubitMap) -> np.ndarray:
    """Choi matrix of a single map (Hermitized)."""
    return _choi_stack(m.matrix[None, :, :])[0]


def choi_spectrum(m: AffineQubitMap) -> ChoiSpectrum:
    """Eigenvalues and trace of the map's Choi matrix."""
    choi = choi_matrix(m)
    return ChoiSpectrum(
        eigenvalues=np.linalg.eigvalsh(choi), trace=float(np.trace(choi).real)
    )


def choi_spectrum_series(maps):
    """Eigenvalues (T, 4 ascending) and traces (T,) for a map stack."""
    choi = _choi_stack(np.asarray(maps, dtype=float))
    return np.linalg.eigvalsh(choi), np.einsum("tii->t", choi).real


def cp_check(m: AffineQubitMap, cp_tol: float = CP_TOL):
    """Complete-positivity test: (all Choi eigenvalues >= -cp_tol, spectrum)."""
    spectrum = choi_spectrum(m)
    return bool(spectrum.min_eigenvalue >= -cp_tol), spectrum


@dataclass(frozen=True)
class DeterminantSeries:
    """Determinant of the linear block on a grid, with refined zeros.

    ``singular_times`` lists the refined roots and near-zero minima of the
    determinant; ``singular_samples`` flags grid samples whose determinant
    magnitude falls below the scaled tolerance.
    """

    times: np.ndarray
    values: np.ndarray
    tolerances: np.ndarray
    singular_times: tuple[float, ...]
    singular_samples: np.ndarray


def determinant_series(times, maps, det_at=None) -> DeterminantSeries:
    """Track det of the linear block and refine its zero crossings.

    ``det_at``, when given, is a scalar function t -> det used to polish
    roots: sign changes are bracketed with Brent's method and interior
    local minima of |det| are minimized; a refined time counts as singular
    when the determinant magnitude there falls below the local tolerance.
    Refined times closer than half a grid step are merged.
    """
    times = np.asarray(times, dtype=float)
    maps = np.asarray(maps, dtype=float)
    blocks = maps[:, 1:, 1:]
    values = np.linalg.det(blocks)
    scale = np.abs(blocks).max(axis=(1, 2))
    tols = 1e-12 * np.maximum(1.0, scale) ** 3
    roots: list[float] = []
    if det_at is not None and times.shape[0] >= 2:
        sign_change = np.nonzero(values[:-1] * values[1:] < 0.0)[0]
        for i in sign_change:
            roots.append(float(brentq(det_at, times[i], times[i + 1], xtol=1e-12)))
        mag = np.abs(values)
        for i in range(1, times.shape[0] - 1):
            if mag[i] <= mag[i - 1] and mag[i] <= mag[i + 1]:
                res = minimize_scalar(
                    lambda t: abs(det_at(t)),
                    bounds=(times[i - 1], times[i + 1]),
                    method="bounded",
                    options={"xatol": 1e-12},
                )
                if abs(res.fun) < max(tols[i - 1], tols[i], tols[i + 1]):
                    roots.append(float(res.x))
        if roots:
            width = 0.5 * float(np.median(np.diff(times)))
            roots.sort()
            merged = [roots[0]]
            for r in roots[1:]:
                if r - merged[-1] <= width:
                    continue
                merged.append(r)
            roots = merged
    return DeterminantSeries(
        times=times,
        values=values,
        tolerances=tols,
        singular_times=tuple(roots),
        singular_samples=np.abs(values) < tols,
    )


def pairwise_rate_sums(rates) -> np.ndarray:
    """Sums of rate pairs (1+2, 1+3, 2+3) for a (T, 3) rate series."""
    rates = np.asarray(rates, dtype=float)
    return np.stack(
        [
            rates[:, 0] + rates[:, 1],
            rates[:, 0] + rates[:, 2],
            rates[:, 1] + rates[:, 2],
        ],
        axis=1,
    )


@dataclass(frozen=True)
class DivisibilityReport:
    """Verdict on CP/P-divisibility from a canonical rate series.

    Samples with undefined rates or within the exclusion window around a
    singular time are ignored; with fewer than ``MIN_VALID_SAMPLES`` left
    the verdict is UNDETERMINED.
    """

    verdict: str
    min_rate: float
    min_pairwise_sum: float
    n_valid: int
    rate_tol: float


def divisibility_report(
    times,
    rates,
    singular_times=(),
    rate_tol: float | None = None,
    exclusion_steps: float = 2.0,
) -> DivisibilityReport:
    """Classify the dynamics by the signs of its canonical rates.

    All three rates nonnegative (within tolerance) everywhere means
    CP-divisible; all pairwise rate sums nonnegative means P-divisible
    only; otherwise neither. The default tolerance scales with the largest
    observed rate magnitude.
    """
    times = np.asarray(times, dtype=float)
    rates = np.asarray(rates, dtype=float)
    valid = np.all(np.isfinite(rates), axis=1)
    if times.shape[0] >= 2 and len(singular_times) > 0:
        window = exclusion_steps * float(np.median(np.diff(times)))
        for ts in singular_times:
            valid &= np.abs(times - ts) > window
    n_valid = int(valid.sum())
    if n_valid < MIN_VALID_SAMPLES:
        return DivisibilityReport(
            verdict=UNDETERMINED,
            min_rate=float("nan"),
            min_pairwise_sum=float("nan"),
            n_valid=n_valid,
            rate_tol=float("nan"),
        )
    kept = rates[valid]
    if rate_tol is None:
        rate_tol = RATE_TOL_SCALE * max(1.0, float(np.abs(kept).max()))
    min_rate = float(kept.min())
    min_pairwise = float(pairwise_rate_sums(kept).min())
    if min_rate >= -rate_tol:
        verdict = CP_DIVISIBLE
    elif min_pairwise >= -rate_tol:
        verdict = P_DIVISIBLE_ONLY
    else:
        verdict = NEITHER
    return DivisibilityReport(
        verdict=verdict,
        min_rate=min_rate,
        min_pairwise_sum=min_pairwise,
        n_valid=n_valid,
        rate_tol=float(rate_tol),
    )
