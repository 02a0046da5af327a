"""Executable acceptance checklist.

Each criterion is a self-contained check of the package against its
contract: closed forms against brute-force composition, the collision
channel against the microscopic two-qubit unitary, complete positivity of
mixtures, the Markovian/non-Markovian classification of the bundled
scenarios, and the analytic semigroup limits. ``run_all`` prints one
PASS/FAIL line per criterion; the ``swapmix verify`` command and the
acceptance test module both drive it.

Scenario runs are cached per process, so criteria sharing a scenario pay
for it once.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .core_maps import (
    AffineQubitMap,
    CollisionParams,
    apply_map,
    bloch_from_density,
    continuous_map,
    continuous_map_derivative,
    density_from_bloch,
    invert_map,
    n_collision_map,
    single_collision_map,
)
from .diagnostics import CP_DIVISIBLE, NEITHER, choi_spectrum_series
from .gksl import (
    canonical_rate_series,
    evolve_master_equation,
    generator,
    generator_series,
)
from .mixture import BallDistribution, build_gaussian, mixture_map_series, point_mass
from .runner import ScenarioResult, builtin_scenarios, run_scenario

__all__ = ["CriterionResult", "CRITERIA", "run_one", "run_all"]

# two-qubit swap in the product basis |system, ancilla>
_SWAP = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)

_ISOTROPIC = ("fig1-delta0.3", "fig1-delta0.1", "fig1-delta0.01")


@lru_cache(maxsize=None)
def _scenario(name: str) -> ScenarioResult:
    return run_scenario(builtin_scenarios()[name])


def _ball_points(rng, count: int) -> np.ndarray:
    """Uniform-ish sample of the closed unit ball."""
    v = rng.normal(size=(count, 3))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.uniform(size=(count, 1)) ** (1.0 / 3.0)


def _collision_unitary(eta: float) -> np.ndarray:
    return math.cos(eta) * np.eye(4, dtype=complex) + 1j * math.sin(eta) * _SWAP


def _criterion_closed_form():
    """n-collision closed form equals brute-force n-fold composition."""
    rng = np.random.default_rng(101)
    polarizations = _ball_points(rng, 200)
    polarizations[0] = 0.0
    polarizations[1] = (0.0, 0.0, 1.0)
    polarizations[2] = (1.0, 0.0, 0.0)
    worst = 0.0
    for u in polarizations:
        params = CollisionParams(eta=float(rng.uniform(0.05, 1.5)))
        n = int(rng.integers(0, 201))
        step = single_collision_map(u, params).matrix
        brute = np.eye(4)
        for _ in range(n):
            brute = step @ brute
        closed = n_collision_map(u, params, n).matrix
        worst = max(worst, float(np.abs(closed - brute).max()))
    return worst < 1e-11, f"max entrywise error {worst:.2e} (tol 1e-11, 200 cases)"


def _criterion_microscopic():
    """Single collision equals the two-qubit partial-trace computation."""
    rng = np.random.default_rng(202)
    us = _ball_points(rng, 500)
    rs = _ball_points(rng, 500)
    us[0] = 0.0
    us[1] = (0.0, 0.0, 1.0)
    worst = 0.0
    for u, r in zip(us, rs):
        eta = float(rng.uniform(0.05, 1.5))
        unitary = _collision_unitary(eta)
        joint = unitary @ np.kron(density_from_bloch(r), density_from_bloch(u)) @ unitary.conj().T
        reduced = joint[np.ix_([0, 2], [0, 2])] + joint[np.ix_([1, 3], [1, 3])]
        channel = apply_map(single_collision_map(u, CollisionParams(eta=eta)), density_from_bloch(r))
        worst = max(worst, float(np.abs(reduced - channel).max()))
    return worst < 1e-12, f"max entrywise error {worst:.2e} (tol 1e-12, 500 cases)"


def _criterion_interpolation():
    """Continuous map at t = n tau reproduces the n-collision map."""
    rng = np.random.default_rng(303)
    us = _ball_points(rng, 50)
    us[0] = 0.0
    us[1] = (0.0, 1.0, 0.0)
    worst = 0.0
    for u in us:
        params = CollisionParams(
            eta=float(rng.uniform(0.05, 1.2)), tau=float(rng.uniform(0.5, 2.0))
        )
        for n in range(1, 501):
            discrete = n_collision_map(u, params, n).matrix
            smooth = continuous_map(u, params, n * params.tau).matrix
            worst = max(worst, float(np.abs(discrete - smooth).max()))
    return worst < 1e-11, f"max entrywise error {worst:.2e} (tol 1e-11, 50 x 500 cases)"


def _criterion_complete_positivity():
    """Choi spectra stay positive with trace 2 for builtin and random mixtures."""
    min_eig = np.inf
    max_dev = 0.0
    for name in builtin_scenarios():
        res = _scenario(name)
        min_eig = min(min_eig, float(res.choi_eigenvalues.min()))
        max_dev = max(max_dev, float(np.abs(res.choi_traces - 2.0).max()))
    rng = np.random.default_rng(404)
    params = CollisionParams(eta=0.01)
    times = np.linspace(0.0, 5.0 / params.relaxation_rate, 200)
    for _ in range(20):
        count = int(rng.integers(3, 41))
        weights = rng.uniform(0.1, 1.0, size=count)
        dist = BallDistribution(_ball_points(rng, count), weights / weights.sum())
        eigs, traces = choi_spectrum_series(mixture_map_series(dist, params, times))
        min_eig = min(min_eig, float(eigs.min()))
        max_dev = max(max_dev, float(np.abs(traces - 2.0).max()))
    passed = min_eig >= -1e-9 and max_dev <= 1e-8
    return passed, f"min Choi eigenvalue {min_eig:.2e} (tol -1e-9), max |trace-2| {max_dev:.2e}"


def _criterion_markovianity():
    """Narrow isotropic profile stays monotone; wider ones show backflow."""
    narrow = _scenario("fig1-delta0.01").trace_distance
    wide = _scenario("fig1-delta0.3").trace_distance
    mid = _scenario("fig1-delta0.1").trace_distance
    passed = (
        narrow.max_increase <= 1e-8
        and wide.witness_time is not None
        and mid.witness_time is not None
    )
    witnesses = (wide.witness_time, mid.witness_time)
    return passed, (
        f"narrow max increase {narrow.max_increase:.2e} (tol 1e-8), "
        f"witness times {witnesses[0]!r}, {witnesses[1]!r}"
    )


def _criterion_isotropic_degeneracy():
    """Origin-centered isotropic profiles give three equal canonical rates."""
    spread = 0.0
    all_valid = True
    for name in _ISOTROPIC:
        res = _scenario(name)
        all_valid &= bool(np.all(res.generator_valid))
        # rates are sorted descending, so the largest pairwise gap is first - last
        spread = max(spread, float((res.rates[:, 0] - res.rates[:, 2]).max()))
    verdict = _scenario("fig1-delta0.01").divisibility.verdict
    passed = all_valid and spread < 1e-6 and verdict == CP_DIVISIBLE
    return passed, f"max pairwise rate gap {spread:.2e} (tol 1e-6), narrow verdict {verdict}"


@lru_cache(maxsize=None)
def _dense_anisotropic_rates():
    """Canonical rates of the anisotropic scenario on a 400k-sample grid."""
    cfg = builtin_scenarios()["fig2-anisotropic"]
    dist = build_gaussian(cfg.gaussian)
    params = cfg.params
    times = np.linspace(0.0, cfg.resolved_t_max(), 400_000)
    rates = np.full((times.shape[0], 3), np.nan)
    chunk = 50_000
    for lo in range(0, times.shape[0], chunk):
        sl = slice(lo, lo + chunk)
        maps, derivs = mixture_map_series(dist, params, times[sl], derivatives=True)
        gens, valid = generator_series(maps, derivs)
        rates[sl] = canonical_rate_series(gens, valid)
    return rates


def _criterion_anisotropic():
    """Determinant zeros, a vanishing rate and backflow for the z-needle."""
    res = _scenario("fig2-anisotropic")
    zeros = res.determinant.singular_times
    enough = len(zeros) >= 3
    uniform = False
    if enough:
        spacings = np.diff(zeros[: min(len(zeros), 11)])
        median = float(np.median(spacings))
        uniform = bool(np.abs(spacings - median).max() <= 0.3 * median)
    rates = _dense_anisotropic_rates()
    finite = rates[np.all(np.isfinite(rates), axis=1)]
    column_sups = np.abs(finite).max(axis=0)
    ratio = float(column_sups.min() / column_sups.max())
    verdict = res.divisibility.verdict
    witness = res.trace_distance.witness_time
    passed = (
        enough
        and uniform
        and ratio < 1e-6
        and verdict == NEITHER
        and witness is not None
    )
    return passed, (
        f"{len(zeros)} determinant zeros, spacing uniform {uniform}, "
        f"smallest/largest rate sup {ratio:.2e} (tol 1e-6), verdict {verdict}, "
        f"witness {witness!r}"
    )


def _criterion_offset():
    """Offset profiles: backflow plus NEITHER verdict without singular times."""
    details = []
    passed = True
    for name in ("fig3-offset", "fig4-disk"):
        res = _scenario(name)
        det_min = float(res.determinant.values.min())
        witness = res.trace_distance.witness_time
        verdict = res.divisibility.verdict
        passed &= det_min > 0.0 and witness is not None and verdict == NEITHER
        details.append(f"{name}: min det {det_min:.2e}, witness {witness!r}, verdict {verdict}")
    return passed, "; ".join(details)


def _criterion_ode_roundtrip():
    """Integrating the extracted generator reproduces the map family."""
    res = _scenario("fig1-delta0.3")
    cfg = res.config
    dist = res.distribution
    params = cfg.params

    def generator_at(t):
        maps, derivs = mixture_map_series(dist, params, np.array([t]), derivatives=True)
        return generator(derivs[0], invert_map(AffineQubitMap(maps[0])))

    r0 = np.array([0.0, 0.0, 1.0])
    states = evolve_master_equation(
        generator_at, density_from_bloch(r0), res.times, step=1.0
    )
    direct = res.maps[:, 1:, 1:] @ r0 + res.maps[:, 1:, 0]
    integrated = np.array([bloch_from_density(s) for s in states])
    err = float(np.linalg.norm(integrated - direct, axis=1).max())
    return err < 1e-6, f"max Bloch-vector error {err:.2e} (tol 1e-6, step 1.0)"


def _criterion_origin_limit():
    """Point mass at the origin: constant quarter-rate isotropic decay."""
    params = CollisionParams(eta=0.01)
    rate = params.relaxation_rate
    dist = point_mass((0.0, 0.0, 0.0))
    times = np.linspace(0.0, 5.0 / rate, 100)
    maps, derivs = mixture_map_series(dist, params, times, derivatives=True)
    gens, valid = generator_series(maps, derivs)
    rates = canonical_rate_series(gens, valid)
    rate_err = float(np.abs(rates - rate / 4.0).max())
    expected = np.zeros((4, 4))
    expected[1, 1] = expected[2, 2] = expected[3, 3] = -rate
    gen_err = float(np.abs(gens - expected).max())
    passed = bool(np.all(valid)) and rate_err < 1e-9 and gen_err < 1e-10
    return passed, f"max rate error {rate_err:.2e} (tol 1e-9), max generator error {gen_err:.2e} (tol 1e-10)"


def _criterion_semigroup():
    """Fixed-polarization families have time-independent generators."""
    rng = np.random.default_rng(505)
    us = _ball_points(rng, 20)
    us[0] = 0.0
    us[1] = (0.0, 0.0, 1.0)
    worst = 0.0
    for u in us:
        params = CollisionParams(
            eta=float(rng.uniform(0.05, 1.2)), tau=float(rng.uniform(0.5, 2.0))
        )
        times = np.linspace(0.0, 2.0 / params.relaxation_rate, 25)
        gens = np.array(
            [
                generator(
                    continuous_map_derivative(u, params, t),
                    invert_map(continuous_map(u, params, t)),
                )
                for t in times
            ]
        )
        worst = max(worst, float(np.abs(gens - gens.mean(axis=0)).max()))
    return worst < 1e-9, f"max deviation from mean generator {worst:.2e} (tol 1e-9, 20 families)"


@dataclass(frozen=True)
class CriterionResult:
    number: int
    slug: str
    passed: bool
    elapsed: float
    budget: float | None
    detail: str

    @property
    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (
            f"criterion {self.number:02d} {self.slug:<26s} {status}"
            f" [{self.elapsed:7.2f} s] {self.detail}"
        )


CRITERIA = (
    (1, "closed-form-correctness", 5.0, _criterion_closed_form),
    (2, "microscopic-consistency", 5.0, _criterion_microscopic),
    (3, "discrete-continuous", 10.0, _criterion_interpolation),
    (4, "convexity-gives-cp", 120.0, _criterion_complete_positivity),
    (5, "markovianity-classes", 60.0, _criterion_markovianity),
    (6, "isotropic-degeneracy", None, _criterion_isotropic_degeneracy),
    (7, "anisotropic-z-needle", 120.0, _criterion_anisotropic),
    (8, "offset-profiles", 240.0, _criterion_offset),
    (9, "generator-ode-roundtrip", 60.0, _criterion_ode_roundtrip),
    (10, "origin-point-mass", 1.0, _criterion_origin_limit),
    (11, "semigroup-constancy", 10.0, _criterion_semigroup),
)


def run_one(number: int) -> CriterionResult:
    """Run a single criterion by number (1-based)."""
    for num, slug, budget, fn in CRITERIA:
        if num == number:
            start = time.perf_counter()
            passed, detail = fn()
            elapsed = time.perf_counter() - start
            if budget is not None and elapsed >= budget:
                passed = False
                detail += f"; over runtime budget {budget:g} s"
            return CriterionResult(
                number=num, slug=slug, passed=bool(passed),
                elapsed=elapsed, budget=budget, detail=detail,
            )
    raise ValueError(f"no criterion number {number}")


def run_all(numbers=None, emit=print) -> bool:
    """Run the checklist (all of it by default); returns overall success."""
    selected = tuple(numbers) if numbers else tuple(num for num, *_ in CRITERIA)
    ok = True
    for number in selected:
        result = run_one(number)
        emit(result.line)
        ok &= result.passed
    return ok
