import math

import numpy as np
import pytest

from swapmix.core_maps import (
    AffineQubitMap,
    CollisionParams,
    continuous_map,
    density_from_bloch,
)
from swapmix.diagnostics import (
    CP_DIVISIBLE,
    NEITHER,
    P_DIVISIBLE_ONLY,
    UNDETERMINED,
    choi_matrix,
    choi_spectrum,
    cp_check,
    determinant_series,
    divisibility_report,
    pairwise_rate_sums,
    trace_distance,
    trace_distance_series,
)
from swapmix.mixture import mix, mixture_map, mixture_map_series, point_mass


def ball_point(rng):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform() ** (1.0 / 3.0)


def test_trace_distance_against_eigenvalue_oracle():
    rng = np.random.default_rng(31)
    for _ in range(25):
        a = density_from_bloch(ball_point(rng))
        b = density_from_bloch(ball_point(rng))
        oracle = 0.5 * np.abs(np.linalg.eigvalsh(a - b)).sum()
        assert trace_distance(a, b) == pytest.approx(oracle, abs=1e-14)


def test_trace_distance_metric_properties():
    rng = np.random.default_rng(32)
    a, b, c = (density_from_bloch(ball_point(rng)) for _ in range(3))
    assert trace_distance(a, a) == pytest.approx(0.0, abs=1e-15)
    assert trace_distance(a, b) == pytest.approx(trace_distance(b, a))
    assert trace_distance(a, c) <= trace_distance(a, b) + trace_distance(b, c) + 1e-14
    plus = density_from_bloch((0.0, 0.0, 1.0))
    minus = density_from_bloch((0.0, 0.0, -1.0))
    assert trace_distance(plus, minus) == pytest.approx(1.0)


def test_trace_distance_series_witness_detection():
    def scaling(a):
        m = np.eye(4)
        m[1:, 1:] *= a
        return m

    times = np.array([0.0, 1.0, 2.0, 3.0])
    maps = np.stack([scaling(a) for a in (1.0, 0.4, 0.7, 0.6)])
    series = trace_distance_series(maps, (0, 0, 1.0), (0, 0, -1.0), times)
    np.testing.assert_allclose(series.values, [1.0, 0.4, 0.7, 0.6], atol=1e-15)
    assert series.witness_time == pytest.approx(2.0)
    assert series.max_increase == pytest.approx(0.3)

    monotone = trace_distance_series(
        np.stack([scaling(a) for a in (1.0, 0.7, 0.5, 0.4)]),
        (0, 0, 1.0),
        (0, 0, -1.0),
        times,
    )
    assert monotone.witness_time is None
    assert monotone.max_increase < 0.0


def test_choi_reference_channels():
    ident = choi_spectrum(AffineQubitMap.identity())
    np.testing.assert_allclose(ident.eigenvalues, [0.0, 0.0, 0.0, 2.0], atol=1e-14)
    assert ident.trace == pytest.approx(2.0)

    depolarize = choi_spectrum(AffineQubitMap(np.diag([1.0, 0.0, 0.0, 0.0])))
    np.testing.assert_allclose(depolarize.eigenvalues, [0.5] * 4, atol=1e-14)

    # the transpose map is positive but not completely positive
    transpose = AffineQubitMap(np.diag([1.0, 1.0, -1.0, 1.0]))
    ok, spectrum = cp_check(transpose)
    assert not ok
    np.testing.assert_allclose(spectrum.eigenvalues, [-1.0, 1.0, 1.0, 1.0], atol=1e-14)


def test_choi_hermitian_and_collision_maps_are_cp():
    rng = np.random.default_rng(33)
    for _ in range(15):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.05, 1.4))
        m = continuous_map(u, p, rng.uniform(0.0, 40.0))
        choi = choi_matrix(m)
        np.testing.assert_allclose(choi, choi.conj().T, atol=1e-15)
        ok, spectrum = cp_check(m)
        assert ok
        assert spectrum.trace == pytest.approx(2.0, abs=1e-12)


def test_determinant_zero_refinement():
    # equal weights on +/-0.8 z and +/-0.8 x put the linear block into the
    # form cosine*I + rank_one*(zz + xx)/2, whose determinant vanishes with a
    # sign change whenever the cosine factor crosses zero
    params = CollisionParams(eta=0.5)
    radius = 0.8
    dist = mix(
        [
            point_mass((0, 0, radius)),
            point_mass((0, 0, -radius)),
            point_mass((radius, 0, 0)),
            point_mass((-radius, 0, 0)),
        ],
        [0.25, 0.25, 0.25, 0.25],
    )
    omega = math.atan2(params.sin_eta * radius, params.cos_eta) / params.tau
    horizon = 3.2 * math.pi / omega
    times = np.linspace(0.0, horizon, 400)
    maps = mixture_map_series(dist, params, times)
    series = determinant_series(
        times, maps, det_at=lambda t: float(np.linalg.det(mixture_map(dist, params, t).linear))
    )
    analytic = [(k + 0.5) * math.pi / omega for k in range(3)]
    found = np.asarray(series.singular_times)
    assert len(found) >= 3
    for root in analytic:
        assert np.abs(found - root).min() < 1e-6
    spacing = times[1] - times[0]
    assert np.diff(found).min() > 0.5 * spacing


def test_determinant_series_without_refinement():
    params = CollisionParams(eta=0.2)
    dist = point_mass((0.0, 0.0, 0.4))
    times = np.linspace(0.0, 10.0, 50)
    maps = mixture_map_series(dist, params, times)
    series = determinant_series(times, maps)
    assert series.singular_times == ()
    assert not series.singular_samples.any()
    assert series.values[0] == pytest.approx(1.0)
    assert np.all(series.values > 0.0)


def test_pairwise_rate_sums_order():
    rates = np.array([[3.0, 2.0, -1.0]])
    np.testing.assert_allclose(pairwise_rate_sums(rates), [[5.0, 2.0, 1.0]])


def test_divisibility_verdicts():
    times = np.linspace(0.0, 99.0, 100)
    ones = np.ones((100, 3))

    assert divisibility_report(times, ones).verdict == CP_DIVISIBLE

    p_only = np.tile([2.0, 1.5, -0.4], (100, 1))
    report = divisibility_report(times, p_only)
    assert report.verdict == P_DIVISIBLE_ONLY
    assert report.min_rate == pytest.approx(-0.4)

    neither = np.tile([1.0, -2.0, -3.0], (100, 1))
    assert divisibility_report(times, neither).verdict == NEITHER

    sparse = np.full((100, 3), np.nan)
    sparse[:8] = 1.0
    assert divisibility_report(times, sparse).verdict == UNDETERMINED


def test_divisibility_excludes_singular_windows():
    times = np.linspace(0.0, 99.0, 100)
    rates = np.ones((100, 3))
    rates[49:52] = -50.0
    # the bad samples sit within two grid steps of the singular time
    report = divisibility_report(times, rates, singular_times=(50.0,))
    assert report.verdict == CP_DIVISIBLE
    assert report.n_valid == 95
    without_exclusion = divisibility_report(times, rates)
    assert without_exclusion.verdict == NEITHER
