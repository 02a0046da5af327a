import math

import numpy as np
import pytest

from swapmix.core_maps import (
    AffineQubitMap,
    CollisionParams,
    SingularMap,
    apply_map,
    as_bloch_vector,
    bloch_from_density,
    continuous_map,
    continuous_map_derivative,
    continuous_map_inverse,
    continuous_params,
    density_from_bloch,
    invert_map,
    n_collision_map,
    single_collision_map,
    validate_density,
)

SWAP = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)


def ball_point(rng, radius=None):
    v = rng.normal(size=3)
    v /= np.linalg.norm(v)
    return v * (rng.uniform() ** (1.0 / 3.0) if radius is None else radius)


def collision_oracle(u, r, eta):
    """Partial trace of the two-qubit unitary collision; independent of the map code."""
    unitary = math.cos(eta) * np.eye(4, dtype=complex) + 1j * math.sin(eta) * SWAP
    joint = unitary @ np.kron(density_from_bloch(r), density_from_bloch(u)) @ unitary.conj().T
    return joint[np.ix_([0, 2], [0, 2])] + joint[np.ix_([1, 3], [1, 3])]


def test_params_validation():
    with pytest.raises(ValueError):
        CollisionParams(eta=0.0)
    with pytest.raises(ValueError):
        CollisionParams(eta=math.pi / 2)
    with pytest.raises(ValueError):
        CollisionParams(eta=0.1, tau=0.0)
    p = CollisionParams(eta=0.3, tau=2.0)
    assert p.relaxation_rate == pytest.approx(-2.0 * math.log(math.cos(0.3)) / 2.0)


def test_bloch_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(20):
        r = ball_point(rng)
        rho = density_from_bloch(r)
        validate_density(rho)
        np.testing.assert_allclose(bloch_from_density(rho), r, atol=1e-14)
    with pytest.raises(ValueError):
        as_bloch_vector([1.0, 1.0, 1.0])
    with pytest.raises(ValueError):
        validate_density(np.array([[1.2, 0.0], [0.0, -0.2]]))


def test_affine_map_shape_constraints():
    with pytest.raises(ValueError):
        AffineQubitMap(np.zeros((4, 4)))
    bad = np.eye(4)
    bad[0, 2] = 0.1
    with pytest.raises(ValueError):
        AffineQubitMap(bad)
    m = AffineQubitMap.identity()
    assert m.matrix.flags.writeable is False
    np.testing.assert_array_equal((m @ m).matrix, np.eye(4))


def test_single_collision_matches_partial_trace():
    rng = np.random.default_rng(2)
    for _ in range(50):
        u, r = ball_point(rng), ball_point(rng)
        eta = rng.uniform(0.05, 1.5)
        channel = single_collision_map(u, CollisionParams(eta=eta))
        np.testing.assert_allclose(
            apply_map(channel, density_from_bloch(r)),
            collision_oracle(u, r, eta),
            atol=1e-14,
        )


def test_single_collision_z_axis_matrix():
    p = CollisionParams(eta=0.4)
    c, s = math.cos(0.4), math.sin(0.4)
    expected = np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, c * c, c * s, 0.0],
            [0.0, -c * s, c * c, 0.0],
            [s * s, 0.0, 0.0, c * c],
        ]
    )
    np.testing.assert_allclose(
        single_collision_map((0.0, 0.0, 1.0), p).matrix, expected, atol=1e-15
    )


def test_n_collision_matches_repeated_composition():
    rng = np.random.default_rng(3)
    for _ in range(25):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.05, 1.4))
        n = int(rng.integers(0, 120))
        step = single_collision_map(u, p).matrix
        brute = np.eye(4)
        for _ in range(n):
            brute = step @ brute
        np.testing.assert_allclose(n_collision_map(u, p, n).matrix, brute, atol=1e-12)
    with pytest.raises(ValueError):
        n_collision_map((0, 0, 0.5), CollisionParams(eta=0.1), -1)


def test_continuous_map_interpolates_collisions():
    rng = np.random.default_rng(4)
    for _ in range(20):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.05, 1.2), tau=rng.uniform(0.5, 2.0))
        n = int(rng.integers(1, 200))
        np.testing.assert_allclose(
            continuous_map(u, p, n * p.tau).matrix,
            n_collision_map(u, p, n).matrix,
            atol=1e-12,
        )
    assert continuous_map((0, 0, 0.5), CollisionParams(eta=0.1), 0.0).matrix == pytest.approx(np.eye(4))


def test_continuous_rates_limits():
    p = CollisionParams(eta=0.2)
    rate = p.relaxation_rate
    # unpolarized ancillas decay isotropically at the full rate
    assert continuous_params((0.0, 0.0, 0.0), p).transverse_rate == pytest.approx(rate)
    # pure ancillas halve the transverse rate
    assert continuous_params((0.0, 0.0, 1.0), p).transverse_rate == pytest.approx(rate / 2)
    mid = continuous_params((0.3, -0.2, 0.1), p)
    assert rate / 2 <= mid.transverse_rate <= rate
    assert mid.rotation_rate == pytest.approx(mid.rotation_angle / p.tau)


def test_polarization_is_fixed_point():
    rng = np.random.default_rng(5)
    for _ in range(20):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.05, 1.2))
        m = continuous_map(u, p, rng.uniform(0.0, 50.0))
        np.testing.assert_allclose(m(u), u, atol=1e-14)


def test_map_is_contraction():
    rng = np.random.default_rng(6)
    for _ in range(20):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.05, 1.4))
        m = continuous_map(u, p, rng.uniform(0.0, 30.0))
        assert np.linalg.svd(m.linear, compute_uv=False).max() <= 1.0 + 1e-12


def test_derivative_matches_finite_differences():
    rng = np.random.default_rng(7)
    for _ in range(10):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.1, 1.0))
        t = rng.uniform(0.5, 20.0)
        h = 1e-6
        fd = (continuous_map(u, p, t + h).matrix - continuous_map(u, p, t - h).matrix) / (2 * h)
        np.testing.assert_allclose(continuous_map_derivative(u, p, t), fd, atol=1e-9)


def test_tiny_polarization_reduces_to_isotropic_decay():
    p = CollisionParams(eta=0.3)
    t = 7.0
    m = continuous_map(np.zeros(3), p, t)
    decay = math.exp(-p.relaxation_rate * t)
    np.testing.assert_allclose(m.linear, decay * np.eye(3), atol=1e-15)
    np.testing.assert_allclose(m.translation, np.zeros(3), atol=1e-15)


def test_inverse_round_trip_and_cross_check():
    rng = np.random.default_rng(8)
    for _ in range(20):
        u = ball_point(rng)
        p = CollisionParams(eta=rng.uniform(0.1, 1.0))
        t = rng.uniform(0.0, 8.0)
        m = continuous_map(u, p, t)
        inv = invert_map(m)
        np.testing.assert_allclose((inv @ m).matrix, np.eye(4), atol=1e-10)
        np.testing.assert_allclose(
            continuous_map_inverse(u, p, t).matrix, inv.matrix, atol=1e-10
        )
        np.testing.assert_allclose(
            inv.linear, np.linalg.inv(m.linear), atol=1e-10
        )


def test_singular_map_raises():
    nearly_flat = np.eye(4)
    nearly_flat[1, 1] = nearly_flat[2, 2] = nearly_flat[3, 3] = 1e-14
    with pytest.raises(SingularMap):
        invert_map(AffineQubitMap(nearly_flat))
    # fully decayed dynamics is numerically non-invertible
    p = CollisionParams(eta=1.0)
    with pytest.raises(SingularMap):
        continuous_map_inverse((0.0, 0.0, 0.0), p, 200.0)
