import math

import numpy as np
import pytest

from swapmix.core_maps import (
    PAULI,
    AffineQubitMap,
    CollisionParams,
    SingularMap,
    bloch_from_density,
    continuous_map,
    continuous_map_derivative,
    density_from_bloch,
    invert_map,
)
from swapmix.gksl import (
    IntegrationThroughSingularity,
    canonical_decomposition,
    canonical_rate_series,
    evolve_master_equation,
    generator,
    generator_series,
    gksl_coefficients,
)
from swapmix.mixture import mix, mixture_map_series, point_mass


def master_equation_action(h, c, rho):
    """Pauli-algebra right-hand side; independent of the coefficient extraction."""
    ham = h[0] * PAULI[0] + h[1] * PAULI[1] + h[2] * PAULI[2]
    out = -1j * (ham @ rho - rho @ ham)
    for j in range(3):
        for k in range(3):
            anti = PAULI[k] @ PAULI[j] @ rho + rho @ PAULI[k] @ PAULI[j]
            out = out + c[j, k] * (PAULI[j] @ rho @ PAULI[k] - 0.5 * anti)
    return out


def bloch_generator_from_coeffs(h, c):
    """Rebuild the 4x4 Bloch generator from (h, c) by probing basis states."""
    gen = np.zeros((4, 4))
    eye = np.eye(2, dtype=complex)
    for k in range(3):
        gen[k + 1, 0] = np.trace(PAULI[k] @ master_equation_action(h, c, 0.5 * eye)).real
        for j in range(3):
            gen[k + 1, j + 1] = np.trace(
                PAULI[k] @ master_equation_action(h, c, 0.5 * PAULI[j])
            ).real
    return gen


def fixed_u_generator(u, params, t=1.0):
    return generator(
        continuous_map_derivative(u, params, t),
        invert_map(continuous_map(u, params, t)),
    )


def test_coefficient_round_trip_on_random_generators():
    rng = np.random.default_rng(21)
    for _ in range(25):
        gen = np.zeros((4, 4))
        gen[1:, :] = rng.normal(size=(3, 4))
        coeffs = gksl_coefficients(gen)
        np.testing.assert_allclose(coeffs.noise, coeffs.noise.conj().T, atol=1e-15)
        rebuilt = bloch_generator_from_coeffs(coeffs.hamiltonian, coeffs.noise)
        np.testing.assert_allclose(rebuilt, gen, atol=1e-13)


def test_unpolarized_point_mass_is_isotropic_depolarizer():
    params = CollisionParams(eta=0.01)
    rate = params.relaxation_rate
    gen = fixed_u_generator(np.zeros(3), params, t=3.0)
    np.testing.assert_allclose(gen, np.diag([0.0, -rate, -rate, -rate]), atol=1e-15)
    coeffs = gksl_coefficients(gen)
    np.testing.assert_allclose(coeffs.hamiltonian, np.zeros(3), atol=1e-15)
    np.testing.assert_allclose(coeffs.noise, (rate / 4.0) * np.eye(3), atol=1e-15)


def test_pure_rotation_hamiltonian_sign():
    # linear block a * K(z) rotates about z; the matching Hamiltonian is -a/2 sigma_z
    a = 0.7
    gen = np.zeros((4, 4))
    gen[1:, 1:] = a * np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
    coeffs = gksl_coefficients(gen)
    np.testing.assert_allclose(coeffs.hamiltonian, [0.0, 0.0, -a / 2.0], atol=1e-15)
    np.testing.assert_allclose(coeffs.noise, np.zeros((3, 3)), atol=1e-15)


def test_pure_polarization_gives_amplitude_damping_rates():
    params = CollisionParams(eta=0.3)
    rate = params.relaxation_rate
    dec = canonical_decomposition(
        gksl_coefficients(fixed_u_generator(np.array([0.0, 0.0, 1.0]), params))
    )
    np.testing.assert_allclose(dec.rates, [rate / 2.0, 0.0, 0.0], atol=1e-12)


def test_partial_polarization_rate_formulas():
    params = CollisionParams(eta=0.3)
    uz = 0.6
    rate = params.relaxation_rate
    transverse = -math.log(
        params.cos_eta * math.hypot(params.cos_eta, params.sin_eta * uz)
    )
    dec = canonical_decomposition(
        gksl_coefficients(fixed_u_generator(np.array([0.0, 0.0, uz]), params))
    )
    expected = sorted(
        [rate * (1 + uz) / 4.0, rate * (1 - uz) / 4.0, 0.25 * (rate - 2.0 * (rate - transverse))],
        reverse=True,
    )
    np.testing.assert_allclose(dec.rates, expected, atol=1e-12)


def test_canonical_operators_are_orthonormal():
    rng = np.random.default_rng(22)
    gen = np.zeros((4, 4))
    gen[1:, :] = rng.normal(size=(3, 4))
    dec = canonical_decomposition(gksl_coefficients(gen))
    assert dec.rates[0] >= dec.rates[1] >= dec.rates[2]
    gram = np.array(
        [
            [np.trace(a.conj().T @ b) for b in dec.operators]
            for a in dec.operators
        ]
    )
    np.testing.assert_allclose(gram, np.eye(3), atol=1e-13)


def test_generator_series_flags_singular_samples():
    good = continuous_map((0.0, 0.2, 0.4), CollisionParams(eta=0.3), 2.0).matrix
    flat = np.eye(4)
    flat[1, 1] = flat[2, 2] = flat[3, 3] = 1e-14
    maps = np.stack([good, flat])
    derivs = np.zeros_like(maps)
    gens, valid = generator_series(maps, derivs)
    assert valid.tolist() == [True, False]
    assert np.all(np.isfinite(gens[0]))
    assert np.all(np.isnan(gens[1]))
    rates = canonical_rate_series(gens, valid)
    assert np.all(np.isfinite(rates[0])) and np.all(np.isnan(rates[1]))


def test_series_rates_match_scalar_decomposition():
    params = CollisionParams(eta=0.4)
    dist = mix([point_mass((0, 0, 0.7)), point_mass((0.5, 0, 0))], [0.6, 0.4])
    times = np.linspace(0.0, 12.0, 7)
    maps, derivs = mixture_map_series(dist, params, times, derivatives=True)
    gens, valid = generator_series(maps, derivs)
    assert np.all(valid)
    rates = canonical_rate_series(gens, valid)
    for k in range(len(times)):
        dec = canonical_decomposition(gksl_coefficients(gens[k]))
        np.testing.assert_allclose(rates[k], dec.rates, atol=1e-14)


def test_evolution_reproduces_semigroup():
    params = CollisionParams(eta=0.25)
    u = np.array([0.2, -0.3, 0.5])
    gen = fixed_u_generator(u, params)
    times = np.linspace(0.0, 30.0, 11)
    rho0 = density_from_bloch((0.0, 0.8, -0.2))
    states = evolve_master_equation(lambda t: gen, rho0, times, step=0.05)
    for t, state in zip(times, states):
        m = continuous_map(u, params, t)
        expected = density_from_bloch(m(bloch_from_density(rho0)))
        np.testing.assert_allclose(state, expected, atol=1e-10)


def test_evolution_tracks_time_dependent_family():
    # mild two-point mixture whose determinant stays well away from zero
    params = CollisionParams(eta=0.5)
    dist = mix([point_mass((0, 0, 0.7)), point_mass((0.2, 0, 0))], [0.5, 0.5])

    def generator_at(t):
        maps, derivs = mixture_map_series(dist, params, np.array([t]), derivatives=True)
        return generator(derivs[0], invert_map(AffineQubitMap(maps[0])))

    times = np.linspace(0.0, 6.0, 13)
    r0 = np.array([0.0, 1.0, 0.0])
    maps = mixture_map_series(dist, params, times)
    direct = maps[:, 1:, 1:] @ r0 + maps[:, 1:, 0]

    def max_error(step):
        states = evolve_master_equation(generator_at, density_from_bloch(r0), times, step)
        evolved = np.array([bloch_from_density(s) for s in states])
        return np.abs(evolved - direct).max()

    coarse, fine = max_error(0.5), max_error(0.25)
    assert coarse < 1e-4
    # classic fourth-order stepping: halving the step cuts the error ~16x
    assert fine < coarse / 8.0


def test_evolution_raises_through_singularity():
    gen = np.diag([0.0, -1.0, -1.0, -1.0])

    def generator_at(t):
        if t > 1.0:
            raise SingularMap("test singularity")
        return gen

    with pytest.raises(IntegrationThroughSingularity):
        evolve_master_equation(
            generator_at, density_from_bloch((0, 0, 1.0)), np.array([0.0, 2.0]), step=0.5
        )


def test_evolution_input_validation():
    gen = np.zeros((4, 4))
    rho = density_from_bloch((0, 0, 0.5))
    with pytest.raises(ValueError):
        evolve_master_equation(lambda t: gen, rho, np.array([0.0, 0.0]), step=0.1)
    with pytest.raises(ValueError):
        evolve_master_equation(lambda t: gen, rho, np.array([0.0, 1.0]), step=-1.0)
