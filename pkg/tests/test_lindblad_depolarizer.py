import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from modules.fock_algebra import (
    TwoModeState, expectation, fock_state, mode_amplitude_family, stokes_family,
    stokes_matrices, two_mode_coherent_state,
)
from modules.lindblad_depolarizer import (
    DepolarizerRates, block_pair_generator, coherence_rate, depolarizing_rhs, dissipator,
    evolve, generator_spectrum, null_space_overlap, steady_state,
)
from modules.polarization_metrics import purity


def random_block_state(N, rng):
    a = rng.normal(size=(N + 1, N + 1)) + 1j * rng.normal(size=(N + 1, N + 1))
    rho = a @ a.conj().T
    return TwoModeState.from_block(N, rho / np.trace(rho))


def test_one_photon_spectrum():
    spectrum = generator_spectrum(1, 1, DepolarizerRates(gamma=1.0, gamma0=0.3))

    assert np.allclose(spectrum.real, [0.0, -8.0, -8.0, -16.0], atol=1e-10)
    assert np.allclose(spectrum.imag, 0.0, atol=1e-10)


def test_inter_block_pair_spectrum():
    spectrum = generator_spectrum(1, 0, DepolarizerRates(gamma=1.0, gamma0=1.0))
    assert np.allclose(spectrum, [-5.0, -5.0], atol=1e-10)


def test_coherence_rate_scales_with_gamma():
    assert coherence_rate(DepolarizerRates(gamma=1.0)) == pytest.approx(8.0)
    assert coherence_rate(DepolarizerRates(gamma=0.25, gamma0=3.0)) == pytest.approx(2.0)
    assert coherence_rate(DepolarizerRates(gamma=0.0)) == 0.0


@pytest.mark.parametrize("N", range(1, 7))
def test_block_states_relax_to_the_random_state(N):
    rng = np.random.default_rng(100 + N)
    state = random_block_state(N, rng)
    final = evolve(state, 30.0, DepolarizerRates(gamma=1.0, gamma0=0.5))

    assert np.linalg.norm(final.blocks[(N, N)] - steady_state(N)) <= 1e-8


@pytest.mark.parametrize("N", range(1, 5))
def test_null_space_is_the_random_state(N):
    assert null_space_overlap(N, DepolarizerRates(gamma=1.0)) == pytest.approx(1.0, abs=1e-10)
    spectrum = generator_spectrum(N, N, DepolarizerRates(gamma=1.0))
    assert np.sum(np.abs(spectrum) < 1e-9) == 1


def test_rhs_matches_generator_matrix():
    rng = np.random.default_rng(3)
    rho = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    rates = DepolarizerRates(gamma=0.7, gamma0=0.4)
    state = TwoModeState(n_max=2, blocks={(2, 1): rho})

    derivative = depolarizing_rhs(state, rates).blocks[(2, 1)]
    expected = block_pair_generator(2, 1, rates).matrix @ rho.reshape(-1)
    assert np.allclose(derivative.reshape(-1), expected, atol=1e-12)


def test_evolution_preserves_trace_hermiticity_and_photon_number():
    state = two_mode_coherent_state(0.5 + 0.3j, 0.4 - 0.2j, n_max=4)
    rates = DepolarizerRates(gamma=1.0, gamma0=0.5)
    s0 = expectation(state, stokes_family('S0', 4)).real

    evolved = evolve(state, 0.3, rates)
    evolved.validate(tol=1e-9)
    assert expectation(evolved, stokes_family('S0', 4)).real == pytest.approx(s0, abs=1e-9)


def test_exact_and_adaptive_methods_agree():
    rng = np.random.default_rng(5)
    rates = DepolarizerRates(gamma=1.0, gamma0=0.4)
    for state in (random_block_state(2, rng), two_mode_coherent_state(0.5 + 0.3j, 0.4 - 0.2j, n_max=3)):
        exact = evolve(state, 0.1, rates, method='exact-expm')
        adaptive = evolve(state, 0.1, rates, method='rk-adaptive', rtol=1e-12, atol=1e-14)
        for pair in exact.pairs():
            assert np.allclose(exact.blocks[pair], adaptive.blocks[pair], rtol=0.0, atol=1e-9)


def test_mode_amplitudes_decay_with_tensor_rank_rates():
    state = two_mode_coherent_state(0.5 + 0.3j, 0.4 - 0.2j, n_max=5)
    gamma, gamma0, t = 0.8, 0.6, 0.35
    evolved = evolve(state, t, DepolarizerRates(gamma=gamma, gamma0=gamma0))

    for sign in ('+', '-'):
        first = mode_amplitude_family(sign, 5)
        second = mode_amplitude_family(sign, 5, power=2)
        assert expectation(evolved, first) == pytest.approx(
            expectation(state, first) * np.exp(-(4 * gamma + gamma0) * t), abs=1e-9)
        assert expectation(evolved, second) == pytest.approx(
            expectation(state, second) * np.exp(-(8 * gamma + 4 * gamma0) * t), abs=1e-9)


def test_evolution_is_independent_of_thread_count():
    state = two_mode_coherent_state(0.5, 0.4j, n_max=4)
    rates = DepolarizerRates(gamma=1.0, gamma0=0.2)

    serial = evolve(state, 0.2, rates, threads=1)
    parallel = evolve(state, 0.2, rates, threads=4)
    for pair in serial.pairs():
        assert np.array_equal(serial.blocks[pair], parallel.blocks[pair])


def test_zero_time_returns_a_copy():
    state = fock_state(1, 1)
    out = evolve(state, 0.0, DepolarizerRates(gamma=1.0))

    assert np.array_equal(out.blocks[(1, 1)], state.blocks[(1, 1)])
    assert out.blocks[(1, 1)] is not state.blocks[(1, 1)]


def test_evolve_rejects_bad_arguments():
    state = fock_state(1, 0)
    with pytest.raises(ValueError):
        evolve(state, -1.0, DepolarizerRates(gamma=1.0))
    with pytest.raises(ValueError):
        evolve(state, 1.0, DepolarizerRates(gamma=1.0), method='euler')


def test_rates_validation_and_reservoir_defaults():
    with pytest.raises(ValueError):
        DepolarizerRates(gamma=-1.0)
    rates = DepolarizerRates.from_reservoir(0.3)
    assert rates.gamma0 == pytest.approx(0.6)


def test_dissipator_rejects_mismatched_shapes():
    with pytest.raises(ValueError):
        dissipator(np.eye(2), np.eye(3))


def test_evolution_is_a_semigroup():
    state = two_mode_coherent_state(0.5 + 0.3j, 0.4 - 0.2j, n_max=3)
    rates = DepolarizerRates(gamma=0.9, gamma0=0.6)

    stepped = evolve(evolve(state, 0.15, rates), 0.25, rates)
    direct = evolve(state, 0.4, rates)
    for pair in direct.pairs():
        assert np.max(np.abs(stepped.blocks[pair] - direct.blocks[pair])) <= 1e-10


@pytest.mark.parametrize("state", [
    two_mode_coherent_state(0.6, 0.3 - 0.4j, n_max=3),
    fock_state(2, 0),
    TwoModeState.from_pure({1: np.array([0.6, 0.0]), 2: np.array([0.0, 0.8j, 0.0])}, n_max=2),
])
def test_purity_never_increases(state):
    rates = DepolarizerRates(gamma=0.5, gamma0=0.7)
    values = [purity(evolve(state, float(t), rates)) for t in np.linspace(0.0, 1.5, 16)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))
    assert values[-1] < values[0]


@pytest.mark.parametrize("N", range(0, 5))
def test_diagonal_pair_generator_ignores_gamma0(N):
    without = block_pair_generator(N, N, DepolarizerRates(gamma=0.7, gamma0=0.0)).matrix
    with_dephasing = block_pair_generator(N, N, DepolarizerRates(gamma=0.7, gamma0=5.0)).matrix
    assert np.array_equal(without, with_dephasing)


def test_evolution_keeps_the_block_pair_layout():
    rates = DepolarizerRates(gamma=1.0, gamma0=0.5)
    diagonal = TwoModeState.mixture([(0.3, fock_state(1, 0, n_max=3)), (0.7, fock_state(3, 2, n_max=3))])
    evolved = evolve(diagonal, 0.5, rates)

    assert evolved.pairs() == ((1, 1), (3, 3))
    assert evolved.block_weights() == pytest.approx({1: 0.3, 3: 0.7}, abs=1e-12)

    coherent = two_mode_coherent_state(0.5, 0.4j, n_max=3)
    assert evolve(coherent, 0.5, rates).pairs() == coherent.pairs()


def test_evolve_rejects_a_block_without_its_mirror():
    rho = np.array([[0.1], [0.2j]])
    state = fock_state(1, 1, n_max=1)
    lopsided = TwoModeState(n_max=1, blocks={**state.blocks, (0, 0): np.zeros((1, 1)), (1, 0): rho})
    with pytest.raises(ValueError, match="conjugate-transpose partner"):
        evolve(lopsided, 0.2, DepolarizerRates(gamma=1.0))

    mirrored = TwoModeState(n_max=1, blocks={**lopsided.blocks, (0, 1): rho.conj().T})
    evolved = evolve(mirrored, 0.2, DepolarizerRates(gamma=1.0))
    assert np.allclose(evolved.blocks[(0, 1)], evolved.blocks[(1, 0)].conj().T)


def test_dissipator_of_identity_and_photon_number():
    rng = np.random.default_rng(11)
    rho = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))

    assert np.allclose(dissipator(np.eye(4), rho, np.eye(2)), 0.0, atol=1e-14)
    S0_left, S0_right = stokes_matrices(3).S0, stokes_matrices(1).S0
    assert np.allclose(dissipator(S0_left, rho, S0_right), -(3 - 1) ** 2 * rho, atol=1e-12)


@pytest.mark.parametrize("N", range(0, 5))
def test_random_state_is_stationary_under_the_rhs(N):
    state = TwoModeState.from_block(N, steady_state(N))
    derivative = depolarizing_rhs(state, DepolarizerRates(gamma=1.3, gamma0=0.8)).blocks[(N, N)]
    assert np.allclose(derivative, 0.0, atol=1e-12)


def test_one_to_zero_coherence_decays_at_gamma0_plus_four_gamma():
    gamma, gamma0 = 0.7, 0.4
    rho = np.array([[0.3 + 0.1j], [-0.2j]])
    state = TwoModeState(n_max=1, blocks={(1, 0): rho})

    derivative = depolarizing_rhs(state, DepolarizerRates(gamma=gamma, gamma0=gamma0)).blocks[(1, 0)]
    assert np.allclose(derivative, -(gamma0 + 4 * gamma) * rho, atol=1e-14)
