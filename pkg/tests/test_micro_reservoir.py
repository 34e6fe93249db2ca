import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from modules.micro_reservoir import (
    BOTH_ZERO, AtomConfig, DimensionGuardError, atom_reduced_state, build_system, detuning_sweep,
    draw_phases, effective_gamma, evolve_full, excitation_number_operator, field_reduced_state,
    initial_product_state, validate_adiabatic,
)


def atom(**overrides):
    params = dict(g_abs=0.2, detuning=2.0, gamma_a=1.0, nbar=20.0, phase=0.0)
    params.update(overrides)
    return AtomConfig(**params)


def test_dimension_counts_field_states_times_atoms():
    assert build_system([atom()], n_max=1).dim == 6
    assert build_system([atom(), atom(phase=1.0)], n_max=2).dim == 24


def test_hamiltonian_is_hermitian_and_conserves_excitations():
    system = build_system([atom(phase=0.3), atom(g_abs=0.1, detuning=-1.5, phase=2.0)], n_max=2, omega=1.3)
    H = system.hamiltonian
    number = excitation_number_operator(system)

    assert np.allclose(H, H.conj().T, atol=1e-12)
    assert np.max(np.abs(H @ number - number @ H)) <= 1e-12


def test_dimension_guard():
    with pytest.raises(DimensionGuardError):
        build_system([atom()] * 11, n_max=1)
    with pytest.raises(ValueError):
        build_system([], n_max=1)
    with pytest.raises(ValueError):
        build_system([atom()], n_max=0)


def test_full_evolution_keeps_a_density_matrix():
    system = build_system([atom(g_abs=0.5, detuning=1.0)], n_max=2)
    rho0 = initial_product_state(system)

    assert np.array_equal(evolve_full(system, rho0, 0.0), rho0)
    rho = evolve_full(system, rho0, 3.0)
    assert np.trace(rho).real == pytest.approx(1.0, abs=1e-9)
    assert np.allclose(rho, rho.conj().T, atol=1e-9)
    assert np.min(np.linalg.eigvalsh((rho + rho.conj().T) / 2)) >= -1e-9
    assert np.trace(field_reduced_state(rho, system)).real == pytest.approx(1.0, abs=1e-9)


def test_full_evolution_rejects_bad_input():
    system = build_system([atom()], n_max=1)
    with pytest.raises(ValueError):
        evolve_full(system, np.eye(3), 1.0)
    with pytest.raises(ValueError):
        evolve_full(system, np.eye(6) / 6, -1.0)


def test_decoupled_field_keeps_its_coherence():
    system = build_system([atom(g_abs=0.0)], n_max=1)
    rho = evolve_full(system, initial_product_state(system), 5.0)
    field = field_reduced_state(rho, system)
    assert abs(field[2, 1]) == pytest.approx(0.5, abs=1e-10)


def test_atom_populations_stay_near_one_half():
    nbar = 20.0
    system = build_system([atom(g_abs=0.0, nbar=nbar)], n_max=1)
    rho = evolve_full(system, initial_product_state(system), 10.0)
    excited = atom_reduced_state(rho, system, 0)[1, 1].real

    assert abs(excited - 0.5) <= 1 / (2 * (2 * nbar + 1)) + 1e-9
    assert excited == pytest.approx(nbar / (2 * nbar + 1), abs=1e-6)


def test_effective_gamma_arithmetic():
    single = atom(g_abs=0.1, detuning=2.0, gamma_a=0.5, nbar=20.0)
    assert effective_gamma([single]) == pytest.approx(2.5e-6)
    assert effective_gamma([single, single]) == pytest.approx(5e-6)
    assert effective_gamma([atom(g_abs=0.2, detuning=2.0, gamma_a=0.5)]) == pytest.approx(16 * 2.5e-6)


def test_effective_gamma_rejects_degenerate_atoms():
    with pytest.raises(ValueError):
        effective_gamma([atom(detuning=0.0)])
    with pytest.raises(ValueError):
        effective_gamma([atom(nbar=0.0)])
    with pytest.raises(ValueError):
        AtomConfig(g_abs=0.1, detuning=1.0, gamma_a=0.0, nbar=1.0)


def test_far_off_resonance_flag():
    assert atom(g_abs=0.2, detuning=2.0).far_off_resonance
    assert not atom(g_abs=0.5, detuning=1.0).far_off_resonance


def test_phases_are_reproducible():
    first, second = draw_phases(42, 3), draw_phases(42, 3)
    assert np.array_equal(first, second)
    assert np.all((first >= 0) & (first < 2 * math.pi))


def test_zero_coupling_is_the_both_zero_sentinel():
    report = validate_adiabatic([atom(g_abs=0.0)], n_max=1)

    assert report['ratio'] == BOTH_ZERO
    assert report['within_window']
    assert report['rate_predicted'] == 0.0
    assert abs(report['rate_fitted']) < 1e-9


def test_report_records_seed_phases_and_warnings():
    report = validate_adiabatic([atom(nbar=5.0)], n_max=2, sim_times=np.linspace(0.0, 200.0, 5), seed=3)

    assert report['seed'] == 3
    assert report['atoms'][0]['phase'] == pytest.approx(draw_phases(3, 1)[0])
    assert any('thermal occupation' in w for w in report['warnings'])
    assert len(report['coherence']) == 5
    assert report['gamma_predicted'] == pytest.approx(effective_gamma([atom(nbar=5.0)]))


def test_near_resonant_atoms_flag_a_regime_violation():
    report = validate_adiabatic([atom(g_abs=0.5, detuning=1.0)], n_max=2,
                                sim_times=np.linspace(0.0, 5.0, 6))
    assert report['regime_violation']


def test_detuning_sweep_keeps_input_order():
    reports = detuning_sweep(atom(), [5.0, 10.0], n_max=1, threads=2)
    assert [r['atoms'][0]['detuning'] for r in reports] == pytest.approx([1.0, 2.0])


def test_dispersive_flag_tracks_the_thermal_linewidth():
    hot = atom(g_abs=0.2, detuning=2.0, gamma_a=1.0, nbar=20.0)
    assert hot.thermal_linewidth == pytest.approx(20.5)
    assert hot.far_off_resonance and not hot.dispersive
    assert not hot.in_regime()

    narrow = atom(g_abs=0.2, detuning=200.0, gamma_a=0.01, nbar=20.0)
    assert narrow.dispersive and narrow.in_regime()
    assert atom(g_abs=0.0).in_regime()


def test_decoupled_atom_leaves_the_one_photon_population_alone():
    report = validate_adiabatic([atom(g_abs=0.0)], n_max=1, sim_times=np.linspace(0.0, 10.0, 5))

    assert report['population_drift'] <= 1e-10
    assert not report['population_leak']
    assert not report['regime_violation']


def test_thermally_broadened_atom_is_reported_outside_the_regime():
    # |g| = 0.2, Delta = 2, gamma_a = 1, nbar = 20: linewidth 20.5 dwarfs the detuning
    report = validate_adiabatic([atom()], n_max=2, seed=7)

    assert report['regime_violation']
    assert any('thermal linewidth' in w for w in report['warnings'])
    assert report['population_leak']
    assert report['population_drift'] > 0.01
    assert not report['within_window']


def test_detuning_sweep_at_fixed_linewidth_stays_outside_the_regime():
    reports = detuning_sweep(atom(), [5.0, 10.0, 20.0], n_max=1)

    assert [r['atoms'][0]['detuning'] for r in reports] == pytest.approx([1.0, 2.0, 4.0])
    assert all(r['regime_violation'] for r in reports)
    assert all(any('thermal linewidth' in w for w in r['warnings']) for r in reports)
