#!/usr/bin/env python3
"""
Depol - Modules Package
Modules:
- fock_algebra: Two-mode Fock blocks, Stokes matrices, initial states
- lindblad_depolarizer: Depolarizing generator and evolution
- decay_fit: Log-linear decay-rate fits
- polarization_metrics: Stokes moments, degree of polarization, trajectories
- wigner_functions: Wigner d/D functions and spherical harmonics
- sphere_phase_space: Husimi Q multipoles and their exact propagator
- micro_reservoir: Field-atom model behind the effective rate
- scenario_config: JSON scenarios
"""

__version__ = "1.0.0"

from .fock_algebra import (
    StokesMatrices, TwoModeState, stokes_matrices, fock_state, maximally_mixed,
    su2_coherent_state, two_mode_coherent_state, sphere_amplitudes, sphere_angles,
    stokes_family, mode_amplitude_family, expectation,
)
from .lindblad_depolarizer import (
    DepolarizerRates, StiffnessError, block_pair_generator, depolarizing_rhs,
    generator_spectrum, coherence_rate, steady_state, evolve, evolve_series,
)
from .decay_fit import DecayFit, fit_decay_rate
from .polarization_metrics import (
    BlochRecord, Trajectory, stokes_moments, degree_of_polarization, uncertainty_check,
    purity, bloch_record, bloch_to_state, one_photon_analytic, rate_claims, time_grid, trajectory,
)
from .wigner_functions import wigner_d, wigner_D, spherical_harmonic
from .sphere_phase_space import (
    DegenerateDesignError, MultipoleCoefficients, SphereGrid, EulerGrid,
    su2_q_sphere, su2_q_group, multipole_transform, group_multipole_transform,
    evaluate_multipoles, propagate_multipoles, calibrate_exponents, pointmass_coefficients,
    depolarization_measure, dipole_moments_from_multipoles, d_normalized,
)
from .micro_reservoir import (
    AtomConfig, MicroSystem, DimensionGuardError, build_system, evolve_full,
    effective_gamma, validate_adiabatic, detuning_sweep,
)
from .scenario_config import ConfigError, ScenarioConfig, load_scenario

__all__ = [
    'StokesMatrices', 'TwoModeState', 'stokes_matrices', 'fock_state', 'maximally_mixed',
    'su2_coherent_state', 'two_mode_coherent_state', 'sphere_amplitudes', 'sphere_angles',
    'stokes_family', 'mode_amplitude_family', 'expectation',
    'DepolarizerRates', 'StiffnessError', 'block_pair_generator', 'depolarizing_rhs',
    'generator_spectrum', 'coherence_rate', 'steady_state', 'evolve', 'evolve_series',
    'DecayFit', 'fit_decay_rate',
    'BlochRecord', 'Trajectory', 'stokes_moments', 'degree_of_polarization', 'uncertainty_check',
    'purity', 'bloch_record', 'bloch_to_state', 'one_photon_analytic', 'rate_claims', 'time_grid', 'trajectory',
    'wigner_d', 'wigner_D', 'spherical_harmonic',
    'DegenerateDesignError', 'MultipoleCoefficients', 'SphereGrid', 'EulerGrid',
    'su2_q_sphere', 'su2_q_group', 'multipole_transform', 'group_multipole_transform',
    'evaluate_multipoles', 'propagate_multipoles', 'calibrate_exponents', 'pointmass_coefficients',
    'depolarization_measure', 'dipole_moments_from_multipoles', 'd_normalized',
    'AtomConfig', 'MicroSystem', 'DimensionGuardError', 'build_system', 'evolve_full',
    'effective_gamma', 'validate_adiabatic', 'detuning_sweep',
    'ConfigError', 'ScenarioConfig', 'load_scenario',
]
