#!/usr/bin/env python3
"""
Depol System Core
Scenario runner behind the depol command line

Every run writes its artifacts (CSV with 17 significant digits and LF line
endings, JSON reports) into one output workspace and returns
(report, exit_code) with the contract 0 pass, 1 invariant violation,
2 regime or fit warning.
"""

import json
import logging
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

# Add project root to sys.path
PROJECT_ROOT = Path(__file__).parent
sys.path.append(str(PROJECT_ROOT))

from modules.decay_fit import fit_decay_rate
from modules.fock_algebra import stokes_matrices
from modules.lindblad_depolarizer import evolve, generator_spectrum
from modules.micro_reservoir import validate_adiabatic
from modules.polarization_metrics import (
    TRAJECTORY_COLUMNS, rate_claims, trajectory, uncertainty_check,
)
from modules.scenario_config import ConfigError, ScenarioConfig
from modules.sphere_phase_space import (
    DEFAULT_KAPPA, EulerGrid, SphereGrid, calibrate_exponents, depolarization_measure,
    dipole_moments_from_multipoles, fock_multipole_series, group_multipole_transform,
    multipole_transform, propagate_multipoles, q_squared_norm, su2_q_group, su2_q_sphere,
)

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_VIOLATION = 1
EXIT_REGIME = 2

ALGEBRA_TOL = 1e-10
ALGEBRA_MAX_N = 16
INVARIANT_TOL = 1e-9
ORACLE_TOL = 1e-8
MIN_CALIBRATION_TIMES = 6

Report = Dict[str, Any]


def _jsonable(value: Any) -> Any:
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, complex):
        return [value.real, value.imag]
    raise TypeError(f"cannot serialize {type(value).__name__}")


def format_number(value: float) -> str:
    return f"{float(value):.17g}"


class DepolarizationSystem:
    VERSION = "1.0.0"

    def __init__(self, output_dir: Optional[str] = None, threads: Optional[int] = None):
        self.workspace = Path(output_dir) if output_dir else Path.cwd() / "depol_out"
        self.workspace.mkdir(parents=True, exist_ok=True)
        self.threads = threads

    # -- artifact writers -------------------------------------------------

    def write_json(self, name: str, payload: Any) -> Path:
        path = self.workspace / name
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            json.dump(payload, f, ensure_ascii=False, indent=2, default=_jsonable)
            f.write('\n')
        return path

    def write_csv(self, name: str, header: Sequence[str], rows: Sequence[Sequence[float]]) -> Path:
        path = self.workspace / name
        lines = [','.join(header)]
        lines.extend(','.join(format_number(v) for v in row) for row in rows)
        with open(path, 'w', encoding='utf-8', newline='\n') as f:
            f.write('\n'.join(lines) + '\n')
        return path

    # -- commands ---------------------------------------------------------

    def algebra_check(self, n_max: int, inject_fault: bool = False) -> Tuple[Report, int]:
        """Commutators, Casimir and ladder identities for every block N <= n_max"""
        if not 0 <= n_max <= ALGEBRA_MAX_N:
            raise ValueError(f"n_max must lie in [0, {ALGEBRA_MAX_N}], got {n_max}")

        blocks = []
        for N in range(n_max + 1):
            m = stokes_matrices(N)
            s1, s2, s3 = m.S1, m.S2, m.S3.copy()
            if inject_fault and N == n_max:
                s3[0, 0] += 1e-3
            eye = np.eye(N + 1)
            residuals = {
                '[S1,S2]-2iS3': np.max(np.abs(s1 @ s2 - s2 @ s1 - 2j * s3)),
                '[S2,S3]-2iS1': np.max(np.abs(s2 @ s3 - s3 @ s2 - 2j * s1)),
                '[S3,S1]-2iS2': np.max(np.abs(s3 @ s1 - s1 @ s3 - 2j * s2)),
                'casimir': np.max(np.abs(s1 @ s1 + s2 @ s2 + s3 @ s3 - N * (N + 2) * eye)),
                'S0': np.max(np.abs(m.S0 - N * eye)),
                'S1=(S+ + S-)/2': np.max(np.abs(s1 - (m.Splus + m.Sminus) / 2)),
                'S2=(S+ - S-)/2i': np.max(np.abs(s2 - (m.Splus - m.Sminus) / 2j)),
            }
            blocks.append({'N': N, 'residuals': {k: float(v) for k, v in residuals.items()}})

        worst = max(max(b['residuals'].values()) for b in blocks)
        passed = worst <= ALGEBRA_TOL
        report = {'command': 'algebra-check', 'n_max': n_max, 'tolerance': ALGEBRA_TOL,
                  'max_residual': worst, 'passed': passed, 'inject_fault': inject_fault,
                  'blocks': blocks}
        if not passed:
            logger.error("algebra check failed: max residual %.3e", worst)
        self.write_json('algebra_check.json', report)
        return report, EXIT_PASS if passed else EXIT_VIOLATION

    def evolve(self, config: ScenarioConfig) -> Tuple[Report, int]:
        """Trajectory CSV plus summary JSON with fitted and predicted rates"""
        state = config.initial()
        state.validate(tol=INVARIANT_TOL)
        times = config.times()
        record = trajectory(state, times, config.rates, method=config.method,
                            threads=self.threads, metadata={'seed': config.seed})
        self.write_csv('trajectory.csv', TRAJECTORY_COLUMNS, record.rows())

        problems = record.check_invariants(INVARIANT_TOL)
        for t in times:
            lhs, rhs, holds = uncertainty_check(evolve(state, float(t), config.rates,
                                                       method=config.method, threads=self.threads))
            if not holds:
                problems.append(f"uncertainty relation fails at t={t}: {lhs} < {rhs}")

        fits = {}
        for name in ('s1', 's2', 's3', 'dop'):
            values = np.abs(getattr(record, name))
            if values.size >= 4 and np.all(values > 1e-300) and np.max(values) > 1e-12:
                fits[name] = fit_decay_rate(record.times, values).to_dict()
            else:
                fits[name] = None

        spectrum = {}
        for N, Np in state.pairs():
            if N <= Np:
                values = generator_spectrum(N, Np, config.rates)
                spectrum[f"{N},{Np}"] = sorted({round(float(-v.real), 12) for v in values})

        summary = {
            'command': 'evolve',
            'scenario': config.to_dict(),
            'samples': len(record.times),
            'discarded_weight': state.metadata.get('discarded_weight', 0.0),
            'fitted_rates': fits,
            'generator_rates': spectrum,
            'rate_claims': rate_claims(config.rates),
            'final': {name: getattr(record, name)[-1] for name in ('s0', 'dop', 'purity')},
            'problems': problems,
            'passed': not problems,
        }
        self.write_json('summary.json', summary)
        return summary, EXIT_PASS if not problems else EXIT_VIOLATION

    def sphere(self, config: ScenarioConfig) -> Tuple[Report, int]:
        """Per-block Q grids and multipoles: Fock oracle against the analytic propagator"""
        state = config.initial()
        times = [float(t) for t in config.times()]
        s_max = config.sphere_band_limit()
        labels = state.diagonal_labels()
        if labels and max(labels) > s_max:
            raise ConfigError('outputs.sphere.s_max',
                              f"band limit {s_max} below the largest block {max(labels)}")

        grid = SphereGrid.build(s_max)
        theta, phi = grid.mesh()
        evolved = [evolve(state, t, config.rates, method=config.method, threads=self.threads)
                   for t in times]

        blocks: List[Report] = []
        problems = []
        for N in labels:
            initial = multipole_transform(su2_q_sphere(evolved[0].blocks[(N, N)], grid), grid, s_max)
            entries = []
            previous_measure = math.inf
            for i, (t, current) in enumerate(zip(times, evolved)):
                rho = current.blocks[(N, N)]
                q = su2_q_sphere(rho, grid)
                self.write_csv(f"sphere_N{N}_t{i}.csv", ('theta', 'phi', 'q'),
                               list(zip(theta.ravel(), phi.ravel(), q.ravel())))
                oracle = multipole_transform(q, grid, s_max)
                analytic = propagate_multipoles(initial, t - times[0], config.rates, DEFAULT_KAPPA)
                discrepancy = oracle.max_difference(analytic)
                measure = depolarization_measure(initial, config.rates, DEFAULT_KAPPA, t - times[0])
                q_norm = q_squared_norm(q, grid)
                stokes = stokes_matrices(N)
                direct = [float(np.trace(rho @ op).real) for op in (stokes.S1, stokes.S2, stokes.S3)]
                dipole = dipole_moments_from_multipoles(oracle, N) if s_max >= 1 else tuple(direct)
                dipole_error = max(abs(a - b) for a, b in zip(dipole, direct))

                if discrepancy > ORACLE_TOL * max(1.0, initial.max_abs()):
                    problems.append(f"block {N}, t={t}: propagator discrepancy {discrepancy:.3e}")
                if abs(measure - q_norm) > ORACLE_TOL * max(q_norm, 1.0):
                    problems.append(f"block {N}, t={t}: measure {measure} vs Q norm {q_norm}")
                if measure > previous_measure + INVARIANT_TOL:
                    problems.append(f"block {N}, t={t}: measure increased")
                if dipole_error > ORACLE_TOL:
                    problems.append(f"block {N}, t={t}: dipole moments off by {dipole_error:.3e}")
                previous_measure = measure

                entries.append({
                    't': t,
                    'oracle': oracle.to_records(),
                    'analytic': analytic.to_records(),
                    'discrepancy': discrepancy,
                    'measure': measure,
                    'q_squared_norm': q_norm,
                    'dipole_moments': list(dipole),
                    'stokes_moments': direct,
                })
            blocks.append({'N': N, 'weight': float(np.trace(state.blocks[(N, N)]).real),
                           'times': entries})

        report = {'command': 'sphere', 's_max': s_max, 'kappa': list(DEFAULT_KAPPA), 'blocks': blocks}
        if (config.outputs.get('sphere') or {}).get('group'):
            report['group'] = self._group_equivalence(config, state, evolved, times, problems)
        report['max_discrepancy'] = max(
            [e['discrepancy'] for b in blocks for e in b['times']]
            + [e['discrepancy'] for e in report.get('group', {}).get('times', [])] + [0.0])
        report['problems'] = problems
        report['passed'] = not problems
        self.write_json('multipoles.json', report)
        return report, EXIT_PASS if not problems else EXIT_VIOLATION

    def _group_equivalence(self, config, state, evolved, times, problems) -> Report:
        s_max = max(config.sphere_band_limit(), state.n_max)
        grid = EulerGrid.build(s_max)
        initial = group_multipole_transform(su2_q_group(evolved[0], grid), grid, s_max)
        entries = []
        for t, current in zip(times, evolved):
            oracle = group_multipole_transform(su2_q_group(current, grid), grid, s_max)
            analytic = propagate_multipoles(initial, t - times[0], config.rates, DEFAULT_KAPPA)
            discrepancy = oracle.max_difference(analytic)
            if discrepancy > ORACLE_TOL * max(1.0, initial.max_abs()):
                problems.append(f"group, t={t}: propagator discrepancy {discrepancy:.3e}")
            entries.append({'t': t, 'discrepancy': discrepancy,
                            'measure': depolarization_measure(initial, config.rates, DEFAULT_KAPPA,
                                                              t - times[0])})
        return {'s_max': s_max, 'times': entries}

    def calibrate(self, config: ScenarioConfig) -> Tuple[Report, int]:
        """Least-squares (k1, k2) from Fock-evolved Q multipoles"""
        state = config.initial()
        times = [float(t) for t in config.times()]
        if len(times) < MIN_CALIBRATION_TIMES:
            raise ConfigError('time_grid.points',
                              f"calibration needs at least {MIN_CALIBRATION_TIMES} times")
        group = any(N != Np for N, Np in state.pairs())
        s_max = max(config.sphere_band_limit(), state.n_max) if group else config.sphere_band_limit()
        series = fock_multipole_series(state, times, config.rates, s_max=s_max, group=group)
        result = calibrate_exponents(series)

        expected_k1, expected_k2 = DEFAULT_KAPPA
        report = {
            'command': 'calibrate',
            **result.to_dict(),
            'group': group,
            'expected': {'k1': expected_k1, 'k2': expected_k2},
            'k1_agrees': None if result.k1 is None else abs(result.k1 - expected_k1) <= 1e-6,
            'k2_agrees': abs(result.k2 - expected_k2) <= 1e-6,
            'rate_claims': rate_claims(config.rates),
        }
        report['passed'] = report['k2_agrees'] and report['k1_agrees'] is not False
        self.write_json('kappa.json', report)
        if not report['passed']:
            logger.warning("calibrated exponents k1=%s k2=%s disagree with (%s, %s)",
                           result.k1, result.k2, expected_k1, expected_k2)
        return report, EXIT_PASS if report['passed'] else EXIT_VIOLATION

    def micro_validate(self, config: ScenarioConfig) -> Tuple[Report, int]:
        """Fitted field dephasing of the atom model against the effective rate"""
        if not config.atoms:
            raise ConfigError('atoms', "micro-validate needs at least one atom")
        micro = config.micro
        report = validate_adiabatic(config.atoms, n_max=int(micro.get('n_max', 2)),
                                    sim_times=micro.get('sim_times'), seed=config.seed)
        report['command'] = 'micro-validate'
        self.write_json('micro_report.json', report)

        if report['non_exponential'] or report['regime_violation'] or report['population_leak']:
            return report, EXIT_REGIME
        return report, EXIT_PASS if report['within_window'] else EXIT_VIOLATION


def get_system(output_dir: Optional[str] = None, threads: Optional[int] = None) -> DepolarizationSystem:
    return DepolarizationSystem(output_dir, threads)
