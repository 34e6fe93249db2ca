#!/usr/bin/env python3
"""
Depol Module D: Polarization Metrics
Stokes moments, degree of polarization, uncertainty check, purity

Features:
- First and second Stokes moments of TwoModeState
- Degree of polarization P = |<S>| / <S0> (0 at <S0> = 0)
- One-photon Bloch vector and its analytic decay law
- Trajectory records sampled on linear or log time grids
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .fock_algebra import TwoModeState, expectation, stokes_family, stokes_matrices
from .lindblad_depolarizer import DepolarizerRates, coherence_rate, evolve, generator_spectrum

logger = logging.getLogger(__name__)

UNCERTAINTY_TOL = 1e-9
BLOCH_TOL = 1e-9

TRAJECTORY_COLUMNS = ('t', 's0', 's1', 's2', 's3', 'dop', 'purity')


@dataclass(frozen=True)
class BlochRecord:
    """One-photon Bloch vector r, rho_1 = (1 + r.sigma)/2 with sigma = (S1, S2, S3) on block 1"""
    x: float
    y: float
    z: float

    def __post_init__(self):
        if self.norm() > 1.0 + BLOCH_TOL:
            raise ValueError(f"Bloch vector {self.as_tuple()} is longer than 1")

    def norm(self) -> float:
        return math.sqrt(self.x ** 2 + self.y ** 2 + self.z ** 2)

    def as_tuple(self) -> Tuple[float, float, float]:
        return (self.x, self.y, self.z)


@dataclass
class Trajectory:
    """Time series of Stokes moments, degree of polarization and purity"""
    times: List[float] = field(default_factory=list)
    s0: List[float] = field(default_factory=list)
    s1: List[float] = field(default_factory=list)
    s2: List[float] = field(default_factory=list)
    s3: List[float] = field(default_factory=list)
    dop: List[float] = field(default_factory=list)
    purity: List[float] = field(default_factory=list)
    metadata: Dict[str, Any] = field(default_factory=dict)

    def append(self, t: float, state: TwoModeState) -> None:
        s0, s1, s2, s3 = stokes_moments(state)
        self.times.append(float(t))
        self.s0.append(s0)
        self.s1.append(s1)
        self.s2.append(s2)
        self.s3.append(s3)
        self.dop.append(degree_of_polarization(state))
        self.purity.append(purity(state))

    def rows(self) -> List[Tuple[float, ...]]:
        return list(zip(self.times, self.s0, self.s1, self.s2, self.s3, self.dop, self.purity))

    def check_invariants(self, tol: float = 1e-9) -> List[str]:
        """Violated Trajectory invariants, empty when all hold"""
        problems = []
        for i, (s0, s1, s2, s3, dop) in enumerate(zip(self.s0, self.s1, self.s2, self.s3, self.dop)):
            if s0 > 0:
                expected = math.sqrt(s1 ** 2 + s2 ** 2 + s3 ** 2) / s0
                if abs(expected - dop) > tol:
                    problems.append(f"dop mismatch at sample {i}")
            if not -tol <= dop <= 1.0 + tol:
                problems.append(f"dop {dop} outside [0, 1] at sample {i}")
        if self.s0 and max(self.s0) - min(self.s0) > tol:
            problems.append(f"s0 drifts by {max(self.s0) - min(self.s0):.3e}")
        return problems

    def to_dict(self) -> Dict[str, Any]:
        return {
            't': self.times, 's0': self.s0, 's1': self.s1, 's2': self.s2, 's3': self.s3,
            'dop': self.dop, 'purity': self.purity, 'metadata': self.metadata,
        }


def stokes_moments(state: TwoModeState) -> Tuple[float, float, float, float]:
    """(<S0>, <S1>, <S2>, <S3>)"""
    return tuple(float(expectation(state, stokes_family(name, state.n_max)).real)
                 for name in ('S0', 'S1', 'S2', 'S3'))


def degree_of_polarization(state: TwoModeState) -> float:
    s0, s1, s2, s3 = stokes_moments(state)
    if s0 <= 0:
        return 0.0
    return math.sqrt(s1 ** 2 + s2 ** 2 + s3 ** 2) / s0


def uncertainty_check(state: TwoModeState) -> Tuple[float, float, bool]:
    """((Delta S)^2, 2<S0>, (Delta S)^2 >= 2<S0>)"""
    lhs = 0.0
    for name in ('S1', 'S2', 'S3'):
        family = stokes_family(name, state.n_max)
        squares = {pair: op @ op for pair, op in family.items()}
        mean = expectation(state, family).real
        lhs += expectation(state, squares).real - mean ** 2
    rhs = 2.0 * stokes_moments(state)[0]
    return float(lhs), float(rhs), bool(lhs >= rhs - UNCERTAINTY_TOL)


def purity(state: TwoModeState) -> float:
    """Tr rho^2"""
    return float(sum(np.sum(np.abs(rho) ** 2) for rho in state.blocks.values()))


def bloch_record(state: TwoModeState) -> BlochRecord:
    """Bloch vector of the normalized one-photon block"""
    rho = state.blocks.get((1, 1))
    if rho is None:
        raise ValueError("state has no one-photon block")
    weight = float(np.trace(rho).real)
    stokes = stokes_matrices(1)
    x, y, z = (float(np.trace(rho @ op).real) / weight for op in (stokes.S1, stokes.S2, stokes.S3))
    return BlochRecord(x, y, z)


def bloch_to_state(record: BlochRecord) -> TwoModeState:
    """One-photon block (1 + x S1 + y S2 + z S3)/2"""
    stokes = stokes_matrices(1)
    rho = 0.5 * (np.eye(2) + record.x * stokes.S1 + record.y * stokes.S2 + record.z * stokes.S3)
    return TwoModeState.from_block(1, rho)


def one_photon_analytic(r0: BlochRecord, t: float, rates: DepolarizerRates,
                        calibration: Optional[float] = None) -> BlochRecord:
    """x, y decay at r_xy and z at 2 r_xy; r_xy defaults to the generator value"""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    r_xy = coherence_rate(rates) if calibration is None else calibration
    transverse = math.exp(-r_xy * t)
    return BlochRecord(r0.x * transverse, r0.y * transverse, r0.z * math.exp(-2.0 * r_xy * t))


def rate_claims(rates: DepolarizerRates) -> List[Dict[str, Any]]:
    """Decay rates quoted in closed form next to the generator eigenvalues"""
    gamma, gamma0 = rates.gamma, rates.gamma0

    def slowest(N: int, Np: int) -> float:
        spectrum = generator_spectrum(N, Np, rates)
        nonzero = spectrum[np.abs(spectrum) > 1e-12]
        return float(-np.max(nonzero.real)) if nonzero.size else 0.0

    one_photon = generator_spectrum(1, 1, rates)
    return [
        {'observable': 'bloch x,y', 'quoted': gamma, 'generator': coherence_rate(rates)},
        {'observable': 'bloch z', 'quoted': 2.0 * gamma, 'generator': float(-np.min(one_photon.real))},
        {'observable': '<S3>', 'quoted': 8.0 * gamma, 'generator': float(-np.min(one_photon.real))},
        {'observable': '<S+->', 'quoted': 2.0 * gamma + gamma0, 'generator': coherence_rate(rates)},
        {'observable': '<a+->', 'quoted': gamma + gamma0 / 4.0, 'generator': slowest(1, 0)},
        {'observable': '<a+-^2>', 'quoted': 2.0 * (gamma + gamma0), 'generator': slowest(2, 0)},
    ]


def time_grid(kind: str, t_min: float, t_max: float, points: int) -> np.ndarray:
    """Strictly increasing sample times; log grids need t_min > 0"""
    if points < 2:
        raise ValueError(f"a time grid needs at least 2 points, got {points}")
    if not t_max > t_min >= 0:
        raise ValueError(f"need 0 <= t_min < t_max, got {t_min}, {t_max}")
    if kind == 'linear':
        return np.linspace(t_min, t_max, points)
    if kind == 'log':
        if t_min <= 0:
            raise ValueError("log time grid needs t_min > 0")
        return np.geomspace(t_min, t_max, points)
    raise ValueError(f"unknown time grid kind {kind!r}")


def trajectory(state: TwoModeState, times: Sequence[float], rates: DepolarizerRates,
               method: str = 'exact-expm', threads: Optional[int] = None,
               metadata: Optional[Dict[str, Any]] = None) -> Trajectory:
    """Sample the depolarizing evolution of `state` at `times`"""
    record = Trajectory(metadata={'rates': rates.to_dict(), 'n_max': state.n_max,
                                  'method': method, **(metadata or {})})
    for t in times:
        record.append(t, evolve(state, float(t), rates, method=method, threads=threads))
    return record
