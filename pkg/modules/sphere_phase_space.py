#!/usr/bin/env python3
"""
Depol Module F: Sphere Phase Space
Husimi Q functions on the Poincare sphere and their multipole dynamics

Every multipole channel (S, m, m') of a phase-space distribution decays on
its own under the depolarizing equation:

    c^S_{m m'}(t) = c^S_{m m'}(0) exp{[-k2 gamma (S(S+1) - m^2) - k1 Gamma m'^2] t}

with (k1, k2) = (4, 8).

Features:
- Gauss-Legendre sphere grids and Euler-angle grids (psi over [0, 4pi))
- Q functions per block (sphere) and per two-mode state (full group)
- Orthonormal multipole transforms, reconstruction, propagation
- Exponent calibration against Fock-space evolution
- Point-mass coefficients and the depolarization measure D(t)

Coefficients are plain inner products with orthonormal functions
(Y_{Sm} on the sphere, sqrt((2S+1)/V) D^S_{m m'}(-phi, theta, psi) on the group).
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import gammaln, roots_legendre

from .fock_algebra import TwoModeState, su2_coherent_state
from .lindblad_depolarizer import DepolarizerRates, evolve
from .wigner_functions import projections, spherical_harmonic, spin_labels, wigner_d

logger = logging.getLogger(__name__)

DEFAULT_KAPPA = (4.0, 8.0)

Channel = Tuple[float, float, float]


class DegenerateDesignError(ValueError):
    """Calibration data cannot identify the decay exponents"""


@dataclass(frozen=True)
class SphereGrid:
    """Gauss-Legendre nodes in cos(theta) times uniform phi nodes"""
    s_max: int
    theta: np.ndarray
    phi: np.ndarray
    weights: np.ndarray  # shape (n_theta, n_phi), sums to 4 pi

    @classmethod
    def build(cls, s_max: int) -> 'SphereGrid':
        if s_max < 0:
            raise ValueError(f"band limit must be non-negative, got {s_max}")
        nodes, gl_weights = roots_legendre(2 * (s_max + 1))
        n_phi = 2 * s_max + 1
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        weights = np.outer(gl_weights, np.full(n_phi, 2.0 * np.pi / n_phi))
        return cls(s_max=s_max, theta=np.arccos(nodes), phi=phi, weights=weights)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.theta, self.phi, indexing='ij')

    def integrate(self, samples: np.ndarray) -> complex:
        return np.sum(self.weights * samples)


@dataclass(frozen=True)
class EulerGrid:
    """Gauss-Legendre theta nodes with uniform phi in [0, 2pi) and psi in [0, psi_period)"""
    s_max: float
    theta: np.ndarray
    phi: np.ndarray
    psi: np.ndarray
    weights: np.ndarray  # shape (n_theta, n_phi, n_psi)
    psi_period: float

    @classmethod
    def build(cls, s_max: float, psi_period: float = 4.0 * np.pi) -> 'EulerGrid':
        if s_max < 0:
            raise ValueError(f"band limit must be non-negative, got {s_max}")
        nodes, gl_weights = roots_legendre(2 * (int(math.ceil(s_max)) + 1))
        n_phi = int(round(2 * s_max)) + 1
        n_psi = int(round(4 * s_max)) + 1
        phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
        psi = psi_period * np.arange(n_psi) / n_psi
        weights = (gl_weights[:, None, None]
                   * np.full((1, n_phi, 1), 2.0 * np.pi / n_phi)
                   * np.full((1, 1, n_psi), psi_period / n_psi))
        return cls(s_max=s_max, theta=np.arccos(nodes), phi=phi, psi=psi,
                   weights=weights, psi_period=psi_period)

    @property
    def volume(self) -> float:
        return 4.0 * np.pi * self.psi_period

    def mesh(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(phi, theta, psi) arrays of shape (n_theta, n_phi, n_psi)"""
        theta, phi, psi = np.meshgrid(self.theta, self.phi, self.psi, indexing='ij')
        return phi, theta, psi

    def integrate(self, samples: np.ndarray) -> complex:
        return np.sum(self.weights * samples)


@dataclass
class MultipoleCoefficients:
    """Coefficients c^S_{m m'} of a distribution (orthonormal convention)"""
    s_max: float
    entries: Dict[Channel, complex] = field(default_factory=dict)
    psi_integrated: bool = True
    volume: float = 4.0 * np.pi

    def __post_init__(self):
        if self.psi_integrated and any(mp != 0 for _, _, mp in self.entries):
            raise ValueError("psi-integrated coefficients carry m' = 0 entries only")

    def get(self, S: float, m: float, mp: float = 0.0) -> complex:
        return self.entries.get((float(S), float(m), float(mp)), 0j)

    def channels(self) -> List[Channel]:
        return sorted(self.entries)

    def max_abs(self) -> float:
        return max((abs(v) for v in self.entries.values()), default=0.0)

    def max_difference(self, other: 'MultipoleCoefficients') -> float:
        keys = set(self.entries) | set(other.entries)
        return max((abs(self.entries.get(k, 0j) - other.entries.get(k, 0j)) for k in keys),
                   default=0.0)

    def to_records(self, d_normalized: bool = False) -> List[Dict[str, float]]:
        records = []
        for S, m, mp in self.channels():
            value = self.entries[(S, m, mp)]
            if d_normalized:
                value = value * d_normalization_factor(S, self)
            records.append({'S': S, 'm': m, 'mp': mp, 'c_re': float(value.real),
                            'c_im': float(value.imag)})
        return records


def d_normalization_factor(S: float, coefficients: MultipoleCoefficients) -> float:
    """Orthonormal -> expansion coefficients of unnormalized Y/sqrt(4pi/(2S+1)) or D"""
    return math.sqrt((2 * S + 1) / coefficients.volume)


@dataclass
class MultipoleSeries:
    """Multipole coefficients sampled along one evolution"""
    times: List[float]
    coefficients: List[MultipoleCoefficients]
    rates: DepolarizerRates
    metadata: Dict[str, Any] = field(default_factory=dict)


@dataclass
class CalibrationResult:
    """Least-squares decay exponents"""
    k1: Optional[float]
    k2: float
    residual: float
    channels: int
    rows: int

    def to_dict(self) -> Dict[str, Any]:
        return {'k1': self.k1, 'k2': self.k2, 'residual': self.residual,
                'channels': self.channels, 'rows': self.rows}


# -- Q functions ----------------------------------------------------------

def _coherent_grid_amplitudes(N: int, theta: np.ndarray, phi: np.ndarray,
                              psi: Union[np.ndarray, float] = 0.0) -> np.ndarray:
    """SU(2) coherent amplitudes on a mesh, trailing axis k = 0..N"""
    k = np.arange(N + 1)
    binom = np.exp(0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)))
    half = np.asarray(theta)[..., None] / 2.0
    magnitude = binom * np.cos(half) ** k * np.sin(half) ** (N - k)
    phase = np.exp(1j * np.asarray(phi)[..., None] * (k - N / 2.0)
                   - 0.5j * N * np.asarray(psi)[..., None])
    return magnitude * phase


def _block_label(rho: np.ndarray) -> int:
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"block state must be square, got {rho.shape}")
    return rho.shape[0] - 1


def su2_q_sphere(block_state: Union[np.ndarray, TwoModeState], grid: SphereGrid) -> np.ndarray:
    """Q_N(theta, phi) = (N+1)/(4pi) <N;theta,phi|rho|N;theta,phi> on the grid.

    A TwoModeState contributes the sum of its diagonal-block Q functions.
    """
    if isinstance(block_state, TwoModeState):
        theta, phi = grid.mesh()
        total = np.zeros_like(theta)
        for N in block_state.diagonal_labels():
            total += su2_q_sphere(block_state.blocks[(N, N)], grid)
        return total

    rho = np.asarray(block_state, dtype=complex)
    N = _block_label(rho)
    if not np.allclose(rho, rho.conj().T, atol=1e-12):
        raise ValueError("block state is not Hermitian")
    theta, phi = grid.mesh()
    amplitudes = _coherent_grid_amplitudes(N, theta, phi)
    values = np.einsum('...k,kl,...l->...', amplitudes.conj(), rho, amplitudes)
    return (N + 1) / (4.0 * np.pi) * values.real


def su2_q_group(state: TwoModeState, grid: EulerGrid, radius: float = 1.0) -> np.ndarray:
    """Two-mode Husimi function <alpha|rho|alpha>/pi^2 on the shell |alpha| = radius"""
    phi, theta, psi = grid.mesh()
    amplitudes = {}
    for N in range(state.n_max + 1):
        scale = math.exp(N * math.log(radius) - 0.5 * math.lgamma(N + 1)) if radius > 0 else float(N == 0)
        amplitudes[N] = scale * _coherent_grid_amplitudes(N, theta, phi, psi)

    total = np.zeros(theta.shape, dtype=complex)
    for (N, Np), rho in state.blocks.items():
        total += np.einsum('...k,kl,...l->...', amplitudes[N].conj(), rho, amplitudes[Np])
    return math.exp(-radius ** 2) / np.pi ** 2 * total.real


# -- transforms -------------------------------------------------------------

def multipole_transform(samples: np.ndarray, grid: SphereGrid, s_max: int) -> MultipoleCoefficients:
    """c_{S m} = <Y_{S m}, f> for S <= s_max (psi-integrated)"""
    if s_max > grid.s_max:
        raise ValueError(f"band limit {s_max} exceeds the grid's {grid.s_max}")
    theta, phi = grid.mesh()
    weighted = grid.weights * samples
    entries = {}
    for S in range(s_max + 1):
        for m in range(-S, S + 1):
            value = np.sum(np.conj(spherical_harmonic(S, m, theta, phi)) * weighted)
            entries[(float(S), float(m), 0.0)] = complex(value)
    return MultipoleCoefficients(s_max=s_max, entries=entries, psi_integrated=True,
                                 volume=4.0 * np.pi)


def group_multipole_transform(samples: np.ndarray, grid: EulerGrid,
                              s_max: float) -> MultipoleCoefficients:
    """c^S_{m m'} over integer and half-integer S.

    Basis sqrt((2S+1)/V) e^{i m phi} d^S_{m m'}(theta) e^{-i m' psi}, i.e. D^S_{m m'}
    at (-phi, theta, psi), the orientation the coherent amplitudes are built with.
    Its m' = 0 column is proportional to Y_{S m}.
    """
    if s_max > grid.s_max:
        raise ValueError(f"band limit {s_max} exceeds the grid's {grid.s_max}")
    weighted = grid.weights * samples
    half_integers = abs(grid.psi_period - 4.0 * np.pi) < 1e-12
    entries = {}
    for S in spin_labels(s_max, half_integers=half_integers):
        ms = np.array(projections(S))
        phi_phase = np.exp(-1j * np.outer(ms, grid.phi))  # (m, phi)
        psi_phase = np.exp(1j * np.outer(ms, grid.psi))   # (m', psi)
        # sum over phi and psi first: F[theta, m, m']
        fourier = np.einsum('mp,tpq,nq->tmn', phi_phase, weighted, psi_phase)
        norm = math.sqrt((2 * S + 1) / grid.volume)
        for i, m in enumerate(ms):
            for j, mp in enumerate(ms):
                d = wigner_d(S, m, mp, grid.theta)
                entries[(S, float(m), float(mp))] = complex(norm * np.sum(d * fourier[:, i, j]))
    return MultipoleCoefficients(s_max=s_max, entries=entries, psi_integrated=False,
                                 volume=grid.volume)


def evaluate_multipoles(c: MultipoleCoefficients, phi: np.ndarray, theta: np.ndarray,
                        psi: Union[np.ndarray, float] = 0.0) -> np.ndarray:
    """Reconstruct the distribution at the given angles"""
    phi, theta = np.asarray(phi, dtype=float), np.asarray(theta, dtype=float)
    total = np.zeros(np.broadcast(phi, theta, np.asarray(psi)).shape, dtype=complex)
    for (S, m, mp), value in c.entries.items():
        if c.psi_integrated:
            total = total + value * spherical_harmonic(int(S), int(m), theta, phi)
        else:
            total = total + (value * math.sqrt((2 * S + 1) / c.volume)
                             * np.exp(1j * m * phi) * wigner_d(S, m, mp, theta)
                             * np.exp(-1j * mp * np.asarray(psi, dtype=float)))
    return total


# -- dynamics ---------------------------------------------------------------

def channel_exponent(S: float, m: float, mp: float, rates: DepolarizerRates,
                     kappa: Tuple[float, float] = DEFAULT_KAPPA) -> float:
    """Decay exponent of one multipole channel (<= 0)"""
    k1, k2 = kappa
    return -k2 * rates.gamma * (S * (S + 1) - m * m) - k1 * rates.gamma0 * mp * mp


def propagate_multipoles(c: MultipoleCoefficients, t: float, rates: DepolarizerRates,
                         kappa: Tuple[float, float] = DEFAULT_KAPPA) -> MultipoleCoefficients:
    """Diagonal exact propagator in the multipole basis"""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    entries = {channel: value * math.exp(channel_exponent(*channel, rates, kappa) * t)
               for channel, value in c.entries.items()}
    return MultipoleCoefficients(s_max=c.s_max, entries=entries,
                                 psi_integrated=c.psi_integrated, volume=c.volume)


def fock_multipole_series(state: TwoModeState, times: Sequence[float], rates: DepolarizerRates,
                          s_max: Optional[float] = None, group: bool = False,
                          radius: float = 1.0) -> MultipoleSeries:
    """Multipoles of Q(t) computed from Fock-space evolution"""
    s_max = state.n_max if s_max is None else s_max
    coefficients = []
    if group:
        grid = EulerGrid.build(s_max)
        for t in times:
            evolved = evolve(state, float(t), rates)
            coefficients.append(group_multipole_transform(su2_q_group(evolved, grid, radius), grid, s_max))
    else:
        grid = SphereGrid.build(int(s_max))
        for t in times:
            evolved = evolve(state, float(t), rates)
            coefficients.append(multipole_transform(su2_q_sphere(evolved, grid), grid, int(s_max)))
    return MultipoleSeries(times=[float(t) for t in times], coefficients=coefficients, rates=rates,
                           metadata={'group': group, 's_max': s_max, 'radius': radius})


def propagated_series(series: MultipoleSeries,
                      kappa: Tuple[float, float] = DEFAULT_KAPPA) -> List[MultipoleCoefficients]:
    """Analytic propagation of the first sample to every later time"""
    t0, c0 = series.times[0], series.coefficients[0]
    return [propagate_multipoles(c0, t - t0, series.rates, kappa) for t in series.times]


def calibrate_exponents(series: MultipoleSeries, relative_floor: float = 1e-6) -> CalibrationResult:
    """Least-squares (k1, k2) from log|c(t)/c(t0)| over all channels present.

    k1 is None when no channel carries m' != 0 (or Gamma = 0).
    """
    if len(series.times) < 2:
        raise DegenerateDesignError("need at least two sample times")
    rates = series.rates
    t0, c0 = series.times[0], series.coefficients[0]
    floor = relative_floor * c0.max_abs()

    design, target = [], []
    used = set()
    for channel, start in c0.entries.items():
        if abs(start) <= floor:
            continue
        S, m, mp = channel
        for t, sample in zip(series.times[1:], series.coefficients[1:]):
            value = sample.entries.get(channel, 0j)
            if abs(value) <= floor:
                continue
            dt = t - t0
            design.append([-rates.gamma0 * mp * mp * dt, -rates.gamma * (S * (S + 1) - m * m) * dt])
            target.append(math.log(abs(value / start)))
            used.add(channel)

    design = np.array(design, dtype=float).reshape(-1, 2)
    target = np.array(target, dtype=float)
    scale = np.max(np.abs(design), axis=0) if design.size else np.zeros(2)
    if scale[1] == 0:
        raise DegenerateDesignError("no decaying channel constrains k2")

    if scale[0] == 0:
        column = design[:, 1]
        k2 = float(np.dot(column, target) / np.dot(column, column))
        residual = float(np.linalg.norm(target - k2 * column))
        logger.info("calibration has no m' != 0 channel; k1 left unidentified")
        return CalibrationResult(k1=None, k2=k2, residual=residual, channels=len(used),
                                 rows=len(target))

    if np.linalg.matrix_rank(design / scale) < 2:
        raise DegenerateDesignError("channel set cannot separate k1 from k2")
    solution, *_ = np.linalg.lstsq(design, target, rcond=None)
    residual = float(np.linalg.norm(target - design @ solution))
    return CalibrationResult(k1=float(solution[0]), k2=float(solution[1]), residual=residual,
                             channels=len(used), rows=len(target))


# -- special distributions and measures ----------------------------------------

def pointmass_coefficients(theta0: float, phi0: float, psi0: float, s_max: float,
                           psi_period: float = 4.0 * np.pi) -> MultipoleCoefficients:
    """Band-limited point mass at (phi0, theta0, psi0): c = conj of the group basis at g0"""
    if s_max < 0:
        raise ValueError(f"band limit must be non-negative, got {s_max}")
    volume = 4.0 * np.pi * psi_period
    half_integers = abs(psi_period - 4.0 * np.pi) < 1e-12
    entries = {}
    for S in spin_labels(s_max, half_integers=half_integers):
        norm = math.sqrt((2 * S + 1) / volume)
        for m in projections(S):
            for mp in projections(S):
                value = (np.exp(1j * m * phi0) * wigner_d(S, m, mp, theta0)
                         * np.exp(-1j * mp * psi0))
                entries[(S, m, mp)] = complex(norm * np.conj(value))
    return MultipoleCoefficients(s_max=s_max, entries=entries, psi_integrated=False, volume=volume)


def depolarization_measure(c: MultipoleCoefficients, rates: DepolarizerRates,
                           kappa: Tuple[float, float] = DEFAULT_KAPPA, t: float = 0.0) -> float:
    """D(t) = sum |c|^2 exp(2 E t), the squared norm of the propagated distribution"""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    return float(sum(abs(value) ** 2 * math.exp(2.0 * channel_exponent(*channel, rates, kappa) * t)
                     for channel, value in c.entries.items()))


def q_squared_norm(samples: np.ndarray, grid: Union[SphereGrid, EulerGrid]) -> float:
    """Integral of Q^2 on the grid"""
    return float(np.real(grid.integrate(samples ** 2)))


@lru_cache(maxsize=None)
def dipole_scale(N: int) -> float:
    """<S3> / integral(cos(theta) Q_N), calibrated on the north-pole coherent state"""
    if N == 0:
        return 2.0
    grid = SphereGrid.build(N)
    north = su2_coherent_state(N, 0.0, 0.0, 0.0)
    c = multipole_transform(su2_q_sphere(north, grid), grid, 1)
    return float(N / (math.sqrt(4.0 * np.pi / 3.0) * c.get(1, 0).real))


def dipole_moments_from_multipoles(c: MultipoleCoefficients, N: int,
                                   scale: Optional[float] = None) -> Tuple[float, float, float]:
    """(<S1>, <S2>, <S3>) from the dipole channel of a block-N Q function"""
    if not c.psi_integrated:
        raise ValueError("dipole moments need psi-integrated coefficients")
    if any((1.0, float(m), 0.0) not in c.entries for m in (-1, 0, 1)):
        raise ValueError("coefficients carry no complete S=1 channel")
    scale = dipole_scale(N) if scale is None else scale
    s3 = scale * math.sqrt(4.0 * np.pi / 3.0) * c.get(1, 0).real
    # integral of sin(theta) e^{i phi} Q
    transverse = math.sqrt(8.0 * np.pi / 3.0) * c.get(1, -1)
    return float(scale * transverse.real), float(-scale * transverse.imag), float(s3)


def d_normalized(c: MultipoleCoefficients) -> MultipoleCoefficients:
    """Coefficients of the expansion over unnormalized D (or sqrt(4pi/(2S+1)) Y) functions"""
    entries = {channel: value * d_normalization_factor(channel[0], c) for channel, value in c.entries.items()}
    return MultipoleCoefficients(s_max=c.s_max, entries=entries, psi_integrated=c.psi_integrated,
                                 volume=c.volume)
