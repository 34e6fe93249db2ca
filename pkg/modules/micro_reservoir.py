#!/usr/bin/env python3
"""
Depol Module G: Micro Reservoir
Two field modes dispersively coupled to thermally damped two-level atoms

    H = omega (a+^ a+ + a-^ a-) + sum_a (omega_a/2) sz_a
        + sum_{a,l} (g_{al} s-_a a_l^ + h.c.),     g_{a,+-} = |g_a| e^{+-i phi_a/2}
    d rho/dt = -i[H, rho] + sum_a (gamma_a/2) {(nbar_a+1) L[s-_a] + nbar_a L[s+_a]} rho

Features:
- Full Hilbert space: field (total photons <= n_max) x 2^atoms
- Liouvillian exponential evolution (problem is stiff)
- Effective rate gamma = sum_a |g_a|^4 / (gamma_a Delta_a^2 nbar_a)
- Numerical check of the effective rate on the one-photon field coherence

Frames: omega defaults to 0, i.e. the frame rotating at the field frequency,
where omega_a = Delta_a. Excitation number is conserved so this is exact.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import expm

from .decay_fit import fit_decay_rate
from .fock_algebra import block_offsets
from .lindblad_depolarizer import DepolarizerRates, coherence_rate, default_threads, dissipator_superoperator

logger = logging.getLogger(__name__)

MAX_HILBERT_DIM = 4096
MAX_EXPM_DIM = 64          # Liouville space of 64^2 = 4096
FAR_OFF_RESONANCE = 0.2    # |g| / |Delta| at or below this is dispersive
LOW_NBAR = 10.0
POPULATION_TOL = 0.01       # one-photon population drift allowed in the dispersive regime
RATIO_WINDOW = (0.7, 1.3)
BOTH_ZERO = 'both zero'

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)  # |g><e|, basis (g, e)
SIGMA_Z = np.diag([-1.0, 1.0]).astype(complex)


class DimensionGuardError(ValueError):
    """Hilbert or Liouville space too large for dense evolution"""


@dataclass(frozen=True)
class AtomConfig:
    """One far-detuned atom with its own thermal reservoir"""
    g_abs: float
    detuning: float
    gamma_a: float
    nbar: float
    phase: float = 0.0

    def __post_init__(self):
        if self.g_abs < 0:
            raise ValueError(f"coupling magnitude must be non-negative, got {self.g_abs}")
        if self.gamma_a <= 0:
            raise ValueError(f"atomic damping must be positive, got {self.gamma_a}")
        if self.nbar < 0:
            raise ValueError(f"thermal occupation must be non-negative, got {self.nbar}")

    @property
    def far_off_resonance(self) -> bool:
        if self.detuning == 0:
            return False
        return self.g_abs / abs(self.detuning) <= FAR_OFF_RESONANCE

    @property
    def thermal_linewidth(self) -> float:
        """Half the total thermal flip rate, gamma_a (2 nbar + 1) / 2"""
        return self.gamma_a * (2.0 * self.nbar + 1.0) / 2.0

    @property
    def dispersive(self) -> bool:
        """Thermal linewidth well inside the detuning"""
        if self.detuning == 0:
            return False
        return self.thermal_linewidth / abs(self.detuning) <= FAR_OFF_RESONANCE

    def in_regime(self) -> bool:
        """Decoupled atoms are always fine; coupled ones need both conditions"""
        return self.g_abs == 0 or (self.far_off_resonance and self.dispersive)

    def couplings(self) -> Tuple[complex, complex]:
        """(g_{a+}, g_{a-})"""
        return (self.g_abs * np.exp(0.5j * self.phase), self.g_abs * np.exp(-0.5j * self.phase))

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'AtomConfig':
        return cls(g_abs=float(data['g_abs']), detuning=float(data['detuning']),
                   gamma_a=float(data['gamma_a']), nbar=float(data['nbar']),
                   phase=float(data.get('phase', 0.0)))


@dataclass
class MicroSystem:
    """Field + atoms Hamiltonian and dissipators in the joint basis (field, atom 1, atom 2, ...)"""
    atoms: List[AtomConfig]
    n_max: int
    omega: float
    hamiltonian: np.ndarray
    dissipators: List[Tuple[np.ndarray, float]]
    a_plus: np.ndarray
    a_minus: np.ndarray
    _liouvillian: Optional[np.ndarray] = field(default=None, repr=False)

    @property
    def field_dim(self) -> int:
        return (self.n_max + 1) * (self.n_max + 2) // 2

    @property
    def dims(self) -> List[int]:
        return [self.field_dim] + [2] * len(self.atoms)

    @property
    def dim(self) -> int:
        return self.field_dim * 2 ** len(self.atoms)

    def liouvillian(self) -> np.ndarray:
        """Row-major superoperator of the full master equation"""
        if self._liouvillian is None:
            if self.dim > MAX_EXPM_DIM:
                raise DimensionGuardError(f"Liouville space {self.dim}^2 exceeds {MAX_EXPM_DIM}^2")
            eye = np.eye(self.dim)
            matrix = -1j * (np.kron(self.hamiltonian, eye) - np.kron(eye, self.hamiltonian.T))
            for op, rate in self.dissipators:
                if rate > 0:
                    matrix = matrix + rate * dissipator_superoperator(op, op)
            self._liouvillian = matrix
        return self._liouvillian


def _embed(op: np.ndarray, position: int, dims: Sequence[int]) -> np.ndarray:
    factors = [op if i == position else np.eye(d) for i, d in enumerate(dims)]
    out = factors[0]
    for factor in factors[1:]:
        out = np.kron(out, factor)
    return out


def field_operators(n_max: int) -> Tuple[np.ndarray, np.ndarray]:
    """Annihilators (a+, a-) on the field space ordered like TwoModeState blocks"""
    offsets = block_offsets(n_max)
    dim = (n_max + 1) * (n_max + 2) // 2
    a_plus = np.zeros((dim, dim), dtype=complex)
    a_minus = np.zeros((dim, dim), dtype=complex)
    for N in range(1, n_max + 1):
        for k in range(N + 1):
            column = offsets[N] + k
            if k > 0:
                a_plus[offsets[N - 1] + k - 1, column] = math.sqrt(k)
            if k < N:
                a_minus[offsets[N - 1] + k, column] = math.sqrt(N - k)
    return a_plus, a_minus


def build_system(atoms: Sequence[AtomConfig], n_max: int = 2, omega: float = 0.0) -> MicroSystem:
    """Hamiltonian and dissipators of the field-atom model"""
    atoms = list(atoms)
    if not atoms:
        raise ValueError("need at least one atom")
    if n_max < 1:
        raise ValueError(f"n_max must be >= 1, got {n_max}")
    field_dim = (n_max + 1) * (n_max + 2) // 2
    dims = [field_dim] + [2] * len(atoms)
    total = int(np.prod(dims))
    if total > MAX_HILBERT_DIM:
        raise DimensionGuardError(f"Hilbert space {total} exceeds {MAX_HILBERT_DIM}")

    a_plus, a_minus = field_operators(n_max)
    ap, am = _embed(a_plus, 0, dims), _embed(a_minus, 0, dims)
    hamiltonian = omega * (ap.conj().T @ ap + am.conj().T @ am)

    dissipators = []
    for index, atom in enumerate(atoms, start=1):
        lower = _embed(SIGMA_MINUS, index, dims)
        hamiltonian = hamiltonian + 0.5 * (omega + atom.detuning) * _embed(SIGMA_Z, index, dims)
        g_plus, g_minus = atom.couplings()
        interaction = g_plus * lower @ ap.conj().T + g_minus * lower @ am.conj().T
        hamiltonian = hamiltonian + interaction + interaction.conj().T
        dissipators.append((lower, atom.gamma_a * (atom.nbar + 1.0) / 2.0))
        dissipators.append((lower.conj().T.copy(), atom.gamma_a * atom.nbar / 2.0))

    if not np.allclose(hamiltonian, hamiltonian.conj().T, atol=1e-12):
        raise ValueError("assembled Hamiltonian is not Hermitian")
    return MicroSystem(atoms=atoms, n_max=n_max, omega=omega, hamiltonian=hamiltonian,
                       dissipators=dissipators, a_plus=ap, a_minus=am)


def excitation_number_operator(system: MicroSystem) -> np.ndarray:
    """Photons plus excited atoms"""
    number = system.a_plus.conj().T @ system.a_plus + system.a_minus.conj().T @ system.a_minus
    excited = SIGMA_MINUS.conj().T @ SIGMA_MINUS
    for index in range(1, len(system.atoms) + 1):
        number = number + _embed(excited, index, system.dims)
    return number


def evolve_full(system: MicroSystem, rho0: np.ndarray, t: float) -> np.ndarray:
    """rho(t) = exp(t L) rho0 with the full Liouvillian"""
    rho0 = np.asarray(rho0, dtype=complex)
    if rho0.shape != (system.dim, system.dim):
        raise ValueError(f"expected a {system.dim}x{system.dim} density matrix, got {rho0.shape}")
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if t == 0:
        return rho0.copy()
    out = expm(system.liouvillian() * t) @ rho0.reshape(-1)
    return out.reshape(rho0.shape)


def _partial_trace(rho: np.ndarray, dims: Sequence[int], keep: int) -> np.ndarray:
    n = len(dims)
    tensor = rho.reshape(list(dims) + list(dims))
    for axis in reversed(range(n)):
        if axis == keep:
            continue
        current = tensor.ndim // 2
        tensor = np.trace(tensor, axis1=axis, axis2=axis + current)
    return tensor


def field_reduced_state(rho: np.ndarray, system: MicroSystem) -> np.ndarray:
    """Trace out every atom"""
    return _partial_trace(rho, system.dims, keep=0)


def atom_reduced_state(rho: np.ndarray, system: MicroSystem, index: int) -> np.ndarray:
    """Reduced state of atom `index` (0-based), basis (g, e)"""
    if not 0 <= index < len(system.atoms):
        raise ValueError(f"atom index {index} out of range")
    return _partial_trace(rho, system.dims, keep=index + 1)


def effective_gamma(atoms: Sequence[AtomConfig]) -> float:
    """gamma = sum_a |g_a|^4 / (gamma_a Delta_a^2 nbar_a), Delta_a per atom"""
    total = 0.0
    for atom in atoms:
        if atom.detuning == 0:
            raise ValueError("effective rate needs non-zero detuning")
        if atom.gamma_a <= 0:
            raise ValueError("effective rate needs non-zero atomic damping")
        if atom.nbar <= 0:
            raise ValueError("effective rate needs a thermal occupation nbar > 0")
        total += atom.g_abs ** 4 / (atom.gamma_a * atom.detuning ** 2 * atom.nbar)
    return total


def draw_phases(seed: Optional[int], count: int) -> np.ndarray:
    """Coupling phases uniform on [0, 2pi)"""
    rng = np.random.default_rng(seed)
    return rng.uniform(0.0, 2.0 * np.pi, size=count)


def initial_product_state(system: MicroSystem) -> np.ndarray:
    """Field (|1,1> + |1,0>)/sqrt(2) with every atom in 1/2"""
    offsets = block_offsets(system.n_max)
    vec = np.zeros(system.field_dim, dtype=complex)
    vec[offsets[1]] = vec[offsets[1] + 1] = 1.0 / math.sqrt(2.0)
    rho = np.outer(vec, vec.conj())
    for _ in system.atoms:
        rho = np.kron(rho, np.eye(2) / 2.0)
    return rho


def validate_adiabatic(atoms: Sequence[AtomConfig], n_max: int = 2,
                       sim_times: Optional[Sequence[float]] = None,
                       seed: Optional[int] = None) -> Dict[str, Any]:
    """Fit the one-photon field coherence decay and compare with the effective rate"""
    atoms = list(atoms)
    warnings = []
    if seed is not None:
        phases = draw_phases(seed, len(atoms))
        atoms = [replace(atom, phase=float(phase)) for atom, phase in zip(atoms, phases)]
    coupled = [atom for atom in atoms if atom.g_abs > 0]
    if not all(atom.far_off_resonance for atom in coupled):
        warnings.append(f"coupling exceeds {FAR_OFF_RESONANCE} of the detuning")
    if not all(atom.dispersive for atom in coupled):
        warnings.append(f"thermal linewidth gamma_a (2 nbar + 1) / 2 exceeds {FAR_OFF_RESONANCE} "
                        f"of the detuning; real absorption competes with dephasing")
    regime_violation = not all(atom.in_regime() for atom in atoms)
    if any(atom.nbar < LOW_NBAR for atom in atoms):
        warnings.append(f"thermal occupation below {LOW_NBAR}")
    for message in warnings:
        logger.warning(message)

    gamma = effective_gamma(atoms)
    predicted = coherence_rate(DepolarizerRates.from_reservoir(gamma))
    if sim_times is None:
        horizon = 2.0 / predicted if predicted > 0 else 1.0
        sim_times = np.linspace(0.0, horizon, 9)
    times = [float(t) for t in sim_times]

    system = build_system(atoms, n_max=n_max)
    rho0 = initial_product_state(system)
    offsets = block_offsets(n_max)
    one, zero = offsets[1] + 1, offsets[1]
    coherence, populations, atom_excited = [], [], []
    for t in times:
        rho = evolve_full(system, rho0, t)
        field_rho = field_reduced_state(rho, system)
        coherence.append(abs(field_rho[one, zero]))
        populations.append(float((field_rho[one, one] + field_rho[zero, zero]).real))
        atom_excited.append([float(atom_reduced_state(rho, system, i)[1, 1].real)
                             for i in range(len(atoms))])

    population_drift = max(abs(p - populations[0]) for p in populations)
    population_leak = population_drift > POPULATION_TOL
    if population_leak:
        message = (f"one-photon population drifted by {population_drift:.3g} "
                   f"(> {POPULATION_TOL}); the field is exchanging photons with the atoms")
        logger.warning(message)
        warnings.append(message)

    fit = fit_decay_rate(times, coherence)
    fitted = fit.rate
    if predicted == 0 and abs(fitted) < 1e-9:
        ratio: Any = BOTH_ZERO
        within = True
    elif predicted == 0:
        ratio, within = None, False
    else:
        ratio = fitted / predicted
        within = RATIO_WINDOW[0] <= ratio <= RATIO_WINDOW[1]

    return {
        'atoms': [atom.to_dict() for atom in atoms],
        'n_max': n_max,
        'seed': seed,
        'gamma_predicted': gamma,
        'rate_predicted': predicted,
        'rate_fitted': fitted,
        'ratio': ratio,
        'relative_error': abs(ratio - 1.0) if isinstance(ratio, float) else None,
        'within_window': within,
        'residual': fit.residual,
        'relative_residual': fit.relative_residual,
        'non_exponential': fit.non_exponential,
        'regime_violation': regime_violation,
        'population_drift': population_drift,
        'population_leak': population_leak,
        'times': times,
        'coherence': coherence,
        'one_photon_population': populations,
        'atom_excited_population': atom_excited,
        'warnings': warnings,
    }


def detuning_sweep(atom: AtomConfig, detuning_ratios: Sequence[float], n_max: int = 2,
                   seed: Optional[int] = None, threads: Optional[int] = None) -> List[Dict[str, Any]]:
    """validate_adiabatic at |Delta/g| = ratio for each ratio, in input order"""
    if atom.g_abs == 0:
        raise ValueError("a detuning sweep needs a non-zero coupling")

    def run(ratio: float) -> Dict[str, Any]:
        return validate_adiabatic([replace(atom, detuning=ratio * atom.g_abs)], n_max=n_max, seed=seed)

    workers = threads or default_threads()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, detuning_ratios))
    return [run(ratio) for ratio in detuning_ratios]
