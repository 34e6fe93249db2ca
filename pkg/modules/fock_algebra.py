#!/usr/bin/env python3
"""
Depol Module A: Fock Polarization Algebra
Two-mode Fock blocks, Stokes matrices and standard initial states

Features:
- Block basis |N,k> = |k>_+ |N-k>_-, k ascending (k=0: all photons in the - mode)
- Stokes matrices S0..S3, S+/S- per block
- Block-pair density matrices (TwoModeState)
- Fock, SU(2)-coherent and two-mode quadrature-coherent states

Sphere convention:
- alpha_+ = r e^{ i(phi-psi)/2} cos(theta/2)
- alpha_- = r e^{-i(phi+psi)/2} sin(theta/2)
  so that <S+-> = N e^{-+i phi} sin(theta) on SU(2) coherent states.
"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
from scipy.special import gammaln

logger = logging.getLogger(__name__)

BlockPair = Tuple[int, int]
ObservableFamily = Dict[BlockPair, np.ndarray]

STOKES_NAMES = ('S0', 'S1', 'S2', 'S3', 'Splus', 'Sminus')

# Truncated weight above which two_mode_coherent_state warns
TRUNCATION_WARN = 1e-6


@dataclass(frozen=True)
class StokesMatrices:
    """Stokes operators restricted to the block of N photons"""
    N: int
    S0: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    S3: np.ndarray
    Splus: np.ndarray
    Sminus: np.ndarray

    @property
    def dim(self) -> int:
        return self.N + 1

    def as_dict(self) -> Dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in STOKES_NAMES}


def _frozen(matrix: np.ndarray) -> np.ndarray:
    matrix.setflags(write=False)
    return matrix


@lru_cache(maxsize=None)
def stokes_matrices(N: int) -> StokesMatrices:
    """Stokes matrices of block N in the k-ascending basis.

    <N,k+1|S+|N,k> = 2 sqrt((k+1)(N-k)),  S3|N,k> = 2(k - N/2)|N,k>.
    """
    if N < 0:
        raise ValueError(f"block label must be non-negative, got {N}")

    dim = N + 1
    k = np.arange(N)
    splus = np.zeros((dim, dim), dtype=complex)
    splus[k + 1, k] = 2.0 * np.sqrt((k + 1) * (N - k))
    sminus = splus.conj().T.copy()

    s3 = np.diag(2.0 * np.arange(dim) - N).astype(complex)
    s0 = N * np.eye(dim, dtype=complex)
    s1 = (splus + sminus) / 2
    s2 = (splus - sminus) / 2j

    return StokesMatrices(
        N=N,
        S0=_frozen(s0),
        S1=_frozen(s1),
        S2=_frozen(s2),
        S3=_frozen(s3),
        Splus=_frozen(splus),
        Sminus=_frozen(sminus),
    )


@dataclass(frozen=True)
class TwoModeState:
    """
    Two-mode density matrix stored as block pairs rho_{N,N'}.

    blocks[(N, N')] has shape (N+1, N'+1); missing pairs are zero blocks.
    Both (N, N') and (N', N) are stored for every populated coherence.
    """
    n_max: int
    blocks: Dict[BlockPair, np.ndarray]
    metadata: Dict[str, Any] = field(default_factory=dict)

    def block(self, N: int, Np: int) -> np.ndarray:
        if (N, Np) in self.blocks:
            return self.blocks[(N, Np)]
        return np.zeros((N + 1, Np + 1), dtype=complex)

    def pairs(self) -> Tuple[BlockPair, ...]:
        return tuple(sorted(self.blocks))

    def diagonal_labels(self) -> Tuple[int, ...]:
        return tuple(sorted(N for N, Np in self.blocks if N == Np))

    def block_weights(self) -> Dict[int, float]:
        """Photon-number distribution Tr rho_{N,N}"""
        return {N: float(np.real(np.trace(self.blocks[(N, N)])))
                for N in self.diagonal_labels()}

    def trace(self) -> float:
        return float(sum(self.block_weights().values()))

    @property
    def dim(self) -> int:
        return (self.n_max + 1) * (self.n_max + 2) // 2

    def to_full_matrix(self) -> np.ndarray:
        """Assemble the dense matrix on the truncated space (blocks ordered by N)"""
        offsets = block_offsets(self.n_max)
        full = np.zeros((self.dim, self.dim), dtype=complex)
        for (N, Np), rho in self.blocks.items():
            full[offsets[N]:offsets[N] + N + 1, offsets[Np]:offsets[Np] + Np + 1] = rho
        return full

    @classmethod
    def from_full_matrix(cls, matrix: np.ndarray, n_max: int, tol: float = 0.0,
                         metadata: Optional[Dict[str, Any]] = None) -> 'TwoModeState':
        offsets = block_offsets(n_max)
        dim = (n_max + 1) * (n_max + 2) // 2
        if matrix.shape != (dim, dim):
            raise ValueError(f"expected a {dim}x{dim} matrix for n_max={n_max}, got {matrix.shape}")
        blocks = {}
        for N in range(n_max + 1):
            for Np in range(n_max + 1):
                rho = matrix[offsets[N]:offsets[N] + N + 1, offsets[Np]:offsets[Np] + Np + 1]
                if np.max(np.abs(rho)) > tol:
                    blocks[(N, Np)] = np.array(rho, dtype=complex)
        return cls(n_max=n_max, blocks=blocks, metadata=dict(metadata or {}))

    @classmethod
    def from_block(cls, N: int, rho: np.ndarray, n_max: Optional[int] = None) -> 'TwoModeState':
        rho = np.asarray(rho, dtype=complex)
        if rho.shape != (N + 1, N + 1):
            raise ValueError(f"block {N} needs shape {(N + 1, N + 1)}, got {rho.shape}")
        return cls(n_max=N if n_max is None else n_max, blocks={(N, N): rho.copy()})

    @classmethod
    def from_pure(cls, amplitudes: Dict[int, np.ndarray], n_max: int,
                  metadata: Optional[Dict[str, Any]] = None) -> 'TwoModeState':
        """Projector onto sum_N |psi_N>, given per-block amplitude vectors"""
        blocks = {}
        for N, vec in amplitudes.items():
            for Np, vecp in amplitudes.items():
                blocks[(N, Np)] = np.outer(vec, np.conj(vecp))
        return cls(n_max=n_max, blocks=blocks, metadata=dict(metadata or {}))

    @classmethod
    def mixture(cls, components: Iterable[Tuple[float, 'TwoModeState']]) -> 'TwoModeState':
        components = list(components)
        n_max = max(state.n_max for _, state in components)
        blocks: Dict[BlockPair, np.ndarray] = {}
        for weight, state in components:
            for pair, rho in state.blocks.items():
                blocks[pair] = blocks.get(pair, 0) + weight * rho
        return cls(n_max=n_max, blocks=blocks)

    def validate(self, tol: float = 1e-10) -> None:
        """Raise ValueError unless Hermitian, unit trace and positive"""
        for (N, Np), rho in self.blocks.items():
            if N > self.n_max or Np > self.n_max:
                raise ValueError(f"block ({N}, {Np}) exceeds n_max={self.n_max}")
            if rho.shape != (N + 1, Np + 1):
                raise ValueError(f"block ({N}, {Np}) has shape {rho.shape}")
            if not np.allclose(self.block(Np, N), rho.conj().T, atol=tol):
                raise ValueError(f"block pair ({N}, {Np}) breaks Hermiticity")
        trace = self.trace()
        if abs(trace - 1.0) > tol:
            raise ValueError(f"trace is {trace!r}, expected 1")
        lowest = float(np.min(np.linalg.eigvalsh(self.to_full_matrix())))
        if lowest < -tol:
            raise ValueError(f"state is not positive (min eigenvalue {lowest:.3e})")


def block_offsets(n_max: int) -> Dict[int, int]:
    """Row offset of every block in the assembled matrix"""
    return {N: N * (N + 1) // 2 for N in range(n_max + 1)}


def fock_state(N: int, k: int, n_max: Optional[int] = None) -> TwoModeState:
    """|N,k><N,k|"""
    if not 0 <= k <= N:
        raise ValueError(f"k must lie in [0, {N}], got {k}")
    vec = np.zeros(N + 1, dtype=complex)
    vec[k] = 1.0
    return TwoModeState.from_pure({N: vec}, n_max=N if n_max is None else n_max)


def maximally_mixed(N: int, n_max: Optional[int] = None) -> TwoModeState:
    return TwoModeState.from_block(N, np.eye(N + 1) / (N + 1), n_max=n_max)


def sphere_amplitudes(theta: float, phi: float, psi: float, r: float = 1.0) -> Tuple[complex, complex]:
    """(alpha_+, alpha_-) of the sphere point (r, theta, phi, psi)"""
    alpha_plus = r * np.exp(0.5j * (phi - psi)) * math.cos(theta / 2)
    alpha_minus = r * np.exp(-0.5j * (phi + psi)) * math.sin(theta / 2)
    return complex(alpha_plus), complex(alpha_minus)


def sphere_angles(alpha_plus: complex, alpha_minus: complex) -> Tuple[float, float, float, float]:
    """Inverse of sphere_amplitudes: (r, theta, phi, psi)"""
    r = math.hypot(abs(alpha_plus), abs(alpha_minus))
    theta = 2.0 * math.atan2(abs(alpha_minus), abs(alpha_plus))
    arg_plus = np.angle(alpha_plus) if alpha_plus != 0 else 0.0
    arg_minus = np.angle(alpha_minus) if alpha_minus != 0 else 0.0
    return r, theta, float(arg_plus - arg_minus), float(-(arg_plus + arg_minus))


def coherent_amplitudes(N: int, theta: float, phi: float, psi: float) -> np.ndarray:
    """Normalized block-N amplitudes sqrt(binom(N,k)) alpha_+^k alpha_-^(N-k)"""
    alpha_plus, alpha_minus = sphere_amplitudes(theta, phi, psi)
    k = np.arange(N + 1)
    binom = np.exp(0.5 * (gammaln(N + 1) - gammaln(k + 1) - gammaln(N - k + 1)))
    return binom * np.power(alpha_plus, k) * np.power(alpha_minus, N - k)


def su2_coherent_state(N: int, theta: float, phi: float, psi: float = 0.0,
                       n_max: Optional[int] = None) -> TwoModeState:
    """Pure SU(2) coherent state of block N pointing at (theta, phi)"""
    if not 0.0 <= theta <= math.pi:
        raise ValueError(f"theta must lie in [0, pi], got {theta}")
    if N < 0:
        raise ValueError(f"block label must be non-negative, got {N}")
    vec = coherent_amplitudes(N, theta, phi, psi)
    return TwoModeState.from_pure(
        {N: vec}, n_max=N if n_max is None else n_max,
        metadata={'kind': 'su2_coherent', 'theta': theta, 'phi': phi, 'psi': psi},
    )


def two_mode_coherent_state(alpha_plus: complex, alpha_minus: complex, n_max: int) -> TwoModeState:
    """|alpha_+> (x) |alpha_->, truncated at n_max photons and renormalized.

    The weight lost to truncation is stored in metadata['discarded_weight'].
    """
    if n_max < 0:
        raise ValueError(f"n_max must be non-negative, got {n_max}")
    r2 = abs(alpha_plus) ** 2 + abs(alpha_minus) ** 2
    amplitudes = {}
    for N in range(n_max + 1):
        k = np.arange(N + 1)
        log_norm = -0.5 * (gammaln(k + 1) + gammaln(N - k + 1))
        amplitudes[N] = (math.exp(-r2 / 2) * np.exp(log_norm)
                         * np.power(complex(alpha_plus), k)
                         * np.power(complex(alpha_minus), N - k))

    kept = sum(float(np.vdot(vec, vec).real) for vec in amplitudes.values())
    discarded = max(0.0, 1.0 - kept)
    if discarded > TRUNCATION_WARN:
        logger.warning("two-mode coherent state truncated at n_max=%d discards weight %.3e",
                       n_max, discarded)
    scale = 1.0 / math.sqrt(kept)
    amplitudes = {N: vec * scale for N, vec in amplitudes.items()}

    return TwoModeState.from_pure(amplitudes, n_max=n_max, metadata={
        'kind': 'two_mode_coherent',
        'alpha_plus': [complex(alpha_plus).real, complex(alpha_plus).imag],
        'alpha_minus': [complex(alpha_minus).real, complex(alpha_minus).imag],
        'discarded_weight': discarded,
    })


def stokes_family(name: str, n_max: int) -> ObservableFamily:
    """Block-diagonal observable family {(N, N): S_name}"""
    if name not in STOKES_NAMES:
        raise ValueError(f"unknown Stokes operator {name!r}")
    return {(N, N): getattr(stokes_matrices(N), name) for N in range(n_max + 1)}


def mode_amplitude_family(sign: str, n_max: int, power: int = 1) -> ObservableFamily:
    """Blocks <N-power| a_sign^power |N>, keyed (N - power, N)"""
    if sign not in ('+', '-'):
        raise ValueError(f"mode sign must be '+' or '-', got {sign!r}")
    if power < 1:
        raise ValueError(f"power must be >= 1, got {power}")

    def lowering(N: int) -> np.ndarray:
        op = np.zeros((N, N + 1), dtype=complex)
        for k in range(N + 1):
            if sign == '+' and k > 0:
                op[k - 1, k] = math.sqrt(k)
            elif sign == '-' and k < N:
                op[k, k] = math.sqrt(N - k)
        return op

    family = {}
    for N in range(power, n_max + 1):
        op = np.eye(N + 1, dtype=complex)
        for step in range(power):
            op = lowering(N - step) @ op
        family[(N - power, N)] = op
    return family


def expectation(state: TwoModeState, observable: ObservableFamily) -> complex:
    """Tr(rho O) = sum over block pairs of Tr(rho_{N,N'} O_{N',N})"""
    total = 0j
    for (Np, N), op in observable.items():
        rho = state.blocks.get((N, Np))
        if rho is None:
            continue
        if op.shape != (Np + 1, N + 1):
            raise ValueError(f"observable block ({Np}, {N}) has shape {op.shape}, "
                             f"expected {(Np + 1, N + 1)}")
        total += np.trace(rho @ op)
    return complex(total)
