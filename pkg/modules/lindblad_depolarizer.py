#!/usr/bin/env python3
"""
Depol Module B: Lindblad Depolarizer
Depolarizing master equation on two-mode block pairs

    d rho/dt = Gamma L[S0] rho + gamma L[S+] rho + gamma L[S-] rho
    L[C] rho = 2 C rho C^+ - {C^+ C, rho}

Features:
- Per block-pair generators (the dynamics never mixes block pairs)
- Exact evolution (superoperator exponential) and adaptive Runge-Kutta
- Generator spectra and steady states
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import eigvals, expm

from .fock_algebra import BlockPair, TwoModeState, stokes_matrices

logger = logging.getLogger(__name__)

METHODS = ('exact-expm', 'rk-adaptive')

RK_RTOL = 1e-8
RK_ATOL = 1e-10
MIRROR_TOL = 1e-10


class StiffnessError(RuntimeError):
    """Adaptive integrator could not shrink its step any further"""


@dataclass(frozen=True)
class DepolarizerRates:
    """(gamma, Gamma): rates of L[S+-] and L[S0]"""
    gamma: float
    gamma0: float = 0.0

    def __post_init__(self):
        if self.gamma < 0 or self.gamma0 < 0:
            raise ValueError(f"rates must be non-negative, got gamma={self.gamma}, "
                             f"gamma0={self.gamma0}")

    @classmethod
    def from_reservoir(cls, gamma: float) -> 'DepolarizerRates':
        """Rates of the phase-averaged reservoir equation: Gamma = 2 gamma"""
        return cls(gamma=gamma, gamma0=2.0 * gamma)

    def to_dict(self) -> Dict[str, float]:
        return {'gamma': self.gamma, 'gamma0': self.gamma0}


@dataclass(frozen=True)
class BlockPairGenerator:
    """Generator acting on row-major vec(rho_{N,N'})"""
    N: int
    Np: int
    matrix: np.ndarray

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.N + 1, self.Np + 1)


def dissipator(C: np.ndarray, rho: np.ndarray, C_right: Optional[np.ndarray] = None) -> np.ndarray:
    """L[C] rho = 2 C rho C^+ - C^+ C rho - rho C^+ C.

    For a block pair rho_{N,N'}, C acts as C (block N) on the left and as
    C_right (block N') on the right.
    """
    C_left = np.asarray(C)
    C_right = C_left if C_right is None else np.asarray(C_right)
    if C_left.shape != (rho.shape[0], rho.shape[0]) or C_right.shape != (rho.shape[1], rho.shape[1]):
        raise ValueError(f"operator shapes {C_left.shape}/{C_right.shape} do not fit "
                         f"a {rho.shape} block")
    return (2.0 * C_left @ rho @ C_right.conj().T
            - C_left.conj().T @ C_left @ rho
            - rho @ C_right.conj().T @ C_right)


def dissipator_superoperator(C_left: np.ndarray, C_right: np.ndarray) -> np.ndarray:
    """Matrix of rho -> L[C] rho on row-major vec(rho)"""
    eye_left = np.eye(C_left.shape[0])
    eye_right = np.eye(C_right.shape[0])
    return (2.0 * np.kron(C_left, C_right.conj())
            - np.kron(C_left.conj().T @ C_left, eye_right)
            - np.kron(eye_left, (C_right.conj().T @ C_right).T))


@lru_cache(maxsize=4096)
def _generator_matrix(N: int, Np: int, gamma: float, gamma0: float) -> np.ndarray:
    left, right = stokes_matrices(N), stokes_matrices(Np)
    dim = (N + 1) * (Np + 1)

    matrix = gamma * (dissipator_superoperator(left.Splus, right.Splus)
                      + dissipator_superoperator(left.Sminus, right.Sminus))
    # L[S0] is the scalar -(N - N')^2 on the pair
    matrix = matrix - gamma0 * (N - Np) ** 2 * np.eye(dim)
    assert np.allclose(-(N - Np) ** 2 * np.eye(dim), dissipator_superoperator(left.S0, right.S0))

    matrix.setflags(write=False)
    return matrix


def block_pair_generator(N: int, Np: int, rates: DepolarizerRates) -> BlockPairGenerator:
    if N < 0 or Np < 0:
        raise ValueError(f"block labels must be non-negative, got ({N}, {Np})")
    return BlockPairGenerator(N=N, Np=Np, matrix=_generator_matrix(N, Np, rates.gamma, rates.gamma0))


def depolarizing_rhs(state: TwoModeState, rates: DepolarizerRates) -> TwoModeState:
    """Time derivative of every populated block pair (trace zero, not a state)"""
    derivative = {}
    for (N, Np), rho in state.blocks.items():
        left, right = stokes_matrices(N), stokes_matrices(Np)
        derivative[(N, Np)] = (
            -rates.gamma0 * (N - Np) ** 2 * rho
            + rates.gamma * dissipator(left.Splus, rho, right.Splus)
            + rates.gamma * dissipator(left.Sminus, rho, right.Sminus)
        )
    return TwoModeState(n_max=state.n_max, blocks=derivative, metadata={'derivative': True})


def generator_spectrum(N: int, Np: int, rates: DepolarizerRates) -> np.ndarray:
    """Eigenvalues of the (N, N') generator, real part descending"""
    values = eigvals(block_pair_generator(N, Np, rates).matrix)
    order = np.lexsort((values.imag, -values.real))
    return values[order]


def coherence_rate(rates: DepolarizerRates) -> float:
    """Slowest nonzero decay rate of the one-photon block (x, y components)"""
    spectrum = generator_spectrum(1, 1, rates)
    nonzero = spectrum[np.abs(spectrum) > 1e-9 * max(1.0, np.max(np.abs(spectrum)))]
    if nonzero.size == 0:
        return 0.0
    return float(-np.max(nonzero.real))


def steady_state(N: int) -> np.ndarray:
    """Completely random state of block N"""
    if N < 0:
        raise ValueError(f"block label must be non-negative, got {N}")
    return np.eye(N + 1, dtype=complex) / (N + 1)


def null_space_overlap(N: int, rates: DepolarizerRates) -> float:
    """|<v0, vec(1/(N+1))>| for the zero-eigenvalue eigenvector v0 of the (N, N) generator"""
    values, vectors = np.linalg.eig(block_pair_generator(N, N, rates).matrix)
    v0 = vectors[:, int(np.argmin(np.abs(values)))]
    target = steady_state(N).reshape(-1)
    return float(abs(np.vdot(target, v0)) / (np.linalg.norm(target) * np.linalg.norm(v0)))


def default_threads() -> int:
    """Worker cap from DEPOL_THREADS (default 1)"""
    try:
        return max(1, int(os.environ.get('DEPOL_THREADS', '1')))
    except ValueError:
        logger.warning("ignoring non-integer DEPOL_THREADS=%r", os.environ.get('DEPOL_THREADS'))
        return 1


def _propagate_pair(generator: BlockPairGenerator, rho: np.ndarray, t: float, method: str,
                    rtol: float, atol: float) -> np.ndarray:
    vec = rho.reshape(-1)
    if method == 'exact-expm':
        out = expm(generator.matrix * t) @ vec
    else:
        matrix = generator.matrix
        sol = solve_ivp(lambda _t, y: matrix @ y, (0.0, t), vec.astype(complex),
                        method='DOP853', rtol=rtol, atol=atol)
        if not sol.success:
            raise StiffnessError(f"RK integration failed on block pair "
                                 f"({generator.N}, {generator.Np}): {sol.message}; "
                                 f"use method='exact-expm'")
        out = sol.y[:, -1]
    return out.reshape(generator.shape)


def _check_mirrored(state: TwoModeState) -> None:
    for (N, Np), rho in state.blocks.items():
        if N != Np and not np.allclose(state.block(Np, N), rho.conj().T, atol=MIRROR_TOL):
            raise ValueError(f"block pair ({N}, {Np}) has no conjugate-transpose partner "
                             f"({Np}, {N}); evolve needs a Hermitian block layout")


def evolve(state: TwoModeState, t: float, rates: DepolarizerRates,
           method: str = 'exact-expm', threads: Optional[int] = None,
           rtol: float = RK_RTOL, atol: float = RK_ATOL) -> TwoModeState:
    """rho(t) = exp(t L) rho, block pair by block pair"""
    if t < 0:
        raise ValueError(f"time must be non-negative, got {t}")
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}, expected one of {METHODS}")
    _check_mirrored(state)
    if t == 0:
        return TwoModeState(n_max=state.n_max,
                            blocks={pair: rho.copy() for pair, rho in state.blocks.items()},
                            metadata=dict(state.metadata))

    # upper pairs only; the lower triangle is the conjugate transpose
    upper = [pair for pair in state.pairs() if pair[0] <= pair[1]]

    def run(pair: BlockPair) -> np.ndarray:
        generator = block_pair_generator(pair[0], pair[1], rates)
        return _propagate_pair(generator, state.blocks[pair], t, method, rtol, atol)

    workers = threads or default_threads()
    if workers > 1 and len(upper) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            evolved = list(pool.map(run, upper))
    else:
        evolved = [run(pair) for pair in upper]

    blocks = {}
    for (N, Np), rho in zip(upper, evolved):
        blocks[(N, Np)] = rho
        if N != Np:
            blocks[(Np, N)] = rho.conj().T.copy()
    metadata = dict(state.metadata)
    metadata.update({'t': t, 'rates': rates.to_dict(), 'method': method})
    return TwoModeState(n_max=state.n_max, blocks=blocks, metadata=metadata)


def evolve_series(state: TwoModeState, times: Sequence[float], rates: DepolarizerRates,
                  method: str = 'exact-expm', threads: Optional[int] = None) -> List[TwoModeState]:
    """Evolve the same initial state to every time in `times`"""
    return [evolve(state, float(t), rates, method=method, threads=threads) for t in times]
