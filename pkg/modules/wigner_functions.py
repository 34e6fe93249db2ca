#!/usr/bin/env python3
"""
Depol Module E: Wigner Functions
Wigner d/D functions and spherical harmonics (zyz Euler angles)

    D^S_{m m'}(phi, theta, psi) = e^{-i m phi} d^S_{m m'}(theta) e^{-i m' psi}
    Y_{S m}(theta, phi) = sqrt((2S+1)/4pi) conj(D^S_{m 0}(phi, theta, 0))
"""

import math
from functools import lru_cache
from typing import List, Tuple, Union

import numpy as np

ArrayLike = Union[float, np.ndarray]


def _twice(value: float, label: str) -> int:
    doubled = 2.0 * value
    if abs(doubled - round(doubled)) > 1e-12:
        raise ValueError(f"{label}={value} is not an integer or half-integer")
    return int(round(doubled))


def check_labels(S: float, m: float, mp: float) -> None:
    """Raise ValueError unless (S, m, m') label a spin-S matrix element"""
    two_s, two_m, two_mp = _twice(S, 'S'), _twice(m, 'm'), _twice(mp, "m'")
    if two_s < 0:
        raise ValueError(f"S must be non-negative, got {S}")
    if abs(two_m) > two_s or abs(two_mp) > two_s:
        raise ValueError(f"|m|, |m'| must not exceed S={S}, got m={m}, m'={mp}")
    if (two_s - two_m) % 2 or (two_s - two_mp) % 2:
        raise ValueError(f"m={m}, m'={mp} do not share the integrality of S={S}")


@lru_cache(maxsize=None)
def _jacobi_terms(two_s: int, two_m: int, two_mp: int) -> Tuple[Tuple[float, int, int], ...]:
    """(coefficient, cos power, sin power) of the explicit sum for d^S_{m m'}"""
    j_plus_m = (two_s + two_m) // 2
    j_minus_m = (two_s - two_m) // 2
    j_plus_mp = (two_s + two_mp) // 2
    j_minus_mp = (two_s - two_mp) // 2
    m_minus_mp = (two_m - two_mp) // 2

    prefactor = math.sqrt(math.factorial(j_plus_m) * math.factorial(j_minus_m)
                          * math.factorial(j_plus_mp) * math.factorial(j_minus_mp))
    terms = []
    for s in range(max(0, -m_minus_mp), min(j_plus_mp, j_minus_m) + 1):
        denominator = (math.factorial(j_plus_mp - s) * math.factorial(s)
                       * math.factorial(m_minus_mp + s) * math.factorial(j_minus_m - s))
        sign = -1.0 if (m_minus_mp + s) % 2 else 1.0
        terms.append((sign * prefactor / denominator,
                      two_s - m_minus_mp - 2 * s,
                      m_minus_mp + 2 * s))
    return tuple(terms)


def wigner_d(S: float, m: float, mp: float, theta: ArrayLike) -> ArrayLike:
    """Small-d matrix element d^S_{m m'}(theta)"""
    check_labels(S, m, mp)
    terms = _jacobi_terms(_twice(S, 'S'), _twice(m, 'm'), _twice(mp, "m'"))
    half = np.asarray(theta, dtype=float) / 2.0
    cos_half, sin_half = np.cos(half), np.sin(half)
    total = np.zeros_like(half)
    for coefficient, cos_power, sin_power in terms:
        total = total + coefficient * cos_half ** cos_power * sin_half ** sin_power
    return float(total) if total.ndim == 0 else total


def wigner_D(S: float, m: float, mp: float, phi: ArrayLike, theta: ArrayLike,
             psi: ArrayLike) -> ArrayLike:
    """D^S_{m m'}(phi, theta, psi)"""
    value = (np.exp(-1j * m * np.asarray(phi, dtype=float))
             * wigner_d(S, m, mp, theta)
             * np.exp(-1j * mp * np.asarray(psi, dtype=float)))
    return complex(value) if np.ndim(value) == 0 else value


def spherical_harmonic(S: int, m: int, theta: ArrayLike, phi: ArrayLike) -> ArrayLike:
    """Orthonormal Y_{S m} with the Condon-Shortley phase"""
    if _twice(S, 'S') % 2:
        raise ValueError(f"spherical harmonics need integer S, got {S}")
    if abs(m) > S:
        raise ValueError(f"|m| must not exceed S={S}, got m={m}")
    value = (math.sqrt((2 * S + 1) / (4 * math.pi))
             * wigner_d(S, m, 0, theta)
             * np.exp(1j * m * np.asarray(phi, dtype=float)))
    return complex(value) if np.ndim(value) == 0 else value


def spin_labels(s_max: float, half_integers: bool = False) -> List[float]:
    """S = 0, 1, ... (or 0, 1/2, 1, ...) up to s_max"""
    step = 1 if half_integers else 2
    return [k / 2.0 for k in range(0, _twice(s_max, 's_max') + 1, step)]


def projections(S: float) -> List[float]:
    """m = -S, ..., S"""
    two_s = _twice(S, 'S')
    return [k / 2.0 for k in range(-two_s, two_s + 1, 2)]
