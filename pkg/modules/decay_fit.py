#!/usr/bin/env python3
"""
Depol Module C: Decay Fit
Exponential decay rates from sampled series

Log-linear least squares:
- log(value) = intercept - rate * t
- residual reported as RMS deviation of log(value) (relative error of value)
- non-exponential flag when the relative residual exceeds 1e-3
"""

import math
from dataclasses import dataclass
from typing import Dict, Sequence

import numpy as np

MIN_SAMPLES = 4
NON_EXPONENTIAL_THRESHOLD = 1e-3


@dataclass
class DecayFit:
    """Decay fit result"""
    rate: float
    intercept: float
    residual: float           # norm of the log-space residual vector
    relative_residual: float  # RMS of the log-space residuals
    samples: int
    non_exponential: bool

    @property
    def half_life(self) -> float:
        if self.rate <= 0:
            return math.inf
        return math.log(2.0) / self.rate

    def to_dict(self) -> Dict:
        return {
            'rate': self.rate,
            'intercept': self.intercept,
            'residual': self.residual,
            'relative_residual': self.relative_residual,
            'samples': self.samples,
            'non_exponential': self.non_exponential,
        }


def fit_decay_rate(times: Sequence[float], values: Sequence[float]) -> DecayFit:
    """Least-squares slope of log(value) against time"""
    t = np.asarray(times, dtype=float)
    y = np.asarray(values, dtype=float)
    if t.shape != y.shape or t.ndim != 1:
        raise ValueError(f"times and values must be 1-D and equally long, got {t.shape}/{y.shape}")
    if t.size < MIN_SAMPLES:
        raise ValueError(f"need at least {MIN_SAMPLES} samples, got {t.size}")
    if np.any(y <= 0):
        raise ValueError("decay values must be strictly positive")

    log_y = np.log(y)
    design = np.column_stack([np.ones_like(t), -t])
    (intercept, rate), *_ = np.linalg.lstsq(design, log_y, rcond=None)
    residuals = log_y - design @ np.array([intercept, rate])
    residual = float(np.linalg.norm(residuals))
    relative = residual / math.sqrt(t.size)

    return DecayFit(
        rate=float(rate),
        intercept=float(intercept),
        residual=residual,
        relative_residual=relative,
        samples=int(t.size),
        non_exponential=relative > NON_EXPONENTIAL_THRESHOLD,
    )
