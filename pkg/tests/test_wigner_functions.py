import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.special import roots_legendre

sys.path.insert(0, str(Path(__file__).resolve().parents[1]))

from modules.wigner_functions import (
    projections, spherical_harmonic, spin_labels, wigner_D, wigner_d,
)

THETA = np.linspace(0.0, math.pi, 7)


def test_low_order_small_d_values():
    assert np.allclose(wigner_d(0, 0, 0, THETA), 1.0)
    assert np.allclose(wigner_d(1, 0, 0, THETA), np.cos(THETA))
    assert np.allclose(wigner_d(1, 1, 0, THETA), -np.sin(THETA) / math.sqrt(2))
    assert np.allclose(wigner_d(0.5, 0.5, 0.5, THETA), np.cos(THETA / 2))
    assert np.allclose(wigner_d(0.5, 0.5, -0.5, THETA), -np.sin(THETA / 2))


def test_scalar_input_gives_scalar_output():
    assert isinstance(wigner_d(2, 1, -1, 0.3), float)
    assert isinstance(wigner_D(2, 1, -1, 0.1, 0.3, 0.2), complex)


@pytest.mark.parametrize("S", [0.5, 1, 1.5, 2])
def test_identity_rotation(S):
    for m in projections(S):
        for mp in projections(S):
            expected = 1.0 if m == mp else 0.0
            assert wigner_D(S, m, mp, 0.0, 0.0, 0.0) == pytest.approx(expected, abs=1e-14)


def test_D_examples():
    assert wigner_D(1, 0, 0, 0.7, 1.2, -2.0) == pytest.approx(math.cos(1.2))
    assert wigner_D(1, 1, 0, 0.0, math.pi / 2, 0.0) == pytest.approx(-1 / math.sqrt(2))


def test_small_d_orthogonality():
    nodes, weights = roots_legendre(20)
    theta = np.arccos(nodes)
    for m, mp in [(0, 0), (1, 0), (1, -1)]:
        for S in range(max(abs(m), abs(mp)), 5):
            for Sp in range(max(abs(m), abs(mp)), 5):
                integral = np.sum(weights * wigner_d(S, m, mp, theta) * wigner_d(Sp, m, mp, theta))
                expected = 2.0 / (2 * S + 1) if S == Sp else 0.0
                assert integral == pytest.approx(expected, abs=1e-12)


def test_spherical_harmonic_values():
    assert spherical_harmonic(0, 0, 0.4, 1.0) == pytest.approx(1 / math.sqrt(4 * math.pi))
    assert np.allclose(spherical_harmonic(1, 0, THETA, 0.3), math.sqrt(3 / (4 * math.pi)) * np.cos(THETA))


@pytest.mark.parametrize("S", range(4))
def test_D_reduces_to_spherical_harmonics(S):
    theta, phi = 0.9, 2.1
    for m in range(-S, S + 1):
        lhs = np.conj(wigner_D(S, m, 0, phi, theta, 0.0))
        rhs = math.sqrt(4 * math.pi / (2 * S + 1)) * spherical_harmonic(S, m, theta, phi)
        assert lhs == pytest.approx(rhs, abs=1e-12)


def test_label_validation():
    with pytest.raises(ValueError):
        wigner_d(1, 2, 0, 0.1)
    with pytest.raises(ValueError):
        wigner_d(1, 0.5, 0.5, 0.1)
    with pytest.raises(ValueError):
        wigner_d(0.3, 0.3, 0.3, 0.1)
    with pytest.raises(ValueError):
        spherical_harmonic(0.5, 0.5, 0.1, 0.1)
    with pytest.raises(ValueError):
        spherical_harmonic(1, 2, 0.1, 0.1)


def test_label_ranges():
    assert spin_labels(1.5, half_integers=True) == [0.0, 0.5, 1.0, 1.5]
    assert spin_labels(2) == [0.0, 1.0, 2.0]
    assert projections(1) == [-1.0, 0.0, 1.0]
