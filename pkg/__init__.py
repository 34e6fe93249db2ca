#!/usr/bin/env python3
"""
Depol
Quantum light depolarization simulator

Description:
Two-mode polarization states under the depolarizing master equation,
their exact Poincare-sphere phase-space solution, and a microscopic
field-atom check of the effective decoherence rate.

Version: 1.0.0
License: MIT
"""

try:
    from .core import DepolarizationSystem
except ImportError:
    from core import DepolarizationSystem

__version__ = "1.0.0"
__description__ = "Quantum light depolarization simulator"

__all__ = ['DepolarizationSystem']
