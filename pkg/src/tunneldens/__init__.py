"""Continuum level density of 1D tunneling via complex scaling.

The package computes the change in continuum level density induced by a
Gaussian-tailed barrier, three ways: from the complex-scaled spectrum in
a finite box, from complex-valued semiclassical traversal times, and
from direct scattering (transfer matrix).  The first two are related by

    density(E) = time_shift(E) / (pi * hbar)

continued to complex energy, and the third serves as an independent
check on resonance positions and widths.
"""

from .model import Classicality, PotentialSpec

__version__ = "0.1.0"

__all__ = ["PotentialSpec", "Classicality", "__version__"]
