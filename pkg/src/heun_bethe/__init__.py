"""Finite-gap spectra of the elliptic Heun (BC1 Inozemtsev) operator."""

from .elliptic import Lattice, LatticeConstants, lattice_constants, wp_family
from .heun_bridge import Couplings

__all__ = ["Lattice", "LatticeConstants", "lattice_constants", "wp_family", "Couplings"]
__version__ = "0.1.0"
