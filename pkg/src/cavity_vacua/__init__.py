"""Dipole ensembles coupled to a single LC mode.

Geometry of dipole lattices between capacitor plates, classical polariton
spectra, exact diagonalization of the extended Dicke model and the full
multi-spin cavity Hamiltonian, and classification of normal, superradiant
and subradiant vacua.
"""

__version__ = "0.1.0"
