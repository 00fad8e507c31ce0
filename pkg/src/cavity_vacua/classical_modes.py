"""Classical polariton spectra of harmonically bound dipoles in an LC mode.

The dipole normal modes diagonalize the coupling matrix D; each mode n with
eigenvalue eta_n carries a coupling weight nu_n to the cavity and a bare
frequency omega_n^2 = omega0^2 + eta_n * omega_p^2.  The full spectrum of
the N+1 coupled oscillators is obtained from the squared-frequency matrix
of the linearized dynamics; negative squared frequencies flag instability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .geometry import CouplingMatrix

__all__ = [
    "ClassicalParams",
    "ModeDecomposition",
    "BrightBranches",
    "decompose",
    "bright_branches",
    "full_spectrum",
    "instability_threshold",
    "secular_residual",
]


@dataclass(frozen=True)
class ClassicalParams:
    omega0: float
    omega_c: float = 1.0
    omega_p: float = 0.0

    def __post_init__(self):
        if min(self.omega0, self.omega_c, self.omega_p) < 0:
            raise ValueError("frequencies must be non-negative")


@dataclass(frozen=True)
class ModeDecomposition:
    """Eigenmodes of D with their cavity coupling weights."""

    eta_n: np.ndarray          # N eigenvalues, ascending
    modes: np.ndarray          # orthonormal eigenvectors as columns
    nu_n: np.ndarray           # coupling weights, sum equals nu
    omega_n_sq: np.ndarray     # omega0^2 + eta_n * omega_p^2
    nu: float
    params: ClassicalParams

    @property
    def any_unstable(self) -> bool:
        return bool(np.any(self.omega_n_sq < 0))


@dataclass(frozen=True)
class BrightBranches:
    omega_plus_sq: float
    omega_minus_sq: float

    @property
    def stable(self) -> bool:
        return self.omega_minus_sq >= 0 and self.omega_plus_sq >= 0

    @property
    def omega_plus(self) -> float:
        return math.sqrt(max(self.omega_plus_sq, 0.0))

    @property
    def omega_minus(self) -> float:
        return math.sqrt(max(self.omega_minus_sq, 0.0))


def decompose(coupling: CouplingMatrix, params: ClassicalParams,
              nu: Optional[float] = None) -> ModeDecomposition:
    """Full eigendecomposition of D with per-mode coupling weights.

    nu_n = nu * [sum_i c_n(i)]^2 / N; within a degenerate eigenspace only
    the total weight is basis independent.
    """
    if nu is None:
        nu = coupling.nu
    if nu is None:
        raise ValueError("filling factor nu required (none on the coupling matrix)")
    D = coupling.D
    eta_n, modes = np.linalg.eigh(D)
    n = D.shape[0]
    overlaps = modes.sum(axis=0) ** 2
    nu_n = nu * overlaps / n
    omega_n_sq = params.omega0 ** 2 + eta_n * params.omega_p ** 2
    return ModeDecomposition(eta_n, modes, nu_n, omega_n_sq, float(nu), params)


def bright_branches(params: ClassicalParams, eta: float, nu: float) -> BrightBranches:
    """Two-mode polariton frequencies for the uniform (bright) dipole mode.

    Instability (negative squared frequency) is returned as data, not
    raised.
    """
    wd2 = params.omega0 ** 2 + eta * params.omega_p ** 2
    wc2 = params.omega_c ** 2
    coupling = nu * params.omega_p ** 2
    s = wd2 + wc2 + coupling
    radicand = s * s - 4.0 * wd2 * wc2
    if radicand < 0:
        # complex conjugate pair; report the real part of Omega^2 twice
        return BrightBranches(s / 2.0, s / 2.0)
    root = math.sqrt(radicand)
    return BrightBranches((s + root) / 2.0, (s - root) / 2.0)


def _dynamical_matrix(decomp: ModeDecomposition, params: ClassicalParams) -> np.ndarray:
    """Squared-frequency matrix of the N+1 mode system.

    In mode coordinates Z_n and the cavity velocity variable u the
    linearized equations close as ydotdot = -K y with
        K = [[W^2, -gamma], [-gamma^T W^2, omega_c^2 + |gamma|^2]],
    gamma_n = omega_p * sqrt(nu_n) (sign irrelevant to the spectrum).
    """
    w2 = decomp.omega_n_sq
    gamma = params.omega_p * np.sqrt(np.maximum(decomp.nu_n, 0.0))
    n = w2.size
    K = np.zeros((n + 1, n + 1))
    K[:n, :n] = np.diag(w2)
    K[:n, n] = -gamma
    K[n, :n] = -gamma * w2
    K[n, n] = params.omega_c ** 2 + float(gamma @ gamma)
    return K


def full_spectrum(decomp: ModeDecomposition, params: Optional[ClassicalParams] = None
                  ) -> tuple[np.ndarray, np.ndarray]:
    """All N+1 squared mode frequencies with stability flags.

    Returns (omega_sq, stable) sorted ascending; omega_sq < 0 means the
    corresponding mode grows exponentially.
    """
    if params is None:
        params = decomp.params
    K = _dynamical_matrix(decomp, params)
    vals = np.linalg.eigvals(K)
    # the gyroscopic system has real squared frequencies; discard round-off
    vals = np.sort(vals.real)
    return vals, vals >= 0


def secular_residual(decomp: ModeDecomposition, params: ClassicalParams,
                     omega_sq: float) -> float:
    """Residual of the secular equation at a candidate squared frequency.

    Zero (up to round-off) for every coupled-mode eigenvalue returned by
    full_spectrum; used as an independent cross-check of the matrix route.
    """
    wn2 = decomp.omega_n_sq
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = params.omega_p ** 2 * decomp.nu_n / (omega_sq - wn2)
    return float(terms.sum() - (1.0 - params.omega_c ** 2 / omega_sq))


def instability_threshold(decomp: ModeDecomposition, omega0: Optional[float] = None
                          ) -> Optional[float]:
    """Critical plasma frequency at which the softest dipole mode vanishes.

    omega_p^c = omega0 / sqrt(-min_n eta_n); None when all eta_n >= 0.
    Independent of the cavity frequency.
    """
    if omega0 is None:
        omega0 = decomp.params.omega0
    eta_min = float(decomp.eta_n.min())
    if eta_min >= 0:
        return None
    return omega0 / math.sqrt(-eta_min)
