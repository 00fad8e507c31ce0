"""Closed-form results used as oracles and plot overlays.

Critical couplings, mean-field order parameters, weak-coupling photon
number, the voltage-fluctuation kink, the quadratic (Holstein-Primakoff)
theory of the normal phase, and the polaron-frame energies.  Everything is
stateless; units are set by omega_c unless stated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

__all__ = [
    "HPResult",
    "alpha_from_g",
    "g_from_alpha",
    "g_physical",
    "charge_bound",
    "critical_coupling",
    "mean_fields",
    "hp_bogoliubov",
    "hp_photon_limit",
    "photon_number_weak",
    "voltage_kink",
    "critical_epsilon",
    "critical_epsilon_asymptote",
    "polaron_energy",
]


def alpha_from_g(g: float, omega_c: float = 1.0) -> float:
    """Effective finestructure constant alpha = g^2 / (2 pi omega_c^2)."""
    if g < 0 or omega_c <= 0:
        raise ValueError("g >= 0 and omega_c > 0 required")
    return g * g / (2.0 * math.pi * omega_c * omega_c)


def g_from_alpha(alpha: float, omega_c: float = 1.0) -> float:
    if alpha < 0 or omega_c <= 0:
        raise ValueError("alpha >= 0 and omega_c > 0 required")
    return omega_c * math.sqrt(2.0 * math.pi * alpha)


def g_physical(q: float, xi0: float, C: float, d: float, omega_c: float,
               hbar: float = 1.0) -> float:
    """Single-dipole coupling from circuit parameters (charge q, dipole
    length xi0, capacitance C, plate distance d)."""
    if min(q, C, d, omega_c) <= 0 or xi0 < 0:
        raise ValueError("positive physical inputs required")
    return q * xi0 / (C * d * hbar) * math.sqrt(hbar * C * omega_c / 2.0)


def charge_bound(q: float, C: float, omega_c: float, hbar: float = 1.0) -> float:
    """Upper bound g/omega_c <= q / (2 Q0), Q0 = sqrt(hbar C omega_c)/2."""
    if min(q, C, omega_c) <= 0:
        raise ValueError("positive physical inputs required")
    q0 = math.sqrt(hbar * C * omega_c) / 2.0
    return q / (2.0 * q0)


def critical_coupling(omega0: float, omega_c: float, epsilon: float,
                      n_dipoles: int) -> Optional[float]:
    """Superradiant critical coupling g_c = sqrt(omega_c omega0 / (-eps N)).

    None for epsilon >= 0 (no superradiant instability).
    """
    if epsilon >= 0:
        return None
    return math.sqrt(omega_c * omega0 / (-epsilon * n_dipoles))


def mean_fields(g: float, g_c: float, n_dipoles: int, omega_c: float = 1.0,
                branch: int = +1) -> tuple[float, float]:
    """Mean-field (<a>, <Sx>) above the transition; (0, 0) below.

    branch=+1 matches a positive bias lambda, which selects <Sx> < 0 and
    <a> > 0.
    """
    if g < g_c:
        return 0.0, 0.0
    factor = math.sqrt(1.0 - (g_c / g) ** 4)
    a = branch * n_dipoles * g / (2.0 * omega_c) * factor
    sx = -branch * n_dipoles / 2.0 * factor
    return a, sx


@dataclass(frozen=True)
class HPResult:
    omega_plus: float
    omega_minus: float
    gs_photon_number: float
    stable: bool


def hp_bogoliubov(omega0: float, omega_c: float, epsilon: float, G: float) -> HPResult:
    """Two-mode quadratic theory of the normal phase.

    H = omega_c a'a + omega0 b'b + (G/2)(a+a')(b+b') + (D/4)(b+b')^2 with
    D = (1+eps) G^2 / omega_c.  Diagonalized in quadratures: with kinetic
    matrix T = diag(omega_c, omega0) and potential matrix V, the squared
    eigenfrequencies are the eigenvalues of T^(1/2) V T^(1/2) and the
    vacuum covariances give the exact a'a expectation value.
    """
    D = (1.0 + epsilon) * G * G / omega_c if omega_c > 0 else 0.0
    T = np.diag([omega_c, omega0])
    V = np.array([[omega_c, G], [G, omega0 + D]])
    t_half = np.diag(np.sqrt(np.diag(T)))
    M = t_half @ V @ t_half
    w2, _ = np.linalg.eigh(0.5 * (M + M.T))
    stable = bool(w2[0] > 0)
    omega_minus = math.sqrt(abs(w2[0]))
    omega_plus = math.sqrt(abs(w2[1]))
    if not stable:
        return HPResult(omega_plus, omega_minus, math.nan, False)
    # ground-state covariances of H = p'Tp/2 + x'Vx/2
    sqrt_m = _sym_sqrt(M)
    with np.errstate(all="raise"):
        cov_x = 0.5 * t_half @ np.linalg.inv(sqrt_m) @ t_half
        t_inv_half = np.diag(1.0 / np.sqrt(np.diag(T)))
        cov_p = 0.5 * t_inv_half @ sqrt_m @ t_inv_half
    n_phot = 0.5 * (cov_x[0, 0] + cov_p[0, 0] - 1.0)
    return HPResult(omega_plus, omega_minus, float(n_phot), True)


def _sym_sqrt(m: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + m.T))
    return v @ np.diag(np.sqrt(np.maximum(w, 0.0))) @ v.T


def hp_photon_limit(epsilon: float) -> float:
    """g -> infinity limit of the quadratic-theory photon number.

    Finite for epsilon > 0; the subradiant ground state undercuts it.
    """
    if epsilon <= 0:
        raise ValueError("finite limit exists only for epsilon > 0")
    root = math.sqrt(epsilon * (epsilon + 1.0))
    return (1.0 + 2.0 * epsilon - 2.0 * root) / (4.0 * root)


def photon_number_weak(omega0: float, omega_c: float, epsilon: float,
                       n_dipoles: int, g: float) -> float:
    """Normal-phase photon number N g^2 w0 / [4 (wc+w0)^2 (w0 + eps N g^2/wc)].

    The denominator vanishes exactly at the critical coupling; a pole or
    negative value signals the instability.
    """
    denom = 4.0 * (omega_c + omega0) ** 2 * (omega0 + epsilon * n_dipoles * g * g / omega_c)
    if denom <= 0:
        raise ValueError("beyond the normal-phase pole (g >= g_c)")
    return n_dipoles * g * g * omega0 / denom


def voltage_kink(epsilon: float, omega0: float, omega_c: float) -> float:
    """Peak voltage fluctuations at the transition:
    <U^2>/U0^2 ~ sqrt(1 + (1/|eps|)(w0/wc)^2), epsilon < 0."""
    if epsilon >= 0:
        raise ValueError("kink formula applies to epsilon < 0")
    return math.sqrt(1.0 + (omega0 / omega_c) ** 2 / abs(epsilon))


def critical_epsilon_asymptote(alpha: float, omega0: float, omega_c: float) -> float:
    """Large-alpha boundary between sub- and superradiant vacua:
    eps_c = -omega0^2 / (8 pi^2 alpha^2 omega_c^2)."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return -(omega0 ** 2) / (8.0 * math.pi ** 2 * alpha ** 2 * omega_c ** 2)


def critical_epsilon(alpha: float, omega0: float, omega_c: float,
                     n_dipoles: int) -> float:
    """Transition point of the renormalized collective spin model.

    Root in epsilon of
        omega0 e^{-pi alpha} + N (2 pi alpha eps omega_c
                                  + omega0^2/(4 pi alpha omega_c)) = 0.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    return -(omega0 * math.exp(-math.pi * alpha) / n_dipoles
             + omega0 ** 2 / (4.0 * math.pi * alpha * omega_c)) / (2.0 * math.pi * alpha * omega_c)


def polaron_energy(n: int, s_config, D: np.ndarray, nu: float, g: float,
                   omega_c: float) -> float:
    """Energy of a polaron-frame eigenstate at omega0 = 0:
    n wc + (g^2 / 4 wc)(N/nu) sum_ij D_ij s_i s_j, s_i in {-1, +1}."""
    s = np.asarray(s_config, dtype=float)
    if not np.all(np.isin(s, (-1.0, 1.0))):
        raise ValueError("spin configuration entries must be +-1")
    N = s.size
    return float(n * omega_c + g * g / (4.0 * omega_c) * (N / nu) * s @ D @ s)
