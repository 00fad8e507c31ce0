"""Hamiltonian builders on truncated Hilbert spaces.

Extended Dicke model, full multi-spin cavity model, its Coulomb-gauge
two-level counterpart, the polaron-frame model, the effective spin models
and the clamped-quadrature spin Hamiltonian.  All matrices are assembled
real symmetric: the only imaginary structures appearing (i S_y and the
flux quadrature i(a^dag - a)) enter in real antisymmetric pairs.

Basis ordering is photon-major: index = n_photon * dim_spin + spin_index,
with spin states ordered by decreasing S_z (Dicke) or as |s_1 ... s_N>
tensor bits with site 1 the most significant bit (product basis).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
import scipy.sparse as sp
from scipy.special import eval_genlaguerre, gammaln

from .geometry import CouplingMatrix

__all__ = [
    "BasisKind",
    "HilbertBasis",
    "ModelParams",
    "HamiltonianMatrix",
    "DimensionError",
    "MAX_PAULI_SITES",
    "fock_ops",
    "collective_spin_ops",
    "pauli_ops",
    "displacement_element",
    "displacement_matrix",
    "default_n_max",
    "build_edm",
    "build_cqed_full",
    "build_coulomb_tls",
    "build_polaron",
    "build_effective_spin",
    "build_lmg",
    "adiabatic_spin_h",
    "parity_operator",
]

MAX_PAULI_SITES = 12


class DimensionError(ValueError):
    """Requested Hilbert space exceeds the hard guard."""


class BasisKind(enum.Enum):
    DICKE_FOCK = "dicke_fock"
    FULL_SPIN_FOCK = "full_spin_fock"
    SPIN_ONLY = "spin_only"


@dataclass(frozen=True)
class HilbertBasis:
    kind: BasisKind
    n_dipoles: int
    n_max: Optional[int] = None  # photon levels; None for spin-only
    full_spin: bool = False      # 2^N product space instead of Dicke ladder

    @property
    def dim_spin(self) -> int:
        return 2 ** self.n_dipoles if self.full_spin else self.n_dipoles + 1

    @property
    def dim(self) -> int:
        if self.kind is BasisKind.SPIN_ONLY:
            return self.dim_spin
        return self.n_max * self.dim_spin


@dataclass(frozen=True)
class ModelParams:
    """All Hamiltonian parameters, in units of omega_c unless noted."""

    omega0: float
    g: float
    epsilon: float = 0.0
    n_dipoles: int = 1
    omega_c: float = 1.0
    lambda_bias: float = 0.0
    n_max: Optional[int] = None
    xi_bar: float = 1.0

    def __post_init__(self):
        if self.n_dipoles < 1:
            raise ValueError("n_dipoles must be >= 1")
        if self.g < 0:
            raise ValueError("g must be >= 0")
        if self.xi_bar < 1.0:
            raise ValueError("xi_bar must be >= 1")
        if self.n_max is not None and self.n_max < 1:
            raise ValueError("n_max must be >= 1")

    @property
    def alpha(self) -> float:
        return self.g ** 2 / (2.0 * math.pi * self.omega_c ** 2)

    @classmethod
    def from_alpha(cls, omega0: float, alpha: float, **kwargs) -> "ModelParams":
        omega_c = kwargs.pop("omega_c", 1.0)
        g = omega_c * math.sqrt(2.0 * math.pi * alpha)
        return cls(omega0=omega0, g=g, omega_c=omega_c, **kwargs)

    def with_(self, **kwargs) -> "ModelParams":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class HamiltonianMatrix:
    matrix: sp.csr_matrix
    basis: HilbertBasis
    params: Optional[ModelParams] = None

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()


def fock_ops(n_max: int) -> tuple[sp.csr_matrix, sp.csr_matrix, sp.csr_matrix]:
    """Truncated (a, a_dagger, n) on n_max Fock levels."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    root = np.sqrt(np.arange(1, n_max))
    a = sp.diags(root, 1, format="csr")
    return a, a.T.tocsr(), sp.diags(np.arange(n_max, dtype=float), format="csr")


def collective_spin_ops(n_dipoles: int):
    """(Sx, Sy, Sz, S2) for the S = N/2 ladder, states ordered by
    decreasing m."""
    if n_dipoles < 1:
        raise ValueError("n_dipoles must be >= 1")
    s = n_dipoles / 2.0
    m = s - np.arange(n_dipoles + 1)
    # S_- |s, m> = sqrt(s(s+1) - m(m-1)) |s, m-1>
    low = np.sqrt(s * (s + 1.0) - m[:-1] * (m[:-1] - 1.0))
    sm = np.diag(low, -1)
    spl = sm.T
    sx = 0.5 * (spl + sm)
    sy = -0.5j * (spl - sm)
    sz = np.diag(m)
    s2 = s * (s + 1.0) * np.eye(n_dipoles + 1)
    return sx, sy, sz, s2


def pauli_ops(n_dipoles: int):
    """Per-site (sigma_x, -i sigma_y, sigma_z) embeddings in the 2^N basis.

    The y component is returned in its real antisymmetric form -i sigma_y
    so that everything downstream stays real.  Site 0 is the most
    significant factor.
    """
    if n_dipoles > MAX_PAULI_SITES:
        raise DimensionError(f"product basis limited to {MAX_PAULI_SITES} sites")
    sx = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
    my = sp.csr_matrix(np.array([[0.0, -1.0], [1.0, 0.0]]))  # -i sigma_y
    sz = sp.csr_matrix(np.array([[1.0, 0.0], [0.0, -1.0]]))
    ops_x, ops_y, ops_z = [], [], []
    for i in range(n_dipoles):
        left = sp.identity(2 ** i, format="csr")
        right = sp.identity(2 ** (n_dipoles - i - 1), format="csr")
        ops_x.append(sp.kron(sp.kron(left, sx), right, format="csr"))
        ops_y.append(sp.kron(sp.kron(left, my), right, format="csr"))
        ops_z.append(sp.kron(sp.kron(left, sz), right, format="csr"))
    return ops_x, ops_y, ops_z


def displacement_element(n: int, m: int, beta: float) -> float:
    """<n| exp(beta (a_dag - a)) |m> for real beta (associated Laguerre form)."""
    if n < 0 or m < 0:
        raise ValueError("n, m must be non-negative")
    if n < m:
        # <n|D(beta)|m> = <m|D(-beta)|n>, D unitary with real beta
        return displacement_element(m, n, -beta)
    if beta == 0.0:
        return 1.0 if n == m else 0.0
    k = n - m
    log_pref = 0.5 * (gammaln(m + 1) - gammaln(n + 1)) - 0.5 * beta * beta
    sign = 1.0 if beta > 0 or k % 2 == 0 else -1.0
    mag = math.exp(log_pref + k * math.log(abs(beta)))
    return sign * mag * float(eval_genlaguerre(m, k, beta * beta))


def displacement_matrix(n_max: int, beta: float) -> np.ndarray:
    """Truncated displacement operator exp(beta (a_dag - a))."""
    ns = np.arange(n_max)
    n_grid, m_grid = np.meshgrid(ns, ns, indexing="ij")
    lo = np.minimum(n_grid, m_grid)
    k = np.abs(n_grid - m_grid)
    if beta == 0.0:
        return np.eye(n_max)
    log_pref = 0.5 * (gammaln(lo + 1) - gammaln(lo + k + 1)) - 0.5 * beta * beta
    signed_beta = np.where(n_grid >= m_grid, beta, -beta)
    sign = np.where((k % 2 == 1) & (signed_beta < 0), -1.0, 1.0)
    with np.errstate(divide="ignore"):
        mag = np.exp(log_pref + k * np.log(abs(beta)))
    lag = np.zeros_like(mag)
    for kk in np.unique(k):
        mask = k == kk
        lag[mask] = eval_genlaguerre(lo[mask], kk, beta * beta)
    return sign * mag * lag


def default_n_max(params: ModelParams) -> int:
    """Initial photon cutoff: displaced states carry ~beta_max^2 photons
    with beta_max = (g/omega_c) N/2."""
    beta_max = params.g / params.omega_c * params.n_dipoles / 2.0
    return int(math.ceil(beta_max ** 2 + 6.0 * beta_max + 10.0))


def _resolve_n_max(params: ModelParams) -> int:
    return params.n_max if params.n_max is not None else default_n_max(params)


def _photon_major(ph_op, spin_op) -> sp.csr_matrix:
    return sp.kron(sp.csr_matrix(ph_op), sp.csr_matrix(spin_op), format="csr")


def build_edm(params: ModelParams) -> HamiltonianMatrix:
    """Extended Dicke model
    H = wc a'a + w0 Sz + g (a + a') Sx + (g^2/wc)(1+eps) Sx^2 + lambda Sx."""
    n_max = _resolve_n_max(params)
    N = params.n_dipoles
    a, ad, nph = fock_ops(n_max)
    sx, _, sz, _ = collective_spin_ops(N)
    sx2 = sx @ sx
    ident_ph = sp.identity(n_max, format="csr")
    spin_part = (params.omega0 * sz
                 + params.g ** 2 / params.omega_c * (1.0 + params.epsilon) * sx2
                 + params.lambda_bias * sx)
    H = (params.omega_c * _photon_major(nph, np.eye(N + 1))
         + _photon_major(ident_ph, spin_part)
         + params.g * _photon_major(a + ad, sx))
    basis = HilbertBasis(BasisKind.DICKE_FOCK, N, n_max)
    return HamiltonianMatrix(H.tocsr(), basis, params.with_(n_max=n_max))


def _spin_spin(params: ModelParams, coupling: CouplingMatrix, nu: float,
               ops_x) -> sp.csr_matrix:
    """(g^2 N / 4 wc nu) sum_ij D_ij sx_i sx_j on the product space."""
    N = params.n_dipoles
    pref = params.g ** 2 * N / (4.0 * params.omega_c * nu)
    dim = 2 ** N
    out = sp.csr_matrix((dim, dim))
    D = coupling.D
    for i in range(N):
        for j in range(i + 1, N):
            if D[i, j] != 0.0:
                out = out + (2.0 * pref * D[i, j]) * (ops_x[i] @ ops_x[j])
    return out


def build_cqed_full(params: ModelParams, coupling: CouplingMatrix,
                    nu: float) -> HamiltonianMatrix:
    """Full multi-spin cavity Hamiltonian on the 2^N product space.

    The i = j terms of the quadratic coupling contribute the constant
    N g^2 / (4 wc); it is kept so gauge comparisons match absolute spectra.
    """
    N = params.n_dipoles
    n_max = _resolve_n_max(params)
    a, ad, nph = fock_ops(n_max)
    ops_x, _, ops_z = pauli_ops(N)
    dim_s = 2 ** N
    sum_x = sum(ops_x)
    sum_z = sum(ops_z)
    ident_s = sp.identity(dim_s, format="csr")
    # sum_ij sx_i sx_j = (sum_x)^2; the i=j identity terms give the
    # constant N g^2/(4 wc), kept for absolute spectra
    quad = params.g ** 2 / (4.0 * params.omega_c) * (sum_x @ sum_x)
    spin_part = (0.5 * params.omega0 * sum_z
                 + quad
                 + _spin_spin(params, coupling, nu, ops_x)
                 + 0.5 * params.lambda_bias * sum_x)
    ident_ph = sp.identity(n_max, format="csr")
    H = (params.omega_c * _photon_major(nph, ident_s)
         + 0.5 * params.g * _photon_major(a + ad, sum_x)
         + _photon_major(ident_ph, spin_part))
    basis = HilbertBasis(BasisKind.FULL_SPIN_FOCK, N, n_max, full_spin=True)
    return HamiltonianMatrix(H.tocsr(), basis, params.with_(n_max=n_max))


def build_coulomb_tls(params: ModelParams, coupling: CouplingMatrix,
                      nu: float) -> HamiltonianMatrix:
    """Two-level model in the Coulomb gauge.

    H' = wc a'a + (w0/2) sum sz - i (gC/2)(a'-a) sum sy
         - xi_bar^2 (gC^2 N / 4 w0)(a'-a)^2 + D-term,   gC = g w0 / wc.
    The diamagnetic coefficient is evaluated as xi_bar^2 g^2 N w0/(4 wc^2),
    which is regular at w0 = 0.
    """
    N = params.n_dipoles
    n_max = _resolve_n_max(params)
    a, ad, nph = fock_ops(n_max)
    ops_x, ops_my, ops_z = pauli_ops(N)
    dim_s = 2 ** N
    sum_my = sum(ops_my)  # -i sum sigma_y, real antisymmetric
    sum_z = sum(ops_z)
    sum_x = sum(ops_x)
    ident_s = sp.identity(dim_s, format="csr")
    ident_ph = sp.identity(n_max, format="csr")
    g_c = params.g * params.omega0 / params.omega_c
    a_minus = (ad - a).tocsr()
    dia = params.xi_bar ** 2 * params.g ** 2 * N * params.omega0 / (4.0 * params.omega_c ** 2)
    spin_part = (0.5 * params.omega0 * sum_z
                 + _spin_spin(params, coupling, nu, ops_x)
                 + 0.5 * params.lambda_bias * sum_x)
    H = (params.omega_c * _photon_major(nph, ident_s)
         + 0.5 * g_c * _photon_major(a_minus, sum_my)
         - dia * _photon_major(a_minus @ a_minus, ident_s)
         + _photon_major(ident_ph, spin_part))
    basis = HilbertBasis(BasisKind.FULL_SPIN_FOCK, N, n_max, full_spin=True)
    return HamiltonianMatrix(H.tocsr(), basis, params.with_(n_max=n_max))


def build_polaron(params: ModelParams, coupling: Optional[CouplingMatrix] = None,
                  nu: Optional[float] = None, *, collective: bool = False
                  ) -> HamiltonianMatrix:
    """Polaron-frame Hamiltonian
    H~ = wc a'a + D-term + (w0/2)(E S~_- + E' S~_+) + lambda Sx,
    with E = exp((g/wc)(a'-a)) and S~_+- = Sz +- i Sy ladder operators
    with respect to Sx.  Exactly isospectral to the lab-frame model on the
    two-level space (up to photon truncation).

    collective=True replaces the coupling matrix by its average, i.e. the
    polaron frame of the extended Dicke model (D-term -> eps g^2/wc Sx^2).
    """
    N = params.n_dipoles
    n_max = _resolve_n_max(params)
    a, ad, nph = fock_ops(n_max)
    beta = params.g / params.omega_c
    E = displacement_matrix(n_max, beta)
    ident_ph = sp.identity(n_max, format="csr")
    if collective:
        sx, sy, sz, _ = collective_spin_ops(N)
        isy = np.real(1j * sy)  # real antisymmetric
        s_minus = sz - isy      # Sz - i Sy
        s_plus = sz + isy
        spin_static = (params.epsilon * params.g ** 2 / params.omega_c * (sx @ sx)
                       + params.lambda_bias * sx)
        ident_s = np.eye(N + 1)
        basis = HilbertBasis(BasisKind.DICKE_FOCK, N, n_max)
    else:
        if coupling is None or nu is None:
            raise ValueError("full-spin polaron model needs coupling matrix and nu")
        ops_x, ops_my, ops_z = pauli_ops(N)
        sz = 0.5 * sum(ops_z)
        isy = -0.5 * sum(ops_my)  # i Sy = -(1/2) sum(-i sigma_y)  -> real
        s_minus = (sz - isy).toarray()
        s_plus = (sz + isy).toarray()
        spin_static = (_spin_spin(params, coupling, nu, ops_x)
                       + 0.5 * params.lambda_bias * sum(ops_x))
        ident_s = sp.identity(2 ** N, format="csr")
        basis = HilbertBasis(BasisKind.FULL_SPIN_FOCK, N, n_max, full_spin=True)
    H = (params.omega_c * _photon_major(nph, ident_s)
         + _photon_major(ident_ph, spin_static)
         + 0.5 * params.omega0 * (_photon_major(E, s_minus)
                                  + _photon_major(E.T, s_plus)))
    H = 0.5 * (H + H.T)  # truncated E is unitary only up to cutoff tails
    basis_params = params.with_(n_max=n_max)
    return HamiltonianMatrix(H.tocsr(), basis, basis_params)


def build_effective_spin(params: ModelParams) -> HamiltonianMatrix:
    """Renormalized collective spin model for alpha >~ 1:
    H = w0 exp(-pi alpha) Sz + (2 pi alpha eps wc + w0^2/(4 pi alpha wc)) Sx^2."""
    alpha = params.alpha
    if alpha <= 0:
        raise ValueError("effective spin model requires alpha > 0")
    sx, _, sz, _ = collective_spin_ops(params.n_dipoles)
    coeff = (2.0 * math.pi * alpha * params.epsilon * params.omega_c
             + params.omega0 ** 2 / (4.0 * math.pi * alpha * params.omega_c))
    H = (params.omega0 * math.exp(-math.pi * alpha) * sz
         + coeff * (sx @ sx)
         + params.lambda_bias * sx)
    basis = HilbertBasis(BasisKind.SPIN_ONLY, params.n_dipoles)
    return HamiltonianMatrix(sp.csr_matrix(H), basis, params)


def build_lmg(params: ModelParams) -> HamiltonianMatrix:
    """Collective spin model without the cavity:
    H = w0 Sz + eps (g^2/wc) Sx^2 + lambda Sx."""
    sx, _, sz, _ = collective_spin_ops(params.n_dipoles)
    H = (params.omega0 * sz
         + params.epsilon * params.g ** 2 / params.omega_c * (sx @ sx)
         + params.lambda_bias * sx)
    basis = HilbertBasis(BasisKind.SPIN_ONLY, params.n_dipoles)
    return HamiltonianMatrix(sp.csr_matrix(H), basis, params)


def adiabatic_spin_h(params: ModelParams, x: float) -> HamiltonianMatrix:
    """Spin Hamiltonian at clamped field quadrature X:
    H(X) = w0 Sz + sqrt(2) g X Sx + (g^2/wc)(1+eps) Sx^2 + lambda Sx."""
    sx, _, sz, _ = collective_spin_ops(params.n_dipoles)
    H = (params.omega0 * sz
         + math.sqrt(2.0) * params.g * x * sx
         + params.g ** 2 / params.omega_c * (1.0 + params.epsilon) * (sx @ sx)
         + params.lambda_bias * sx)
    basis = HilbertBasis(BasisKind.SPIN_ONLY, params.n_dipoles)
    return HamiltonianMatrix(sp.csr_matrix(H), basis, params)


def parity_operator(basis: HilbertBasis) -> sp.csr_matrix:
    """Z2 parity exp(i pi (a'a + Sz + N/2)), diagonal in the product basis."""
    if basis.kind is BasisKind.SPIN_ONLY:
        raise ValueError("parity operator needs a photon factor")
    N = basis.n_dipoles
    if basis.full_spin:
        bits = np.arange(2 ** N)
        downs = np.zeros(2 ** N, dtype=int)
        for i in range(N):
            downs += (bits >> i) & 1  # set bit = second state of a site = down
        # Sz + N/2 equals the number of up spins
        spin_phase = (N - downs) % 2
    else:
        # index j has m = N/2 - j, so Sz + N/2 = N - j
        spin_phase = (N - np.arange(N + 1)) % 2
    ph_phase = np.arange(basis.n_max) % 2
    diag = np.where((ph_phase[:, None] + spin_phase[None, :]) % 2 == 0, 1.0, -1.0)
    return sp.diags(diag.ravel(), format="csr")
