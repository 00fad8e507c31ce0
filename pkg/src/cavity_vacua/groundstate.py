"""Ground-state solvers, observables and vacuum-phase classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.special import gammaln

from .quantum_model import (
    BasisKind,
    HamiltonianMatrix,
    HilbertBasis,
    ModelParams,
    collective_spin_ops,
    default_n_max,
    fock_ops,
    pauli_ops,
)

__all__ = [
    "GroundState",
    "Observables",
    "PhaseLabel",
    "ClassificationResult",
    "DENSE_DIM_LIMIT",
    "solve_ground",
    "converged_ground",
    "measure",
    "entropies",
    "subradiant_overlap",
    "q_function",
    "adiabatic_potential",
    "spin_correlations",
    "classify",
]

DENSE_DIM_LIMIT = 2500
CUTOFF_ENERGY_TOL = 1e-9
MAX_CUTOFF_DOUBLINGS = 6


@dataclass(frozen=True)
class GroundState:
    energy: float
    vector: np.ndarray
    basis: HilbertBasis
    params: Optional[ModelParams] = None
    spectrum: Optional[np.ndarray] = None   # k lowest eigenvalues
    residual: float = 0.0                   # ||H v - E v||
    cutoff_converged: bool = True


def solve_ground(ham: HamiltonianMatrix, k: int = 1) -> GroundState:
    """Lowest eigenpair (and k lowest eigenvalues) of a real symmetric
    Hamiltonian, dense below DENSE_DIM_LIMIT, Lanczos above."""
    H = ham.matrix
    dim = H.shape[0]
    if dim <= DENSE_DIM_LIMIT:
        w, v = np.linalg.eigh(H.toarray())
        energy = float(w[0])
        vec = v[:, 0]
        spec = w[: max(k, 1)].copy()
    else:
        kk = max(k, 6)
        try:
            w, v = spla.eigsh(H, k=min(kk, dim - 1), which="SA")
        except spla.ArpackNoConvergence as err:
            if err.eigenvalues is not None and len(err.eigenvalues) > 0:
                w, v = err.eigenvalues, err.eigenvectors
            else:
                raise
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        energy = float(w[0])
        vec = v[:, 0]
        spec = w[: max(k, 1)].copy()
    res = float(np.linalg.norm(H @ vec - energy * vec))
    # fix the global sign so sweeps produce continuous vectors
    imax = np.argmax(np.abs(vec))
    if vec[imax] < 0:
        vec = -vec
    return GroundState(energy, vec, ham.basis, ham.params, spec, res)


def converged_ground(
    build: Callable[[ModelParams], HamiltonianMatrix],
    params: ModelParams,
    k: int = 1,
    tol: float = CUTOFF_ENERGY_TOL,
    max_doublings: int = MAX_CUTOFF_DOUBLINGS,
) -> GroundState:
    """Solve with the photon cutoff doubled until the ground energy moves
    by less than tol (in units of omega_c)."""
    n_max = params.n_max if params.n_max is not None else default_n_max(params)
    prev = None
    gs = None
    for _ in range(max_doublings + 1):
        gs = solve_ground(build(replace(params, n_max=n_max)), k=k)
        if prev is not None and abs(gs.energy - prev) < tol * params.omega_c:
            return replace(gs, cutoff_converged=True)
        prev = gs.energy
        n_max *= 2
    return replace(gs, cutoff_converged=False)


def _field_spin_ops(state: GroundState):
    """Sparse (a, Sx, Sz, sx_list) in the state's basis; photon ops are
    None for spin-only bases."""
    basis = state.basis
    if basis.kind is BasisKind.SPIN_ONLY:
        sx, _, sz, _ = collective_spin_ops(basis.n_dipoles)
        return None, sp.csr_matrix(sx), sp.csr_matrix(sz), None
    a, _, _ = fock_ops(basis.n_max)
    ident_ph = sp.identity(basis.n_max, format="csr")
    if basis.full_spin:
        ops_x, _, ops_z = pauli_ops(basis.n_dipoles)
        sx_s = 0.5 * sum(ops_x)
        sz_s = 0.5 * sum(ops_z)
    else:
        sx, _, sz, _ = collective_spin_ops(basis.n_dipoles)
        sx_s, sz_s = sp.csr_matrix(sx), sp.csr_matrix(sz)
    dim_s = basis.dim_spin
    A = sp.kron(a, sp.identity(dim_s), format="csr")
    SX = sp.kron(ident_ph, sx_s, format="csr")
    SZ = sp.kron(ident_ph, sz_s, format="csr")
    return A, SX, SZ, None


@dataclass(frozen=True)
class Observables:
    energy: float
    mean_a: float
    photon_number: float
    mean_sx: float
    mean_sz: float
    var_sx: float
    mean_u: float
    u2: float
    phi2: float
    entropy_spin1: float
    entropy_dicke: float

    @property
    def delta_entropy(self) -> float:
        return self.entropy_spin1 - self.entropy_dicke


def _expect(op, v) -> float:
    return float(np.real(np.vdot(v, op @ v)))


def measure(state: GroundState, g: Optional[float] = None,
            omega_c: Optional[float] = None) -> Observables:
    """Ground-state expectation values, including the displaced quadrature
    u = (a + a') + (2 g / wc) Sx and the flux quadrature phi = -i(a' - a)."""
    if state.basis.kind is BasisKind.SPIN_ONLY:
        raise ValueError("measure needs a photon-carrying basis")
    params = state.params
    if g is None:
        g = params.g
    if omega_c is None:
        omega_c = params.omega_c
    A, SX, SZ, _ = _field_spin_ops(state)
    v = state.vector
    AD = A.T.tocsr()
    mean_a = _expect(A, v)
    nph = _expect(AD @ A, v)
    mean_sx = _expect(SX, v)
    mean_sz = _expect(SZ, v)
    var_sx = _expect(SX @ SX, v) - mean_sx ** 2
    U = (A + AD) + (2.0 * g / omega_c) * SX
    mean_u = _expect(U, v)
    u2 = _expect(U @ U, v)
    Aminus = (AD - A).tocsr()
    phi2 = -_expect(Aminus @ Aminus, v)
    s1, sd = entropies(state)
    return Observables(state.energy, mean_a, nph, mean_sx, mean_sz, var_sx,
                       mean_u, u2, phi2, s1, sd)


def _h2(pvals: np.ndarray) -> float:
    p = pvals[pvals > 1e-15]
    return float(-(p * np.log2(p)).sum())


def reduced_spin_density(state: GroundState) -> np.ndarray:
    """Density matrix of the dipole subsystem after tracing out photons."""
    basis = state.basis
    psi = state.vector.reshape(basis.n_max, basis.dim_spin)
    return psi.conj().T @ psi


def entropies(state: GroundState) -> tuple[float, float]:
    """(single-dipole entropy S1, dipole-subsystem entropy Sd), in bits."""
    basis = state.basis
    rho_d = reduced_spin_density(state)
    sd = _h2(np.clip(np.linalg.eigvalsh(rho_d), 0.0, None))
    if basis.full_spin:
        psi = state.vector.reshape(basis.n_max, 2, 2 ** (basis.n_dipoles - 1))
        rho1 = np.einsum("nsr,ntr->st", psi, psi.conj())
    else:
        # permutation-symmetric state: rho1 = (1 + r . sigma)/2 with
        # r_k = 2 <S_k>/N taken in the dipole reduced state
        N = basis.n_dipoles
        sx, sy, sz, _ = collective_spin_ops(N)
        r = np.array([np.real(np.trace(rho_d @ o)) for o in (sx, sy, sz)]) * 2.0 / N
        rnorm = np.linalg.norm(r)
        p = np.array([(1.0 + rnorm) / 2.0, (1.0 - rnorm) / 2.0])
        return _h2(p), sd
    s1 = _h2(np.clip(np.linalg.eigvalsh(rho1), 0.0, None))
    return s1, sd


def subradiant_overlap(state: GroundState) -> float:
    """|<ground | vac, m_x = 0>|^2 with the zero-eigenvalue Sx eigenstate
    (even N) in the photon vacuum."""
    basis = state.basis
    if basis.full_spin or basis.kind is BasisKind.SPIN_ONLY:
        raise ValueError("overlap is defined on the Dicke-Fock basis")
    N = basis.n_dipoles
    if N % 2 != 0:
        raise ValueError("the m_x = 0 dark state exists only for even N")
    sx, _, _, _ = collective_spin_ops(N)
    w, v = np.linalg.eigh(sx)
    idx = int(np.argmin(np.abs(w)))
    dark = v[:, idx]
    psi = state.vector.reshape(basis.n_max, basis.dim_spin)
    amp = psi[0] @ dark
    return float(np.abs(amp) ** 2)


def q_function(state: GroundState, n_theta: int = 91, n_phi: int = 181):
    """Spin Husimi function Q(theta, phi) = <theta,phi| rho_d |theta,phi>
    of the dipole reduced state on the collective Bloch sphere.

    Returns (theta, phi, Q) with Q of shape (n_theta, n_phi); a maximally
    mixed rho_d gives the constant 1/(N+1).
    """
    basis = state.basis
    if basis.full_spin or basis.kind is BasisKind.SPIN_ONLY:
        raise ValueError("q_function is defined on the Dicke-Fock basis")
    N = basis.n_dipoles
    rho_d = reduced_spin_density(state)
    theta = np.linspace(0.0, math.pi, n_theta)
    phi = np.linspace(-math.pi, math.pi, n_phi)
    kk = np.arange(N + 1)
    log_binom = gammaln(N + 1) - gammaln(kk + 1) - gammaln(N - kk + 1)
    # |theta,phi> on |S, m = S-k>: sqrt(C(N,k)) cos^(N-k)(t/2) (e^{i phi} sin(t/2))^k
    ct = np.cos(theta / 2.0)[:, None]
    st = np.sin(theta / 2.0)[:, None]
    with np.errstate(divide="ignore"):
        log_mag = (0.5 * log_binom[None, :]
                   + (N - kk)[None, :] * np.log(np.maximum(ct, 1e-300))
                   + kk[None, :] * np.log(np.maximum(st, 1e-300)))
    mag = np.exp(log_mag)                      # (n_theta, N+1)
    phase = np.exp(1j * np.outer(phi, kk))     # (n_phi, N+1)
    coh = mag[:, None, :] * phase[None, :, :]  # (n_theta, n_phi, N+1)
    q = np.einsum("tpk,kl,tpl->tp", coh.conj(), rho_d, coh).real
    return theta, phi, q


def adiabatic_potential(params: ModelParams, x_grid: np.ndarray) -> np.ndarray:
    """Field-quadrature potential V(X) = X^2/2 + E0_spin(X) obtained by
    clamping the photon quadrature and minimizing over the dipoles."""
    from .quantum_model import adiabatic_spin_h

    out = np.empty_like(np.asarray(x_grid, dtype=float))
    for i, x in enumerate(np.asarray(x_grid, dtype=float)):
        w = np.linalg.eigvalsh(adiabatic_spin_h(params, x).toarray())
        out[i] = 0.5 * x * x + w[0]
    return out


def spin_correlations(state: GroundState,
                      pairs: Sequence[tuple[int, int]]) -> np.ndarray:
    """<sigma_x^i sigma_x^j> for the given site pairs (product basis only)."""
    basis = state.basis
    if not basis.full_spin:
        raise ValueError("site-resolved correlations need the product basis")
    ops_x, _, _ = pauli_ops(basis.n_dipoles)
    ident_ph = sp.identity(basis.n_max, format="csr")
    v = state.vector
    out = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        op = sp.kron(ident_ph, ops_x[i] @ ops_x[j], format="csr")
        out[k] = _expect(op, v)
    return out


class PhaseLabel(str, enum.Enum):
    NORMAL = "normal"
    SUPERRADIANT = "superradiant"
    SUBRADIANT = "subradiant"


@dataclass(frozen=True)
class ClassificationResult:
    labels: list
    superradiant_onset: Optional[float]   # coupling where Var Sx peaks (eps<0)
    subradiant_onset: Optional[float]     # first coupling with d<n>/dg < 0
    field_jump: Optional[float]           # coupling with the largest |d<a>|


def classify(g_values: Sequence[float], observables: Sequence[Observables],
             epsilon: float) -> ClassificationResult:
    """Label each point of a coupling sweep as normal / superradiant /
    subradiant from the sweep-level witnesses:

    - superradiant onset (eps < 0): position of the Var(Sx) maximum;
    - subradiant onset: first point where the centered finite difference
      of the photon number is negative;
    - field jump: largest step in <a>, flagging a first-order boundary.
    """
    g = np.asarray(g_values, dtype=float)
    if g.size < 8:
        raise ValueError("classification needs at least 8 sweep points")
    if np.any(np.diff(g) <= 0):
        raise ValueError("coupling values must be strictly increasing")
    nph = np.array([o.photon_number for o in observables])
    var_sx = np.array([o.var_sx for o in observables])
    mean_a = np.array([o.mean_a for o in observables])

    dn = np.gradient(nph, g)
    deriv_tol = -1e-8 * max(1.0, np.max(np.abs(nph)))
    neg = dn < deriv_tol
    subradiant_onset = float(g[np.argmax(neg)]) if np.any(neg) else None

    superradiant_onset = None
    if epsilon < 0:
        ipk = int(np.argmax(var_sx))
        if 0 < ipk:
            superradiant_onset = float(g[ipk])

    da = np.abs(np.diff(mean_a))
    field_jump = None
    if da.max() > 0.25 * max(np.abs(mean_a).max(), 1e-12) and da.max() > 0.1:
        field_jump = float(0.5 * (g[np.argmax(da)] + g[np.argmax(da) + 1]))

    labels = []
    for i, gi in enumerate(g):
        if neg[i] and (superradiant_onset is None or gi < superradiant_onset
                       or abs(mean_a[i]) < 0.1):
            labels.append(PhaseLabel.SUBRADIANT)
        elif superradiant_onset is not None and gi >= superradiant_onset:
            labels.append(PhaseLabel.SUPERRADIANT)
        elif subradiant_onset is not None and gi >= subradiant_onset and nph[i] < nph.max():
            labels.append(PhaseLabel.SUBRADIANT)
        else:
            labels.append(PhaseLabel.NORMAL)
    return ClassificationResult(labels, superradiant_onset, subradiant_onset,
                                field_jump)
