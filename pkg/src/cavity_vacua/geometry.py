"""Dipole lattices and dipole-dipole coupling matrices.

All lengths are measured in units of the nearest-neighbour distance r0.
Dipoles sit between metallic plates at z = 0 and z = d (or in free space)
and point along the common unit vector u = (sin(theta), 0, cos(theta)).
The dimensionless coupling matrix D_ij carries the full spatial dependence
of the dipole-dipole interaction; its average eta = (1/N) sum_{i!=j} D_ij
and the filling factor nu = N r0^3 / V are the two scalars that feed the
collective models.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "Boundary",
    "DipoleEnsemble",
    "CouplingMatrix",
    "LatticeSpec",
    "GeometryError",
    "build_lattice",
    "slab_square",
    "line_stack",
    "triangular_layer",
    "tilted_line",
    "pair_of_pairs",
    "coupling_free_space",
    "coupling_with_plates",
    "coupling_matrix",
    "greens_fourier",
    "eta_of",
    "filling_factor",
    "induced_charge_coefficient",
]


class GeometryError(ValueError):
    """Raised when a requested geometry is unphysical."""


class Boundary(enum.Enum):
    FREE_SPACE = "free_space"
    INFINITE_PLATES = "infinite_plates"


@dataclass(frozen=True)
class DipoleEnsemble:
    """N point dipoles at fixed positions with a common tilt.

    positions are (N, 3) in units of r0.  With INFINITE_PLATES boundaries
    all z coordinates must lie strictly between 0 and plate_separation_d.
    """

    positions: np.ndarray
    tilt_theta: float = 0.0
    r0: float = 1.0
    plate_separation_d: Optional[float] = None
    boundary: Boundary = Boundary.FREE_SPACE
    image_cutoff: int = 50
    volume: Optional[float] = None

    def __post_init__(self):
        pos = np.atleast_2d(np.asarray(self.positions, dtype=float))
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must have shape (N, 3)")
        if pos.shape[0] < 1:
            raise ValueError("need at least one dipole")
        object.__setattr__(self, "positions", pos)
        if self.image_cutoff < 0:
            raise ValueError("image_cutoff must be >= 0")
        if self.boundary is Boundary.INFINITE_PLATES:
            d = self.plate_separation_d
            if d is None or d <= 0:
                raise GeometryError("plate boundaries require plate_separation_d > 0")
            z = pos[:, 2]
            if np.any(z <= 0) or np.any(z >= d):
                raise GeometryError("all dipoles must satisfy 0 < z < d")
        if 1 < self.n <= 2000:  # O(N^2) check; huge ensembles skip the warning
            dists = _pair_distances(pos)
            dmin = dists[dists > 0].min() if np.any(dists > 0) else 0.0
            if dmin < 0.999 * self.r0:
                warnings.warn(
                    f"minimal pair distance {dmin:.4g} below r0; "
                    "point-dipole couplings grow as 1/r^3",
                    stacklevel=2,
                )

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def unit_vector(self) -> np.ndarray:
        th = self.tilt_theta
        return np.array([math.sin(th), 0.0, math.cos(th)])


@dataclass(frozen=True)
class CouplingMatrix:
    """Symmetric dimensionless coupling matrix with its summary scalars."""

    D: np.ndarray
    eta: float
    nu: Optional[float]
    boundary: Boundary
    image_cutoff: int = 0
    max_truncation_residual: float = 0.0
    self_interaction: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.D.shape[0]


@dataclass(frozen=True)
class LatticeSpec:
    """Named lattice recipe; see build_lattice for the parameter map."""

    kind: str
    nx: int = 0
    layers: int = 1
    n: int = 1
    d: float = 10.0
    theta: float = 0.0
    dx: float = 1.0
    volume: Optional[float] = None
    boundary: Boundary = Boundary.INFINITE_PLATES
    image_cutoff: int = 50


def _pair_distances(pos: np.ndarray) -> np.ndarray:
    diff = pos[:, None, :] - pos[None, :, :]
    return np.linalg.norm(diff, axis=-1)


def _centered_heights(count: int, d: float, spacing: float = 1.0) -> np.ndarray:
    span = (count - 1) * spacing
    if span >= d:
        raise GeometryError(f"layer extent {span} does not fit between plates d={d}")
    return d / 2.0 + spacing * (np.arange(count) - (count - 1) / 2.0)


def slab_square(nx: int, layers: int, d: float, *, boundary: Boundary = Boundary.INFINITE_PLATES,
                image_cutoff: int = 50) -> DipoleEnsemble:
    """layers x nx x nx dipoles on a square lattice, centered between the plates.

    The slab thickness h = layers * r0 fixes the filling factor nu = h/d for
    the default volume A*d with A = (nx*r0)^2.
    """
    if nx < 1 or layers < 1:
        raise ValueError("nx and layers must be positive")
    zs = _centered_heights(layers, d)
    x, y = np.meshgrid(np.arange(nx, dtype=float), np.arange(nx, dtype=float), indexing="ij")
    pts = []
    for z in zs:
        layer = np.column_stack([x.ravel(), y.ravel(), np.full(nx * nx, z)])
        pts.append(layer)
    pos = np.vstack(pts)
    return DipoleEnsemble(pos, 0.0, 1.0, d, boundary, image_cutoff, volume=nx * nx * d)


def line_stack(n: int, d: float, *, boundary: Boundary = Boundary.INFINITE_PLATES,
               image_cutoff: int = 50) -> DipoleEnsemble:
    """n dipoles stacked on top of each other along z, centered at d/2."""
    if n < 1:
        raise ValueError("n must be positive")
    zs = _centered_heights(n, d)
    pos = np.column_stack([np.zeros(n), np.zeros(n), zs])
    return DipoleEnsemble(pos, 0.0, 1.0, d, boundary, image_cutoff, volume=float(n * d))


def triangular_layer(nx: int, d: float, *, boundary: Boundary = Boundary.INFINITE_PLATES,
                     image_cutoff: int = 50) -> DipoleEnsemble:
    """Single nx x nx layer on a triangular lattice at z = d/2."""
    if nx < 1:
        raise ValueError("nx must be positive")
    rows = []
    for j in range(nx):
        x = np.arange(nx, dtype=float) + 0.5 * (j % 2)
        y = np.full(nx, j * math.sqrt(3.0) / 2.0)
        rows.append(np.column_stack([x, y, np.full(nx, d / 2.0)]))
    pos = np.vstack(rows)
    vol = nx * nx * math.sqrt(3.0) / 2.0 * d
    return DipoleEnsemble(pos, 0.0, 1.0, d, boundary, image_cutoff, volume=vol)


def tilted_line(n: int, d: float, theta: float, *, boundary: Boundary = Boundary.INFINITE_PLATES,
                image_cutoff: int = 50) -> DipoleEnsemble:
    """n dipoles on a line along x at z = d/2, all tilted by theta."""
    if n < 1:
        raise ValueError("n must be positive")
    pos = np.column_stack([np.arange(n, dtype=float), np.zeros(n), np.full(n, d / 2.0)])
    return DipoleEnsemble(pos, theta, 1.0, d, boundary, image_cutoff, volume=float(n * d))


def pair_of_pairs(dx: float, d: float, *, boundary: Boundary = Boundary.INFINITE_PLATES,
                  image_cutoff: int = 50, volume: Optional[float] = None) -> DipoleEnsemble:
    """Two vertical dipole pairs (separation r0) a horizontal distance dx apart."""
    if dx <= 0:
        raise ValueError("dx must be positive")
    zs = _centered_heights(2, d)
    pos = np.array([
        [0.0, 0.0, zs[0]],
        [0.0, 0.0, zs[1]],
        [dx, 0.0, zs[0]],
        [dx, 0.0, zs[1]],
    ])
    if volume is None:
        # Fig. 7 convention: nu = 1/(4 pi)
        volume = 16.0 * math.pi
    return DipoleEnsemble(pos, 0.0, 1.0, d, boundary, image_cutoff, volume=volume)


_BUILDERS = {
    "slab_square": lambda s: slab_square(s.nx, s.layers, s.d, boundary=s.boundary,
                                         image_cutoff=s.image_cutoff),
    "line_stack": lambda s: line_stack(s.n, s.d, boundary=s.boundary, image_cutoff=s.image_cutoff),
    "triangular_layer": lambda s: triangular_layer(s.nx, s.d, boundary=s.boundary,
                                                   image_cutoff=s.image_cutoff),
    "tilted_line": lambda s: tilted_line(s.n, s.d, s.theta, boundary=s.boundary,
                                         image_cutoff=s.image_cutoff),
    "pair_of_pairs": lambda s: pair_of_pairs(s.dx, s.d, boundary=s.boundary,
                                             image_cutoff=s.image_cutoff, volume=s.volume),
}


def build_lattice(spec: LatticeSpec) -> DipoleEnsemble:
    """Construct the dipole ensemble described by a LatticeSpec."""
    try:
        builder = _BUILDERS[spec.kind]
    except KeyError:
        raise ValueError(f"unknown lattice kind {spec.kind!r}; "
                         f"expected one of {sorted(_BUILDERS)}") from None
    ens = builder(spec)
    if spec.volume is not None and ens.volume != spec.volume:
        ens = DipoleEnsemble(ens.positions, ens.tilt_theta, ens.r0, ens.plate_separation_d,
                             ens.boundary, ens.image_cutoff, volume=spec.volume)
    return ens


def _dipole_term(diff: np.ndarray, u_obs: np.ndarray, u_src: np.ndarray,
                 r0: float) -> np.ndarray:
    """Dimensionless interaction of unit dipoles u_obs (field point) and
    u_src (source) separated by diff, in units of r0^3/(4 pi)."""
    r2 = np.einsum("...k,...k->...", diff, diff)
    pu = diff @ u_obs
    ps = diff @ u_src
    with np.errstate(divide="ignore", invalid="ignore"):
        out = (r0 ** 3 / (4.0 * math.pi)) * (
            float(u_obs @ u_src) * r2 - 3.0 * pu * ps
        ) / r2 ** 2.5
    return out


def coupling_free_space(ens: DipoleEnsemble) -> CouplingMatrix:
    """Free-space coupling matrix; D_ii = 0 by convention."""
    pos = ens.positions
    n = ens.n
    diff = pos[:, None, :] - pos[None, :, :]
    if n > 1:
        r = np.linalg.norm(diff, axis=-1)
        off = ~np.eye(n, dtype=bool)
        if np.any(r[off] == 0.0):
            raise GeometryError("coincident dipoles")
    u = ens.unit_vector
    D = _dipole_term(diff, u, u, ens.r0)
    np.fill_diagonal(D, 0.0)
    nu = None
    if ens.volume is not None:
        nu = filling_factor(ens, ens.volume)
    return CouplingMatrix(D, eta_of_matrix(D), nu, Boundary.FREE_SPACE)


def _image_sum(ens: DipoleEnsemble, cutoff: int) -> tuple[np.ndarray, np.ndarray]:
    """Image contribution to D for |n| <= cutoff plus the last-order increment.

    Mirror copies of each dipole appear at z -> z_j + 2dn (same moment,
    n != 0) and z -> -z_j + 2dn (x component of the moment flipped, all n).
    """
    pos = ens.positions
    d = ens.plate_separation_d
    u = ens.unit_vector
    u_ref = np.array([-u[0], u[1], u[2]])
    refl = pos * np.array([1.0, 1.0, -1.0])

    total = np.zeros((ens.n, ens.n))
    last = np.zeros_like(total)
    diff_same = pos[:, None, :] - pos[None, :, :]
    diff_refl = pos[:, None, :] - refl[None, :, :]
    for n in range(-cutoff, cutoff + 1):
        shift = np.array([0.0, 0.0, 2.0 * d * n])
        term = _dipole_term(diff_refl - shift, u, u_ref, ens.r0)
        if n != 0:
            term = term + _dipole_term(diff_same - shift, u, u, ens.r0)
        total += term
        if abs(n) == cutoff:
            last += np.abs(term)
    return total, last


def coupling_with_plates(ens: DipoleEnsemble, *, auto_tol: float = 1e-8,
                         max_doublings: int = 6) -> CouplingMatrix:
    """Coupling matrix between infinite metallic plates via image charges.

    The image series is truncated at |n| <= image_cutoff and the cutoff is
    doubled until the per-entry change of the last order drops below
    auto_tol (terms decay as 1/n^3).
    """
    if ens.boundary is not Boundary.INFINITE_PLATES:
        raise GeometryError("ensemble does not have plate boundaries")
    if ens.image_cutoff < 1:
        raise ValueError("image_cutoff must be >= 1 for plate boundaries")

    free = coupling_free_space(
        DipoleEnsemble(ens.positions, ens.tilt_theta, ens.r0, ens.plate_separation_d,
                       Boundary.FREE_SPACE, 0, volume=ens.volume))

    cutoff = ens.image_cutoff
    images, last = _image_sum(ens, cutoff)
    residual = float(last.max())
    for _ in range(max_doublings):
        if residual < auto_tol:
            break
        cutoff *= 2
        images, last = _image_sum(ens, cutoff)
        residual = float(last.max())

    D = free.D + images
    self_int = np.diag(images).copy()
    np.fill_diagonal(D, 0.0)
    D = 0.5 * (D + D.T)
    nu = None
    if ens.volume is not None:
        nu = filling_factor(ens, ens.volume)
    return CouplingMatrix(D, eta_of_matrix(D), nu, Boundary.INFINITE_PLATES,
                          image_cutoff=cutoff, max_truncation_residual=residual,
                          self_interaction=self_int)


def coupling_matrix(ens: DipoleEnsemble) -> CouplingMatrix:
    """Dispatch on the ensemble boundary."""
    if ens.boundary is Boundary.INFINITE_PLATES:
        return coupling_with_plates(ens)
    return coupling_free_space(ens)


def greens_fourier(k: float, z: float, zp: float, d: float) -> float:
    """In-plane Fourier transform of the slab Green's function.

    Vanishes on the plates z = 0 and z = d; the k = 0 value is the closed
    limit min(z, z') - z z' / d.
    """
    if not (0.0 <= z <= d and 0.0 <= zp <= d):
        raise ValueError("z and z' must lie inside [0, d]")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0.0:
        return min(z, zp) - z * zp / d
    lo, hi = (zp, z) if z >= zp else (z, zp)
    direct = math.exp(-k * (hi - lo)) / (2.0 * k)
    # sinh ratios expanded in decaying exponentials so that kd >> 1 does not
    # overflow: sinh(kx)/sinh(kd) = (e^{-k(d-x)} - e^{-k(d+x)}) / (1 - e^{-2kd})
    denom = 1.0 - math.exp(-2.0 * k * d)
    ratio_hi = (math.exp(-k * (d - hi)) - math.exp(-k * (d + hi))) / denom
    ratio_dhi = (math.exp(-k * hi) - math.exp(-k * (2 * d - hi))) / denom
    plate = ratio_hi * math.exp(-k * (d - lo)) + ratio_dhi * math.exp(-k * lo)
    return direct - plate / (2.0 * k)


def eta_of_matrix(D: np.ndarray) -> float:
    """eta = (1/N) sum_{i != j} D_ij."""
    n = D.shape[0]
    off = D.sum() - np.trace(D)
    return float(off / n)


def eta_of(coupling: CouplingMatrix) -> float:
    return eta_of_matrix(coupling.D)


def bulk_eta(ens: DipoleEnsemble, center: Optional[int] = None) -> float:
    """Single-site estimate of eta: sum_j D_ij for the dipole closest to the
    ensemble centroid.

    For a homogeneous sample this is the bulk (N -> infinity) limit of
    eta_of, free of the edge deficit that makes the sample average converge
    only as log(N)/sqrt(N) for planar lattices.  O(N * image_cutoff) cost.
    """
    pos = ens.positions
    if center is None:
        center = int(np.argmin(np.linalg.norm(pos - pos.mean(axis=0), axis=1)))
    u = ens.unit_vector
    diff = pos[center][None, :] - pos
    row = _dipole_term(diff, u, u, ens.r0)
    row[center] = 0.0
    total = float(row.sum())
    if ens.boundary is Boundary.INFINITE_PLATES:
        d = ens.plate_separation_d
        u_ref = np.array([-u[0], u[1], u[2]])
        refl = pos * np.array([1.0, 1.0, -1.0])
        diff_refl = pos[center][None, :] - refl
        for n in range(-ens.image_cutoff, ens.image_cutoff + 1):
            shift = np.array([0.0, 0.0, 2.0 * d * n])
            term = _dipole_term(diff_refl - shift, u, u_ref, ens.r0)
            total += float(term.sum())
            if n != 0:
                same = _dipole_term(diff - shift, u, u, ens.r0)
                total += float(same.sum())
        # the reflected n-sums above include the self-interaction of the
        # center dipole with its own images; drop it like the matrix path
        self_term = 0.0
        diff_self_refl = pos[center][None, :] - refl[center][None, :]
        for n in range(-ens.image_cutoff, ens.image_cutoff + 1):
            shift = np.array([0.0, 0.0, 2.0 * d * n])
            self_term += float(_dipole_term(diff_self_refl - shift, u, u_ref, ens.r0)[0])
            if n != 0:
                self_term += float(_dipole_term(np.array([[0.0, 0.0, -2.0 * d * n]]),
                                                u, u, ens.r0)[0])
        total -= self_term
    return total


def filling_factor(ens: DipoleEnsemble, volume: float) -> float:
    """nu = N r0^3 / V."""
    if volume <= 0:
        raise ValueError("volume must be positive")
    nu = ens.n * ens.r0 ** 3 / volume
    if not (0.0 < nu <= 1.0):
        warnings.warn(f"filling factor {nu:.4g} outside (0, 1]", stacklevel=2)
    return nu


def induced_charge_coefficient(ens: DipoleEnsemble) -> float:
    """Total plate charge per unit q*sum(xi): -cos(theta)/d."""
    if ens.boundary is not Boundary.INFINITE_PLATES:
        raise GeometryError("induced charge requires plate boundaries")
    return -math.cos(ens.tilt_theta) / ens.plate_separation_d
