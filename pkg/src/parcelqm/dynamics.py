"""Unitary evolution of parcels in both representations (hbar = 1)."""

from __future__ import annotations

import numpy as np

from .operators import ObservableBasis, as_hermitian
from .parcels import DoubleParcel, EmptyParcel, HyperRectParcel, Parcel, VertexParcel

UNITARITY_TOL = 1e-10


def validate_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError(f"unitary must be square, got {u.shape}")
    defect = np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0])))
    if defect > UNITARITY_TOL:
        raise ValueError(f"matrix is not unitary within {UNITARITY_TOL}: defect {defect:.3e}")
    return u


def propagator(h: np.ndarray, t: float) -> np.ndarray:
    """``exp(-i h t)`` via eigendecomposition of the Hamiltonian."""
    h = as_hermitian(h, name="hamiltonian")
    vals, vecs = np.linalg.eigh(h)
    return (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T


def evolve_vrep(p: VertexParcel, u: np.ndarray) -> VertexParcel:
    """Conjugate every vertex; exact for the hull since conjugation is linear."""
    u = validate_unitary(u)
    if u.shape[0] != p.dim:
        raise ValueError(f"unitary dimension {u.shape[0]} does not match parcel dimension {p.dim}")
    rotated = np.einsum("ab,kbc,dc->kad", u, p.vertices, u.conj())
    return VertexParcel(vertices=rotated, ambient_basis=p.ambient_basis, clipped=p.clipped)


def evolve_hrep(p: HyperRectParcel, u: np.ndarray) -> HyperRectParcel:
    """Keep the intervals, rotate the basis.

    The evolved parcel is charted by ``H_j' = U H_j U^dag`` so that
    ``rho in p  iff  U rho U^dag in evolve_hrep(p, u)``; conjugation is an HS
    isometry, so orthonormality is preserved. Re-expressing over a fixed lab
    basis is a separate, widening step (:func:`parcelqm.parcels.rebox`).
    """
    u = validate_unitary(u)
    rotated_ops = np.einsum("ab,kbc,dc->kad", u, p.basis.ops, u.conj())
    basis = ObservableBasis(ops=rotated_ops, labels=p.basis.labels, scale=p.basis.scale)
    return HyperRectParcel(basis=basis, lo=p.lo.copy(), hi=p.hi.copy())


def evolve_parcel(p: Parcel, u: np.ndarray) -> Parcel:
    if isinstance(p, HyperRectParcel):
        return evolve_hrep(p, u)
    return evolve_vrep(p, u)


def evolve_double(dp: DoubleParcel, u: np.ndarray) -> DoubleParcel:
    """Evolve both components and rotate the disjointness certificate."""
    u = validate_unitary(u)
    possible = evolve_parcel(dp.possible, u)
    impossible = dp.impossible if isinstance(dp.impossible, EmptyParcel) else evolve_parcel(dp.impossible, u)
    certificate = dp.certificate.evolved(u) if dp.certificate is not None else None
    return DoubleParcel(possible=possible, impossible=impossible, certificate=certificate)
