"""Convex state parcels: hyper-rectangle and vertex-polytope representations.

A parcel denotes the relative interior of a convex set of density matrices.
Floating point cannot represent open sets, so parcels are stored as closed
data (interval endpoints, vertex lists) with a strict-membership tolerance;
degenerate intervals are flagged and denote singletons.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import geometry
from .errors import EmptyIntersectionError, ZeroVolumeError
from .geometry import VolumeResult
from .operators import (
    ObservableBasis,
    as_density_matrix,
    gram_schmidt,
    hs_inner,
    project_to_state,
    vec_herm,
)

STRICT_MEMBERSHIP_TOL = 1e-12
DEGENERATE_TOL = 0.0  # lo == hi exactly marks a singleton coordinate

MEMBER = "member"
BOUNDARY = "boundary"
OUTSIDE = "outside"


@dataclass(frozen=True)
class HyperRectParcel:
    """Open box over an observable basis: ``lo_j < Tr(rho H_j) < hi_j``.

    Coordinates with ``lo == hi`` are degenerate and denote exact values.
    """

    basis: ObservableBasis
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lo, dtype=float)
        hi = np.asarray(self.hi, dtype=float)
        if lo.shape != (self.basis.size,) or hi.shape != (self.basis.size,):
            raise ValueError("lo/hi must have one entry per basis operator")
        if np.any(lo > hi):
            raise ValueError("lo must not exceed hi")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return self.basis.dim

    @property
    def widths(self) -> np.ndarray:
        return self.hi - self.lo

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    @property
    def degenerate_mask(self) -> np.ndarray:
        return self.widths <= DEGENERATE_TOL

    def membership(self, rho: np.ndarray, tol: float = STRICT_MEMBERSHIP_TOL) -> str:
        """Strict membership: points within ``tol`` of a bound are boundary."""
        c = self.basis.coords(rho)
        if np.any(c < self.lo - tol) or np.any(c > self.hi + tol):
            return OUTSIDE
        live = ~self.degenerate_mask
        near_low = np.abs(c - self.lo) < tol
        near_high = np.abs(c - self.hi) < tol
        if np.any((near_low | near_high) & live):
            return BOUNDARY
        if np.any(live & ((c <= self.lo) | (c >= self.hi))):
            return BOUNDARY
        return MEMBER

    def contains(self, rho: np.ndarray, tol: float = STRICT_MEMBERSHIP_TOL) -> bool:
        return self.membership(rho, tol=tol) == MEMBER

    def corners(self) -> np.ndarray:
        """Coordinate rows of all box corners (2^k over non-degenerate axes)."""
        live = np.flatnonzero(~self.degenerate_mask)
        if live.size > 20:
            raise ValueError(f"corner enumeration over {live.size} axes is not supported")
        base = self.center.copy()
        if live.size == 0:
            return base[None, :]
        signs = np.array(list(itertools.product((-1.0, 1.0), repeat=live.size)))
        corners = np.tile(base, (signs.shape[0], 1))
        half = 0.5 * self.widths[live]
        corners[:, live] = self.center[live] + signs * half
        return corners

    def to_vrep(self, *, clip_psd: bool = False) -> "VertexParcel":
        """Outer vertex polytope from corner enumeration.

        With ``clip_psd`` corners outside the PSD cone are projected to the
        boundary (eigenvalue clipping, renormalization) and counted in
        ``clipped``; without it positivity is ignored.
        """
        mats = self.basis.reconstruct_many(self.corners())
        clipped = 0
        if clip_psd:
            out = []
            for mat in mats:
                state, removed = project_to_state(mat)
                out.append(state)
                clipped += int(removed > 1e-12)
            mats = np.stack(out)
        return VertexParcel(vertices=mats, ambient_basis=self.basis, clipped=clipped)


@dataclass(frozen=True)
class VertexParcel:
    """Relative interior of the convex hull of finitely many density matrices.

    ``ambient_basis`` is an orthonormal chart whose span must contain the
    affine span of the vertices (checked to 1e-9); volumes are Lebesgue
    volumes in chart coordinates.
    """

    vertices: np.ndarray
    ambient_basis: ObservableBasis
    clipped: int = 0

    def __post_init__(self) -> None:
        verts = np.asarray(self.vertices, dtype=complex)
        if verts.ndim != 3 or verts.shape[0] == 0 or verts.shape[1] != verts.shape[2]:
            raise ValueError("vertices must be a non-empty (k, d, d) array")
        if verts.shape[1] != self.ambient_basis.dim:
            raise ValueError("vertex dimension does not match ambient basis")
        recon = self.ambient_basis.reconstruct_many(self.ambient_basis.coords_many(verts))
        residual = float(np.max(np.abs(recon - verts)))
        if residual > 1e-9:
            raise ValueError(
                f"ambient basis does not span the vertices (residual {residual:.3e})"
            )
        verts.setflags(write=False)
        object.__setattr__(self, "vertices", verts)

    @property
    def dim(self) -> int:
        return self.vertices.shape[1]

    @property
    def n_vertices(self) -> int:
        return self.vertices.shape[0]

    def coords(self) -> np.ndarray:
        return self.ambient_basis.coords_many(self.vertices)

    @property
    def affine_dim(self) -> int:
        _, frame = geometry.affine_frame(self.coords())
        return frame.shape[0]

    def mixture(self, weights: np.ndarray) -> np.ndarray:
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.n_vertices,) or np.any(w < -1e-12) or abs(w.sum() - 1.0) > 1e-9:
            raise ValueError("weights must be a probability vector over the vertices")
        return np.tensordot(w, self.vertices, axes=1)

    def membership(self, rho: np.ndarray, tol: float = geometry.MEMBERSHIP_TOL) -> str:
        t = geometry.membership_weight(self.basis_coords(rho), self.coords())
        if t < -tol:
            return OUTSIDE
        if t <= tol:
            return BOUNDARY
        return MEMBER

    def contains(self, rho: np.ndarray, tol: float = geometry.MEMBERSHIP_TOL) -> bool:
        """Closed-hull containment (boundary counts)."""
        return self.membership(rho, tol=tol) != OUTSIDE

    def basis_coords(self, rho: np.ndarray) -> np.ndarray:
        return self.ambient_basis.coords(rho)


@dataclass(frozen=True)
class EmptyParcel:
    """Explicit empty-intersection marker ("contradictory observations")."""

    basis: ObservableBasis | None = None


Parcel = HyperRectParcel | VertexParcel


@dataclass(frozen=True)
class SeparationCertificate:
    """Witness of disjointness: a separating observable with a positive gap.

    ``Tr(rho h) >= threshold + gap/2`` on the possible set and
    ``<= threshold - gap/2`` on the impossible set.
    """

    observable: np.ndarray
    threshold: float
    gap: float

    def evolved(self, u: np.ndarray) -> "SeparationCertificate":
        return SeparationCertificate(u @ self.observable @ u.conj().T, self.threshold, self.gap)

    def verify(self, possible: "VertexParcel", impossible: "VertexParcel",
               slack: float = 1e-9) -> bool:
        vals_p = np.einsum("kij,ji->k", possible.vertices, self.observable).real
        vals_i = np.einsum("kij,ji->k", impossible.vertices, self.observable).real
        return bool(
            vals_p.min() >= self.threshold + 0.5 * self.gap - slack
            and vals_i.max() <= self.threshold - 0.5 * self.gap + slack
        )


def certificate_from_separation(sep: geometry.Separation, basis: ObservableBasis) -> SeparationCertificate:
    h = np.tensordot(sep.normal, basis.ops, axes=1)
    return SeparationCertificate(observable=h, threshold=sep.threshold, gap=2.0 * sep.margin)


@dataclass(frozen=True)
class DoubleParcel:
    """A possible parcel plus a disjoint (possibly empty) impossible parcel."""

    possible: Parcel
    impossible: Parcel | EmptyParcel
    certificate: SeparationCertificate | None = None

    def __post_init__(self) -> None:
        if isinstance(self.impossible, EmptyParcel):
            return
        if self.certificate is None:
            cert = _disjointness_certificate(self.possible, self.impossible)
            if cert is None:
                raise ValueError("possible and impossible sets are not certifiably disjoint")
            object.__setattr__(self, "certificate", cert)

    @property
    def has_impossible(self) -> bool:
        return not isinstance(self.impossible, EmptyParcel)


def _parcel_points(p: Parcel) -> tuple[np.ndarray, ObservableBasis]:
    if isinstance(p, HyperRectParcel):
        return p.corners(), p.basis
    return p.coords(), p.ambient_basis


def _disjointness_certificate(a: Parcel, b: Parcel) -> SeparationCertificate | None:
    if isinstance(a, HyperRectParcel) and isinstance(b, HyperRectParcel) and _same_basis(a.basis, b.basis):
        gaps = np.maximum(a.lo - b.hi, b.lo - a.hi)
        j = int(np.argmax(gaps))
        if gaps[j] <= 0:
            return None
        if a.lo[j] - b.hi[j] > 0:  # box a above box b along H_j
            return SeparationCertificate(
                observable=a.basis.ops[j], threshold=0.5 * (a.lo[j] + b.hi[j]), gap=gaps[j]
            )
        return SeparationCertificate(
            observable=-a.basis.ops[j], threshold=-0.5 * (a.hi[j] + b.lo[j]), gap=gaps[j]
        )
    pa, basis_a = _parcel_points(a)
    pb, basis_b = _parcel_points(b)
    if not _same_basis(basis_a, basis_b):
        raise ValueError("disjointness check requires a common ambient basis")
    sep = geometry.separate(pa, pb)
    if sep is None:
        return None
    return certificate_from_separation(sep, basis_a)


def _same_basis(b1: ObservableBasis, b2: ObservableBasis, tol: float = 1e-10) -> bool:
    return b1.size == b2.size and b1.dim == b2.dim and bool(np.max(np.abs(b1.ops - b2.ops)) <= tol)


def experimental_parcel(rho0: np.ndarray, basis: ObservableBasis, eps) -> HyperRectParcel:
    """Box of half-width ``eps_j`` around the coordinates of ``rho0``."""
    rho0 = as_density_matrix(rho0)
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (basis.size,)).copy()
    if np.any(eps <= 0):
        raise ValueError("eps entries must be positive")
    center = basis.coords(rho0)
    return HyperRectParcel(basis=basis, lo=center - eps, hi=center + eps)


def volume(parcel: Parcel) -> VolumeResult:
    """Hilbert-Schmidt volume with its affine dimension.

    H-rep: product of non-degenerate widths. V-rep: Lebesgue volume of the
    vertex hull in the orthonormal chart (a single vertex gives (0.0, 0)).
    """
    if isinstance(parcel, HyperRectParcel):
        live = ~parcel.degenerate_mask
        return VolumeResult(float(np.prod(parcel.widths[live])), int(live.sum()))
    return geometry.hull_volume(parcel.coords())


def information_single(parcel: Parcel) -> float:
    """Reciprocal volume of a single parcel."""
    vol = volume(parcel)
    if vol.value <= 0.0:
        raise ZeroVolumeError("parcel has zero volume; information is infinite")
    return 1.0 / vol.value


def information_double(dp: DoubleParcel) -> float:
    """Impossible-to-possible volume ratio in a common ambient subspace.

    Both volumes are evaluated relative to the affine span of the union of
    the two parcels' points; an impossible set of lower affine dimension
    contributes volume zero, a lower-dimensional possible set is an error.
    """
    if not dp.has_impossible:
        return 0.0
    pts_p, basis = _parcel_points(dp.possible)
    pts_i, _ = _parcel_points(dp.impossible)
    center, frame = geometry.affine_frame(np.vstack([pts_p, pts_i]))
    vol_p = geometry.hull_volume(pts_p, frame=frame, center=center)
    vol_i = geometry.hull_volume(pts_i, frame=frame, center=center)
    if vol_p.value <= 0.0:
        raise ZeroVolumeError("possible set has zero volume in the common subspace")
    return vol_i.value / vol_p.value


def _contained_in(inner: Parcel, outer: Parcel, tol: float = geometry.MEMBERSHIP_TOL) -> bool:
    """Closed containment inner subseteq outer, by representation dispatch."""
    if isinstance(inner, HyperRectParcel) and isinstance(outer, HyperRectParcel):
        if not _same_basis(inner.basis, outer.basis):
            raise ValueError("incomparable representations without a common basis")
        return bool(np.all(inner.lo >= outer.lo - tol) and np.all(inner.hi <= outer.hi + tol))
    pts_inner, basis_inner = _parcel_points(inner)
    if isinstance(outer, HyperRectParcel):
        if not _same_basis(basis_inner, outer.basis):
            raise ValueError("incomparable representations without a common basis")
        return bool(
            np.all(pts_inner >= outer.lo[None, :] - tol)
            and np.all(pts_inner <= outer.hi[None, :] + tol)
        )
    pts_outer, basis_outer = _parcel_points(outer)
    if not _same_basis(basis_inner, basis_outer):
        raise ValueError("incomparable representations without a common basis")
    return all(geometry.membership_weight(p, pts_outer) >= -tol for p in pts_inner)


def leq_single(o: Parcel, o2: Parcel) -> bool:
    """Information order: ``o <= o2`` iff ``o2`` is contained in ``o``."""
    return _contained_in(o2, o)


def leq_double(a: DoubleParcel, b: DoubleParcel) -> bool:
    """``a <= b`` iff b.possible shrinks and b.impossible grows."""
    if not _contained_in(b.possible, a.possible):
        return False
    if not a.has_impossible:
        return True
    if not b.has_impossible:
        return False
    return _contained_in(a.impossible, b.impossible)


def intersect(o: HyperRectParcel, o2: HyperRectParcel) -> HyperRectParcel | EmptyParcel:
    """Coordinatewise interval intersection of two boxes.

    An empty result is a value (contradictory observations), not an error.
    Boxes over different bases are first re-expressed over the orthonormal
    merge of both operator families (an outer approximation).
    """
    if not _same_basis(o.basis, o2.basis):
        merged = merge_bases(o.basis, o2.basis)
        o = rebox(o, merged)
        o2 = rebox(o2, merged)
    lo = np.maximum(o.lo, o2.lo)
    hi = np.minimum(o.hi, o2.hi)
    if np.any(lo > hi):
        return EmptyParcel(basis=o.basis)
    return HyperRectParcel(basis=o.basis, lo=lo, hi=hi)


def merge_bases(b1: ObservableBasis, b2: ObservableBasis) -> ObservableBasis:
    """Gram-Schmidt of the union of two operator families."""
    ops: list[np.ndarray] = list(b1.ops)
    labels: list[str] = list(b1.labels)
    for op, label in zip(b2.ops, b2.labels):
        residual = op.copy()
        for prev in ops:
            residual = residual - hs_inner(prev, residual) * prev
        if float(np.linalg.norm(residual)) >= 1e-10:
            ops.append(op)
            labels.append(label)
    return gram_schmidt(ops, labels)


def rebox(p: HyperRectParcel, basis: ObservableBasis) -> HyperRectParcel:
    """Outer box for ``p`` over a different orthonormal basis.

    Each new interval is the box-interval of the new observable plus a
    spectral slack for its component outside the span of ``p``'s chart, so
    the result contains every state of ``p`` regardless of span mismatch.
    """
    from .intervals import expectation_interval_hrep  # cycle: intervals uses parcels

    los = np.empty(basis.size)
    his = np.empty(basis.size)
    eye = np.eye(p.dim, dtype=complex)
    for j, op in enumerate(basis.ops):
        trace_part, comps = p.basis.coefficients(op)
        parallel = trace_part * eye + np.tensordot(comps, p.basis.ops, axes=1)
        perp = op - parallel
        slack = float(np.max(np.abs(np.linalg.eigvalsh(perp)))) if np.max(np.abs(perp)) > 1e-13 else 0.0
        iv = expectation_interval_hrep(p, op)
        los[j] = iv.lo - slack
        his[j] = iv.hi + slack
    return HyperRectParcel(basis=basis, lo=los, hi=his)


def witness_mixed(parcel: HyperRectParcel, pure: np.ndarray) -> np.ndarray:
    """A mixed member of any box around a pure member.

    Mixes the pure state with an orthogonal pure state at weight
    ``lambda = min(1/2, (1/2) min_i slack_i / M_i)`` where ``M_i`` is the
    basis-expectation difference between the two pure states and ``slack_i``
    the distance of the pure state's coordinate to the nearest bound; the
    result stays in the box and has purity strictly below 1.
    """
    rho = as_density_matrix(pure)
    vals, vecs = np.linalg.eigh(rho)
    if vals[-1] < 1.0 - 1e-9:
        raise ValueError("witness construction requires a rank-1 (pure) state")
    if parcel.membership(rho) != MEMBER:
        raise ValueError("pure state must be a member of the parcel")
    psi = vecs[:, -1]
    phi = vecs[:, 0]  # any eigenvector orthogonal to psi (dim >= 2)
    sigma = np.outer(phi, phi.conj())
    coords = parcel.basis.coords(rho)
    slack = np.minimum(coords - parcel.lo, parcel.hi - coords)
    diffs = np.abs(parcel.basis.coords(sigma) - coords)
    active = diffs > 1e-12
    lam = 0.5 if not np.any(active) else min(0.5, 0.5 * float(np.min(slack[active] / diffs[active])))
    return (1.0 - lam) * rho + lam * sigma


def mc_psd_volume(parcel: HyperRectParcel, samples: int, seed: int,
                  chunk_size: int = 4096) -> tuple[float, float]:
    """Monte Carlo volume of ``box intersect PSD cone``.

    Samples the box uniformly in basis coordinates, reconstructs
    ``rho = I/d + sum_j c_j H_j`` and counts PSD hits; the estimate is the
    hit fraction times the box volume. Sampling is chunked with seeds spawned
    from the master seed, so the result is reproducible and independent of
    how chunks are distributed across workers.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    if not parcel.basis.is_traceless:
        # force the reconstruction-residual error path of the basis
        parcel.basis.reconstruct(parcel.center)
        raise ValueError("mc_psd_volume requires a traceless orthonormal basis")
    widths = parcel.widths
    box_vol = float(np.prod(widths[widths > 0]))
    n_chunks = (samples + chunk_size - 1) // chunk_size
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    hits = 0
    eye = np.eye(parcel.dim, dtype=complex) / parcel.dim
    remaining = samples
    for chunk_seed in seeds:
        n = min(chunk_size, remaining)
        remaining -= n
        rng = np.random.default_rng(chunk_seed)
        coords = parcel.lo + rng.random((n, parcel.basis.size)) * widths
        mats = eye[None, :, :] + np.tensordot(coords, parcel.basis.ops, axes=([1], [0]))
        min_eigs = np.linalg.eigvalsh(mats)[:, 0]
        hits += int(np.sum(min_eigs >= -1e-10))
    frac = hits / samples
    estimate = frac * box_vol
    stderr = box_vol * float(np.sqrt(max(frac * (1.0 - frac), 0.0) / samples))
    return estimate, stderr
