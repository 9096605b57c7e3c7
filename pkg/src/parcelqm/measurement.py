"""Fuzzy POVMs and measurement updates on states and parcels.

Effects are ``E_i = eta P_i + (1 - eta)/k I`` for an orthogonal projector
family ``P_i`` and sharpness ``eta``; the noise denominator ``k`` is explicit
because different constructions divide by the number of outcomes, by the
dimension, or by a stated constant. Kraus operators are the positive square
roots ``M_i = sqrt(E_i)``, and a recorded outcome updates a state as
``rho -> M rho M^dag / Tr(rho E)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import geometry
from .errors import ConditionError, DisjointnessError, VanishingProbabilityError
from .geometry import VolumeResult
from .intervals import RealInterval
from .operators import as_hermitian, operator_sqrt, trace_norm
from .parcels import (
    DoubleParcel,
    EmptyParcel,
    HyperRectParcel,
    SeparationCertificate,
    VertexParcel,
    certificate_from_separation,
    volume,
)

POSITIVITY_THRESHOLD = 1e-6
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class FuzzyPOVM:
    """Projector family smoothed by sharpness ``eta`` and noise ``1/k``.

    ``eta = 1`` is the sharp limit (rank-deficient Kraus operators), allowed
    for state-level updates but rejected for parcel-level updates. The
    effects sum to the identity exactly when ``k`` equals the number of
    outcomes; other conventions give a valid effect per outcome without
    completeness, which is recorded in ``complete``.
    """

    projectors: np.ndarray
    eta: float
    k: float
    effects: np.ndarray
    kraus: np.ndarray
    complete: bool

    @property
    def n_outcomes(self) -> int:
        return self.projectors.shape[0]

    @property
    def dim(self) -> int:
        return self.projectors.shape[1]

    @property
    def sharp(self) -> bool:
        return self.eta == 1.0

    @property
    def ranks(self) -> np.ndarray:
        return np.round(np.trace(self.projectors, axis1=1, axis2=2).real).astype(int)


def build_fuzzy_povm(projectors, eta: float, noise_denominator="outcomes") -> FuzzyPOVM:
    """Validate a projector family and derive effects and Kraus roots.

    ``noise_denominator`` is ``"outcomes"``, ``"dimension"`` or an explicit
    positive number.
    """
    projs = np.stack([as_hermitian(p, name="projector") for p in projectors])
    m, d = projs.shape[0], projs.shape[1]
    if not (0.0 < eta <= 1.0):
        raise ValueError(f"eta must satisfy 0 < eta <= 1, got {eta}")
    for i in range(m):
        if np.max(np.abs(projs[i] @ projs[i] - projs[i])) > 1e-9:
            raise ValueError(f"projector {i} is not idempotent")
        for j in range(i + 1, m):
            if np.max(np.abs(projs[i] @ projs[j])) > 1e-9:
                raise ValueError(f"projectors {i} and {j} are not orthogonal")
    if np.max(np.abs(projs.sum(axis=0) - np.eye(d))) > 1e-9:
        raise ValueError("projector family is incomplete (does not sum to identity)")
    if noise_denominator == "outcomes":
        k = float(m)
    elif noise_denominator == "dimension":
        k = float(d)
    else:
        k = float(noise_denominator)
        if k <= 0:
            raise ValueError("noise denominator must be positive")
    eye = np.eye(d, dtype=complex)
    effects = eta * projs + (1.0 - eta) / k * eye[None, :, :]
    kraus = np.stack([operator_sqrt(e) for e in effects])
    complete = abs(k - m) < 1e-12
    if complete:
        total = effects.sum(axis=0)
        if np.max(np.abs(total - eye)) > 1e-10:
            raise ValueError("effects do not sum to the identity")
    return FuzzyPOVM(projectors=projs, eta=float(eta), k=k, effects=effects,
                     kraus=kraus, complete=complete)


def kraus_update_state(rho: np.ndarray, povm: FuzzyPOVM, j: int) -> tuple[np.ndarray, float]:
    """Normalized post-measurement state and outcome probability ``Tr(rho E_j)``."""
    rho = np.asarray(rho, dtype=complex)
    prob = float(np.einsum("ij,ji->", rho, povm.effects[j]).real)
    if prob <= PROBABILITY_FLOOR:
        raise VanishingProbabilityError(f"outcome {j} has probability {prob:.3e}")
    m = povm.kraus[j]
    post = m @ rho @ m.conj().T / prob
    return 0.5 * (post + post.conj().T), prob


def bloch_update_closed_form(x: float, y: float, z: float, eta: float) -> tuple[float, float, float]:
    """Closed-form qubit update for the outcome along +z.

    ``x' = sqrt(1-eta^2) x / (1 + eta z)`` and likewise for y, while
    ``z' = (z + eta)/(1 + eta z)``; matches the matrix-level Kraus update
    through the Bloch round-trip.
    """
    if x * x + y * y + z * z > 1.0 + 1e-10:
        raise ValueError("Bloch vector outside the closed unit ball")
    denom = 1.0 + eta * z
    if denom <= PROBABILITY_FLOOR:
        raise VanishingProbabilityError("antipodal sharp case: denominator vanishes")
    shrink = np.sqrt(max(1.0 - eta * eta, 0.0))
    return shrink * x / denom, shrink * y / denom, (z + eta) / denom


def qubit_jacobian(z: float, eta: float) -> float:
    """Volume scaling of the qubit update at height ``z``.

    ``(1 - eta^2)^2 / (1 + eta z)^4``; metric-independent, so it applies to
    Bloch volume and HS volume alike.
    """
    denom = 1.0 + eta * z
    if denom <= 0.0:
        raise ValueError("singular denominator: 1 + eta z must be positive")
    return (1.0 - eta * eta) ** 2 / denom**4


def eta_threshold_qubit(c: float) -> float:
    """Sharpness above which the qubit update contracts any set with
    outcome-probability floor ``c``; zero when ``c >= 1/2``."""
    if c <= 0.0:
        raise ValueError("c must be positive")
    if c >= 0.5:
        return 0.0
    u = 1.0 - 2.0 * c
    return 2.0 * u / (1.0 + u * u)


def nqubit_jacobian(rho: np.ndarray, povm: FuzzyPOVM, j: int) -> float:
    """Volume scaling of the rank-r update in dimension d.

    ``(det M_j)^{2d} / Tr(rho E_j)^{d^2}`` with
    ``det M_j = (eta + (1-eta)/k)^{r/2} ((1-eta)/k)^{(d-r)/2}``. The trace
    exponent is ``d^2`` (not ``d^2 - 1``): the linear part scales the full
    d^2-dimensional operator space by ``(det M)^{2d}``, and restricting to
    the trace-one affine slice costs one extra normalization power, as the
    d = 2 closed form and finite differences confirm.
    """
    if povm.sharp:
        raise ValueError("Jacobian requires eta < 1")
    d = povm.dim
    r = int(povm.ranks[j])
    eta, k = povm.eta, povm.k
    det_m = (eta + (1.0 - eta) / k) ** (r / 2.0) * ((1.0 - eta) / k) ** ((d - r) / 2.0)
    prob = float(np.einsum("ij,ji->", np.asarray(rho, dtype=complex), povm.effects[j]).real)
    if prob <= 0.0:
        raise VanishingProbabilityError("outcome probability vanishes")
    return det_m ** (2 * d) / prob ** (d * d)


@dataclass(frozen=True)
class PositivityCheck:
    """Outcome-probability floors over the vertex sets of both parcels.

    ``delta`` is the minimum of ``Tr(v P_i)`` over all vertices and all
    outcomes; ``delta_outcome`` restricts to the measured outcome, the floor
    quoted in the qubit scenario constructions. ``passed`` gates on the
    all-outcome floor.
    """

    delta: float
    delta_outcome: float
    per_outcome: np.ndarray
    threshold: float
    passed: bool


def check_uniform_positivity(o1: VertexParcel, o2: VertexParcel, povm: FuzzyPOVM,
                             outcome: int = 0,
                             threshold: float = POSITIVITY_THRESHOLD) -> PositivityCheck:
    """Floor of ``Tr(v P_i)`` over both vertex sets (min at vertices)."""
    verts = np.concatenate([o1.vertices, o2.vertices])
    vals = np.einsum("kij,aji->ka", verts, povm.projectors).real
    per_outcome = vals.min(axis=0)
    delta = float(per_outcome.min())
    return PositivityCheck(
        delta=delta,
        delta_outcome=float(per_outcome[outcome]),
        per_outcome=per_outcome,
        threshold=threshold,
        passed=bool(delta > threshold),
    )


@dataclass(frozen=True)
class SeparationCheck:
    """Gap between the outcome-conditional ratios of the two parcels.

    ``r(v) = Tr(v h) / Tr(v P_j)`` is linear-fractional, so its extrema over
    each hull sit at vertices. Success requires the possible-set minimum to
    exceed the impossible-set maximum; the certified constants split the gap
    in thirds.
    """

    c1: float | None
    c2: float | None
    r1_min: float
    r2_max: float
    gap: float
    supported: bool
    passed: bool


def check_separation(o1: VertexParcel, o2: VertexParcel, h: np.ndarray,
                     povm: FuzzyPOVM, j: int) -> SeparationCheck:
    """Ratio-gap check for the separation observable ``h``.

    ``h`` must commute with every projector of the family (the stricter
    "supported on the range of P_j" form is recorded in ``supported``; it is
    vacuous for rank-1 projectors, where only commuting observables give a
    non-constant ratio).
    """
    h = as_hermitian(h, name="separation observable")
    for i, proj in enumerate(povm.projectors):
        if np.max(np.abs(h @ proj - proj @ h)) > 1e-10:
            raise ValueError(f"separation observable does not commute with projector {i}")
    pj = povm.projectors[j]
    supported = bool(np.max(np.abs(pj @ h @ pj - h)) <= 1e-10)

    def ratios(p: VertexParcel) -> np.ndarray:
        num = np.einsum("kij,ji->k", p.vertices, h).real
        den = np.einsum("kij,ji->k", p.vertices, pj).real
        if np.any(den <= PROBABILITY_FLOOR):
            raise ZeroDivisionError("ratio undefined: vertex with vanishing outcome weight")
        return num / den

    r1 = ratios(o1)
    r2 = ratios(o2)
    gap = float(r1.min() - r2.max())
    if gap <= 0.0:
        return SeparationCheck(c1=None, c2=None, r1_min=float(r1.min()),
                               r2_max=float(r2.max()), gap=gap,
                               supported=supported, passed=False)
    return SeparationCheck(
        c1=float(r1.min() - gap / 3.0),
        c2=float(r2.max() + gap / 3.0),
        r1_min=float(r1.min()),
        r2_max=float(r2.max()),
        gap=gap,
        supported=supported,
        passed=True,
    )


@dataclass(frozen=True)
class UpdateReport:
    """Everything recorded about one measurement update on a parcel."""

    outcome: int
    possible: VertexParcel
    impossible: VertexParcel | EmptyParcel | None
    probability: RealInterval
    volume_before: VolumeResult
    volume_after: VolumeResult
    information_before: float
    information_after: float
    impossible_volume_before: VolumeResult | None = None
    impossible_volume_after: VolumeResult | None = None
    impossible_volume_before_own_span: VolumeResult | None = None
    positivity: PositivityCheck | None = None
    separation: SeparationCheck | None = None
    certificate: SeparationCertificate | None = None
    eta_threshold: float | None = None

    @property
    def contracted(self) -> bool:
        return self.volume_after.value < self.volume_before.value

    def as_double(self) -> DoubleParcel:
        if self.impossible is None:
            raise ValueError("single-parcel report has no impossible component")
        return DoubleParcel(possible=self.possible, impossible=self.impossible,
                            certificate=self.certificate)


def _outcome_probabilities(p: VertexParcel, povm: FuzzyPOVM, j: int) -> RealInterval:
    vals = np.einsum("kij,ji->k", p.vertices, povm.effects[j]).real
    return RealInterval(float(vals.min()), float(vals.max()))


def _update_vertices(p: VertexParcel, povm: FuzzyPOVM, j: int) -> VertexParcel:
    m = povm.kraus[j]
    mapped = np.einsum("ab,kbc,dc->kad", m, p.vertices, m.conj())
    probs = np.einsum("kij,ji->k", p.vertices, povm.effects[j]).real
    mapped = mapped / probs[:, None, None]
    mapped = 0.5 * (mapped + mapped.conj().transpose(0, 2, 1))
    return VertexParcel(vertices=mapped, ambient_basis=p.ambient_basis)


def _qubit_threshold(p: VertexParcel, povm: FuzzyPOVM, j: int) -> float | None:
    if povm.dim != 2:
        return None
    c = float(np.einsum("kij,ji->k", p.vertices, povm.projectors[j]).real.min())
    if c <= 0.0:
        return None
    return eta_threshold_qubit(c)


def update_single_parcel(p: VertexParcel, povm: FuzzyPOVM, j: int) -> UpdateReport:
    """Vertex-wise Kraus update of a single parcel.

    Exact for the hull: the normalized update is projective-linear, so the
    image of the hull is the hull of the vertex images.
    """
    probability = _outcome_probabilities(p, povm, j)
    if probability.lo <= PROBABILITY_FLOOR:
        if povm.sharp:
            raise VanishingProbabilityError(
                "sharp update with an outcome probability reaching zero on the parcel"
            )
        raise VanishingProbabilityError(
            f"outcome probability interval touches zero (lo = {probability.lo:.3e})"
        )
    if povm.sharp:
        raise ValueError("parcel-level updates require eta < 1 (invertible Kraus)")
    updated = _update_vertices(p, povm, j)
    vol_before = volume(p)
    vol_after = volume(updated)
    info_before = float("inf") if vol_before.value <= 0 else 1.0 / vol_before.value
    info_after = float("inf") if vol_after.value <= 0 else 1.0 / vol_after.value
    return UpdateReport(
        outcome=j,
        possible=updated,
        impossible=None,
        probability=probability,
        volume_before=vol_before,
        volume_after=vol_after,
        information_before=info_before,
        information_after=info_after,
        eta_threshold=_qubit_threshold(p, povm, j),
    )


def update_double_parcel(dp: DoubleParcel, povm: FuzzyPOVM, j: int, h: np.ndarray,
                         *, enforce_conditions: bool = True,
                         positivity_threshold: float = POSITIVITY_THRESHOLD,
                         prune_max: int = 256) -> UpdateReport:
    """Measurement update of a double parcel for a recorded outcome ``j``.

    The possible set maps through the outcome's Kraus update; the impossible
    set becomes the convex hull of the old impossible set, the other-outcome
    images of the possible set, and the outcome image of the impossible set,
    taken in the affine span of the union. Disjointness of the result is
    verified by LP separation; failure raises :class:`DisjointnessError`
    carrying a point of the overlap.
    """
    if povm.sharp:
        raise ValueError("double-parcel updates require eta < 1")
    o1 = dp.possible
    o2 = dp.impossible
    if not isinstance(o1, VertexParcel) or not isinstance(o2, VertexParcel):
        raise TypeError("double-parcel updates run on vertex representations; convert first")
    positivity = check_uniform_positivity(o1, o2, povm, outcome=j,
                                          threshold=positivity_threshold)
    separation = check_separation(o1, o2, h, povm, j)
    if enforce_conditions and not (positivity.passed and separation.passed):
        raise ConditionError(
            f"update conditions not met: positivity floor {positivity.delta:.3e}, "
            f"separation gap {separation.gap:.3e}"
        )

    probability = _outcome_probabilities(o1, povm, j)
    possible_new = _update_vertices(o1, povm, j)
    pieces = [o2.vertices]
    for i in range(povm.n_outcomes):
        if i == j:
            continue
        pieces.append(_update_vertices(o1, povm, i).vertices)
    pieces.append(_update_vertices(o2, povm, j).vertices)
    impossible_vertices = np.concatenate(pieces)
    coords = o1.ambient_basis.coords_many(impossible_vertices)
    pruned_coords = geometry.prune_redundant_vertices(coords, max_points=prune_max)
    if pruned_coords.shape[0] < coords.shape[0]:
        keep_mats = o1.ambient_basis.reconstruct_many(pruned_coords)
        impossible_new = VertexParcel(vertices=keep_mats, ambient_basis=o1.ambient_basis)
    else:
        impossible_new = VertexParcel(vertices=impossible_vertices, ambient_basis=o1.ambient_basis)

    sep = geometry.separate(possible_new.coords(), impossible_new.coords())
    if sep is None:
        witness_coords = geometry.hull_intersection_point(
            possible_new.coords(), impossible_new.coords()
        )
        witness = None
        if witness_coords is not None:
            witness = o1.ambient_basis.reconstruct(witness_coords)
        raise DisjointnessError(
            "updated parcels are not separable with a positive gap",
            witness=witness,
            report=_double_report(dp, povm, j, possible_new, impossible_new,
                                  probability, positivity, separation, None),
        )
    certificate = certificate_from_separation(sep, o1.ambient_basis)
    return _double_report(dp, povm, j, possible_new, impossible_new, probability,
                          positivity, separation, certificate)


def _double_report(dp: DoubleParcel, povm: FuzzyPOVM, j: int,
                   possible_new: VertexParcel, impossible_new: VertexParcel,
                   probability: RealInterval, positivity: PositivityCheck,
                   separation: SeparationCheck,
                   certificate: SeparationCertificate | None) -> UpdateReport:
    o1 = dp.possible
    o2 = dp.impossible
    vol_before = volume(o1)
    vol_after = volume(possible_new)
    # impossible volumes measured in the span W of the updated union,
    # re-embedding the old impossible set for a like-for-like ratio
    center, frame = geometry.affine_frame(impossible_new.coords())
    vol_i_after = geometry.hull_volume(impossible_new.coords(), frame=frame, center=center)
    vol_i_before = geometry.hull_volume(o2.coords(), frame=frame, center=center)
    vol_i_before_own = volume(o2)
    info_before = (vol_i_before.value / vol_before.value) if vol_before.value > 0 else float("inf")
    info_after = (vol_i_after.value / vol_after.value) if vol_after.value > 0 else float("inf")
    return UpdateReport(
        outcome=j,
        possible=possible_new,
        impossible=impossible_new,
        probability=probability,
        volume_before=vol_before,
        volume_after=vol_after,
        information_before=info_before,
        information_after=info_after,
        impossible_volume_before=vol_i_before,
        impossible_volume_after=vol_i_after,
        impossible_volume_before_own_span=vol_i_before_own,
        positivity=positivity,
        separation=separation,
        certificate=certificate,
        eta_threshold=_qubit_threshold(o1, povm, j),
    )


def lipschitz_outer_update(p: HyperRectParcel, povm: FuzzyPOVM, j: int,
                           floor_tol: float = 1e-9,
                           diameter_patterns: int | None = None,
                           seed: int = 0) -> HyperRectParcel:
    """Outer box for the measurement image of a hyper-rectangle parcel.

    Uses the channel Lipschitz constant ``L = 2 ||M_j||^2 / delta`` with
    ``delta`` the outcome-probability floor over the box corners: the box
    center maps through the exact update and every interval is widened to
    ``L`` times the trace-norm diameter of the box, a guaranteed superset of
    the true image in the same chart.
    """
    corners = p.corners()
    corner_states = p.basis.reconstruct_many(corners)
    probs = np.einsum("kij,ji->k", corner_states, povm.effects[j]).real
    delta = float(probs.min())
    if delta <= floor_tol:
        raise VanishingProbabilityError(
            f"outcome probability floor {delta:.3e} is below tolerance over the box"
        )
    lip = 2.0 * float(np.linalg.eigvalsh(povm.effects[j])[-1]) / delta
    diam = box_trace_diameter(p, max_patterns=diameter_patterns, seed=seed)
    center_state = p.basis.reconstruct(p.center)
    updated_center, _ = kraus_update_state(center_state, povm, j)
    new_center = p.basis.coords(updated_center)
    half = 0.5 * lip * diam
    half_widths = np.where(p.widths > 0, half, 0.0)
    return HyperRectParcel(basis=p.basis, lo=new_center - half_widths,
                           hi=new_center + half_widths)


def box_trace_diameter(p: HyperRectParcel, max_patterns: int | None = None,
                       seed: int = 0) -> float:
    """Trace-norm diameter of the box corner reconstructions.

    Corner differences are ``sum_j d_j H_j`` with ``d_j`` in
    ``{-w_j, 0, +w_j}``, so the maximum pairwise trace norm equals the
    maximum over sign patterns; all patterns are enumerated for up to 12
    live axes, otherwise a seeded sample (plus the full-width pattern) gives
    a lower-bound estimate.
    """
    live = np.flatnonzero(p.widths > 0)
    m = live.size
    if m == 0:
        return 0.0
    ops = p.basis.ops[live]
    widths = p.widths[live]
    if max_patterns is None:
        max_patterns = 200_000
    if 3**m - 1 <= 2 * max_patterns:
        patterns = np.array(list(itertools.product((-1, 0, 1), repeat=m)), dtype=float)
        patterns = patterns[np.any(patterns != 0, axis=1)]
    else:
        rng = np.random.default_rng(seed)
        patterns = rng.integers(-1, 2, size=(max_patterns, m)).astype(float)
        patterns = np.vstack([patterns[np.any(patterns != 0, axis=1)], np.ones((1, m))])
    deltas = np.tensordot(patterns * widths[None, :], ops, axes=([1], [0]))
    eigs = np.linalg.eigvalsh(deltas)
    return float(np.max(np.sum(np.abs(eigs), axis=1)))


def eta_threshold_empirical(p: VertexParcel, povm_builder, j: int,
                            grid: np.ndarray | None = None) -> float | None:
    """Smallest grid sharpness at which the update contracts the parcel.

    No closed-form threshold exists beyond the qubit case, so this scans a
    grid of ``eta`` values; ``povm_builder(eta)`` must return the POVM.
    """
    if grid is None:
        grid = np.linspace(0.05, 0.99, 19)
    for eta in grid:
        report = update_single_parcel(p, povm_builder(float(eta)), j)
        if report.contracted:
            return float(eta)
    return None
