"""Interval-valued physical quantities over parcels.

Endpoints are reported numerically closed with a degenerate flag; openness
of the underlying set is a semantic annotation (the attainable property is
that every value strictly between the endpoints is realized by a member).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .operators import PSD_TOL, as_hermitian, hs_inner, pauli_string_operator, tensor
from .parcels import HyperRectParcel, Parcel, VertexParcel

ASCENT_TOL = 1e-8
ASCENT_MAX_ITER = 500


@dataclass(frozen=True)
class RealInterval:
    """Closed numeric interval with a singleton flag (``lo == hi``)."""

    lo: float
    hi: float
    degenerate: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.lo > self.hi:
            raise ValueError(f"lo {self.lo} exceeds hi {self.hi}")
        object.__setattr__(self, "degenerate", self.lo == self.hi)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def center(self) -> float:
        return 0.5 * (self.lo + self.hi)

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def clamped(self, lo: float, hi: float) -> "RealInterval":
        return RealInterval(min(max(self.lo, lo), hi), max(min(self.hi, hi), lo))

    def as_dict(self) -> dict:
        return {"lo": self.lo, "hi": self.hi, "degenerate": self.degenerate}


def expectation_interval_hrep(p: HyperRectParcel, a: np.ndarray) -> RealInterval:
    """Exact expectation interval over the outer box, in O(m).

    Decomposes ``a`` into trace part and basis components ``c_j = Tr(a H_j)``
    and accumulates the signed endpoints; the component of ``a`` orthogonal
    to the chart contributes zero on the chart's affine span.
    """
    a = as_hermitian(a, name="observable")
    trace_part, c = p.basis.coefficients(a)
    c_plus = np.clip(c, 0.0, None)
    c_minus = np.clip(c, None, 0.0)
    lo = trace_part + float(c_plus @ p.lo + c_minus @ p.hi)
    hi = trace_part + float(c_plus @ p.hi + c_minus @ p.lo)
    return RealInterval(lo, hi)


def expectation_interval_vrep(p: VertexParcel, a: np.ndarray) -> RealInterval:
    """Vertex min/max expectation: a conservative hull for the open set."""
    a = as_hermitian(a, name="observable")
    vals = np.einsum("kij,ji->k", p.vertices, a).real
    return RealInterval(float(vals.min()), float(vals.max()))


def expectation_interval(p: Parcel, a: np.ndarray) -> RealInterval:
    if isinstance(p, HyperRectParcel):
        return expectation_interval_hrep(p, a)
    return expectation_interval_vrep(p, a)


def probability_interval(p: Parcel, e: np.ndarray) -> RealInterval:
    """Expectation interval of a POVM effect, clamped to [0, 1]."""
    e = as_hermitian(e, name="effect")
    vals = np.linalg.eigvalsh(e)
    if vals[0] < -PSD_TOL or vals[-1] > 1.0 + PSD_TOL:
        raise ValueError(f"not an effect: eigenvalues in [{vals[0]:.3e}, {vals[-1]:.6f}]")
    return expectation_interval(p, e).clamped(0.0, 1.0)


def _concave_ascent(p: VertexParcel, value, gradient) -> float:
    """Conditional-gradient maximization of a concave functional over the hull.

    Returns a lower bound on the true maximum (fixed iteration cap, gap
    tolerance 1e-8), started from the barycenter.
    """
    k = p.n_vertices
    weights = np.full(k, 1.0 / k)
    rho = p.mixture(weights)
    best = value(rho)
    for _ in range(ASCENT_MAX_ITER):
        grad = gradient(rho)
        scores = np.einsum("kij,ji->k", p.vertices, grad).real
        target = int(np.argmax(scores))
        gap = scores[target] - float(np.einsum("ij,ji->", rho, grad).real)
        if gap <= ASCENT_TOL:
            break
        direction = np.zeros(k)
        direction[target] = 1.0

        def line(t: float) -> float:
            return -value(p.mixture((1.0 - t) * weights + t * direction))

        res = minimize_scalar(line, bounds=(0.0, 1.0), method="bounded",
                              options={"xatol": 1e-10})
        step = float(res.x)
        if -res.fun <= best + 1e-15:
            break
        weights = (1.0 - step) * weights + step * direction
        rho = p.mixture(weights)
        best = max(best, -float(res.fun))
    return best


def _variance(rho: np.ndarray, a: np.ndarray, a2: np.ndarray) -> float:
    mean = float(np.einsum("ij,ji->", rho, a).real)
    second = float(np.einsum("ij,ji->", rho, a2).real)
    return max(second - mean * mean, 0.0)


def stddev_interval(p: VertexParcel, a: np.ndarray) -> RealInterval:
    """Standard deviation interval ``sqrt(Tr(rho a^2) - Tr(rho a)^2)``.

    Variance is concave, so the lower endpoint is the vertex minimum; the
    upper endpoint is found by mixture-weight ascent and is a lower bound on
    the true maximum.
    """
    a = as_hermitian(a, name="observable")
    a2 = a @ a
    vertex_vars = [_variance(v, a, a2) for v in p.vertices]
    lo = float(np.sqrt(min(vertex_vars)))
    grad = lambda rho: a2 - 2.0 * float(np.einsum("ij,ji->", rho, a).real) * a
    hi_var = _concave_ascent(p, lambda rho: _variance(rho, a, a2), grad)
    hi = float(np.sqrt(max(hi_var, max(vertex_vars))))
    return RealInterval(min(lo, hi), hi)


def von_neumann_entropy(rho: np.ndarray) -> float:
    """Entropy in nats: ``-Tr(rho ln rho)`` with 0 ln 0 = 0."""
    vals = np.clip(np.linalg.eigvalsh(rho), 0.0, None)
    vals = vals[vals > 1e-15]
    return float(-np.sum(vals * np.log(vals)))


def entropy_interval(p: VertexParcel) -> RealInterval:
    """Von Neumann entropy interval (natural log).

    Lower endpoint at a vertex (concavity); upper endpoint by
    conditional-gradient ascent, a lower bound on the true maximum.
    """
    vertex_vals = [von_neumann_entropy(v) for v in p.vertices]
    lo = min(vertex_vals)

    def grad(rho: np.ndarray) -> np.ndarray:
        vals, vecs = np.linalg.eigh(rho)
        vals = np.clip(vals, 1e-14, None)
        return -((vecs * np.log(vals)) @ vecs.conj().T) - np.eye(rho.shape[0])

    hi = _concave_ascent(p, von_neumann_entropy, grad)
    return RealInterval(min(lo, hi), max(hi, max(vertex_vals)))


def uncertainty_bound(p: VertexParcel, a: np.ndarray, b: np.ndarray) -> float:
    """Parcel-uniform lower bound ``(1/2) min_rho |Tr(rho [a, b])|``.

    ``Tr(rho [a,b])`` is i times a linear Hermitian functional, so the
    minimum modulus over the hull is 0 when vertex values change sign and the
    smallest vertex modulus otherwise. Every member's deviation product
    ``Delta_a Delta_b`` is bounded below by this value.
    """
    a = as_hermitian(a, name="observable a")
    b = as_hermitian(b, name="observable b")
    comm = a @ b - b @ a
    k = -1j * comm  # Hermitian: Tr(rho comm) = i Tr(rho k)
    vals = np.einsum("kij,ji->k", p.vertices, k).real
    if vals.min() < 0.0 < vals.max():
        return 0.0
    return 0.5 * float(np.min(np.abs(vals)))


def fidelity_interval(p: Parcel, phi: np.ndarray) -> RealInterval:
    """Expectation interval of a rank-1 target projector (pure-state fidelity)."""
    phi = as_hermitian(phi, name="target state")
    vals = np.linalg.eigvalsh(phi)
    if abs(float(np.sum(vals)) - 1.0) > 1e-9 or vals[-1] < 1.0 - 1e-9:
        raise ValueError("fidelity target must be a rank-1 density matrix")
    return probability_interval(p, phi)


def correlation_interval(p: Parcel, a: np.ndarray, b: np.ndarray) -> RealInterval:
    """Expectation interval of ``a (x) b`` over a bipartite parcel."""
    a = as_hermitian(a, name="observable a")
    b = as_hermitian(b, name="observable b")
    joint = tensor(a, b)
    dim = p.dim if isinstance(p, VertexParcel) else p.basis.dim
    if joint.shape[0] != dim:
        raise ValueError(
            f"subsystem dimensions {a.shape[0]}x{b.shape[0]} do not match parcel dimension {dim}"
        )
    return expectation_interval(p, joint)


def chsh_operator() -> np.ndarray:
    """CHSH combination with the standard measurement choices.

    ``A = sx, A' = sz, B = (sx+sz)/sqrt2, B' = (sx-sz)/sqrt2``, which reduces
    to ``sqrt2 (sx(x)sx + sz(x)sz)`` with quantum maximum ``2 sqrt2``.
    """
    sx = pauli_string_operator("X")
    sz = pauli_string_operator("Z")
    b = (sx + sz) / np.sqrt(2.0)
    bp = (sx - sz) / np.sqrt(2.0)
    return tensor(sx, b) + tensor(sx, bp) + tensor(sz, b) - tensor(sz, bp)


def chsh_interval(p: Parcel) -> RealInterval:
    """CHSH expectation interval; ``lo > 2`` certifies every member entangled."""
    dim = p.dim if isinstance(p, VertexParcel) else p.basis.dim
    if dim != 4:
        raise ValueError("CHSH requires a two-qubit parcel")
    return expectation_interval(p, chsh_operator())


def witness_interval(p: Parcel, w: np.ndarray) -> RealInterval:
    """Expectation interval of an entanglement witness; ``hi < 0`` certifies."""
    return expectation_interval(p, w)
