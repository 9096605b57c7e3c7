"""Convex-geometry primitives: hull volumes, LP membership and separation.

Points are rows of real coordinate arrays. Volumes are Lebesgue volumes in
the affine span of the points (the span dimension is reported alongside),
computed with Qhull after whitening each principal axis so that extreme
anisotropy from measurement contraction does not starve Qhull of precision.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import linprog
from scipy.spatial import ConvexHull, QhullError

AFFINE_RANK_RTOL = 1e-9
MEMBERSHIP_TOL = 1e-9
SEPARATION_TOL = 1e-9


class VolumeResult(NamedTuple):
    """A volume together with the affine dimension it was measured in."""

    value: float
    dim: int


def affine_frame(points: np.ndarray, rtol: float = AFFINE_RANK_RTOL):
    """Orthonormal frame of the affine span of ``points``.

    Returns ``(center, frame)`` where ``frame`` has shape (k, n). Singular
    values below ``rtol`` times the largest are treated as zero.
    """
    pts = np.asarray(points, dtype=float)
    center = pts.mean(axis=0)
    rows = pts - center
    if not rows.size:
        return center, np.zeros((0, pts.shape[1]))
    _, svals, vt = np.linalg.svd(rows, full_matrices=False)
    if svals.size == 0 or svals[0] <= 1e-300:
        return center, np.zeros((0, pts.shape[1]))
    rank = int(np.sum(svals > rtol * svals[0]))
    return center, vt[:rank]


def hull_volume(points: np.ndarray, *, frame: np.ndarray | None = None,
                center: np.ndarray | None = None) -> VolumeResult:
    """Volume of ``conv(points)`` in its affine span (or the given frame).

    A single point (or a numerically zero-dimensional set) has volume 0 in
    dimension 0. When ``frame`` is supplied the volume is measured in that
    ambient subspace instead: a set of lower affine dimension then reports
    volume 0 in the frame's dimension.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if frame is None:
        center, frame = affine_frame(pts)
    else:
        frame = np.asarray(frame, dtype=float)
        if center is None:
            center = pts.mean(axis=0)
    k = frame.shape[0]
    if k == 0:
        return VolumeResult(0.0, 0)
    local = (pts - center) @ frame.T
    _, own_frame = affine_frame(local)
    if own_frame.shape[0] < k:
        return VolumeResult(0.0, k)
    if k == 1:
        return VolumeResult(float(np.ptp(local[:, 0])), 1)
    spans = np.ptp(local, axis=0)
    scaled = local / spans
    try:
        vol = ConvexHull(scaled).volume
    except QhullError:
        vol = ConvexHull(scaled, qhull_options="QJ").volume
    return VolumeResult(float(vol * np.prod(spans)), k)


def membership_weight(point: np.ndarray, vertices: np.ndarray) -> float:
    """Largest ``t`` such that ``point = sum_i w_i v_i`` with all ``w_i >= t``.

    Positive for relative-interior points, ~0 on the boundary, and ``-inf``
    when the point is not in the convex hull at all.
    """
    point = np.asarray(point, dtype=float)
    verts = np.asarray(vertices, dtype=float)
    n = verts.shape[0]
    # Reduce to hull-local coordinates so the equality system is well scaled.
    center, frame = affine_frame(np.vstack([verts, point[None, :]]))
    local_v = (verts - center) @ frame.T
    local_p = (point - center) @ frame.T
    scale = max(1.0, float(np.max(np.abs(local_v))) if local_v.size else 1.0)
    a_eq = np.hstack([np.vstack([local_v.T / scale, np.ones((1, n))]), np.zeros((frame.shape[0] + 1, 1))])
    b_eq = np.concatenate([local_p / scale, [1.0]])
    a_ub = np.hstack([-np.eye(n), np.ones((n, 1))])
    b_ub = np.zeros(n)
    res = linprog(
        c=np.concatenate([np.zeros(n), [-1.0]]),
        A_ub=a_ub, b_ub=b_ub, A_eq=a_eq, b_eq=b_eq,
        bounds=[(0.0, 1.0)] * n + [(None, 1.0)],
        method="highs",
    )
    if not res.success:
        return float("-inf")
    return float(res.x[-1])


def in_hull(point: np.ndarray, vertices: np.ndarray, tol: float = MEMBERSHIP_TOL) -> bool:
    """Closed-hull membership with LP tolerance ``tol``."""
    return membership_weight(point, vertices) >= -tol


@dataclass(frozen=True)
class Separation:
    """An affine functional separating two point sets with a positive gap.

    ``w . x >= threshold + margin`` on the first set and
    ``w . x <= threshold - margin`` on the second, with ``|w|_inf <= 1``.
    """

    normal: np.ndarray
    threshold: float
    margin: float


def separate(points_a: np.ndarray, points_b: np.ndarray,
             tol: float = SEPARATION_TOL) -> Separation | None:
    """Best-margin linear separation of two finite point sets, or ``None``.

    Maximizes the margin subject to an infinity-norm bound on the normal;
    a margin at or below ``tol`` (relative to coordinate scale) counts as
    non-separable.
    """
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    n = a.shape[1]
    na, nb = a.shape[0], b.shape[0]
    scale = max(1.0, float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    # variables: w (n), g, gamma
    rows_a = np.hstack([-a, np.ones((na, 1)), np.ones((na, 1))])
    rows_b = np.hstack([b, -np.ones((nb, 1)), np.ones((nb, 1))])
    a_ub = np.vstack([rows_a, rows_b])
    b_ub = np.zeros(na + nb)
    c = np.zeros(n + 2)
    c[-1] = -1.0
    bounds = [(-1.0, 1.0)] * n + [(None, None), (None, 2.0 * scale)]
    res = linprog(c=c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        return None
    margin = float(res.x[-1])
    if margin <= tol * scale:
        return None
    return Separation(normal=res.x[:n].copy(), threshold=float(res.x[n]), margin=margin)


def hull_intersection_point(points_a: np.ndarray, points_b: np.ndarray) -> np.ndarray | None:
    """A point in ``conv(A) cap conv(B)``, or ``None`` if the hulls are disjoint."""
    a = np.asarray(points_a, dtype=float)
    b = np.asarray(points_b, dtype=float)
    na, nb = a.shape[0], b.shape[0]
    n = a.shape[1]
    a_eq = np.zeros((n + 2, na + nb))
    a_eq[:n, :na] = a.T
    a_eq[:n, na:] = -b.T
    a_eq[n, :na] = 1.0
    a_eq[n + 1, na:] = 1.0
    b_eq = np.concatenate([np.zeros(n), [1.0, 1.0]])
    res = linprog(
        c=np.zeros(na + nb), A_eq=a_eq, b_eq=b_eq,
        bounds=[(0.0, 1.0)] * (na + nb), method="highs",
    )
    if not res.success:
        return None
    return a.T @ res.x[:na]


def prune_redundant_vertices(points: np.ndarray, tol: float = MEMBERSHIP_TOL,
                             max_points: int = 256) -> np.ndarray:
    """Drop points inside the hull of the others (membership LP per point).

    Pruning is O(k) LPs of size k, so sets larger than ``max_points`` are
    returned unchanged to keep repeated updates affordable.
    """
    pts = np.asarray(points, dtype=float)
    if pts.shape[0] > max_points or pts.shape[0] <= 2:
        return pts
    keep = list(range(pts.shape[0]))
    i = 0
    while i < len(keep):
        others = [j for j in keep if j != keep[i]]
        if len(others) >= 1 and in_hull(pts[keep[i]], pts[others], tol=tol):
            keep.pop(i)
        else:
            i += 1
    return pts[keep]
