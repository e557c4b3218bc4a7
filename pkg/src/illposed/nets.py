"""Brute-force oracles for eps-discrete sets, nets and entropy/capacity numbers.

Everything here is small-dimension combinatorial geometry over real
coefficient balls: greedy maximal packings double as nets, and farthest
point prefixes of a dense mesh of the image ellipsoid give certified
two-sided brackets for entropy and capacity numbers.  The oracles exist to
validate closed-form spectra and sandwich inequalities at tiny scale, not
to estimate covering numbers in high dimension.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .seqspace import DiagonalOperator, WeightSequence

# distance-evaluation budget for one bracket computation
EVAL_BUDGET = 10**7


class NetError(ValueError):
    """Invalid input to a covering/packing oracle."""


@dataclass(frozen=True)
class PointCloud:
    """Finite point set with a Euclidean or weighted-Euclidean metric."""

    points: np.ndarray
    weights: WeightSequence | None = None

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=float))
        if pts.size == 0:
            raise NetError("empty cloud")
        if self.weights is not None and self.weights.J != pts.shape[1]:
            raise NetError("metric weight length does not match point dimension")
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    def _scaled(self) -> np.ndarray:
        if self.weights is None:
            return self.points
        return self.points * self.weights.weights[None, :]

    def distance_matrix(self) -> np.ndarray:
        y = self._scaled()
        d2 = np.sum((y[:, None, :] - y[None, :, :]) ** 2, axis=-1)
        return np.sqrt(np.maximum(d2, 0.0))

    def norms(self) -> np.ndarray:
        return np.linalg.norm(self._scaled(), axis=1)


def farthest_point_prefix(points: np.ndarray, n_select: int, seed: int | None = None):
    """Greedy farthest-point selection.

    Returns (indices, join_distances): ``join_distances[t]`` is the distance
    of the t-th selected point to the previously selected set (inf for the
    seed).  The sequence is nonincreasing, the selected points are pairwise
    >= join_distances[-1] apart, and after t selections every point lies
    within join_distances[t] of the selected set (if t < n).  Seed defaults
    to the point of maximal norm, ties by lowest index.
    """
    pts = np.atleast_2d(points)
    n = pts.shape[0]
    if seed is None:
        seed = int(np.argmax(np.round(np.linalg.norm(pts, axis=1), 12)))
    sel = [seed]
    joins = [np.inf]
    mind = np.linalg.norm(pts - pts[seed], axis=1)
    while len(sel) < min(n_select, n):
        nxt = int(np.argmax(np.round(mind, 12)))
        joins.append(float(mind[nxt]))
        sel.append(nxt)
        mind = np.minimum(mind, np.linalg.norm(pts - pts[nxt], axis=1))
    return np.array(sel), np.array(joins), mind


def greedy_discrete(cloud: PointCloud, eps: float) -> np.ndarray:
    """Maximal eps-discrete subset, greedily and deterministically.

    The first point is the cloud point of maximal norm (ties by lowest
    index); each following point is the one farthest from the current
    selection.  Selection stops when no point is >= eps away, so the result
    is pairwise >= eps separated and, being maximal, covers the cloud
    within eps.
    """
    if eps <= 0:
        raise NetError("eps must be positive")
    pts = cloud._scaled()
    n = pts.shape[0]
    seed = int(np.argmax(np.round(np.linalg.norm(pts, axis=1), 12)))
    sel = [seed]
    mind = np.linalg.norm(pts - pts[seed], axis=1)
    while True:
        nxt = int(np.argmax(np.round(mind, 12)))
        if mind[nxt] < eps:
            break
        sel.append(nxt)
        mind = np.minimum(mind, np.linalg.norm(pts - pts[nxt], axis=1))
        if len(sel) == n:
            break
    return np.array(sel)


@dataclass(frozen=True)
class Bracket:
    """Certified interval lo <= value <= hi for an entropy/capacity number."""

    k: int
    lo: float
    hi: float
    certified: bool  # True when the requested relative width was reached

    def to_json_dict(self) -> dict:
        return {"k": self.k, "lo": self.lo, "hi": self.hi, "certified": self.certified}

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _image_semiaxes(op: DiagonalOperator) -> np.ndarray:
    sig = op.singular_values()
    if sig.size > 3:
        raise NetError(f"brute-force oracles are limited to dimension <= 3, got {sig.size}")
    return sig


def _ellipsoid_mesh(semiaxes: np.ndarray, n_axis: int):
    """Cell-center mesh of the solid ellipsoid.

    Returns (inside_points, cover_points, slack): ``cover_points`` also
    includes centers of boundary cells so that every solid point is within
    ``slack`` of some cover point; ``inside_points`` lie in the ellipsoid
    exactly and are usable as packing witnesses.
    """
    d = semiaxes.size
    axes = [np.linspace(-a, a, n_axis) for a in semiaxes]
    h = np.array([ax[1] - ax[0] if n_axis > 1 else 2 * a for ax, a in zip(axes, semiaxes)])
    grids = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in grids], axis=1)
    q_in = np.sum((pts / semiaxes[None, :]) ** 2, axis=1)
    shrunk = np.maximum(np.abs(pts) - h[None, :] / 2.0, 0.0)
    q_touch = np.sum((shrunk / semiaxes[None, :]) ** 2, axis=1)
    slack = float(np.linalg.norm(h / 2.0))
    return pts[q_in <= 1.0], pts[q_touch <= 1.0], slack


def _cover_radius(centers: np.ndarray, cloud: np.ndarray) -> tuple:
    """Covering radius of the cloud by the centers, plus the assignment."""
    mind = np.full(cloud.shape[0], np.inf)
    owner = np.zeros(cloud.shape[0], dtype=np.int64)
    for c_idx in range(centers.shape[0]):
        d = np.linalg.norm(cloud - centers[c_idx], axis=1)
        closer = d < mind
        owner[closer] = c_idx
        mind[closer] = d[closer]
    return float(np.max(mind)), owner


def _lloyd_max_refine(centers: np.ndarray, cloud: np.ndarray, sweeps: int = 12):
    """Shrink the covering radius by recentering each cell on its box center.

    The box center is a cheap 1-center heuristic; the returned radius is
    re-measured against the full cloud, so the cover stays valid no matter
    how crude the heuristic step was.
    """
    best_r, owner = _cover_radius(centers, cloud)
    best_centers = centers.copy()
    cur = centers.copy()
    for _ in range(sweeps):
        for c_idx in range(cur.shape[0]):
            members = cloud[owner == c_idx]
            if members.size:
                cur[c_idx] = (members.min(axis=0) + members.max(axis=0)) / 2.0
        r, owner = _cover_radius(cur, cloud)
        if r < best_r:
            best_r, best_centers = r, cur.copy()
    return best_r, best_centers


def _pack_cover_radii(semiaxes: np.ndarray, m: int, n_axis: int):
    """Packing witness and explicit cover at one mesh resolution.

    Returns (pack_eps, cover_radius): m+1 inside points pairwise >= 2*pack_eps
    from a farthest-point prefix, and an m-ball cover of the solid whose
    centers start on the prefix and are tightened by deterministic
    box-recentering sweeps.
    """
    inside, cover_cloud, slack = _ellipsoid_mesh(semiaxes, n_axis)
    sel, joins, _ = farthest_point_prefix(inside, m + 1)
    if sel.size < m + 1:
        # mesh too coarse to host m+1 distinct points
        return 0.0, np.inf
    pack_eps = float(joins[-1]) / 2.0
    radius, _ = _lloyd_max_refine(inside[sel[:m]], cover_cloud)
    return pack_eps, radius + slack


def _bracket_budget_schedule(d: int, m: int):
    """Mesh sizes per refinement pass, respecting the evaluation budget.

    Each pass costs roughly one farthest-point sweep plus a dozen
    cover-refinement sweeps, i.e. ~14*(m+1) distance passes over the mesh.
    """
    n_axis = 9 if d < 3 else 7
    sizes = []
    spent = 0
    while True:
        cost = n_axis**d * 14 * (m + 1)
        if spent + cost > EVAL_BUDGET:
            break
        sizes.append(n_axis)
        spent += cost
        n_axis = 2 * n_axis - 1
    return sizes or [n_axis]


def entropy_bruteforce(
    op: DiagonalOperator, k: int, resolution: float = 0.05, max_balls: int = 64
) -> Bracket:
    """Certified bracket for the k-th entropy number of a diagonal operator.

    The image of the unit ball is the solid ellipsoid with the operator's
    singular values as semiaxes (real scalars).  The lower bound comes from
    a greedy packing of 2^(k-1)+1 ellipsoid points (a capacity witness),
    the upper bound from an explicit cover by 2^(k-1) balls centered on
    mesh points.  In dimension one both are exact.  The mesh is refined
    until the bracket width target or the evaluation budget is reached;
    ``certified`` records whether the target was met.
    """
    if k < 1:
        raise NetError("k must be >= 1")
    m = 2 ** (k - 1)
    if m > max_balls:
        raise NetError(f"2^(k-1)={m} exceeds the ball budget {max_balls}")
    semiaxes = _image_semiaxes(op)

    if semiaxes.size == 1 or semiaxes[1] < 1e-15 * semiaxes[0]:
        exact = float(semiaxes[0]) / m
        return Bracket(k, exact, exact, True)

    lo, hi = 0.0, np.inf
    for n_axis in _bracket_budget_schedule(semiaxes.size, m):
        pack, cover = _pack_cover_radii(semiaxes, m, n_axis)
        lo, hi = max(lo, pack), min(hi, cover)
        if np.isfinite(hi) and hi - lo <= resolution * hi:
            return Bracket(k, lo, hi, True)
    if not np.isfinite(hi):
        raise NetError(f"evaluation budget too small to certify a cover for k={k}")
    return Bracket(k, lo, hi, bool(hi - lo <= resolution * hi))


def capacity_bruteforce(
    op: DiagonalOperator, k: int, resolution: float = 0.05, max_balls: int = 64
) -> Bracket:
    """Certified bracket for the k-th capacity number of a diagonal operator.

    Lower bound: an explicit 2*eps-discrete family of 2^(k-1)+1 image
    points found greedily.  Upper bound: the entropy bracket, via
    c_k <= e_k.
    """
    if k < 1:
        raise NetError("k must be >= 1")
    m = 2 ** (k - 1)
    if m > max_balls:
        raise NetError(f"2^(k-1)={m} exceeds the ball budget {max_balls}")
    semiaxes = _image_semiaxes(op)

    if semiaxes.size == 1 or semiaxes[1] < 1e-15 * semiaxes[0]:
        exact = float(semiaxes[0]) / m
        return Bracket(k, exact, exact, True)

    ent = entropy_bruteforce(op, k, resolution=resolution, max_balls=max_balls)
    lo = 0.0
    for n_axis in _bracket_budget_schedule(semiaxes.size, m):
        inside, _, _ = _ellipsoid_mesh(semiaxes, n_axis)
        sel, joins, _ = farthest_point_prefix(inside, m + 1)
        if sel.size == m + 1:
            lo = max(lo, float(joins[-1]) / 2.0)
    hi = ent.hi
    return Bracket(k, lo, hi, bool(hi - lo <= resolution * hi))
