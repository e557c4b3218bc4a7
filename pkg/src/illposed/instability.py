"""Executable instability arguments: witness search and stability checks.

The module turns abstract instability mechanisms into procedures that emit
re-verified artifacts.  A witness pair is two coefficient vectors inside a
weighted ball that are far apart in the domain norm yet nearly
indistinguishable through the forward operator; every emitted certificate
has its distances and set membership recomputed directly before it leaves
the engine.  Alongside the searches there are the diagonal-case stability
characterization (weight-vs-spectrum inequality), the net-count-to-modulus
translation, the Hilbert-Schmidt embedding bound, and the interpolation
route to modulus lower bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .nets import PointCloud, greedy_discrete
from .seqspace import WeightSequence
from .spectral import WeightedOperator, weighted_svd

MAX_ACTIVE_COORDS = 12


class CertificateError(RuntimeError):
    """A certificate failed its own re-verification."""


class WitnessSearchError(RuntimeError):
    """The witness search exhausted its budget; diagnostics attached."""

    def __init__(self, message: str, diagnostics: dict | None = None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


@dataclass(frozen=True)
class CompactSet:
    """Weighted ball {x : sum_j kappa_j^2 |x_j|^2 <= radius^2}."""

    kappa: WeightSequence
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")
        if np.any(np.diff(self.kappa.weights) < -1e-12):
            raise ValueError("compact-set weights must be nondecreasing")

    @property
    def J(self) -> int:
        return self.kappa.J

    def norm(self, x) -> float:
        return self.kappa.norm(x)

    def contains(self, x, tol: float = 1e-9) -> bool:
        return self.norm(x) <= self.radius * (1.0 + tol)


@dataclass(frozen=True)
class InstabilityCertificate:
    """Verified witness pair with the separation/proximity it achieves."""

    x1: np.ndarray
    x2: np.ndarray
    domain_distance: float
    image_distance: float
    eps: float
    delta: float
    modulus_curve: tuple = ()
    provenance: str = ""

    def to_json_dict(self) -> dict:
        return {
            "provenance": self.provenance,
            "eps": self.eps,
            "delta": self.delta,
            "domain_distance": self.domain_distance,
            "image_distance": self.image_distance,
            "x1": np.asarray(self.x1).tolist(),
            "x2": np.asarray(self.x2).tolist(),
            "modulus_curve": [list(p) for p in self.modulus_curve],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def _domain_distance(op, x1, x2) -> float:
    if isinstance(op, WeightedOperator):
        return op.domain_norm(np.asarray(x1) - np.asarray(x2))
    return float(np.linalg.norm(np.asarray(x1) - np.asarray(x2)))


def _image_distance(op, x1, x2) -> float:
    if isinstance(op, WeightedOperator):
        return op.image_distance(x1, x2)
    return float(np.linalg.norm(np.asarray(op(x1)) - np.asarray(op(x2))))


def _verify_and_emit(op, K: CompactSet, cert: InstabilityCertificate) -> InstabilityCertificate:
    """Recompute all certified quantities; abort emission on any mismatch."""
    dd = _domain_distance(op, cert.x1, cert.x2)
    di = _image_distance(op, cert.x1, cert.x2)
    ok = (
        abs(dd - cert.domain_distance) <= 1e-9 * max(1.0, dd)
        and abs(di - cert.image_distance) <= 1e-9 * max(1.0, di)
        and dd >= cert.eps * (1.0 - 1e-9)
        and di <= 2.0 * cert.delta * (1.0 + 1e-9)
        and K.contains(cert.x1)
        and K.contains(cert.x2)
    )
    if not ok:
        raise CertificateError(
            f"certificate re-verification failed: domain {dd} vs {cert.domain_distance}, "
            f"image {di} vs {cert.image_distance}, membership "
            f"{K.norm(cert.x1):.6g}/{K.norm(cert.x2):.6g} vs radius {K.radius}"
        )
    return cert


def _active_dimension(K: CompactSet, eps: float) -> int:
    """Coordinates that can move at scale eps inside K: kappa_j <= radius/eps."""
    active = int(np.sum(K.kappa.weights <= K.radius / eps))
    return min(active, MAX_ACTIVE_COORDS, K.J)


def _witness_lattice(K: CompactSet, eps: float, sample_budget: int) -> np.ndarray:
    """Axis-aligned lattice in the leading active coordinates, inside K.

    Per-coordinate extents radius/(kappa_j*sqrt(D)) keep every lattice
    point inside the ball; the number of points per axis divides the
    sample budget evenly across the D active coordinates.
    """
    D = _active_dimension(K, eps)
    if D == 0:
        raise WitnessSearchError(
            f"no coordinate can move at scale eps={eps} inside the ball",
            {"eps": eps, "active_dim": 0},
        )
    per_axis = max(2, int(math.floor(sample_budget ** (1.0 / D))))
    half = K.radius / (K.kappa.weights[:D] * math.sqrt(D))
    axes = [np.linspace(-half[j], half[j], per_axis) for j in range(D)]
    mesh = np.meshgrid(*axes, indexing="ij")
    pts = np.stack([g.ravel() for g in mesh], axis=1)
    full = np.zeros((pts.shape[0], K.J))
    full[:, :D] = pts
    return full


def pigeonhole_witness(
    op,
    K: CompactSet,
    eps: float,
    sample_budget: int = 10**4,
    max_halvings: int = 60,
) -> InstabilityCertificate:
    """Witness pair by counting: a packing of K funneled through a small net.

    Builds an eps-discrete set X_eps inside K from a lattice on the active
    coordinates, then sweeps shrinking scales delta = scale/2, scale/4, ...
    For each delta a greedy maximal delta-discrete subset of the image set
    is a delta-net; while the net has fewer elements than X_eps, two
    eps-separated points share a net cell and their images are at most
    2*delta apart.  The best pair from the smallest such delta is returned
    after direct re-verification.  A pair counts as a witness only if it
    beats the Lipschitz-trivial scale, i.e. its image distance is below
    eps/2 times the operator scale; otherwise the search reports failure
    (as it must for an isometry).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    lattice = _witness_lattice(K, eps, sample_budget)
    dom_w = op.domain if isinstance(op, WeightedOperator) else None
    sel = greedy_discrete(PointCloud(lattice, dom_w), eps)
    X = lattice[np.sort(sel)]
    if X.shape[0] < 2:
        raise WitnessSearchError(
            "the eps-discrete sample collapsed to fewer than two points",
            {"eps": eps, "lattice": lattice.shape[0], "discrete": X.shape[0]},
        )

    if isinstance(op, WeightedOperator):
        images = np.array([op.apply(x) for x in X])
        img_w = op.codomain
    else:
        images = np.array([np.asarray(op(x)) for x in X])
        img_w = None
    img_scaled = images if img_w is None else images * img_w.weights[None, :]
    x_norms = np.array([_domain_distance(op, x, np.zeros_like(x)) for x in X])
    y_norms = np.linalg.norm(img_scaled, axis=1)
    op_scale = float(np.max(y_norms / np.maximum(x_norms, 1e-300)))

    scale = float(np.max(y_norms)) * 2.0 or 1.0
    best = None
    net_size = 0
    for i in range(1, max_halvings + 1):
        delta = scale * 2.0**-i
        net_idx = greedy_discrete(PointCloud(images, img_w), delta)
        net_size = net_idx.size
        if net_size >= X.shape[0]:
            break
        # assign images to nearest net element, lowest index on ties
        mind = np.full(img_scaled.shape[0], np.inf)
        owner = np.zeros(img_scaled.shape[0], dtype=int)
        for cell, ni in enumerate(net_idx):
            dcol = np.linalg.norm(img_scaled - img_scaled[ni], axis=1)
            closer = dcol < mind
            owner[closer] = cell
            mind[closer] = dcol[closer]
        pair = None
        for cell in range(net_size):
            members = np.flatnonzero(owner == cell)
            if members.size < 2:
                continue
            for ai in range(members.size):
                for bi in range(ai + 1, members.size):
                    a, b = members[ai], members[bi]
                    dist = float(np.linalg.norm(img_scaled[a] - img_scaled[b]))
                    if pair is None or dist < pair[0]:
                        pair = (dist, a, b)
        if pair is not None and (best is None or pair[0] <= best[1]):
            best = (delta,) + pair
    if best is None:
        raise WitnessSearchError(
            "no net cell ever held two sample points",
            {"eps": eps, "samples": X.shape[0], "last_net": net_size},
        )
    delta, dist, a, b = best
    if dist > 0 and dist >= 0.5 * eps * op_scale:
        raise WitnessSearchError(
            "no instability found: best image distance does not beat the "
            "Lipschitz-trivial scale",
            {
                "eps": eps,
                "samples": X.shape[0],
                "best_image_distance": dist,
                "op_scale": op_scale,
            },
        )
    cert = InstabilityCertificate(
        x1=X[a],
        x2=X[b],
        domain_distance=_domain_distance(op, X[a], X[b]),
        image_distance=dist,
        eps=eps,
        delta=delta,
        modulus_curve=((dist, eps),),
        provenance="pigeonhole_witness",
    )
    return _verify_and_emit(op, K, cert)


def spectral_witness(op: WeightedOperator, kappa: WeightSequence, eps: float) -> InstabilityCertificate:
    """Witness pair +-u from the flattest direction of a spectral cutoff.

    With N(eps) the number of leading coordinates whose ball weight stays
    below 1/eps, the minimal right singular vector u of the operator
    restricted to those coordinates satisfies |u|_X = eps, |u|_kappa <= 1
    and |A u| <= sigma_N(eps) * eps; the pair (u, -u) is then
    2*eps-separated with image distance 2*sigma_N*eps.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if kappa.J != op.domain.J:
        raise ValueError("ball weights must match the operator domain")
    ratio = np.maximum.accumulate(kappa.weights / op.domain.weights)
    N = int(np.sum(ratio <= 1.0 / eps))
    if N < 1:
        raise ValueError(f"eps={eps} too large: no coordinate satisfies kappa_j <= 1/eps")
    report = weighted_svd(op)
    if N > report.n_resolved:
        raise ValueError(
            f"cutoff dimension N(eps)={N} exceeds the resolved spectrum ({report.n_resolved})"
        )
    sub = op.weighted_matrix()[:, :N]
    _, svals, Vh = np.linalg.svd(sub, full_matrices=False)
    sigma_N = float(svals[-1])
    v = Vh[-1]
    u = np.zeros(op.domain.J)
    u[:N] = eps * v / op.domain.weights[:N]
    image = op.image_distance(u, -u)
    cert = InstabilityCertificate(
        x1=u,
        x2=-u,
        domain_distance=2.0 * eps,
        image_distance=image,
        eps=2.0 * eps,
        delta=sigma_N * eps,
        modulus_curve=((image, 2.0 * eps),),
        provenance="spectral_witness",
    )
    return _verify_and_emit(op, CompactSet(kappa), cert)


# --- diagonal stability characterization ---------------------------------

@dataclass(frozen=True)
class PowerModulus:
    """eta(t) = scale * t^alpha, the Hoelder candidate modulus (squared form)."""

    alpha: float
    scale: float = 1.0

    def __call__(self, t):
        return self.scale * np.asarray(t, dtype=float) ** self.alpha


def _modulus_shape_ok(eta, t_grid: np.ndarray, tol: float = 1e-9) -> bool:
    """Numerical precondition: increasing, concave, eta(t)/t nonincreasing."""
    vals = np.asarray(eta(t_grid), dtype=float)
    if np.any(~np.isfinite(vals)) or np.any(vals <= 0):
        return False
    if np.any(np.diff(vals) <= -tol * np.max(vals)):
        return False
    t1, t2, t3 = t_grid[:-2], t_grid[1:-1], t_grid[2:]
    v1, v2, v3 = vals[:-2], vals[1:-1], vals[2:]
    chord = v1 + (v3 - v1) * (t2 - t1) / (t3 - t1)
    if np.any(v2 < chord - tol * np.max(vals)):
        return False
    ratio = vals / t_grid
    if np.any(np.diff(ratio) > tol * np.max(ratio)):
        return False
    return True


def holder_stability_check(sigmas, kappa: WeightSequence, eta, J: int | None = None):
    """Diagonal-case stability test: kappa_j^-2 <= eta((sigma_j/kappa_j)^2).

    For an operator diagonal in the ball's own basis this inequality over
    j <= J is equivalent (for increasing concave eta with eta(t)/t
    nonincreasing) to the stability bound |f|^2 <= eta(|Af|^2) on the ball.
    Returns None on pass, the first violating index (1-based) otherwise.
    ``eta`` must satisfy its shape preconditions on a 64-point log grid
    spanning the checked arguments, or the call is rejected outright.
    """
    s = np.asarray(sigmas, dtype=float)
    J = s.size if J is None else min(int(J), s.size, kappa.J)
    if J < 1:
        raise ValueError("need at least one index to check")
    k = kappa.weights[:J]
    args = (s[:J] / k) ** 2
    lo, hi = float(np.min(args)), float(np.max(args))
    grid = np.exp(np.linspace(np.log(lo) - 0.5, np.log(hi) + 0.5, 64))
    if not _modulus_shape_ok(eta, grid):
        raise ValueError(
            "candidate modulus fails its shape preconditions "
            "(increasing, concave, eta(t)/t nonincreasing) on the checked range"
        )
    lhs = k**-2.0
    rhs = np.asarray(eta(args), dtype=float)
    bad = np.flatnonzero(lhs > rhs * (1.0 + 1e-12))
    return int(bad[0]) + 1 if bad.size else None


def stability_counterexample_search(
    sigmas, kappa: WeightSequence, eta, n_samples: int, seed: int = 0, dim: int | None = None
):
    """Random search for a ball element violating |f|^2 <= eta(|Af|^2).

    Samples directions in the leading coordinates, scaled to random
    ball radii; the operator is taken diagonal with the given singular
    values (the setting of the analytic check).  Returns the worst sample
    (margin, f) where margin > 0 means a violation was found.
    """
    s = np.asarray(sigmas, dtype=float)
    d = min(dim or 64, s.size, kappa.J)
    rng = np.random.default_rng(seed)
    k = kappa.weights[:d]
    worst = (-np.inf, None)
    for _ in range(int(n_samples)):
        g = rng.standard_normal(d)
        rho = rng.uniform(0.0, 1.0)
        f = g / k
        f *= rho / math.sqrt(float(np.sum((k * f) ** 2)))
        lhs = float(np.sum(f**2))
        rhs = float(eta(float(np.sum((s[:d] * f) ** 2))))
        margin = lhs - rhs
        if margin > worst[0]:
            worst = (margin, f.copy())
    return worst


# --- counting functions and modulus curves --------------------------------

@dataclass(frozen=True)
class CountFunction:
    """Strictly decreasing count bound with closed-form inverse.

    family "exp_power":    x -> exp(C * x^(-1/p))
    family "exp_logpower": x -> exp(C * |log x|^(1/p)), for arguments < 1
    """

    family: str
    C: float
    p: float

    def __post_init__(self):
        if self.family not in ("exp_power", "exp_logpower"):
            raise ValueError(f"unknown count family {self.family!r}")
        if self.C <= 0 or self.p <= 0:
            raise ValueError("count function needs C > 0 and p > 0")

    def log_value(self, x: float) -> float:
        if x <= 0:
            raise ValueError("count functions are defined for positive arguments")
        if self.family == "exp_power":
            return self.C * x ** (-1.0 / self.p)
        if x >= 1.0:
            raise ValueError("exp_logpower counts are defined for arguments < 1")
        return self.C * (-math.log(x)) ** (1.0 / self.p)

    def inverse_from_log(self, log_y: float) -> float:
        """x with log f(x) = log_y; needs log_y > 0."""
        if log_y <= 0:
            raise ValueError("count inverses need log-counts > 0")
        if self.family == "exp_power":
            return (self.C / log_y) ** self.p
        return math.exp(-((log_y / self.C) ** self.p))


def modulus_lower_curve(f_count: CountFunction, g_count: CountFunction, t_grid) -> list:
    """Pointwise modulus lower bound omega(t) >= g^-1(f(t/2)).

    ``f_count`` bounds the size of image-side nets at scale delta,
    ``g_count`` undercounts domain-side packings at scale eps.  Arguments
    outside the count functions' domains (t at or beyond the diameter
    scale) are dropped, truncating the curve.
    """
    out = []
    for t in np.asarray(t_grid, dtype=float):
        if t <= 0:
            continue
        try:
            log_y = f_count.log_value(t / 2.0)
            omega = g_count.inverse_from_log(log_y)
        except ValueError:
            continue
        out.append((float(t), float(omega)))
    return out


def hs_embedding_bound(alpha: WeightSequence, beta: WeightSequence, M: int, N: int) -> float:
    """Singular value bound for embeddings between weighted operator spaces.

    For spaces of Hilbert-Schmidt operators weighted by nondecreasing
    sequences alpha (domain side) and beta (image side), the (M*N+1)-th
    singular value of the natural embedding is at most
    max(1/(alpha_1*beta_{N+1}), 1/(alpha_{M+1}*beta_1)).
    """
    if M < 1 or N < 1:
        raise ValueError("M and N must be >= 1")
    if M + 1 > alpha.J or N + 1 > beta.J:
        raise ValueError("index out of range for the supplied weights")
    for w in (alpha, beta):
        if np.any(np.diff(w.weights) < -1e-12):
            raise ValueError("weights must be nondecreasing")
    a, b = alpha.weights, beta.weights
    return float(max(1.0 / (a[0] * b[N]), 1.0 / (a[M] * b[0])))


@dataclass(frozen=True)
class InterpolationGain:
    """The gain function g of an interpolation inequality |u|_E <= |u|_H g(|u|_V/|u|_H).

    kind "power":    g(t) = t^p
    kind "logpower": g(t) = ((1/beta) log t)^s, for t > 1
    """

    kind: str
    p: float = 1.0
    s: float = 1.0
    beta: float = 1.0

    def __call__(self, t: float) -> float:
        if self.kind == "power":
            return t**self.p
        if self.kind == "logpower":
            if t <= 1.0:
                raise ValueError("logpower gain needs arguments > 1")
            return (math.log(t) / self.beta) ** self.s
        raise ValueError(f"unknown gain kind {self.kind!r}")


def interpolation_triple_curve(
    gain: InterpolationGain, op_norm_bound: float, inclusion_sigmas
) -> list:
    """Modulus lower-bound points from an interpolation triple.

    For each singular value s_j of the compact inclusion, the normalized
    j-th singular direction yields the point t_j = C * s_j / g(1/s_j) with
    omega(t_j) >= 1/g(1/s_j).  The map s -> t must come out strictly
    increasing on the inputs, else the curve is rejected.
    """
    if op_norm_bound <= 0:
        raise ValueError("operator norm bound must be positive")
    s = np.asarray(inclusion_sigmas, dtype=float)
    if np.any(s <= 0) or np.any(np.diff(s) > 0):
        raise ValueError("inclusion singular values must be positive and nonincreasing")
    pts = []
    for sj in s:
        gval = gain(1.0 / sj)
        pts.append((op_norm_bound * sj / gval, 1.0 / gval))
    ts = np.array([p[0] for p in pts])
    if np.any(np.diff(ts[::-1]) <= 0):
        raise ValueError("the induced abscissa map is not strictly increasing on these inputs")
    return pts
