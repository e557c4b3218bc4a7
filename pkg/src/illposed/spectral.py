"""Dense singular-value engine for weighted operators.

A WeightedOperator is a dense matrix together with weight sequences on its
domain and codomain; its spectrum is that of diag(w_cod) M diag(w_dom)^-1.
On top of the plain SVD the module provides the two-sided entropy-number
sandwich built from geometric means of singular values, decay-law fitting,
and randomized checks of the additive/multiplicative singular value
inequalities.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .seqspace import WeightSequence, unit_weights

# singular values below sigma_1 * RESOLVED_REL are reported as unresolved
RESOLVED_REL = 1e-14


class SpectralError(ValueError):
    """Invalid operator or spectrum input."""


@dataclass(frozen=True)
class WeightedOperator:
    """Dense matrix acting between weighted coefficient spaces.

    ``matrix`` has shape (codomain dim, domain dim) in the unweighted
    coordinates; the operator's singular values are those of
    diag(codomain.weights) @ matrix @ diag(domain.weights)^-1.
    """

    matrix: np.ndarray
    domain: WeightSequence
    codomain: WeightSequence
    label: str = ""

    def __post_init__(self):
        m = np.asarray(self.matrix)
        if m.ndim != 2:
            raise SpectralError("matrix must be 2-d")
        if not np.all(np.isfinite(m)):
            raise SpectralError("matrix has non-finite entries")
        if self.codomain.J != m.shape[0] or self.domain.J != m.shape[1]:
            raise SpectralError(
                f"weight lengths ({self.codomain.J}, {self.domain.J}) do not match shape {m.shape}"
            )
        object.__setattr__(self, "matrix", m)

    @property
    def shape(self) -> tuple:
        return self.matrix.shape

    def weighted_matrix(self) -> np.ndarray:
        return (self.codomain.weights[:, None] * self.matrix) / self.domain.weights[None, :]

    def apply(self, x) -> np.ndarray:
        return self.matrix @ np.asarray(x)

    def domain_norm(self, x) -> float:
        return self.domain.norm(x)

    def codomain_norm(self, y) -> float:
        return self.codomain.norm(y)

    def image_distance(self, x1, x2) -> float:
        return self.codomain.norm(self.apply(np.asarray(x1) - np.asarray(x2)))


def diagonal_operator_matrix(scale, domain=None, codomain=None, label="diagonal") -> WeightedOperator:
    """Dense WeightedOperator wrapping a coordinatewise scaling."""
    scale = np.asarray(scale, dtype=float)
    J = scale.size
    dom = domain if domain is not None else unit_weights(J)
    cod = codomain if codomain is not None else unit_weights(J)
    return WeightedOperator(np.diag(scale), dom, cod, label)


def compose(a: WeightedOperator, c: WeightedOperator, label="") -> WeightedOperator:
    """Operator composition a o c; the inner weights must agree."""
    if not np.allclose(a.domain.weights, c.codomain.weights, rtol=1e-12, atol=0):
        raise SpectralError("composition needs a.domain == c.codomain")
    return WeightedOperator(a.matrix @ c.matrix, c.domain, a.codomain, label or f"{a.label}*{c.label}")


def add(a: WeightedOperator, b: WeightedOperator, label="") -> WeightedOperator:
    if a.shape != b.shape:
        raise SpectralError("sum needs equal shapes")
    if not (
        np.allclose(a.domain.weights, b.domain.weights, rtol=1e-12, atol=0)
        and np.allclose(a.codomain.weights, b.codomain.weights, rtol=1e-12, atol=0)
    ):
        raise SpectralError("sum needs identical weights")
    return WeightedOperator(a.matrix + b.matrix, a.domain, a.codomain, label or f"{a.label}+{b.label}")


def save_operator(op: WeightedOperator, path_stem: str) -> None:
    """Write the matrix as <stem>.npy plus a <stem>.json header.

    The header records dims, both weight sequences and the label, enough to
    reload the operator with ``load_operator``.
    """
    np.save(f"{path_stem}.npy", op.matrix)
    header = {
        "dims": list(op.shape),
        "domain": op.domain.to_json_dict(),
        "codomain": op.codomain.to_json_dict(),
        "label": op.label,
    }
    with open(f"{path_stem}.json", "w") as fh:
        json.dump(header, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_operator(path_stem: str) -> WeightedOperator:
    with open(f"{path_stem}.json") as fh:
        header = json.load(fh)
    matrix = np.load(f"{path_stem}.npy")
    return WeightedOperator(
        matrix,
        WeightSequence.from_json_dict(header["domain"]),
        WeightSequence.from_json_dict(header["codomain"]),
        header.get("label", ""),
    )


@dataclass(frozen=True)
class FitResult:
    model: str  # "poly" or "stretched"
    exponent: float  # m for poly, mu for stretched
    coefficient: float  # amplitude c for poly, rho for stretched
    amplitude: float  # leading constant (c, or C for stretched)
    residual: float  # rms residual of log sigma
    fit_range: tuple

    def to_json_dict(self) -> dict:
        return {
            "model": self.model,
            "exponent": self.exponent,
            "coefficient": self.coefficient,
            "amplitude": self.amplitude,
            "residual": self.residual,
            "fit_range": list(self.fit_range),
        }


@dataclass(frozen=True)
class SpectrumReport:
    """Sorted singular values plus optional fit and entropy-sandwich data."""

    sigmas: np.ndarray
    n_resolved: int
    label: str = ""
    fit: FitResult | None = None
    carl: tuple = ()  # (N, lo, hi) triples
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        s = np.asarray(self.sigmas, dtype=float)
        if s.size > 1 and np.any(np.diff(s) > 1e-12 * max(float(s[0]), 1.0)):
            raise SpectralError("singular values must be nonincreasing")
        object.__setattr__(self, "sigmas", s)

    def resolved(self) -> np.ndarray:
        return self.sigmas[: self.n_resolved]

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("k,sigma_k\n")
        for k, s in enumerate(self.sigmas, start=1):
            buf.write(f"{k},{s!r}\n")
        return buf.getvalue()

    def to_json_dict(self) -> dict:
        d = {
            "label": self.label,
            "n_resolved": self.n_resolved,
            "sigmas": self.sigmas.tolist(),
            "fit": self.fit.to_json_dict() if self.fit else None,
            "carl": [list(t) for t in self.carl],
        }
        d.update(self.meta)
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)


def weighted_svd(op: WeightedOperator, label: str | None = None) -> SpectrumReport:
    """Singular values of the weighted matrix, descending, with resolution cutoff.

    Values below sigma_1 * 1e-14 are counted as unresolved (they sit below
    the accuracy of dense bidiagonalization) and are excluded from fits.
    """
    w = op.weighted_matrix()
    sig = np.linalg.svd(w, compute_uv=False)
    n_res = int(np.sum(sig > RESOLVED_REL * sig[0])) if sig.size and sig[0] > 0 else 0
    return SpectrumReport(sig, n_res, label if label is not None else op.label)


def weighted_svd_vectors(op: WeightedOperator):
    """Full weighted SVD (U, sigmas, Vh) plus domain-coordinate right vectors.

    U and Vh are orthonormal in the weighted coordinates; the k-th right
    singular vector in the original (unweighted) domain coordinates is
    ``V_domain[:, k]`` with domain-weighted norm one.
    """
    w = op.weighted_matrix()
    U, s, Vh = np.linalg.svd(w, full_matrices=False)
    V_domain = (Vh.conj().T) / op.domain.weights[:, None]
    return U, s, Vh, V_domain


def carl_sandwich(sigmas, N: int, scalar: str = "complex") -> tuple:
    """Two-sided entropy-number bracket from geometric means of singular values.

    lo = sup_k 2^(-(N-1)/(2k)) (sigma_1 ... sigma_k)^(1/k) over the positive
    prefix, hi = 6 * lo.  For complex-scalar diagonal operators the N-th
    entropy number satisfies lo <= e_N <= hi.  ``scalar="real"`` replaces the
    exponent (N-1)/(2k) by (N-1)/k, the volume-correct form for covering
    real coefficient balls; this variant is what brute-force oracles over
    real meshes are compared against.
    """
    if N < 1:
        raise SpectralError("N must be >= 1")
    s = np.asarray(sigmas, dtype=float)
    if np.any(s < 0):
        raise SpectralError("singular values must be nonnegative")
    if s.size == 0 or s[0] == 0:
        return 0.0, 0.0
    if scalar not in ("complex", "real"):
        raise SpectralError("scalar must be 'complex' or 'real'")
    # zero singular values terminate the geometric-mean prefix
    zeros = np.flatnonzero(s <= 0)
    npos = int(zeros[0]) if zeros.size else s.size
    pos = s[:npos]
    logs = np.cumsum(np.log(pos))
    ks = np.arange(1, npos + 1, dtype=float)
    half = 2.0 if scalar == "complex" else 1.0
    vals = -(N - 1) / (half * ks) * math.log(2.0) + logs / ks
    lo = float(np.exp(np.max(vals)))
    return lo, 6.0 * lo


def carl_table(sigmas, Ns, scalar: str = "complex") -> tuple:
    return tuple((int(N),) + carl_sandwich(sigmas, int(N), scalar) for N in Ns)


def fit_decay(sigmas, fit_range: tuple, model: str) -> FitResult:
    """Least-squares decay-law fit on a k-range of the spectrum.

    model "poly": OLS of log sigma_k against log k.
    model "stretched": log sigma_k = log C - rho * k^mu with mu found by
    golden-section on [0.02, 4] and (log C, rho) by inner least squares.
    The range must stay within the resolved part of the spectrum.
    """
    s = np.asarray(sigmas, dtype=float)
    k0, k1 = int(fit_range[0]), int(fit_range[1])
    if not (1 <= k0 < k1 <= s.size):
        raise SpectralError(f"fit range {fit_range} outside spectrum of length {s.size}")
    if k1 - k0 + 1 < 4:
        raise SpectralError("fit range must contain at least 4 points")
    seg = s[k0 - 1 : k1]
    if np.any(seg <= 10 * np.finfo(float).eps * s[0]):
        raise SpectralError("fit range reaches below the resolution floor")
    k = np.arange(k0, k1 + 1, dtype=float)
    logs = np.log(seg)

    if model == "poly":
        slope, intercept = np.polyfit(np.log(k), logs, 1)
        resid = logs - (slope * np.log(k) + intercept)
        amp = float(np.exp(intercept))
        return FitResult("poly", float(-slope), amp, amp, float(np.sqrt(np.mean(resid**2))), (k0, k1))

    if model == "stretched":

        def sse(mu):
            X = np.stack([np.ones_like(k), -(k**mu)], axis=1)
            coef, *_ = np.linalg.lstsq(X, logs, rcond=None)
            r = logs - X @ coef
            return float(r @ r), coef

        lo_mu, hi_mu = 0.02, 4.0
        gr = (math.sqrt(5.0) - 1.0) / 2.0
        x1 = hi_mu - gr * (hi_mu - lo_mu)
        x2 = lo_mu + gr * (hi_mu - lo_mu)
        f1, f2 = sse(x1)[0], sse(x2)[0]
        for _ in range(200):
            if f1 <= f2:
                hi_mu, x2, f2 = x2, x1, f1
                x1 = hi_mu - gr * (hi_mu - lo_mu)
                f1 = sse(x1)[0]
            else:
                lo_mu, x1, f1 = x1, x2, f2
                x2 = lo_mu + gr * (hi_mu - lo_mu)
                f2 = sse(x2)[0]
            if hi_mu - lo_mu < 1e-10:
                break
        mu = (lo_mu + hi_mu) / 2.0
        err, coef = sse(mu)
        logC, rho = float(coef[0]), float(coef[1])
        resid = math.sqrt(err / k.size)
        return FitResult("stretched", float(mu), rho, float(np.exp(logC)), resid, (k0, k1))

    raise SpectralError(f"unknown fit model {model!r}")


@dataclass(frozen=True)
class WeylViolation:
    inequality: str
    indices: tuple
    lhs: float
    rhs: float


def weyl_checks(a: WeightedOperator, b: WeightedOperator, tol: float = 1e-10) -> list:
    """Verify the additive and multiplicative singular value inequalities.

    Checks sigma_{j+k-1}(A+B) <= sigma_j(A) + sigma_k(B) for all valid
    (j, k) when the shapes/weights allow a sum, and
    sigma_{j+k-1}(A o B) <= sigma_j(A) sigma_k(B) when they allow a
    composition.  Returns the list of violations beyond ``tol`` relative to
    sigma_1; an empty list is a pass.
    """
    out = []
    sa = weighted_svd(a).sigmas
    sb = weighted_svd(b).sigmas

    def sweep(target, name, combine, tol_abs):
        n = target.size
        for j in range(1, sa.size + 1):
            kmax = min(sb.size, n - j + 1)
            if kmax < 1:
                continue
            ks = np.arange(1, kmax + 1)
            bound = combine(sa[j - 1], sb[ks - 1])
            lhs = target[j + ks - 2]
            bad = np.flatnonzero(lhs > bound + tol_abs)
            for i in bad:
                out.append(WeylViolation(name, (j, int(ks[i])), float(lhs[i]), float(bound[i])))

    try:
        s_sum = weighted_svd(add(a, b)).sigmas
        sweep(
            s_sum,
            "sigma_{j+k-1}(A+B) <= sigma_j(A)+sigma_k(B)",
            lambda x, y: x + y,
            tol * max(sa[0], sb[0], 1e-300),
        )
    except SpectralError:
        pass
    try:
        s_prod = weighted_svd(compose(a, b)).sigmas
        sweep(
            s_prod,
            "sigma_{j+k-1}(A o B) <= sigma_j(A)*sigma_k(B)",
            lambda x, y: x * y,
            tol * max(sa[0] * sb[0], 1e-300),
        )
    except SpectralError:
        pass
    return out
