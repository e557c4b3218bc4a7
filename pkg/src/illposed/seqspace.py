"""Weighted sequence spaces and diagonal embeddings with exact singular values.

A smoothness class is modeled as a weighted little-ell-2 space over
coefficients indexed j = 1..J: Sobolev-type weights grow like j^(s/n),
Gevrey/analytic-type weights like exp(rho*(j-1)^(1/(n*sigma))).  Embeddings
between two such spaces are diagonal, so their singular values are known in
closed form and everything downstream can be validated against them.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# exp(700) is near the float64 overflow edge; refuse to build silent infs
_EXP_CAP = 700.0

# sum_{k>=1} k^-2, the normalizer of the equi-small-tail weight construction
_TAIL_NORMALIZER = math.pi**2 / 6.0


class WeightError(ValueError):
    """Invalid weight-sequence parameters."""


@dataclass(frozen=True)
class WeightSequence:
    """Positive nondecreasing-by-construction weights defining a weighted l2 norm.

    ``kind`` is one of ``"sobolev"``, ``"gevrey"``, ``"custom"``; ``params``
    records the defining constants for serialization.
    """

    weights: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1 or w.size < 1:
            raise WeightError("weights must be a nonempty 1-d sequence")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise WeightError("weights must be finite and strictly positive")
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size

    @property
    def J(self) -> int:
        return self.weights.size

    def norm(self, x) -> float:
        """Weighted l2 norm (sum_j w_j^2 |x_j|^2)^(1/2)."""
        x = np.asarray(x)
        if x.shape[-1] != self.J:
            raise WeightError(f"vector length {x.shape[-1]} != J={self.J}")
        return float(np.sqrt(np.sum(self.weights**2 * np.abs(x) ** 2, axis=-1)))

    def scaled_by(self, factors) -> "WeightSequence":
        """Multiply weights entrywise by a positive sequence."""
        return WeightSequence(self.weights * np.asarray(factors, dtype=float), kind="custom")

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": dict(self.params),
            "J": self.J,
            "weights": self.weights.tolist(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), sort_keys=True)

    @staticmethod
    def from_json_dict(d: dict) -> "WeightSequence":
        return WeightSequence(np.asarray(d["weights"], dtype=float), d["kind"], dict(d.get("params", {})))


def unit_weights(J: int) -> WeightSequence:
    return WeightSequence(np.ones(int(J)), kind="custom", params={"unit": True})


def make_weights(kind: str, params: dict, J: int) -> WeightSequence:
    """Build a named weight sequence of length J (indices j = 1..J).

    sobolev(s, n):  w_j = j^(s/n).
    gevrey(sigma, rho, n):  w_j = exp(rho * (j-1)^(1/(n*sigma))), the shift
    matching a 0-based mode count.  Exponents above 700 are rejected rather
    than overflowing to inf.
    """
    J = int(J)
    if J < 1:
        raise WeightError(f"J must be >= 1, got {J}")
    j = np.arange(1, J + 1, dtype=float)

    if kind == "sobolev":
        s, n = float(params["s"]), int(params["n"])
        if n < 1:
            raise WeightError(f"n must be >= 1, got {n}")
        w = j ** (s / n)
        return WeightSequence(w, "sobolev", {"s": s, "n": n})

    if kind == "gevrey":
        sigma, rho, n = float(params["sigma"]), float(params["rho"]), int(params["n"])
        if n < 1:
            raise WeightError(f"n must be >= 1, got {n}")
        if sigma < 1:
            raise WeightError(f"gevrey requires sigma >= 1, got {sigma}")
        if rho <= 0:
            raise WeightError(f"gevrey requires rho > 0, got {rho}")
        expo = rho * (j - 1) ** (1.0 / (n * sigma))
        if expo[-1] > _EXP_CAP:
            raise WeightError(
                f"gevrey weight exponent {expo[-1]:.1f} exceeds cap {_EXP_CAP:g}; reduce rho or J"
            )
        return WeightSequence(np.exp(expo), "gevrey", {"sigma": sigma, "rho": rho, "n": n})

    if kind == "custom":
        return WeightSequence(np.asarray(params["weights"], dtype=float), "custom")

    raise WeightError(f"unknown weight kind {kind!r}")


def _descending_sort_stable(values: np.ndarray) -> np.ndarray:
    """Descending sort with ties broken by original index ascending."""
    order = np.lexsort((np.arange(values.size), -values))
    return values[order]


def embedding_singular_values(domain: WeightSequence, codomain: WeightSequence) -> np.ndarray:
    """Exact singular values of the identity embedding between weighted spaces.

    The embedding is diagonal with entries codomain_j / domain_j; its
    singular values are the descending sort of those ratios.  For
    sobolev(s1,n) -> sobolev(s2,n) the k-th value is k^(-(s1-s2)/n) exactly;
    for gevrey(sigma,rho,n) -> sobolev(s,n) it is
    k^(s/n) * exp(-rho*(k-1)^(1/(n*sigma))).
    """
    if domain.J != codomain.J:
        raise WeightError(f"length mismatch: {domain.J} vs {codomain.J}")
    return _descending_sort_stable(codomain.weights / domain.weights)


@dataclass(frozen=True)
class DiagonalOperator:
    """Coordinatewise operator between weighted sequence spaces.

    Acts as x_j -> scale_j * x_j; as an operator from (domain-weighted l2)
    to (codomain-weighted l2) its singular values are exactly the descending
    sort of scale_j * codomain_j / domain_j.
    """

    domain: WeightSequence
    codomain: WeightSequence
    scale: np.ndarray | None = None

    def __post_init__(self):
        if self.domain.J != self.codomain.J:
            raise WeightError("domain/codomain length mismatch")
        s = np.ones(self.domain.J) if self.scale is None else np.asarray(self.scale, dtype=float)
        if s.shape != (self.domain.J,):
            raise WeightError("scale length mismatch")
        object.__setattr__(self, "scale", s)

    @property
    def J(self) -> int:
        return self.domain.J

    def apply(self, x) -> np.ndarray:
        return self.scale * np.asarray(x)

    def singular_values(self) -> np.ndarray:
        return _descending_sort_stable(np.abs(self.scale) * self.codomain.weights / self.domain.weights)


def compact_set_weights(tail_thresholds, J: int) -> WeightSequence:
    """Piecewise-constant weights certifying an equi-small-tail compact set.

    ``tail_thresholds`` lists (N_l, eps_l) pairs for l = 2, 3, ... (a bare
    index is also accepted, taking the default schedule eps_l = 1/l^2): any
    unit-ball element u whose tails satisfy sum_{j>=N_l} |u_j|^2 <= eps_l^2
    has sum_j kappa_j^2 |u_j|^2 <= 1 for the returned kappa.  Construction:
    kappa_j^2 = 1/C1 on [1, N_2), l^2/C1 on [N_l, N_{l+1}) with
    C1 = sum_k k^-2 = pi^2/6; the last block extends to J.

    The guarantee requires eps_l <= 1/l^2; a slower user schedule is
    rejected.
    """
    J = int(J)
    if J < 1:
        raise WeightError(f"J must be >= 1, got {J}")
    pairs = []
    for l, item in enumerate(tail_thresholds, start=2):
        if np.isscalar(item):
            N, eps = int(item), 1.0 / l**2
        else:
            N, eps = int(item[0]), float(item[1])
        if eps <= 0:
            raise WeightError("tail bounds must be positive")
        if eps > 1.0 / l**2 + 1e-12:
            raise WeightError(f"tail bound eps_{l}={eps:g} exceeds the certified schedule 1/{l}^2")
        pairs.append((N, eps))

    kappa_sq = np.full(J, 1.0 / _TAIL_NORMALIZER)
    prev_N = 1
    for l, (N, _) in enumerate(pairs, start=2):
        if N <= prev_N:
            raise WeightError("threshold indices must be strictly increasing")
        if N <= J:
            kappa_sq[N - 1 :] = l**2 / _TAIL_NORMALIZER
        prev_N = N

    return WeightSequence(
        np.sqrt(kappa_sq),
        "custom",
        {"tail_thresholds": [[N, eps] for N, eps in pairs]},
    )
