"""Harmonic restriction between concentric circles.

Restricting a harmonic function from the circle of radius s to the circle
of radius r < s is diagonal in the trigonometric basis: the mode e^{ik.}
scales by (r/s)^|k|.  The operator is the cleanest exactly-solvable model
of a boundary foliation layer, with exact singular values and an exact
semigroup law under composition of nested annuli.
"""

from __future__ import annotations

import numpy as np

from ..seqspace import WeightSequence, make_weights, unit_weights
from ..spectral import WeightedOperator


def annulus_mode_order(K: int) -> np.ndarray:
    """Mode indices in listing order: 0, +1, -1, +2, -2, ..., +K, -K."""
    out = [0]
    for k in range(1, K + 1):
        out.extend((k, -k))
    return np.array(out)


def _boundary_weights(kind: str, J: int) -> WeightSequence:
    if kind == "unit":
        return unit_weights(J)
    if kind == "sobolev_half":
        return make_weights("sobolev", {"s": 0.5, "n": 1}, J)
    if kind == "sobolev_minus_half":
        return make_weights("sobolev", {"s": -0.5, "n": 1}, J)
    raise ValueError(f"unknown boundary weight kind {kind!r}")


def annulus_restriction(
    s: float, r: float, K: int, domain_weights: str = "unit", codomain_weights: str = "unit"
) -> WeightedOperator:
    """Diagonal restriction operator from radius s to radius r <= s.

    Modes k = 0, +-1, ..., +-K in listing order scale by (r/s)^|k|; r = s
    gives the identity.  Weight kinds: "unit", "sobolev_half",
    "sobolev_minus_half" (half-order smoothness norms on the circle).
    """
    if not 0 < r <= s:
        raise ValueError(f"need 0 < r <= s, got r={r}, s={s}")
    if K < 0:
        raise ValueError("mode cutoff K must be >= 0")
    modes = annulus_mode_order(K)
    scale = (r / s) ** np.abs(modes).astype(float)
    J = modes.size
    return WeightedOperator(
        np.diag(scale),
        _boundary_weights(domain_weights, J),
        _boundary_weights(codomain_weights, J),
        label=f"annulus_restriction(s={s},r={r},K={K})",
    )
