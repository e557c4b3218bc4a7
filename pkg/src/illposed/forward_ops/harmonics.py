"""Homogeneous harmonic polynomials on nested balls: norm ratios.

The degree-l solid harmonic |x|^l H_l (H_l normalized on the unit sphere)
has squared norm over the ball of radius R equal to
int_0^R rho^(2l+n-1) d rho = R^(2l+n)/(2l+n).  Ratios of such norms over
nested balls are the raw material of three-ball inequalities: the middle-
to-outer ratio bounded by a modulus of the inner-to-outer ratio forces a
Hoelder exponent log(r/r2)/log(r1/r2), which is exactly 1/2 for the dyadic
radii (r/2, r, 2r).
"""

from __future__ import annotations

import numpy as np


def _ball_norm_sq(ell: int, n: int, radius: float, quad_nodes: int = 96) -> float:
    """int_0^R rho^(2l+n-1) d rho by Gauss-Legendre quadrature.

    The integrand is a monomial, so the rule is exact once 2*quad_nodes - 1
    reaches the degree; the default covers ell up to about 90.
    """
    deg = 2 * ell + n - 1
    if deg > 2 * quad_nodes - 1:
        raise ValueError(f"quadrature rule too short for degree {deg}")
    x, w = np.polynomial.legendre.leggauss(quad_nodes)
    rho = 0.5 * radius * (x + 1.0)
    return float(0.5 * radius * np.sum(w * rho**deg))


def three_ball_ratios(ell: int, n: int, radii: tuple) -> tuple:
    """Norm ratios (middle/outer, inner/outer) of the degree-l solid harmonic.

    ``radii`` is (r1, r, r2) with 0 < r1 < r < r2.  Returns
    (||u||_{B_r}/||u||_{B_r2}, ||u||_{B_r1}/||u||_{B_r2}) computed by exact
    radial quadrature; in closed form both equal the radius ratio raised to
    the power l + n/2.
    """
    if ell < 0 or n < 1:
        raise ValueError("need degree ell >= 0 and dimension n >= 1")
    r1, r, r2 = (float(v) for v in radii)
    if not 0 < r1 < r < r2:
        raise ValueError(f"radii must satisfy 0 < r1 < r < r2, got {radii}")
    nodes = max(96, ell + n)
    outer = _ball_norm_sq(ell, n, r2, nodes)
    ratio_mid = np.sqrt(_ball_norm_sq(ell, n, r, nodes) / outer)
    ratio_small = np.sqrt(_ball_norm_sq(ell, n, r1, nodes) / outer)
    return float(ratio_mid), float(ratio_small)


def three_ball_holder_exponent(ell: int, n: int, radii: tuple) -> float:
    """log(ratio_mid)/log(ratio_small): the Hoelder exponent certified by the pair."""
    ratio_mid, ratio_small = three_ball_ratios(ell, n, radii)
    return float(np.log(ratio_mid) / np.log(ratio_small))
