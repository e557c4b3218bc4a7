"""Numerical laboratory for quantifying ill-posedness of inverse problems.

The package computes singular values, entropy/capacity numbers and explicit
instability certificates (witness pairs plus modulus-of-continuity lower
bounds) for desk-scale discretizations of classical ill-posed problems:
the backward heat equation, harmonic restriction on annuli, the
Schroedinger Dirichlet-to-Neumann map on the disk, and the limited-angle
Radon transform.
"""

__version__ = "0.1.0"

from . import seqspace, rates, nets, spectral, forward_ops, instability

__all__ = [
    "__version__",
    "seqspace",
    "rates",
    "nets",
    "spectral",
    "forward_ops",
    "instability",
]
