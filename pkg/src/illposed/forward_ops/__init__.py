"""Discretized forward operators of the model inverse problems."""

from .heat import (
    HeatConfig,
    HeatError,
    dirichlet_laplacian_eigenvalues,
    heat_propagator,
    propagator_log_spectrum,
    time_independent_spectrum,
)
from .annulus import annulus_restriction, annulus_mode_order
from .dtn import DtnConfig, DtnError, disk_dtn, dtn_mode_order, radial_dtn_entry
from .radon import (
    RadonConfig,
    RadonError,
    gram_singular_values,
    radon_matrix,
    radon_system,
    remove_angular_sector,
)
from .harmonics import three_ball_ratios, three_ball_holder_exponent

__all__ = [
    "HeatConfig",
    "HeatError",
    "dirichlet_laplacian_eigenvalues",
    "heat_propagator",
    "propagator_log_spectrum",
    "time_independent_spectrum",
    "annulus_restriction",
    "annulus_mode_order",
    "DtnConfig",
    "DtnError",
    "disk_dtn",
    "dtn_mode_order",
    "radial_dtn_entry",
    "RadonConfig",
    "RadonError",
    "gram_singular_values",
    "radon_matrix",
    "radon_system",
    "remove_angular_sector",
    "three_ball_ratios",
    "three_ball_holder_exponent",
]
