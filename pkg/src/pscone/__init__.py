"""Finite-facet C-pseudo-cones, their dual curvature measures and a dual Minkowski solver."""

from .errors import DomainError, GridError, PseudoConeError, ValidationError
from .fixtures import half_plane, octant, quadrant, random_pseudocone, tangent_pseudocone, translated_cone
from .geometry import (
    Cone,
    QuadratureGrid,
    cone_from_dict,
    contains,
    dual_cone,
    make_circular_cone,
    make_polyhedral_cone,
    omega_area,
    omega_area_mc,
    sphere_grid,
)
from .measures import (
    DecayPair,
    DiscreteMeasure,
    custom_pair,
    discrete_measure,
    dual_curvature,
    dual_volume,
    exponential_pair,
    integrate,
    j_g,
    power_pair,
    radial_measure,
)
from .pseudocone import (
    PseudoCone,
    distance_from_origin,
    inactive_facets,
    perturb,
    radial,
    radial_gauss,
    scale,
    support,
    support_exact,
    wulff_shape,
)
from .solver import SolverOptions, SolverResult, lemma41_bounds, solve_dual_minkowski
from .variational import VariationalReport, jg_derivative_exact, jg_derivative_fd, phi, phi_gradient

__version__ = "0.1.0"
