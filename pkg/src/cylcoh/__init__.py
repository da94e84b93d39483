"""Numerical exterior calculus on boxes and cylinders.

Sampled differential forms with finite-difference exterior derivative,
cone/averaged homotopy operators on convex domains, weighted
Sobolev-Poincare constants, Cech gluing of local primitives over a good
cover, and an integrability criterion deciding when every exact form on
a twisted cylinder has a norm-controlled global primitive.
"""

from .domain import DomainSpec, box, cylinder, twisted_cylinder
from .forms import (
    GridForm,
    decompose_cylinder,
    exterior_derivative,
    fF_profiles,
    lp_norm,
    pointwise_norm,
    recompose_cylinder,
)
from .weights import WeightProfile
from .homotopy import K_y, A_alpha, check_admissible_weight
from .constants import (
    ConstantRequest,
    C_integral,
    corollary_box_bound,
    cylinder_constant,
    Q_factor,
    sup_indicator_norm,
)
from .cover import GoodCover, circle_cover, torus_cover
from .cech import CechCochain, HypothesisFailure, coboundary, glue_primitive
from .vanishing import (
    AdmissibleRegion,
    CriterionInput,
    admissible_region,
    asymptotic_delegate,
    criterion_check,
    powerlaw_exponents,
    region_grid,
    sphere_hdr_zero,
)

__all__ = [
    "DomainSpec",
    "box",
    "cylinder",
    "twisted_cylinder",
    "GridForm",
    "exterior_derivative",
    "decompose_cylinder",
    "recompose_cylinder",
    "pointwise_norm",
    "lp_norm",
    "fF_profiles",
    "WeightProfile",
    "K_y",
    "A_alpha",
    "check_admissible_weight",
    "ConstantRequest",
    "C_integral",
    "corollary_box_bound",
    "cylinder_constant",
    "Q_factor",
    "sup_indicator_norm",
    "GoodCover",
    "circle_cover",
    "torus_cover",
    "CechCochain",
    "HypothesisFailure",
    "coboundary",
    "glue_primitive",
    "AdmissibleRegion",
    "CriterionInput",
    "admissible_region",
    "asymptotic_delegate",
    "criterion_check",
    "powerlaw_exponents",
    "region_grid",
    "sphere_hdr_zero",
]

__version__ = "0.1.0"
