"""Weighted Euclidean t-designs: construction, verification, tightness and deformation."""

from eudesign.construct import (
    InfeasibleError,
    antipodal_five_design_r2,
    bajnok_three_design,
    cross_polytope_three_design,
    f_recurrence,
    regular_simplex,
    tight_four_design_r2,
    tight_two_design_from_radii,
)
from eudesign.design import (
    WeightedPointSet,
    classify_tightness,
    decompose_shells,
    design_dimension_bound,
    moment_residuals,
    verify_design_integral,
)
from eudesign.estimators import DesignVerifier
from eudesign.io import read_design, write_design
from eudesign.poly import Polynomial, gegenbauer, harmonic_basis
from eudesign.rigidity import (
    DesignSystem,
    build_design_system,
    newton_deform,
    rank_analysis,
    strong_nonrigidity_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "DesignSystem",
    "DesignVerifier",
    "InfeasibleError",
    "Polynomial",
    "WeightedPointSet",
    "antipodal_five_design_r2",
    "bajnok_three_design",
    "build_design_system",
    "classify_tightness",
    "cross_polytope_three_design",
    "decompose_shells",
    "design_dimension_bound",
    "f_recurrence",
    "gegenbauer",
    "harmonic_basis",
    "moment_residuals",
    "newton_deform",
    "rank_analysis",
    "read_design",
    "regular_simplex",
    "strong_nonrigidity_certificate",
    "tight_four_design_r2",
    "tight_two_design_from_radii",
    "verify_design_integral",
    "write_design",
]
