from eudesign.design.pointset import (
    AmbiguousShellError,
    ShellDecomposition,
    WeightedPointSet,
    antipodal_half,
    antipodal_pairs,
    check_weighted_points,
    decompose_shells,
    is_antipodal,
)
from eudesign.design.tightness import (
    InnerProductProfile,
    MatrixCheck,
    TightnessReport,
    classify_tightness,
    design_dimension_bound,
    design_matrix_M,
    euclidean_dimension,
    inner_product_set_profile,
    tight_identity_check,
    weight_moment,
    weighted_gram_schmidt,
)
from eudesign.design.verify import (
    DEFAULT_TOL,
    StrengthReport,
    moment_equation_count,
    moment_residuals,
    verify_design_integral,
)

__all__ = [
    "AmbiguousShellError",
    "DEFAULT_TOL",
    "InnerProductProfile",
    "MatrixCheck",
    "ShellDecomposition",
    "StrengthReport",
    "TightnessReport",
    "WeightedPointSet",
    "antipodal_half",
    "antipodal_pairs",
    "check_weighted_points",
    "classify_tightness",
    "decompose_shells",
    "design_dimension_bound",
    "design_matrix_M",
    "euclidean_dimension",
    "inner_product_set_profile",
    "is_antipodal",
    "moment_equation_count",
    "moment_residuals",
    "tight_identity_check",
    "verify_design_integral",
    "weight_moment",
    "weighted_gram_schmidt",
]
