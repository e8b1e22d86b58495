"""Cuts for sets defined by one separable bipartite bilinear constraint.

The set ``{(x, y) in [0,1]^2n : sum a_i x_i y_i >= d}`` admits
second-order-cone-representable valid inequalities built from minimal covers:
the bilinear cover inequality, its sequence-independent lifting through a
two-slope subadditive bound, and numeric sequential lifting for general
bipartite bilinear constraints.
"""

from .errors import (
    BiliftError,
    CapExceeded,
    ClassMismatch,
    Infeasible,
    NotMinimalCover,
    PreconditionViolated,
    RestrictionEmpty,
    SearchCapExceeded,
    SeedRejected,
)
from .instance import (
    CoverContext,
    NoCoverCertificate,
    Partition,
    SeparableInstance,
    cover_context,
    find_cover_partition,
    find_cover_partitions,
    is_minimal_cover,
)
from .lifted import GammaClass, GammaTerm, LiftedCut, build_gamma, build_lifted_cut, eval_lifted
from .lifting import NEG_INFINITY, LiftingSample, binary_points, phi_exact, psi, sample_lifting
from .seed import ComparisonCut, SeedCut, build_crt, build_seed, eval_seed
from .seqlift import (
    BipartiteInstance,
    Certificate,
    LiftResult,
    SeedInequality,
    lift_coefficient,
    nonliftable_certificate,
)
from .verify import (
    LinearObjective,
    PointPair,
    StrengthReport,
    ValidityOptions,
    ValidityReport,
    approx_ratio,
    check_validity,
    enumerate_extreme_points,
    sample_feasible,
    theta,
    z_relax,
    z_star,
)

__all__ = [
    "approx_ratio",
    "BiliftError",
    "binary_points",
    "BipartiteInstance",
    "build_crt",
    "build_gamma",
    "build_lifted_cut",
    "build_seed",
    "CapExceeded",
    "Certificate",
    "check_validity",
    "ClassMismatch",
    "ComparisonCut",
    "cover_context",
    "CoverContext",
    "enumerate_extreme_points",
    "eval_lifted",
    "eval_seed",
    "find_cover_partition",
    "find_cover_partitions",
    "GammaClass",
    "GammaTerm",
    "Infeasible",
    "is_minimal_cover",
    "lift_coefficient",
    "LiftedCut",
    "LiftingSample",
    "LiftResult",
    "LinearObjective",
    "NEG_INFINITY",
    "NoCoverCertificate",
    "nonliftable_certificate",
    "NotMinimalCover",
    "Partition",
    "phi_exact",
    "PointPair",
    "PreconditionViolated",
    "psi",
    "RestrictionEmpty",
    "sample_feasible",
    "sample_lifting",
    "SearchCapExceeded",
    "SeedCut",
    "SeedInequality",
    "SeedRejected",
    "SeparableInstance",
    "StrengthReport",
    "theta",
    "ValidityOptions",
    "ValidityReport",
    "z_relax",
    "z_star",
]

__version__ = "0.1.0"
