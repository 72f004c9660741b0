"""Numerical toolkit for prevalence questions about circle diffeomorphism lifts."""
from .errors import (
    CirclePrevError,
    DegenerateComposition,
    IdentityHasAllFixedPoints,
    LengthMismatch,
    NotADiffeo,
    NotADiffeoPath,
    OrderOutOfRange,
    ProbeError,
    RegularityMismatch,
    SchemaError,
    SigmaZero,
    WindowOutsideDomain,
    ZeroLambdaDerivative,
)
from .evaluation import (
    EvaluationPoint,
    critical_points,
    eval_map_derivative,
    eval_map_solve,
    orbit_derivative_lambda,
    orbit_derivative_x,
)
from .group import (
    GroupElement,
    Reflection,
    apply,
    compose,
    compose_many,
    fixed_point,
    inverse,
    solve_transitivity,
)
from .lifting import (
    Lifting,
    combine,
    cr_metric,
    eval_derivative,
    evaluate,
    iterate,
    validate_diffeo,
)
from .measure_lab import (
    BoxUnion,
    ccc_apply,
    ccc_coefficients,
    invariance_check,
    product_projection_measure,
    reflect_box_union,
)
from .probe import Probe, alpha_at, domain_interval, foliation_samples
from .qks import measure_Z, qks_report, scan_E_gamma
from .rotation import check_star_beta, convergents, rotation_number

__version__ = "0.1.0"
