"""Exact computer algebra for ordered Hahn series fields.

Field and valuation arithmetic with precision tracking, leading-term
structures and ball geometry, Weierstrass division on multivariate
truncations, analytic evaluation with Hensel and implicit solvers, root
expansion over the value group, and sampling verifiers for leading-term
preparation.
"""

from .series import (
    GroupElement,
    HahnSeries,
    INFINITE,
    TruncatedSeries,
    compare_sign,
    field_op,
    format_series,
    invert,
    nth_root,
    parse_series,
    standard_part,
    valuation,
)
from .rv import (
    BallDescriptor,
    RvElement,
    VerificationReport,
    angular_component,
    ball_of,
    check_prepares,
    rv_combine,
    rv_lambda,
    sample_in_ball,
)
from .multiseries import (
    MultiSeries,
    format_multiseries,
    gauss_data,
    parse_multiseries,
    recenter_rescale,
    regular_degree,
    strong_split,
    unit_invert,
    weierstrass_divide,
)
from .analytic import (
    AnalyticFunction,
    FunctionRegistry,
    default_registry,
    evaluate_analytic,
    hensel_root,
    implicit_series,
    load_registry_file,
    register_function,
    sqrt_shifted,
)
from .prepare import (
    IntervalCoeff,
    PreparingSet,
    PuiseuxRoot,
    StrongUnitSpec,
    jacobian_probe,
    newton_polygon,
    prepare_polynomial,
    puiseux_roots,
    strong_unit_probe,
    verify_preparation,
)
from .terms import Term, eval_term, parse_term, prepare_term, print_term
from .cli import run_cli

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
