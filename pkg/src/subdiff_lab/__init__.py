"""Subdifferentials, enlargements and optimality tests for piecewise-linear functions.

Functions are minima of max-affine functions on an optional box domain.
Everything is exact where it can be (breakpoints, active sets, LPs) and
grid-based with an explicit spacing elsewhere.
"""

from .calculus import (
    DEFAULT_SCHEDULE,
    LinkReport,
    Polytope,
    SampleSet,
    SubgradientSample,
    directional_derivative,
    directional_derivatives,
    eps_enlargement,
    subdiff_contains,
    subdifferential,
    sup_support,
    verify_link,
)
from .errors import *  # noqa: F401,F403
from .instances import generate_instance, rng_for
from .monotone import (
    AbsorbReport,
    OperatorGraph,
    check_absorbing,
    check_maximal_monotone,
    check_monotone,
    monotonically_related,
    polar_samples,
    sample_subdiff_graph,
)
from .optimality import (
    RefutationWitness,
    TestReport,
    Verdict,
    brute_force_is_min,
    directional_test,
    minty_sufficient,
    refute_optimality,
    subdiff_sufficient,
    subdiff_test,
)
from .parser import format_function, normalize, parse, parse_box, parse_function
from .plfunc import (
    AffinePiece,
    Box,
    GridSpec,
    MaxAffine,
    PLFunction,
    SegmentProfile,
    evaluate,
    minimize_exact,
    minimize_on_box,
    restrict_to_segment,
)
from .variational import (
    EkelandWitness,
    MVIWitness,
    ekeland_point,
    find_enlarged_subgradient,
    mean_value_witness,
)

__version__ = "0.1.0"
