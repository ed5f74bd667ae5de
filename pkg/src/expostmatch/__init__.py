"""Exact deciders for lotteries over stable matchings.

A random matching is a bistochastic matrix of rational probabilities.
This package decides, in exact arithmetic, whether such a matrix can
be implemented as a lottery over weakly stable deterministic matchings
(ex-post stability), over strongly stable ones, or whether every
implementation is necessarily stable (robustness), and produces the
witness decompositions.
"""

from .core import (
    Instance,
    ValidationReport,
    Violation,
    WeakOrder,
    complete_instance,
    validate_instance,
)
from .errors import CapExceededError, ExpostMatchError, InputError
from .expost import (
    ExpostResult,
    enumerate_stable_support_matchings,
    find_consistent_stable,
    max_stable_decomposition,
)
from .fractional import (
    FractionalReport,
    FractionalViolation,
    is_fractionally_stable,
    is_fractionally_strongly_stable,
)
from .gen import (
    gen_example1,
    gen_random_instance,
    gen_random_mixture,
    gen_x3c_reduction,
    probabilistic_serial,
)
from .matching import (
    BlockingPair,
    DeterministicMatching,
    StabilityReport,
    break_ties,
    deferred_acceptance,
    is_strongly_stable,
    is_weakly_stable,
)
from .oracle import X3CInstance, solve_x3c
from .randmatch import (
    Decomposition,
    DecompositionTerm,
    RandomMatching,
    birkhoff_decompose,
    matrix_of_matching,
    recombine,
    validate_random_matching,
)
from .rationals import RAT, format_rational, parse_rational
from .robust import RobustResult, is_robust_expost_stable
from .strong import ExpostStrongResult, build_interval_layout, expost_strong_decompose

__version__ = "0.1.0"

__all__ = [
    "BlockingPair",
    "CapExceededError",
    "Decomposition",
    "DecompositionTerm",
    "DeterministicMatching",
    "ExpostMatchError",
    "ExpostResult",
    "ExpostStrongResult",
    "FractionalReport",
    "FractionalViolation",
    "InputError",
    "Instance",
    "RAT",
    "RandomMatching",
    "RobustResult",
    "StabilityReport",
    "ValidationReport",
    "Violation",
    "WeakOrder",
    "X3CInstance",
    "birkhoff_decompose",
    "break_ties",
    "build_interval_layout",
    "complete_instance",
    "deferred_acceptance",
    "enumerate_stable_support_matchings",
    "expost_strong_decompose",
    "find_consistent_stable",
    "format_rational",
    "gen_example1",
    "gen_random_instance",
    "gen_random_mixture",
    "gen_x3c_reduction",
    "is_fractionally_stable",
    "is_fractionally_strongly_stable",
    "is_robust_expost_stable",
    "is_strongly_stable",
    "is_weakly_stable",
    "matrix_of_matching",
    "max_stable_decomposition",
    "parse_rational",
    "probabilistic_serial",
    "recombine",
    "solve_x3c",
    "validate_instance",
    "validate_random_matching",
]
