"""Lotteries over allocations of indivisible goods that are fair both in
expectation and in every realized outcome.

The package provides exact-arithmetic building blocks (eating simulation,
lottery decomposition, dependent rounding), the allocation algorithms built
from them, verifiers for the fairness guarantees they promise, and
brute-force oracles small enough to check everything independently.
"""

from .core import (
    Additive,
    FairDivisionError,
    FractionalAllocation,
    Instance,
    IntegralAllocation,
    Lexicographic,
    PreconditionError,
    RandomizedAllocation,
    ResourceCapError,
    Table,
    ValidationReport,
    canonical_lex_values,
    dump_instance,
    format_rational,
    instance_from_json,
    instance_to_json,
    is_lexicographic_additive,
    lex_compare_bundles,
    load_instance,
    parse_rational,
    validate_instance,
    value_of,
)
from .rng import SplitMix64, derive_seed
from .fixtures import FIXTURE_NAMES, get_fixture
from .eating import (
    EatingTrace,
    TraceSummary,
    event_times,
    fractional_outcome,
    full_run,
    ordinal_rankings,
    prefix_allocation,
    representative_matrix,
    rounds_allocation,
    run_eating,
    summarize,
    unit_run,
)
from .rounding import (
    Decomposition,
    SuperGoodMatrix,
    build_supergood_matrix,
    bvn_decompose,
    dependent_round,
)
from .audit import (
    AuditReport,
    check_bounded_charity,
    check_ef,
    check_ef1,
    check_efx,
    check_efx_with_charity,
    check_exante_ef,
    check_exante_prop,
    check_po_lex,
    check_sdef,
    check_sdef_instance,
    check_stochastic_dominance_half,
    check_support,
    exante_ratio,
    min_exante_ratio,
)
from .lex_algos import (
    LexBobwResult,
    depround_k2_sample,
    k2_sampler,
    run_picking_sequence,
    sigma_unenvied_sequence,
    solve_lex_bobw,
    uniform_permutation,
    utse,
)
from .charity_algos import (
    SwapStep,
    SwapTrace,
    bounded_charity,
    empty_start,
    minimal_envied_subset,
    random_charity_swap,
    replay_swap_trace,
    resolve_envy_cycles,
)
from .oracle import (
    EstimateResult,
    FeasibilityResult,
    enumerate_efx,
    estimate,
    exact_distribution_charity,
    iter_charity_branches,
    sdef_feasibility,
)

__version__ = "0.1.0"

__all__ = [
    "Additive",
    "AuditReport",
    "Decomposition",
    "EatingTrace",
    "EstimateResult",
    "FairDivisionError",
    "FeasibilityResult",
    "FIXTURE_NAMES",
    "FractionalAllocation",
    "Instance",
    "IntegralAllocation",
    "Lexicographic",
    "LexBobwResult",
    "PreconditionError",
    "RandomizedAllocation",
    "ResourceCapError",
    "SplitMix64",
    "SuperGoodMatrix",
    "SwapStep",
    "SwapTrace",
    "Table",
    "TraceSummary",
    "ValidationReport",
    "bounded_charity",
    "build_supergood_matrix",
    "bvn_decompose",
    "canonical_lex_values",
    "check_bounded_charity",
    "check_ef",
    "check_ef1",
    "check_efx",
    "check_efx_with_charity",
    "check_exante_ef",
    "check_exante_prop",
    "check_po_lex",
    "check_sdef",
    "check_sdef_instance",
    "check_stochastic_dominance_half",
    "check_support",
    "dependent_round",
    "depround_k2_sample",
    "derive_seed",
    "dump_instance",
    "empty_start",
    "enumerate_efx",
    "estimate",
    "event_times",
    "exact_distribution_charity",
    "exante_ratio",
    "format_rational",
    "fractional_outcome",
    "full_run",
    "get_fixture",
    "instance_from_json",
    "instance_to_json",
    "is_lexicographic_additive",
    "iter_charity_branches",
    "k2_sampler",
    "lex_compare_bundles",
    "load_instance",
    "min_exante_ratio",
    "minimal_envied_subset",
    "ordinal_rankings",
    "parse_rational",
    "prefix_allocation",
    "random_charity_swap",
    "replay_swap_trace",
    "representative_matrix",
    "resolve_envy_cycles",
    "rounds_allocation",
    "run_eating",
    "run_picking_sequence",
    "sdef_feasibility",
    "sigma_unenvied_sequence",
    "solve_lex_bobw",
    "summarize",
    "unit_run",
    "uniform_permutation",
    "utse",
    "validate_instance",
    "value_of",
]
