"""Exact checks of stability concepts for random two-sided matchings."""

from .errors import CapExceeded, MatchstabError, ParseError, TierError
from .instance import (
    NULL,
    Cmp,
    Entity,
    Instance,
    ModelTier,
    WeakOrder,
    agent,
    classify_tier,
    compare,
    is_acceptable_pair,
    obj,
    parse_instance,
    render_instance,
)
from .matching import (
    DeterministicMatching,
    RandomMatching,
    SlackVector,
    enumerate_deterministic,
    is_deterministic,
    parse_matching,
    render_matching,
    slack,
    support_graph,
)
from .deterministic import (
    Witness,
    check_individually_rational,
    check_no_envy,
    check_non_wasteful,
    check_weakly_stable_det,
    deferred_acceptance,
)
from .decomposition import (
    Decomposition,
    FeasibilitySystem,
    bvn_decompose,
    enumerate_realizable,
    oracle_all_decompositions,
    solve_convex_feasibility,
)
from .concepts import (
    SD,
    Verdict,
    check_af_fractional,
    check_claimwise,
    check_ex_ante,
    check_ex_post,
    check_fractional,
    check_fractional_dual,
    check_robust_ex_post,
    check_sd_stability,
    evaluate_all,
    sd_dominates,
)
from .association import (
    AssociationMap,
    respects_individual_rationality,
    respects_non_wastefulness,
    restrict_back,
    to_associated_instance,
    to_associated_matching,
)

__version__ = "0.1.0"
