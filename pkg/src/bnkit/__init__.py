"""Structure learning for discrete Bayesian networks that combines
score-based search with hard and soft knowledge constraints: required,
undirected and forbidden edges, incomplete temporal orders with ancestral
checking, initial graphs, connectedness, target-variable penalty weights
and decision-network conversion.
"""

from . import errors
from .evaluation import ConfusionCounts, EvalReport, confusion, evaluate, missing_edges, scores
from .graph import (
    Cpdag,
    Dag,
    TemporalTiers,
    ancestors,
    layer_by_longest_path,
    to_cpdag,
    validate_dag,
    weakly_connected_components,
)
from .knowledge import (
    BdnAnnotation,
    BdnGraph,
    KnowledgeSpec,
    Move,
    apply_move,
    graph_satisfies,
    move_is_admissible,
    parse_edge_constraints,
    parse_tiers,
    seed_graph,
    to_bdn,
)
from .model import Dataset, DiscreteBn, family_counts, forward_sample, mle_fit
from .sampling import (
    build_spec,
    sample_edge_constraints,
    sample_forbidden_constraints,
    sample_initial_graph,
    sample_tiers,
)
from .saiyanh import Emsg, MmdTable, build_emsg, emsg_from_table, mmd, mmd_table, saiyanh
from .scoring import (
    FamilyScore,
    ScoreCache,
    TargetWeights,
    bic,
    family_score_cached,
    free_parameters,
    log_likelihood,
)
from .search import (
    LearnResult,
    SearchConfig,
    enforce_str_bdn,
    enforce_var_rel,
    hill_climb,
    mahc,
    tabu,
)

__version__ = "0.1.0"
