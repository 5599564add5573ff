"""Belief propagation on pairwise MRFs with faithful subgraph explanations."""

from .batch import RunReport, TargetReport, count_bp_invocations, explain_targets
from .bp import BpConfig, BpResult, belief, compute_message, run_bp
from .divergence import kl, sym_kl
from .graphio import (DatasetSpec, ParseError, build_mrf, export_explanation,
                      generate_synthetic, karate_club, karate_mrf,
                      load_dataset, load_edges, load_labels, load_priors,
                      parse_explanation)
from .mrf import (DegenerateModelError, GraphValidationError, Mrf,
                  induced_subgraph, is_connected, is_tree, norm_edge)
from .search import (Beam, BpCounter, ExplanationSubgraph, SearchConfig,
                     beam_search, combine, evaluate_candidate, extend_geg,
                     extend_gel, frontier, prune_frontier, random_extend)

__version__ = "0.1.0"

__all__ = [
    "Beam", "BpConfig", "BpCounter", "BpResult", "DatasetSpec",
    "DegenerateModelError", "ExplanationSubgraph", "GraphValidationError",
    "Mrf", "ParseError", "RunReport", "SearchConfig", "TargetReport",
    "beam_search", "belief", "build_mrf", "combine", "compute_message",
    "count_bp_invocations", "evaluate_candidate", "explain_targets",
    "export_explanation", "extend_geg", "extend_gel", "frontier",
    "generate_synthetic", "induced_subgraph", "is_connected", "is_tree",
    "karate_club", "karate_mrf", "kl", "load_dataset", "load_edges",
    "load_labels", "norm_edge", "parse_explanation", "prune_frontier",
    "random_extend", "run_bp", "sym_kl",
]
