"""Beam search for small acyclic subgraphs that explain a node's marginal.

Starting from the target node alone, the search grows candidate subgraphs
one node-and-edge at a time, keeping the best ``k`` per step, and scores a
candidate by how faithfully BP on it reproduces the target's full-graph
belief (symmetric KL divergence, lower is better).  Growth always attaches a
new node through exactly one edge, so every candidate is a tree.

Two ranking strategies are provided, plus random baselines imitating each:

* ``global``: every frontier extension gets a fresh BP run on the extended
  subgraph and is ranked by the resulting objective.  Most faithful, most
  expensive.
* ``local``: extensions are ranked using only the converged full-graph
  messages.  For an end-point node ``u`` of the subgraph, the quantity being
  explained is the target's belief (when ``u`` is the target) or the message
  ``u`` already sends toward the target; the candidate that best matches it
  (an incoming full-graph message, or ``u``'s own prior) wins.  When the
  prior wins, ``u`` is closed and that branch stops growing there.

``local`` growth can be restricted by a variant: ``chain`` extends only at
the most recently added node, ``star`` only at the target itself.

Frontier pruning (``global`` only): after the evaluations of a step, the
worst-scoring fraction of the just-scored frontier nodes is permanently
abandoned for the remainder of this target's search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .bp import BpConfig, BpResult, run_bp, tree_config
from .divergence import sym_kl
from .mrf import (Edge, GraphValidationError, Mrf, NodeId, induced_subgraph,
                  is_tree, norm_edge)

METHODS = ("global", "local", "random-global", "random-local")
VARIANTS = ("unconstrained", "chain", "star")


@dataclass(frozen=True)
class SearchConfig:
    """Search parameters: capacity, beam width, method and variant, pruning."""

    capacity: int = 5
    beam_width: int = 1
    method: str = "global"
    variant: str = "unconstrained"
    pruning_rate: float = 0.0
    seed: int = 0
    bp: BpConfig = field(default_factory=BpConfig)

    def __post_init__(self):
        if self.capacity < 1:
            raise GraphValidationError(f"capacity must be >= 1, got {self.capacity}")
        if self.beam_width < 1:
            raise GraphValidationError(f"beam_width must be >= 1, got {self.beam_width}")
        if self.method not in METHODS:
            raise GraphValidationError(f"unknown method {self.method!r}")
        if self.variant not in VARIANTS:
            raise GraphValidationError(f"unknown variant {self.variant!r}")
        if not 0.0 <= self.pruning_rate < 1.0:
            raise GraphValidationError(
                f"pruning_rate must be in [0, 1), got {self.pruning_rate}")


@dataclass(eq=False)
class ExplanationSubgraph:
    """A candidate explanation: a subgraph containing the target.

    ``objective`` is the symmetric KL divergence between the target's
    full-graph belief and its belief under BP on this subgraph alone.
    ``score`` is the value the search ranked this candidate by while growing
    (equal to ``objective`` for global search, a message-tracing distance
    for local search).  ``closed_endpoints`` are nodes whose own prior
    explained their contribution best; the local search never extends them.
    """

    target: NodeId
    nodes: frozenset[NodeId]
    edges: frozenset[Edge]
    method_tag: str
    closed_endpoints: frozenset[NodeId] = frozenset()
    belief_on_subgraph: np.ndarray | None = None
    objective: float | None = None
    score: float | None = None
    subgraph_bp: BpResult | None = None

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def is_tree(self) -> bool:
        return is_tree(self.nodes, self.edges)

    def node_key(self) -> tuple:
        return tuple(sorted(self.nodes))

    def identity(self) -> tuple:
        return (self.node_key(), tuple(sorted(self.edges)),
                tuple(sorted(self.closed_endpoints)))

    def __eq__(self, other):
        if not isinstance(other, ExplanationSubgraph):
            return NotImplemented
        if (self.target, self.identity(), self.method_tag) != \
                (other.target, other.identity(), other.method_tag):
            return False
        if (self.objective is None) != (other.objective is None):
            return False
        if self.objective is not None and self.objective != other.objective:
            return False
        a, b = self.belief_on_subgraph, other.belief_on_subgraph
        if (a is None) != (b is None):
            return False
        return a is None or bool(np.array_equal(a, b))


@dataclass
class Beam:
    """Final candidates sorted ascending by objective, at most ``k``."""

    candidates: tuple[ExplanationSubgraph, ...]

    def __post_init__(self):
        objs = [c.objective for c in self.candidates]
        if any(o is None for o in objs) or objs != sorted(objs):
            raise GraphValidationError("beam candidates must be evaluated and sorted")

    @property
    def best(self) -> ExplanationSubgraph:
        return self.candidates[0]


@dataclass
class BpCounter:
    """Counts subgraph BP runs so search cost can be reported."""

    count: int = 0


def _rank_key(sub: ExplanationSubgraph) -> tuple:
    # Ascending score, then lexicographically smallest node-id list.
    return (sub.score, sub.node_key(), tuple(sorted(sub.edges)),
            tuple(sorted(sub.closed_endpoints)))


def _final_key(sub: ExplanationSubgraph) -> tuple:
    return (sub.objective, sub.node_key(), tuple(sorted(sub.edges)),
            tuple(sorted(sub.closed_endpoints)))


def frontier(mrf: Mrf, sub: ExplanationSubgraph) -> list[tuple[NodeId, Edge]]:
    """All (outside node, attaching edge) pairs adjacent to the subgraph.

    A node reachable through several subgraph nodes appears once per
    attaching edge; an accepted extension uses exactly one of them.
    """
    pairs = []
    for w in sub.nodes:
        for y in mrf.neighbors[w]:
            if y not in sub.nodes:
                pairs.append((y, norm_edge(y, w)))
    pairs.sort()
    return pairs


def evaluate_candidate(mrf: Mrf, full_belief: np.ndarray,
                       sub: ExplanationSubgraph, bp: BpConfig,
                       counter: BpCounter | None = None) -> ExplanationSubgraph:
    """Run BP on the induced subgraph and fill belief and objective.

    Tree-shaped candidates run with an iteration cap equal to their node
    count, which guarantees exact convergence; anything cyclic (combined
    explanations) runs with the caller's loopy settings.
    """
    model = induced_subgraph(mrf, sub.nodes, sub.edges)
    cfg = tree_config(model.node_count, bp) if sub.is_tree else bp
    result = run_bp(model, cfg)
    if counter is not None:
        counter.count += 1
    objective = sym_kl(full_belief, result.beliefs[sub.target])
    return replace(sub, belief_on_subgraph=result.beliefs[sub.target],
                   objective=objective, score=objective, subgraph_bp=result)


def _extension(sub: ExplanationSubgraph, node: NodeId,
               edge: Edge) -> ExplanationSubgraph:
    return replace(sub, nodes=sub.nodes | {node}, edges=sub.edges | {edge},
                   belief_on_subgraph=None, objective=None, score=None,
                   subgraph_bp=None)


def _geg_children(mrf: Mrf, full_belief: np.ndarray, sub: ExplanationSubgraph,
                  pruned: set[NodeId], bp: BpConfig,
                  counter: BpCounter | None) -> list[ExplanationSubgraph]:
    """Evaluate every non-pruned frontier extension, sorted best first."""
    children = [
        evaluate_candidate(mrf, full_belief, _extension(sub, y, e), bp, counter)
        for y, e in frontier(mrf, sub) if y not in pruned
    ]
    children.sort(key=_rank_key)
    return children


def extend_geg(mrf: Mrf, full_belief: np.ndarray, sub: ExplanationSubgraph,
               k: int, pruned: set[NodeId], bp: BpConfig,
               counter: BpCounter | None = None) -> list[ExplanationSubgraph]:
    """Top-``k`` frontier extensions by objective (fresh BP per candidate)."""
    return _geg_children(mrf, full_belief, sub, pruned, bp, counter)[:k]


def _parents_toward_target(sub: ExplanationSubgraph) -> dict[NodeId, NodeId]:
    """For each non-target node, its neighbor on the path to the target."""
    adj: dict[NodeId, list[NodeId]] = {n: [] for n in sub.nodes}
    for u, v in sub.edges:
        adj[u].append(v)
        adj[v].append(u)
    parents: dict[NodeId, NodeId] = {}
    stack = [sub.target]
    seen = {sub.target}
    while stack:
        w = stack.pop()
        for m in adj[w]:
            if m not in seen:
                seen.add(m)
                parents[m] = w
                stack.append(m)
    return parents


def _newest_chain_node(sub: ExplanationSubgraph) -> NodeId:
    # Chain growth keeps the target at one end; the newest node is the
    # unique non-target leaf.
    if len(sub.nodes) == 1:
        return sub.target
    degree = {n: 0 for n in sub.nodes}
    for u, v in sub.edges:
        degree[u] += 1
        degree[v] += 1
    leaves = [n for n, d in degree.items() if d == 1 and n != sub.target]
    return leaves[0]


def _open_endpoints(mrf: Mrf, sub: ExplanationSubgraph,
                    variant: str) -> list[NodeId]:
    if variant == "star":
        anchored = [sub.target]
    elif variant == "chain":
        anchored = [_newest_chain_node(sub)]
    else:
        anchored = sorted(sub.nodes)
    return [
        u for u in anchored
        if u not in sub.closed_endpoints
        and any(y not in sub.nodes for y in mrf.neighbors[u])
    ]


def extend_gel(mrf: Mrf, full_bp: BpResult, sub: ExplanationSubgraph, k: int,
               variant: str = "unconstrained") -> list[ExplanationSubgraph]:
    """Extensions by message back-tracing over full-graph quantities.

    Each open end-point contributes one candidate: either an extension by
    the incoming full-graph message most similar to the quantity that
    end-point explains, or a closure when the end-point's own prior is the
    best match.  No subgraph BP runs here; scores come entirely from the
    converged full-graph result.
    """
    parents = _parents_toward_target(sub)
    candidates = []
    for u in _open_endpoints(mrf, sub, variant):
        if u == sub.target:
            explained = full_bp.beliefs[sub.target]
        else:
            explained = full_bp.messages[(u, parents[u])]
        options = sorted(
            (sym_kl(explained, full_bp.messages[(z, u)]), z)
            for z in mrf.neighbors[u] if z not in sub.nodes
        )
        best_score, best_src = options[0]
        # The trivial single-node explanation is the starting point, so the
        # target's own prior only competes once the subgraph has grown.
        prior_allowed = not (u == sub.target and len(sub.nodes) == 1)
        if prior_allowed:
            prior_score = sym_kl(explained, mrf.priors[u])
            if prior_score <= best_score:
                candidates.append(replace(
                    sub, closed_endpoints=sub.closed_endpoints | {u},
                    score=prior_score))
                continue
        child = _extension(sub, best_src, norm_edge(best_src, u))
        child.score = best_score
        candidates.append(child)
    candidates.sort(key=_rank_key)
    return candidates[:k]


def random_extend(mrf: Mrf, sub: ExplanationSubgraph,
                  rng: np.random.Generator,
                  structure: str = "global",
                  variant: str = "unconstrained") -> ExplanationSubgraph | None:
    """Attach one uniformly chosen admissible frontier pair, or None.

    ``structure`` selects whose admissible moves to imitate: ``global``
    allows any frontier pair, ``local`` restricts attachment points per the
    given variant (but never closes endpoints; randomness has no scores).
    """
    if structure == "global":
        pairs = frontier(mrf, sub)
    else:
        pairs = []
        for u in _open_endpoints(mrf, sub, variant):
            for z in mrf.neighbors[u]:
                if z not in sub.nodes:
                    pairs.append((z, norm_edge(z, u)))
        pairs.sort()
    if not pairs:
        return None
    node, edge = pairs[int(rng.integers(len(pairs)))]
    child = _extension(sub, node, edge)
    child.score = 0.0
    return child


def prune_frontier(scored: list[tuple[NodeId, float]],
                   rate: float) -> set[NodeId]:
    """Retain the ceil((1 - rate) * n) best-scoring candidate nodes."""
    if not scored:
        return set()
    keep = math.ceil((1.0 - rate) * len(scored))
    ranked = sorted(scored, key=lambda item: (item[1], item[0]))
    return {node for node, _ in ranked[:keep]}


def beam_search(mrf: Mrf, full_bp: BpResult, target: NodeId,
                config: SearchConfig,
                counter: BpCounter | None = None) -> Beam:
    """Grow explanations for ``target`` and return the final evaluated beam.

    Runs ``capacity - 1`` growth steps; every returned candidate gets a
    final fresh BP run filling its belief and objective.  Branches whose
    frontier is exhausted (or fully closed, for local search) survive at
    their current size.
    """
    if not mrf.has_node(target):
        raise GraphValidationError(f"target {target} not in model")
    full_belief = full_bp.beliefs[target]
    method = config.method
    rng = np.random.default_rng((config.seed, target))
    k = config.beam_width

    beam = [ExplanationSubgraph(target=target, nodes=frozenset({target}),
                                edges=frozenset(), method_tag=method)]
    pruned: set[NodeId] = set()

    for _ in range(2, config.capacity + 1):
        pool: list[ExplanationSubgraph] = []
        step_scores: dict[NodeId, float] = {}
        grew = False
        for sub in beam:
            if method == "global":
                kids = _geg_children(mrf, full_belief, sub, pruned, config.bp,
                                     counter)
                for kid in kids:
                    (added,) = kid.nodes - sub.nodes
                    prev = step_scores.get(added)
                    if prev is None or kid.score < prev:
                        step_scores[added] = kid.score
            elif method == "local":
                kids = extend_gel(mrf, full_bp, sub, k, config.variant)
            else:
                structure = "global" if method == "random-global" else "local"
                kid = random_extend(mrf, sub, rng, structure, config.variant)
                kids = [] if kid is None else [kid]

            if kids:
                grew = True
                pool.extend(kids)
            else:
                # Frontier exhausted: the branch is kept at its current size.
                if sub.score is None:
                    if method == "global":
                        sub = evaluate_candidate(mrf, full_belief, sub,
                                                 config.bp, counter)
                    else:
                        sub = replace(sub, score=0.0)
                pool.append(sub)

        if not grew:
            beam = pool
            break
        if method == "global" and step_scores:
            retained = prune_frontier(sorted(step_scores.items()),
                                      config.pruning_rate)
            pruned |= set(step_scores) - retained

        pool.sort(key=_rank_key)
        deduped: list[ExplanationSubgraph] = []
        seen: set[tuple] = set()
        for sub in pool:
            ident = sub.identity()
            if ident not in seen:
                seen.add(ident)
                deduped.append(sub)
        beam = deduped[:k]

    final = [evaluate_candidate(mrf, full_belief, sub, config.bp, counter)
             for sub in beam]
    final.sort(key=_final_key)
    return Beam(candidates=tuple(final))


def combine(beam: Beam, mrf: Mrf, full_belief: np.ndarray, bp: BpConfig,
            counter: BpCounter | None = None) -> ExplanationSubgraph:
    """Node/edge union of all beam candidates, evaluated as one explanation.

    The union may contain cycles; it is evaluated with loopy settings and
    its tree invariant is waived.
    """
    if not beam.candidates:
        raise GraphValidationError("cannot combine an empty beam")
    nodes = frozenset().union(*(c.nodes for c in beam.candidates))
    edges = frozenset().union(*(c.edges for c in beam.candidates))
    union = ExplanationSubgraph(target=beam.best.target, nodes=nodes,
                                edges=edges, method_tag="combined")
    return evaluate_candidate(mrf, full_belief, union, bp, counter)
