"""Pairwise Markov random field model.

An :class:`Mrf` is an undirected graph whose nodes carry prior distributions
over ``c`` classes and whose edges carry strictly positive ``c x c``
compatibility matrices.  Instances are immutable after construction and safe
to share across threads and forked worker processes.
"""

from __future__ import annotations

from typing import Iterable, Mapping

import numpy as np

NodeId = int
Edge = tuple[NodeId, NodeId]

# Tolerance for "sums to one" checks on probability vectors.
PROB_ATOL = 1e-9


class GraphValidationError(ValueError):
    """Malformed model structure or parameters."""


class DegenerateModelError(Exception):
    """A message or belief product collapsed to all zeros.

    Raised instead of silently renormalizing: an all-zero product means the
    priors and potentials are mutually inconsistent.
    """


def norm_edge(u: NodeId, v: NodeId) -> Edge:
    """Canonical (sorted) form of an undirected edge."""
    return (u, v) if u <= v else (v, u)


def as_distribution(values, class_count: int) -> np.ndarray:
    """Validate and return a length-``class_count`` probability vector."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.shape != (class_count,):
        raise GraphValidationError(
            f"distribution has shape {arr.shape}, expected ({class_count},)")
    if np.any(arr < 0):
        raise GraphValidationError(f"negative probability entry in {arr!r}")
    if abs(float(arr.sum()) - 1.0) > PROB_ATOL:
        raise GraphValidationError(
            f"distribution sums to {arr.sum()!r}, expected 1 within {PROB_ATOL}")
    return arr


class Mrf:
    """Pairwise MRF: nodes with priors, undirected edges with potentials.

    Parameters
    ----------
    priors:
        Mapping node id -> length-``c`` prior distribution.
    edges:
        Iterable of undirected node pairs.  No self-loops or duplicates.
    potentials:
        Either one ``c x c`` matrix shared by every edge, or a mapping from
        canonical edge to its matrix.  Entries must be strictly positive.
        The matrix for edge ``(u, v)`` with ``u < v`` is indexed
        ``[value_of_u, value_of_v]``; the reverse orientation is its
        transpose, so the undirected potential is direction-consistent by
        construction.
    class_count:
        Number of classes ``c`` (inferred from the first prior if omitted).
    """

    __slots__ = ("class_count", "node_ids", "priors", "edges", "potentials",
                 "neighbors", "_bp_plan")

    def __init__(self, priors: Mapping[NodeId, object], edges: Iterable[Edge],
                 potentials, class_count: int | None = None):
        if not priors:
            raise GraphValidationError("model must contain at least one node")
        if class_count is None:
            class_count = len(np.asarray(next(iter(priors.values()))))
        if class_count < 2:
            raise GraphValidationError(f"class_count must be >= 2, got {class_count}")
        self.class_count = int(class_count)

        self.priors = {}
        for node, p in priors.items():
            arr = as_distribution(p, self.class_count)
            arr.flags.writeable = False
            self.priors[int(node)] = arr
        self.node_ids = tuple(sorted(self.priors))

        edge_list: list[Edge] = []
        seen: set[Edge] = set()
        for u, v in edges:
            if u == v:
                raise GraphValidationError(f"self-loop on node {u}")
            if u not in self.priors or v not in self.priors:
                raise GraphValidationError(f"edge ({u}, {v}) references unknown node")
            e = norm_edge(u, v)
            if e in seen:
                raise GraphValidationError(f"duplicate edge {e}")
            seen.add(e)
            edge_list.append(e)
        self.edges = tuple(sorted(edge_list))

        shared = None
        if not isinstance(potentials, Mapping):
            shared = self._check_potential(np.asarray(potentials, dtype=np.float64))
        self.potentials = {}
        for e in self.edges:
            if shared is not None:
                self.potentials[e] = shared
            else:
                if e not in potentials:
                    raise GraphValidationError(f"edge {e} has no potential")
                self.potentials[e] = self._check_potential(
                    np.asarray(potentials[e], dtype=np.float64))

        nbrs: dict[NodeId, list[NodeId]] = {n: [] for n in self.node_ids}
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.neighbors = {n: tuple(sorted(ns)) for n, ns in nbrs.items()}
        self._bp_plan = None

    def _check_potential(self, mat: np.ndarray) -> np.ndarray:
        c = self.class_count
        if mat.shape != (c, c):
            raise GraphValidationError(
                f"potential has shape {mat.shape}, expected ({c}, {c})")
        if np.any(mat <= 0):
            raise GraphValidationError("potential entries must be strictly positive")
        mat.flags.writeable = False
        return mat

    # -- queries ---------------------------------------------------------

    def has_node(self, node: NodeId) -> bool:
        return node in self.priors

    def has_edge(self, u: NodeId, v: NodeId) -> bool:
        return norm_edge(u, v) in self.potentials

    def potential(self, i: NodeId, j: NodeId) -> np.ndarray:
        """Potential oriented sender -> receiver: rows index ``i``'s values."""
        mat = self.potentials[norm_edge(i, j)]
        return mat if i <= j else mat.T

    def degree(self, node: NodeId) -> int:
        return len(self.neighbors[node])

    @property
    def node_count(self) -> int:
        return len(self.node_ids)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def __repr__(self):
        return (f"Mrf(nodes={self.node_count}, edges={self.edge_count}, "
                f"classes={self.class_count})")


def induced_subgraph(mrf: Mrf, nodes: Iterable[NodeId],
                     edges: Iterable[Edge]) -> Mrf:
    """Submodel on the given nodes and edges, sharing priors and potentials.

    Prior and potential arrays are passed through by identity, never copied.
    """
    node_set = set(nodes)
    for n in node_set:
        if not mrf.has_node(n):
            raise GraphValidationError(f"node {n} not in parent model")
    sub_edges = []
    for u, v in edges:
        e = norm_edge(u, v)
        if e not in mrf.potentials:
            raise GraphValidationError(f"edge {e} not in parent model")
        if u not in node_set or v not in node_set:
            raise GraphValidationError(f"edge {e} endpoint outside node set")
        sub_edges.append(e)
    return Mrf(priors={n: mrf.priors[n] for n in node_set},
               edges=sub_edges,
               potentials={e: mrf.potentials[e] for e in sub_edges},
               class_count=mrf.class_count)


def is_connected(nodes: Iterable[NodeId], edges: Iterable[Edge]) -> bool:
    """True when the given node set is connected via the given edges."""
    node_set = set(nodes)
    if not node_set:
        return False
    adj: dict[NodeId, list[NodeId]] = {n: [] for n in node_set}
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    start = next(iter(node_set))
    seen = {start}
    stack = [start]
    while stack:
        for m in adj[stack.pop()]:
            if m not in seen:
                seen.add(m)
                stack.append(m)
    return seen == node_set


def is_tree(nodes: Iterable[NodeId], edges: Iterable[Edge]) -> bool:
    """Connected and acyclic."""
    node_set = set(nodes)
    edge_list = list(edges)
    return len(edge_list) == len(node_set) - 1 and is_connected(node_set, edge_list)
