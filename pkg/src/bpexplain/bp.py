"""Sum-product belief propagation with a deterministic synchronous schedule.

Messages live on directed edges.  Each round recomputes every message from
the previous round's table (synchronous flooding), iterating until the
largest per-entry message change drops below the configured tolerance or the
iteration cap is reached.  The update for the message from ``i`` to ``j`` is

    m[i->j](x_j)  ~  sum_{x_i}  psi_ij(x_i, x_j) * phi_i(x_i)
                                * prod_{k in N(i), k != j} m[k->i](x_i)

normalized to sum to one.  On acyclic graphs this converges to the exact
marginals; on cyclic graphs it is the usual loopy approximation.

Results are bit-reproducible: the schedule iterates a sorted directed-edge
list and all reductions run in a fixed order.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mrf import DegenerateModelError, GraphValidationError, Mrf, NodeId

MessageTable = dict[tuple[NodeId, NodeId], np.ndarray]
BeliefTable = dict[NodeId, np.ndarray]


@dataclass(frozen=True)
class BpConfig:
    """Convergence control for a BP run.

    ``tolerance`` is the L-infinity threshold on per-entry message change.
    ``damping`` in [0, 1) blends each new message with the previous one;
    0 disables damping and is the default.
    """

    max_iters: int = 100
    tolerance: float = 1e-6
    damping: float = 0.0
    schedule: str = "synchronous"

    def __post_init__(self):
        if self.max_iters < 1:
            raise GraphValidationError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.tolerance <= 0:
            raise GraphValidationError(f"tolerance must be > 0, got {self.tolerance}")
        if not 0.0 <= self.damping < 1.0:
            raise GraphValidationError(f"damping must be in [0, 1), got {self.damping}")
        if self.schedule != "synchronous":
            raise GraphValidationError(f"unknown schedule {self.schedule!r}")


@dataclass
class BpResult:
    messages: MessageTable
    beliefs: BeliefTable
    converged: bool
    iterations: int
    max_residual: float


class _BpPlan:
    """Flattened index arrays for vectorized synchronous updates.

    Built once per model and cached on it; the model is immutable so the
    plan can be shared freely.
    """

    __slots__ = ("n", "c", "nodes", "index", "prior_mat", "dir_edges",
                 "src", "dst", "rev", "pot", "in_order", "in_starts", "in_nodes")

    def __init__(self, mrf: Mrf):
        self.n = mrf.node_count
        self.c = mrf.class_count
        self.nodes = mrf.node_ids
        self.index = {node: i for i, node in enumerate(self.nodes)}
        self.prior_mat = np.stack([mrf.priors[node] for node in self.nodes])

        dir_edges = []
        for u, v in mrf.edges:
            dir_edges.append((u, v))
            dir_edges.append((v, u))
        dir_edges.sort()
        self.dir_edges = dir_edges
        d = len(dir_edges)
        pos = {e: k for k, e in enumerate(dir_edges)}
        self.src = np.fromiter((self.index[i] for i, _ in dir_edges), dtype=np.intp, count=d)
        self.dst = np.fromiter((self.index[j] for _, j in dir_edges), dtype=np.intp, count=d)
        self.rev = np.fromiter((pos[(j, i)] for i, j in dir_edges), dtype=np.intp, count=d)
        if d:
            self.pot = np.stack([mrf.potential(i, j) for i, j in dir_edges])
            # Incoming messages grouped by receiver, ordered by sender.
            self.in_order = np.lexsort((self.src, self.dst))
            dst_sorted = self.dst[self.in_order]
            self.in_starts = np.flatnonzero(
                np.r_[True, dst_sorted[1:] != dst_sorted[:-1]])
            self.in_nodes = dst_sorted[self.in_starts]
        else:
            self.pot = np.zeros((0, self.c, self.c))
            self.in_order = np.zeros(0, dtype=np.intp)
            self.in_starts = np.zeros(0, dtype=np.intp)
            self.in_nodes = np.zeros(0, dtype=np.intp)

    def node_products(self, msgs: np.ndarray) -> np.ndarray:
        """Per-node product of all incoming messages (ones where none)."""
        prod = np.ones((self.n, self.c))
        if len(self.in_starts):
            prod[self.in_nodes] = np.multiply.reduceat(
                msgs[self.in_order], self.in_starts, axis=0)
        return prod


def _plan(mrf: Mrf) -> _BpPlan:
    if mrf._bp_plan is None:
        mrf._bp_plan = _BpPlan(mrf)
    return mrf._bp_plan


def run_bp(mrf: Mrf, config: BpConfig = BpConfig()) -> BpResult:
    """Run synchronous BP to convergence or the iteration cap.

    Non-convergence is reported through ``converged``/``max_residual``, not
    raised.  Raises :class:`DegenerateModelError` if any message or belief
    normalizer collapses to zero.
    """
    plan = _plan(mrf)
    d = len(plan.dir_edges)
    msgs = np.full((d, plan.c), 1.0 / plan.c)
    converged = d == 0
    iterations = 0
    residual = 0.0
    for _ in range(config.max_iters):
        if d == 0:
            break
        prod = plan.node_products(msgs)
        pre = plan.prior_mat * prod
        base = pre[plan.src] / msgs[plan.rev]
        out = np.einsum("eab,ea->eb", plan.pot, base)
        z = out.sum(axis=1, keepdims=True)
        if np.any(z <= 0.0) or not np.all(np.isfinite(z)):
            raise DegenerateModelError("message normalizer collapsed to zero")
        out /= z
        if config.damping:
            out = (1.0 - config.damping) * out + config.damping * msgs
        residual = float(np.abs(out - msgs).max())
        msgs = out
        iterations += 1
        if residual < config.tolerance:
            converged = True
            break

    bel = plan.prior_mat * plan.node_products(msgs)
    zb = bel.sum(axis=1, keepdims=True)
    if np.any(zb <= 0.0) or not np.all(np.isfinite(zb)):
        raise DegenerateModelError("belief normalizer collapsed to zero")
    bel /= zb

    message_table = {e: msgs[k] for k, e in enumerate(plan.dir_edges)}
    belief_table = {node: bel[i] for i, node in enumerate(plan.nodes)}
    return BpResult(messages=message_table, beliefs=belief_table,
                    converged=converged, iterations=iterations,
                    max_residual=residual)


def compute_message(mrf: Mrf, messages: MessageTable, i: NodeId,
                    j: NodeId) -> np.ndarray:
    """Single sum-product update for the message from ``i`` to ``j``.

    ``messages`` must hold m[k->i] for every neighbor ``k`` of ``i`` other
    than ``j``.
    """
    if not mrf.has_edge(i, j):
        raise GraphValidationError(f"({i}, {j}) is not an edge of the model")
    base = mrf.priors[i].copy()
    for k in mrf.neighbors[i]:
        if k != j:
            base *= messages[(k, i)]
    out = base @ mrf.potential(i, j)
    z = float(out.sum())
    if z <= 0.0 or not np.isfinite(z):
        raise DegenerateModelError(f"message {i}->{j} collapsed to zero")
    return out / z


def belief(mrf: Mrf, messages: MessageTable, x: NodeId) -> np.ndarray:
    """Marginal of ``x``: prior times all incoming messages, normalized."""
    if not mrf.has_node(x):
        raise GraphValidationError(f"node {x} not in model")
    out = mrf.priors[x].copy()
    for k in mrf.neighbors[x]:
        out *= messages[(k, x)]
    z = float(out.sum())
    if z <= 0.0 or not np.isfinite(z):
        raise DegenerateModelError(f"belief of {x} collapsed to zero")
    return out / z


def tree_config(node_count: int, base: BpConfig) -> BpConfig:
    """Config guaranteeing exact convergence on a tree of the given size.

    Synchronous BP on a tree stabilizes within diameter rounds, so capping
    at the node count always suffices.
    """
    return BpConfig(max_iters=max(1, node_count), tolerance=base.tolerance,
                    damping=base.damping, schedule=base.schedule)
