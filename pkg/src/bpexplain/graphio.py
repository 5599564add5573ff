"""Dataset loading, model construction, synthetic graphs, document formats.

File formats are plain UTF-8 text: edge files carry one "u<TAB>v" pair per
line, label files one "node<TAB>class" pair per line (classes are 1-based),
and '#' starts a comment in both.  Explanation and run-report documents are
line-oriented key-value text with a fixed key order and a format_version
field; numbers are written with shortest-round-trip precision so parsing
them back is exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mrf import Edge, GraphValidationError, Mrf, NodeId, is_tree, norm_edge
from .search import ExplanationSubgraph, SearchConfig

FORMAT_VERSION = 1

# Zachary's karate club: 34 members, 78 social ties, two factions led by
# the instructor (node 0) and the administrator (node 33).
KARATE_EDGES: tuple[Edge, ...] = (
    (0, 1), (0, 2), (0, 3), (0, 4), (0, 5), (0, 6), (0, 7), (0, 8), (0, 10),
    (0, 11), (0, 12), (0, 13), (0, 17), (0, 19), (0, 21), (0, 31), (1, 2), (1, 3),
    (1, 7), (1, 13), (1, 17), (1, 19), (1, 21), (1, 30), (2, 3), (2, 7), (2, 8),
    (2, 9), (2, 13), (2, 27), (2, 28), (2, 32), (3, 7), (3, 12), (3, 13), (4, 6),
    (4, 10), (5, 6), (5, 10), (5, 16), (6, 16), (8, 30), (8, 32), (8, 33), (9, 33),
    (13, 33), (14, 32), (14, 33), (15, 32), (15, 33), (18, 32), (18, 33), (19, 33), (20, 32),
    (20, 33), (22, 32), (22, 33), (23, 25), (23, 27), (23, 29), (23, 32), (23, 33), (24, 25),
    (24, 27), (24, 31), (25, 31), (26, 29), (26, 33), (27, 33), (28, 31), (28, 33), (29, 32),
    (29, 33), (30, 32), (30, 33), (31, 32), (31, 33), (32, 33),
)


class ParseError(ValueError):
    """Malformed input file; message carries path and line number."""

    def __init__(self, path, line_no: int, reason: str):
        super().__init__(f"{path}:{line_no}: {reason}")
        self.path = str(path)
        self.line_no = line_no
        self.reason = reason


@dataclass(frozen=True)
class DatasetSpec:
    """Where a model comes from and how priors/potentials are assigned.

    Labeled nodes get prior 0.9 on their class and 0.1/(c-1) elsewhere;
    unlabeled nodes are uniform.  Every edge shares one homophily potential
    with ``homophily`` on the diagonal and (1-h)/(c-1) off it.  When no
    label file is given, ``labeled_ratio`` of the nodes are sampled and
    assigned uniform-random classes (seeded).  An optional priors file
    overrides the derived prior for the nodes it lists.
    """

    edges_path: str | None = None
    labels_path: str | None = None
    priors_path: str | None = None
    class_count: int = 2
    labeled_ratio: float = 0.5
    homophily: float = 0.9
    seed: int = 0

    def __post_init__(self):
        if self.class_count < 2:
            raise GraphValidationError(f"class_count must be >= 2, got {self.class_count}")
        if not 0.0 < self.homophily < 1.0:
            raise GraphValidationError(f"homophily must be in (0, 1), got {self.homophily}")
        if not 0.0 <= self.labeled_ratio <= 1.0:
            raise GraphValidationError(
                f"labeled_ratio must be in [0, 1], got {self.labeled_ratio}")


def _data_lines(path):
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield line_no, line


def load_edges(path) -> list[Edge]:
    """Deduplicated undirected edge list from a "u<TAB>v" file."""
    edges: list[Edge] = []
    seen: set[Edge] = set()
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected two fields, got {len(parts)}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, line_no, f"non-integer node id in {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(path, line_no, "node ids must be non-negative")
        if u == v:
            raise ParseError(path, line_no, f"self-loop on node {u}")
        e = norm_edge(u, v)
        if e not in seen:
            seen.add(e)
            edges.append(e)
    return sorted(edges)


def load_labels(path, class_count: int) -> dict[NodeId, int]:
    """node -> class (1-based) from a "node<TAB>class" file."""
    labels: dict[NodeId, int] = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(path, line_no, f"expected two fields, got {len(parts)}")
        try:
            node, cls = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(path, line_no, f"non-integer field in {line!r}") from None
        if not 1 <= cls <= class_count:
            raise ParseError(path, line_no,
                             f"class {cls} out of range 1..{class_count}")
        labels[node] = cls
    return labels


def load_priors(path, class_count: int) -> dict[NodeId, np.ndarray]:
    """node -> explicit prior from a "node<TAB>p1<TAB>...<TAB>pc" file."""
    priors: dict[NodeId, np.ndarray] = {}
    for line_no, line in _data_lines(path):
        parts = line.split()
        if len(parts) != 1 + class_count:
            raise ParseError(path, line_no,
                             f"expected node plus {class_count} probabilities")
        try:
            node = int(parts[0])
            vec = np.array([float(tok) for tok in parts[1:]])
        except ValueError:
            raise ParseError(path, line_no, f"malformed prior line {line!r}") from None
        if np.any(vec < 0) or abs(float(vec.sum()) - 1.0) > 1e-9:
            raise ParseError(path, line_no, "prior must be a probability vector")
        priors[node] = vec
    return priors


def build_mrf(spec: DatasetSpec, edges: list[Edge], labels: dict[NodeId, int],
              explicit_priors: dict[NodeId, np.ndarray] | None = None) -> Mrf:
    """Assemble the model from topology and labels per the dataset spec."""
    c = spec.class_count
    h = spec.homophily
    off = (1.0 - h) / (c - 1)
    potential = np.full((c, c), off)
    np.fill_diagonal(potential, h)

    explicit_priors = explicit_priors or {}
    nodes = {u for e in edges for u in e} | set(labels) | set(explicit_priors)
    if not nodes:
        raise GraphValidationError("dataset has no nodes")
    uniform = np.full(c, 1.0 / c)
    labeled_prior = np.full(c, 0.1 / (c - 1))
    priors = {}
    for n in sorted(nodes):
        cls = labels.get(n)
        if n in explicit_priors:
            priors[n] = explicit_priors[n]
        elif cls is None:
            priors[n] = uniform
        else:
            if not 1 <= cls <= c:
                raise GraphValidationError(f"label class {cls} out of range 1..{c}")
            p = labeled_prior.copy()
            p[cls - 1] = 0.9
            priors[n] = p
    return Mrf(priors=priors, edges=edges, potentials=potential, class_count=c)


def synthesize_labels(nodes, ratio: float, class_count: int,
                      seed: int) -> dict[NodeId, int]:
    """Sample ``ratio`` of the nodes and give them uniform-random classes."""
    ordered = sorted(nodes)
    count = int(round(ratio * len(ordered)))
    if count == 0:
        return {}
    rng = np.random.default_rng((seed, 0xBEEF))
    picked = rng.choice(len(ordered), size=count, replace=False)
    classes = rng.integers(1, class_count + 1, size=count)
    return {ordered[i]: int(cls) for i, cls in zip(sorted(picked), classes)}


def load_dataset(spec: DatasetSpec) -> Mrf:
    """Load edges (and labels, real or synthesized) and build the model."""
    if spec.edges_path is None:
        raise GraphValidationError("dataset spec has no edge file")
    edges = load_edges(spec.edges_path)
    explicit = (load_priors(spec.priors_path, spec.class_count)
                if spec.priors_path else None)
    if spec.labels_path is not None:
        labels = load_labels(spec.labels_path, spec.class_count)
    elif explicit is not None:
        labels = {}
    else:
        nodes = {u for e in edges for u in e}
        labels = synthesize_labels(nodes, spec.labeled_ratio, spec.class_count,
                                   spec.seed)
    return build_mrf(spec, edges, labels, explicit)


def karate_club() -> tuple[list[Edge], dict[NodeId, int]]:
    """The standard karate club network with the two faction heads labeled."""
    return list(KARATE_EDGES), {0: 1, 33: 2}


def karate_mrf(homophily: float = 0.9) -> Mrf:
    edges, labels = karate_club()
    spec = DatasetSpec(class_count=2, homophily=homophily)
    return build_mrf(spec, edges, labels)


def generate_synthetic(kind: str, n: int, param: float | None = None,
                       seed: int = 0) -> list[Edge]:
    """Deterministic synthetic topologies: chain, random tree, Erdos-Renyi.

    Erdos-Renyi takes the edge probability as ``param`` and keeps only the
    largest connected component.
    """
    if n < 1:
        raise GraphValidationError(f"n must be >= 1, got {n}")
    if kind == "chain":
        return [(i, i + 1) for i in range(n - 1)]
    if kind == "tree":
        rng = np.random.default_rng(seed)
        return [(int(rng.integers(i)), i) for i in range(1, n)]
    if kind == "erdos-renyi":
        if param is None or not 0.0 < param <= 1.0:
            raise GraphValidationError(
                f"erdos-renyi needs edge probability in (0, 1], got {param}")
        rng = np.random.default_rng(seed)
        edges: list[Edge] = []
        for i in range(n - 1):
            hits = np.flatnonzero(rng.random(n - i - 1) < param)
            edges.extend((i, int(i + 1 + j)) for j in hits)
        return _largest_component(n, edges)
    raise GraphValidationError(f"unknown synthetic kind {kind!r}")


def _largest_component(n: int, edges: list[Edge]) -> list[Edge]:
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
    sizes: dict[int, int] = {}
    for i in range(n):
        sizes[find(i)] = sizes.get(find(i), 0) + 1
    best = min(r for r, s in sizes.items() if s == max(sizes.values()))
    return [e for e in edges if find(e[0]) == best]


# -- document formats ----------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def _fmt_vec(vec) -> str:
    return " ".join(_fmt(x) for x in vec)


def _parse_vec(text: str) -> np.ndarray:
    return np.array([float(tok) for tok in text.split()])


def _config_echo(config: SearchConfig) -> str:
    return (f"method={config.method} capacity={config.capacity} "
            f"beam={config.beam_width} prune={_fmt(config.pruning_rate)} "
            f"seed={config.seed} variant={config.variant}")


def export_explanation(mrf: Mrf, sub: ExplanationSubgraph, full_belief,
                       messages, config: SearchConfig | None = None) -> str:
    """Self-contained text document for one evaluated explanation.

    Carries the subgraph, the priors it uses, its converged messages, both
    beliefs of the target, and the objective; parse_explanation inverts it
    exactly.
    """
    if sub.objective is None or sub.belief_on_subgraph is None:
        raise GraphValidationError("explanation must be evaluated before export")
    nodes = sorted(sub.nodes)
    edges = sorted(sub.edges)
    lines = [
        f"format_version: {FORMAT_VERSION}",
        "kind: explanation",
        f"method: {sub.method_tag}",
        f"target: {sub.target}",
        f"classes: {mrf.class_count}",
        f"objective: {_fmt(sub.objective)}",
        f"is_tree: {'true' if sub.is_tree else 'false'}",
        "nodes: " + " ".join(str(n) for n in nodes),
        "edges: " + " ".join(f"{u}-{v}" for u, v in edges),
        "closed: " + " ".join(str(n) for n in sorted(sub.closed_endpoints)),
        "belief_full: " + _fmt_vec(full_belief),
        "belief_sub: " + _fmt_vec(sub.belief_on_subgraph),
    ]
    for n in nodes:
        lines.append(f"prior {n}: " + _fmt_vec(mrf.priors[n]))
    directed = sorted([(u, v) for u, v in edges] + [(v, u) for u, v in edges])
    for i, j in directed:
        lines.append(f"message {i}->{j}: " + _fmt_vec(messages[(i, j)]))
    if config is not None:
        lines.append("config: " + _config_echo(config))
    return "\n".join(lines) + "\n"


@dataclass
class ParsedExplanation:
    subgraph: ExplanationSubgraph
    full_belief: np.ndarray
    priors: dict[NodeId, np.ndarray]
    messages: dict[tuple[NodeId, NodeId], np.ndarray]
    config_echo: str | None


def parse_explanation(text: str) -> ParsedExplanation:
    fields: dict[str, str] = {}
    priors: dict[NodeId, np.ndarray] = {}
    messages: dict[tuple[NodeId, NodeId], np.ndarray] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        key, _, value = raw.partition(":")
        key, value = key.strip(), value.strip()
        if not _:
            raise ParseError("<explanation>", line_no, f"missing ':' in {raw!r}")
        if key.startswith("prior "):
            priors[int(key.split()[1])] = _parse_vec(value)
        elif key.startswith("message "):
            i, j = key.split()[1].split("->")
            messages[(int(i), int(j))] = _parse_vec(value)
        else:
            fields[key] = value
    if fields.get("kind") != "explanation":
        raise ParseError("<explanation>", 0, "not an explanation document")
    if int(fields["format_version"]) != FORMAT_VERSION:
        raise ParseError("<explanation>", 0,
                         f"unsupported format_version {fields['format_version']}")
    nodes = frozenset(int(t) for t in fields["nodes"].split())
    edges = frozenset(
        norm_edge(*(int(x) for x in tok.split("-"))) for tok in fields["edges"].split())
    closed = frozenset(int(t) for t in fields["closed"].split())
    sub = ExplanationSubgraph(
        target=int(fields["target"]), nodes=nodes, edges=edges,
        method_tag=fields["method"], closed_endpoints=closed,
        belief_on_subgraph=_parse_vec(fields["belief_sub"]),
        objective=float(fields["objective"]),
        score=float(fields["objective"]))
    return ParsedExplanation(subgraph=sub,
                             full_belief=_parse_vec(fields["belief_full"]),
                             priors=priors, messages=messages,
                             config_echo=fields.get("config"))


def write_beliefs(mrf: Mrf, beliefs, converged: bool, iterations: int,
                  max_residual: float) -> str:
    lines = [
        f"format_version: {FORMAT_VERSION}",
        "kind: beliefs",
        f"classes: {mrf.class_count}",
        f"converged: {'true' if converged else 'false'}",
        f"iterations: {iterations}",
        f"max_residual: {_fmt(max_residual)}",
    ]
    for n in mrf.node_ids:
        lines.append(f"belief {n}: " + _fmt_vec(beliefs[n]))
    return "\n".join(lines) + "\n"


def write_report(report, config: SearchConfig, timings: bool = False) -> str:
    """Run-report document; timing fields only on request so that default
    outputs are byte-stable across runs."""
    lines = [
        f"format_version: {FORMAT_VERSION}",
        "kind: run-report",
        f"method: {report.method}",
        f"capacity: {config.capacity}",
        f"beam: {config.beam_width}",
        f"variant: {config.variant}",
        f"prune: {_fmt(config.pruning_rate)}",
        f"seed: {config.seed}",
        f"workers: {report.workers}",
        f"targets: {len(report.per_target)}",
        f"errors: {sum(1 for r in report.per_target if r.error)}",
        f"mean_objective: {_fmt(report.mean_objective)}",
        f"mean_size: {_fmt(report.mean_size)}",
        f"total_bp_invocations: {report.total_bp_invocations}",
    ]
    if timings:
        lines.append(f"full_bp_seconds: {_fmt(report.full_bp_time)}")
        lines.append(f"explain_seconds: {_fmt(report.total_wall_time)}")
    for row in report.per_target:
        if row.error:
            lines.append(f"target {row.target}: error={row.error}")
            continue
        entry = (f"target {row.target}: objective={_fmt(row.objective)} "
                 f"size={row.subgraph_size} bp={row.bp_invocations}")
        if timings:
            entry += f" seconds={_fmt(row.wall_time)}"
        lines.append(entry)
    return "\n".join(lines) + "\n"
