"""HTTP facade for interactive explanation exploration.

A session wraps one immutable model plus its cached full-graph BP result.
``explain`` reuses the exact engine the CLI uses (responses embed the same
text documents, byte for byte); ``whatif`` statelessly evaluates any
user-edited connected subgraph of the session graph.  Sessions live in
memory and are evicted after 30 idle minutes.

Per-session explain requests are serialized (they share nothing but are the
expensive path); whatif requests are read-only and run concurrently.
"""

from __future__ import annotations

import threading
import time
import uuid
from dataclasses import dataclass, field

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import __version__
from .bp import BpConfig, BpResult, run_bp, tree_config
from .divergence import sym_kl
from .graphio import DatasetSpec, ParseError, build_mrf, export_explanation, \
    karate_club, load_dataset
from .mrf import (DegenerateModelError, GraphValidationError, Mrf,
                  induced_subgraph, is_connected, is_tree, norm_edge)
from .search import Beam, ExplanationSubgraph, SearchConfig, beam_search, combine

SESSION_TTL_SECONDS = 30 * 60


class SessionRequest(BaseModel):
    preset: str | None = None
    edges_path: str | None = None
    labels_path: str | None = None
    priors_path: str | None = None
    classes: int = 2
    homophily: float = 0.9
    labeled_ratio: float = 0.5
    seed: int = 0


class ExplainRequest(BaseModel):
    target: int
    method: str = "global"
    capacity: int = 5
    beam: int = 3
    prune: float = 0.0
    seed: int = 0
    variant: str = "unconstrained"
    comb: bool = True


class WhatifRequest(BaseModel):
    target: int
    nodes: list[int]
    edges: list[tuple[int, int]]


@dataclass
class Session:
    sid: str
    mrf: Mrf
    full_bp: BpResult
    last_access: float
    explain_lock: threading.Lock = field(default_factory=threading.Lock)

    def summary(self) -> dict:
        return {"session_id": self.sid, "nodes": self.mrf.node_count,
                "edges": self.mrf.edge_count, "classes": self.mrf.class_count}


class SessionStore:
    def __init__(self, ttl: float = SESSION_TTL_SECONDS):
        self.ttl = ttl
        self._sessions: dict[str, Session] = {}
        self._lock = threading.Lock()

    def create(self, mrf: Mrf, full_bp: BpResult) -> Session:
        session = Session(sid=uuid.uuid4().hex, mrf=mrf, full_bp=full_bp,
                          last_access=time.monotonic())
        with self._lock:
            self._evict_expired()
            self._sessions[session.sid] = session
        return session

    def get(self, sid: str) -> Session:
        with self._lock:
            self._evict_expired()
            session = self._sessions.get(sid)
            if session is None:
                raise HTTPException(status_code=404, detail=f"unknown session {sid}")
            session.last_access = time.monotonic()
            return session

    def _evict_expired(self):
        now = time.monotonic()
        for sid in [s for s, sess in self._sessions.items()
                    if now - sess.last_access > self.ttl]:
            del self._sessions[sid]


def _candidate_payload(mrf: Mrf, sub: ExplanationSubgraph, full_belief,
                       config: SearchConfig) -> dict:
    return {
        "objective": sub.objective,
        "size": sub.size,
        "is_tree": sub.is_tree,
        "nodes": sorted(sub.nodes),
        "edges": [list(e) for e in sorted(sub.edges)],
        "closed": sorted(sub.closed_endpoints),
        "method": sub.method_tag,
        "belief_sub": [float(x) for x in sub.belief_on_subgraph],
        "document": export_explanation(mrf, sub, full_belief,
                                       sub.subgraph_bp.messages, config),
    }


def create_app(session_ttl: float = SESSION_TTL_SECONDS) -> FastAPI:
    app = FastAPI(title="bpexplain", version=__version__)
    store = SessionStore(ttl=session_ttl)
    app.state.sessions = store

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/api/session")
    def create_session(req: SessionRequest):
        try:
            if req.preset == "karate":
                edges, labels = karate_club()
                spec = DatasetSpec(class_count=2, homophily=req.homophily,
                                   seed=req.seed)
                mrf = build_mrf(spec, edges, labels)
            elif req.preset is not None:
                raise HTTPException(status_code=400,
                                    detail=f"unknown preset {req.preset!r}")
            elif req.edges_path:
                spec = DatasetSpec(edges_path=req.edges_path,
                                   labels_path=req.labels_path,
                                   priors_path=req.priors_path,
                                   class_count=req.classes,
                                   homophily=req.homophily,
                                   labeled_ratio=req.labeled_ratio,
                                   seed=req.seed)
                mrf = load_dataset(spec)
            else:
                raise HTTPException(status_code=400,
                                    detail="request needs preset or edges_path")
        except (ParseError, GraphValidationError, FileNotFoundError) as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        try:
            full_bp = run_bp(mrf, BpConfig())
        except DegenerateModelError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        return store.create(mrf, full_bp).summary()

    @app.get("/api/{sid}/belief")
    def get_belief(sid: str, node: int):
        session = store.get(sid)
        if not session.mrf.has_node(node):
            raise HTTPException(status_code=404, detail=f"unknown node {node}")
        return {"node": node,
                "belief": [float(x) for x in session.full_bp.beliefs[node]]}

    @app.post("/api/{sid}/explain")
    def explain(sid: str, req: ExplainRequest):
        session = store.get(sid)
        if not session.mrf.has_node(req.target):
            raise HTTPException(status_code=404,
                                detail=f"unknown target {req.target}")
        try:
            config = SearchConfig(capacity=req.capacity, beam_width=req.beam,
                                  method=req.method, variant=req.variant,
                                  pruning_rate=req.prune, seed=req.seed)
        except GraphValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        full_belief = session.full_bp.beliefs[req.target]
        with session.explain_lock:
            beam = beam_search(session.mrf, session.full_bp, req.target, config)
            payload = {
                "target": req.target,
                "belief_full": [float(x) for x in full_belief],
                "candidates": [
                    _candidate_payload(session.mrf, sub, full_belief, config)
                    for sub in beam.candidates
                ],
            }
            if req.comb:
                union = combine(beam, session.mrf, full_belief, config.bp)
                payload["combined"] = _candidate_payload(
                    session.mrf, union, full_belief, config)
        return payload

    @app.post("/api/{sid}/whatif")
    def whatif(sid: str, req: WhatifRequest):
        session = store.get(sid)
        mrf = session.mrf
        if not mrf.has_node(req.target):
            raise HTTPException(status_code=404,
                                detail=f"unknown target {req.target}")
        nodes = set(req.nodes)
        edges = [norm_edge(u, v) for u, v in req.edges]
        if req.target not in nodes:
            raise HTTPException(status_code=400,
                                detail="edit removed the target node")
        try:
            model = induced_subgraph(mrf, nodes, edges)
        except GraphValidationError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from exc
        if not is_connected(nodes, edges):
            raise HTTPException(status_code=400, detail="subgraph is disconnected")
        tree = is_tree(nodes, edges)
        cfg = tree_config(model.node_count, BpConfig()) if tree else BpConfig()
        try:
            result = run_bp(model, cfg)
        except DegenerateModelError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        belief_sub = result.beliefs[req.target]
        objective = sym_kl(session.full_bp.beliefs[req.target], belief_sub)
        return {"belief_on_subgraph": [float(x) for x in belief_sub],
                "objective": objective, "is_tree": tree}

    @app.get("/api/{sid}/neighborhood")
    def neighborhood(sid: str, node: int, radius: int = 1):
        session = store.get(sid)
        mrf = session.mrf
        if not mrf.has_node(node):
            raise HTTPException(status_code=404, detail=f"unknown node {node}")
        if radius < 0:
            raise HTTPException(status_code=400, detail="radius must be >= 0")
        ball = {node}
        frontier_nodes = [node]
        for _ in range(radius):
            frontier_nodes = [m for w in frontier_nodes
                              for m in mrf.neighbors[w] if m not in ball]
            ball.update(frontier_nodes)
            if not frontier_nodes:
                break
        edges = [[u, v] for u, v in mrf.edges if u in ball and v in ball]
        return {
            "center": node,
            "radius": radius,
            "nodes": [{"id": n,
                       "prior": [float(x) for x in mrf.priors[n]],
                       "belief": [float(x) for x in session.full_bp.beliefs[n]]}
                      for n in sorted(ball)],
            "edges": edges,
        }

    return app
