"""Explain many targets against one shared full-graph BP run.

The work unit is one target: coarse-grained fork-based workers over an
immutable shared model, so per-target results are identical no matter how
many workers run or how the pool schedules them.  The one full-graph BP run
is performed up front and its time reported separately from the (parallel)
explain phase.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from multiprocessing import get_context

from .bp import BpResult, run_bp
from .mrf import GraphValidationError, Mrf, NodeId
from .search import Beam, BpCounter, SearchConfig, beam_search, combine


@dataclass
class TargetReport:
    target: NodeId
    method: str
    objective: float | None
    subgraph_size: int | None
    wall_time: float
    bp_invocations: int
    error: str | None = None


@dataclass
class RunReport:
    per_target: list[TargetReport]
    method: str
    workers: int
    pruning_rate: float
    full_bp_time: float
    total_wall_time: float

    @property
    def ok_rows(self) -> list[TargetReport]:
        return [r for r in self.per_target if r.error is None]

    @property
    def mean_objective(self) -> float:
        rows = self.ok_rows
        return sum(r.objective for r in rows) / len(rows) if rows else float("nan")

    @property
    def mean_size(self) -> float:
        rows = self.ok_rows
        return sum(r.subgraph_size for r in rows) / len(rows) if rows else float("nan")

    @property
    def total_bp_invocations(self) -> int:
        return sum(r.bp_invocations for r in self.per_target)


def count_bp_invocations(report: RunReport) -> int:
    """Total subgraph BP runs across all targets of an instrumented run."""
    return report.total_bp_invocations


def _explain_one(mrf: Mrf, full_bp: BpResult, target: NodeId,
                 config: SearchConfig, report_comb: bool) -> TargetReport:
    counter = BpCounter()
    start = time.perf_counter()
    try:
        beam = beam_search(mrf, full_bp, target, config, counter)
        sub = (combine(beam, mrf, full_bp.beliefs[target], config.bp, counter)
               if report_comb else beam.best)
    except (GraphValidationError, KeyError) as exc:
        return TargetReport(target=target, method=config.method,
                            objective=None, subgraph_size=None,
                            wall_time=time.perf_counter() - start,
                            bp_invocations=counter.count, error=str(exc))
    return TargetReport(target=target, method=sub.method_tag,
                        objective=sub.objective, subgraph_size=sub.size,
                        wall_time=time.perf_counter() - start,
                        bp_invocations=counter.count)


# Shared state for fork-based workers: set in the parent right before the
# pool is created, inherited by child processes without pickling.
_SHARED: tuple | None = None


def _worker(target: NodeId) -> TargetReport:
    mrf, full_bp, config, report_comb = _SHARED
    return _explain_one(mrf, full_bp, target, config, report_comb)


def explain_targets(mrf: Mrf, targets: list[NodeId], config: SearchConfig,
                    workers: int = 1, report_comb: bool = False,
                    full_bp: BpResult | None = None) -> RunReport:
    """Run the configured search for every target and report per-target
    objectives, sizes, timings, and BP-invocation counts.

    ``full_bp`` may be passed to reuse an existing full-graph run;
    otherwise one is computed here (timed separately).  Unknown targets
    produce error rows and do not abort the run.
    """
    if workers < 1:
        raise GraphValidationError(f"workers must be >= 1, got {workers}")
    t0 = time.perf_counter()
    if full_bp is None:
        full_bp = run_bp(mrf, config.bp)
    full_bp_time = time.perf_counter() - t0

    global _SHARED
    t1 = time.perf_counter()
    if workers == 1:
        rows = [_explain_one(mrf, full_bp, t, config, report_comb)
                for t in targets]
    else:
        _SHARED = (mrf, full_bp, config, report_comb)
        try:
            chunk = max(1, len(targets) // (workers * 4))
            with ProcessPoolExecutor(max_workers=workers,
                                     mp_context=get_context("fork")) as pool:
                rows = list(pool.map(_worker, targets, chunksize=chunk))
        finally:
            _SHARED = None
    total_wall = time.perf_counter() - t1

    return RunReport(per_target=rows, method=config.method, workers=workers,
                     pruning_rate=config.pruning_rate,
                     full_bp_time=full_bp_time, total_wall_time=total_wall)
