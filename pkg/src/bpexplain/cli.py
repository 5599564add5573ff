"""Command-line interface: infer, explain, batch, eval, serve.

Exit codes: 0 success, 1 usage (bad flags or missing files), 2 data
validation, 3 runtime failure.  ``infer`` exits 4 when BP stopped at the
iteration cap without converging.  All outputs are deterministic for a
fixed seed; timing fields are only written when --timings is passed.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .batch import explain_targets
from .bp import BpConfig, run_bp
from .divergence import sym_kl
from .graphio import (DatasetSpec, ParseError, build_mrf, export_explanation,
                      karate_club, load_dataset, load_edges, load_labels,
                      synthesize_labels, write_beliefs, write_report)
from .mrf import DegenerateModelError, GraphValidationError, Mrf
from .search import (BpCounter, SearchConfig, beam_search, combine)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_RUNTIME = 3
EXIT_NOT_CONVERGED = 4

EVAL_METHODS = ("global-k1", "global-k3", "local", "random-global",
                "random-local", "combined")

log = logging.getLogger("bpexplain")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _graph_flags(p: argparse.ArgumentParser):
    p.add_argument("--edges", help="edge file, one 'u<TAB>v' per line")
    p.add_argument("--labels", help="label file, one 'node<TAB>class' per line")
    p.add_argument("--priors", help="explicit priors file, 'node p1 .. pc' lines")
    p.add_argument("--preset", choices=["karate"],
                   help="use a bundled dataset instead of --edges")
    p.add_argument("--classes", type=int, default=2)
    p.add_argument("--homophily", type=float, default=0.9)
    p.add_argument("--labeled-ratio", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)


def _search_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", default="global",
                   choices=["global", "local", "random-global", "random-local"])
    p.add_argument("--capacity", type=int, default=5)
    p.add_argument("--beam", type=int, default=1)
    p.add_argument("--prune", type=float, default=0.0)
    p.add_argument("--variant", default="unconstrained",
                   choices=["unconstrained", "chain", "star"])


def _bp_flags(p: argparse.ArgumentParser):
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tolerance", type=float, default=1e-6)
    p.add_argument("--damping", type=float, default=0.0)


def _load_model(args) -> Mrf:
    if args.preset == "karate":
        edges, labels = karate_club()
        spec = DatasetSpec(class_count=2, homophily=args.homophily,
                           seed=args.seed)
        return build_mrf(spec, edges, labels)
    if not args.edges:
        raise UsageError("one of --edges or --preset is required")
    spec = DatasetSpec(edges_path=args.edges, labels_path=args.labels,
                       priors_path=args.priors, class_count=args.classes,
                       homophily=args.homophily,
                       labeled_ratio=args.labeled_ratio, seed=args.seed)
    return load_dataset(spec)


def _search_config(args) -> SearchConfig:
    bp = BpConfig(max_iters=getattr(args, "max_iters", 100),
                  tolerance=getattr(args, "tolerance", 1e-6),
                  damping=getattr(args, "damping", 0.0))
    return SearchConfig(capacity=args.capacity, beam_width=args.beam,
                        method=args.method, variant=args.variant,
                        pruning_rate=args.prune, seed=args.seed, bp=bp)


class UsageError(Exception):
    pass


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_infer(args) -> int:
    mrf = _load_model(args)
    result = run_bp(mrf, BpConfig(max_iters=args.max_iters,
                                  tolerance=args.tolerance,
                                  damping=args.damping))
    doc = write_beliefs(mrf, result.beliefs, result.converged,
                        result.iterations, result.max_residual)
    _emit(doc, args.out)
    return EXIT_OK if result.converged else EXIT_NOT_CONVERGED


def cmd_explain(args) -> int:
    mrf = _load_model(args)
    if not mrf.has_node(args.target):
        raise GraphValidationError(f"target {args.target} not in graph")
    config = _search_config(args)
    full_bp = run_bp(mrf, config.bp)
    beam = beam_search(mrf, full_bp, args.target, config)
    full_belief = full_bp.beliefs[args.target]

    docs = []
    for sub in beam.candidates:
        docs.append(export_explanation(mrf, sub, full_belief,
                                       sub.subgraph_bp.messages, config))
    comb_doc = None
    if args.comb:
        union = combine(beam, mrf, full_belief, config.bp)
        comb_doc = export_explanation(mrf, union, full_belief,
                                      union.subgraph_bp.messages, config)

    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for i, doc in enumerate(docs, start=1):
            (out_dir / f"explanation_{i}.txt").write_text(doc, encoding="utf-8")
        if comb_doc is not None:
            (out_dir / "combined.txt").write_text(comb_doc, encoding="utf-8")
    else:
        for doc in docs:
            sys.stdout.write(doc + "\n")
        if comb_doc is not None:
            sys.stdout.write(comb_doc + "\n")
    for i, sub in enumerate(beam.candidates, start=1):
        print(f"candidate {i}: objective={sub.objective:.4g} size={sub.size}")
    if comb_doc is not None:
        print(f"combined: objective={union.objective:.4g} size={union.size}")
    return EXIT_OK


def _pick_targets(args, mrf: Mrf) -> list[int]:
    if args.targets_file:
        targets = []
        for line in Path(args.targets_file).read_text(encoding="utf-8").splitlines():
            line = line.strip()
            if line and not line.startswith("#"):
                targets.append(int(line))
        return targets
    labeled: set[int] = set()
    if args.preset == "karate":
        labeled = set(karate_club()[1])
    elif args.labels:
        labeled = set(load_labels(args.labels, args.classes))
    elif args.labeled_ratio > 0:
        labeled = set(synthesize_labels(mrf.node_ids, args.labeled_ratio,
                                        args.classes, args.seed))
    unlabeled = sorted(set(mrf.node_ids) - labeled)
    if not unlabeled:
        return []
    count = max(1, int(round(args.target_ratio * len(unlabeled))))
    rng = np.random.default_rng((args.seed, 0xCAFE))
    picked = rng.choice(len(unlabeled), size=min(count, len(unlabeled)),
                        replace=False)
    return [unlabeled[i] for i in sorted(picked)]


def cmd_batch(args) -> int:
    mrf = _load_model(args)
    config = _search_config(args)
    targets = _pick_targets(args, mrf)
    report = explain_targets(mrf, targets, config, workers=args.workers)
    _emit(write_report(report, config, timings=args.timings), args.out)
    return EXIT_OK


def cmd_eval(args) -> int:
    mrf = _load_model(args)
    methods = [m.strip() for m in args.methods.split(",")] if args.methods \
        else list(EVAL_METHODS)
    for m in methods:
        if m not in EVAL_METHODS:
            raise UsageError(f"unknown eval method {m!r} "
                             f"(choose from {', '.join(EVAL_METHODS)})")
    targets = sorted(mrf.node_ids)
    full_bp = run_bp(mrf, BpConfig())
    lines = ["method mean_objective[mean_size]"]
    for name in methods:
        mean_obj, mean_size = _eval_method(mrf, full_bp, targets, name, args)
        lines.append(f"{name} {mean_obj:.4g}[{mean_size:.1f}]")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def _eval_method(mrf, full_bp, targets, name, args):
    base = dict(capacity=args.capacity, pruning_rate=args.prune,
                variant=args.variant, seed=args.seed)
    if name == "global-k1":
        config = SearchConfig(method="global", beam_width=1, **base)
    elif name == "global-k3":
        config = SearchConfig(method="global", beam_width=3, **base)
    elif name == "local":
        config = SearchConfig(method="local", beam_width=1, **base)
    elif name == "random-global":
        config = SearchConfig(method="random-global", beam_width=1, **base)
    elif name == "random-local":
        config = SearchConfig(method="random-local", beam_width=1, **base)
    else:  # combined: union of the global k=3 beam
        config = SearchConfig(method="global", beam_width=3, **base)
        report = explain_targets(mrf, targets, config, workers=args.workers,
                                 report_comb=True, full_bp=full_bp)
        return report.mean_objective, report.mean_size
    report = explain_targets(mrf, targets, config, workers=args.workers,
                             full_bp=full_bp)
    return report.mean_objective, report.mean_size


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app
    uvicorn.run(create_app(), host=args.host, port=args.port,
                log_level=os.environ.get("BPEXPLAIN_LOG", "info").lower())
    return EXIT_OK


def build_parser() -> _Parser:
    parser = _Parser(prog="bpexplain", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("infer", help="run BP and write per-node beliefs")
    _graph_flags(p)
    _bp_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("explain", help="explain one target node")
    _graph_flags(p)
    _search_flags(p)
    _bp_flags(p)
    p.add_argument("--target", type=int, required=True)
    p.add_argument("--comb", action="store_true",
                   help="also emit the combined (beam-union) explanation")
    p.add_argument("--out", help="directory for explanation documents")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("batch", help="explain many targets in parallel")
    _graph_flags(p)
    _search_flags(p)
    _bp_flags(p)
    p.add_argument("--targets-file", help="file with one target id per line")
    p.add_argument("--target-ratio", type=float, default=0.01,
                   help="fraction of unlabeled nodes to sample as targets")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--timings", action="store_true",
                   help="include wall-time fields in the report")
    p.add_argument("--out")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("eval", help="compare methods: mean objective and size")
    _graph_flags(p)
    p.add_argument("--methods", help="comma list; default all")
    p.add_argument("--capacity", type=int, default=5)
    p.add_argument("--prune", type=float, default=0.0)
    p.add_argument("--variant", default="unconstrained",
                   choices=["unconstrained", "chain", "star"])
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("serve", help="start the interactive explanation service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("BPEXPLAIN_LOG", "WARNING").upper())
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except GraphValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateModelError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        log.exception("unhandled failure")
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
