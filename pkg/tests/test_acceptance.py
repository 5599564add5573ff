"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers.

Run with ``pytest tests/test_acceptance.py -v -s``.
"""

import os
import time

import numpy as np
import pytest

from bpexplain import (ExplanationSubgraph, Mrf, SearchConfig, beam_search,
                       count_bp_invocations, evaluate_candidate,
                       explain_targets, extend_geg, frontier,
                       generate_synthetic, karate_mrf, run_bp, sym_kl)
from bpexplain.bp import BpConfig
from bpexplain.cli import main
from bpexplain.graphio import DatasetSpec, build_mrf

from oracles import (brute_force_marginals, random_forest_mrf,
                     random_graph_mrf, random_tree_mrf)

EXACT = BpConfig(max_iters=200, tolerance=1e-12)


def _report(name: str, ok: bool, detail: str):
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")


# -- criterion: BP exactness on random acyclic graphs ------------------------

def test_bp_exactness_oracle():
    rng = np.random.default_rng(2024)
    worst = 0.0
    start = time.perf_counter()
    for case in range(200):
        c = int(rng.choice([2, 3, 5]))
        max_n = 8 if c == 5 else 12
        n = int(rng.integers(2, max_n + 1))
        if rng.random() < 0.3:
            mrf = random_forest_mrf(rng, n, c)
        else:
            mrf = random_tree_mrf(rng, n, c)
        got = run_bp(mrf, EXACT)
        exact = brute_force_marginals(mrf)
        for node in mrf.node_ids:
            worst = max(worst, float(np.abs(got.beliefs[node] - exact[node]).max()))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-9 and elapsed < 60
    _report("bp-exactness", ok,
            f"200 acyclic graphs, max belief error {worst:.2e}, {elapsed:.1f}s")
    assert worst < 1e-9
    assert elapsed < 60


# -- criterion: star-fixture regression and objective pathologies ------------

def test_star_fixture_regression(tiny_star):
    full = run_bp(tiny_star, EXACT)
    b = full.beliefs[0]
    np.testing.assert_allclose(b, [0.31818, 0.68182], atol=1e-4)

    def d(nodes, edges):
        sub = ExplanationSubgraph(target=0, nodes=frozenset(nodes),
                                  edges=frozenset(edges), method_tag="global")
        return evaluate_candidate(tiny_star, b, sub, EXACT).objective

    d_x, d_xz = d({0}, set()), d({0, 2}, {(0, 2)})
    d_xy, d_all = d({0, 1}, {(0, 1)}), d({0, 1, 2}, {(0, 1), (0, 2)})
    assert abs(d_x - 0.1386) < 1e-3
    assert abs(d_xz - 0.2836) < 1e-3
    assert abs(d_xy - 1.0046) < 1e-3
    assert abs(d_all) < 1e-3 and d_all < 1e-9
    # The objective is not monotone in the node set...
    assert d_xy > d_x
    # ...and not submodular: the same addition gains more on the larger set.
    assert (-d_xy) - (-d_x) < (-d_all) - (-d_xz)
    _report("star-fixture", True,
            f"b={np.round(b, 5).tolist()}, d(X)={d_x:.4f}, d(XZ)={d_xz:.4f}, "
            f"d(XY)={d_xy:.4f}, d(full)={d_all:.1e}, both violations hold")


# -- criterion: every search output is a tree containing the target ----------

def test_tree_property_randomized_suite():
    rng = np.random.default_rng(99)
    methods = ["global", "local", "random-global", "random-local"]
    variants = ["unconstrained", "chain", "star"]
    start = time.perf_counter()
    trials = 0
    graphs = 125
    for g in range(graphs):
        n = int(rng.integers(4, 25))
        c = int(rng.choice([2, 3]))
        kind = rng.choice(["tree", "er", "chain"])
        if kind == "tree":
            edges = generate_synthetic("tree", n, seed=int(rng.integers(1 << 30)))
        elif kind == "chain":
            edges = generate_synthetic("chain", n)
        else:
            edges = generate_synthetic("erdos-renyi", n, 2.5 / n,
                                       seed=int(rng.integers(1 << 30)))
        spec = DatasetSpec(class_count=c,
                           homophily=float(rng.uniform(0.6, 0.95)))
        labels = {}
        nodes = sorted({u for e in edges for u in e})
        for node in nodes:
            if rng.random() < 0.3:
                labels[node] = int(rng.integers(1, c + 1))
        mrf = build_mrf(spec, edges, labels)
        full = run_bp(mrf)
        for _ in range(8):
            trials += 1
            config = SearchConfig(
                capacity=int(rng.integers(1, 7)),
                beam_width=int(rng.integers(1, 4)),
                method=methods[trials % 4],
                variant=variants[trials % 3],
                pruning_rate=float(rng.choice([0.0, 0.3, 0.6])),
                seed=trials)
            target = int(nodes[rng.integers(len(nodes))])
            beam = beam_search(mrf, full, target, config)
            assert 1 <= len(beam.candidates) <= config.beam_width
            objs = [cand.objective for cand in beam.candidates]
            assert objs == sorted(objs)
            for cand in beam.candidates:
                assert target in cand.nodes
                assert cand.size <= config.capacity
                assert cand.is_tree, (config, sorted(cand.nodes))
    elapsed = time.perf_counter() - start
    ok = trials == 1000 and elapsed < 120
    _report("tree-property", ok,
            f"{trials} trials over {graphs} graphs, all outputs trees, "
            f"{elapsed:.1f}s")
    assert trials == 1000
    assert elapsed < 120


# -- criterion: greedy step agrees with brute-force argmin -------------------

def _oracle_best_extension(mrf, full_belief, sub):
    """Independent re-evaluation of every frontier pair, with the documented
    tie-break (objective, node list, edge list)."""
    best = None
    for w in sorted(sub.nodes):
        for y in mrf.neighbors[w]:
            if y in sub.nodes:
                continue
            nodes = set(sub.nodes) | {y}
            edges = set(sub.edges) | {tuple(sorted((y, w)))}
            model = Mrf(priors={m: mrf.priors[m] for m in nodes},
                        edges=edges,
                        potentials={e: mrf.potentials[e] for e in edges},
                        class_count=mrf.class_count)
            res = run_bp(model, BpConfig(max_iters=len(nodes),
                                         tolerance=EXACT.tolerance))
            obj = sym_kl(full_belief, res.beliefs[sub.target])
            key = (obj, tuple(sorted(nodes)), tuple(sorted(edges)))
            if best is None or key < best[0]:
                best = (key, nodes, edges, obj)
    return best


def test_greedy_step_matches_bruteforce_argmin():
    rng = np.random.default_rng(4242)
    steps_checked = 0
    for case in range(100):
        n = int(rng.integers(4, 16))
        c = int(rng.choice([2, 3]))
        if rng.random() < 0.5:
            mrf = random_tree_mrf(rng, n, c)
        else:
            mrf = random_graph_mrf(rng, n, c, extra_edge_prob=0.2)
        full = run_bp(mrf, EXACT)
        target = int(rng.integers(n))
        full_belief = full.beliefs[target]
        sub = ExplanationSubgraph(target=target, nodes=frozenset({target}),
                                  edges=frozenset(), method_tag="global")
        for _ in range(4):
            expected = _oracle_best_extension(mrf, full_belief, sub)
            got = extend_geg(mrf, full_belief, sub, 1, set(), EXACT)
            if expected is None:
                assert got == []
                break
            assert got, f"search stopped where oracle found {expected[1]}"
            chosen = got[0]
            assert set(chosen.nodes) == expected[1]
            assert set(chosen.edges) == expected[2]
            assert chosen.objective == expected[3]
            steps_checked += 1
            sub = chosen
    _report("greedy-oracle", True,
            f"100 graphs, {steps_checked} greedy steps matched exactly")
    assert steps_checked > 200


# -- criterion: method ordering on the karate network ------------------------

def test_method_trend_on_karate():
    mrf = karate_mrf()
    full = run_bp(mrf)
    targets = list(mrf.node_ids)
    start = time.perf_counter()

    def seed_mean(method, k, seeds, comb=False):
        values = []
        for seed in seeds:
            cfg = SearchConfig(capacity=5, beam_width=k, method=method,
                               seed=seed)
            rep = explain_targets(mrf, targets, cfg, full_bp=full,
                                  report_comb=comb)
            assert all(r.error is None for r in rep.per_target)
            values.append(rep.mean_objective)
        return float(np.mean(values))

    # The deterministic methods are seed-invariant, so their seed average
    # equals a single run; the random baselines average seeds 0..9.
    g1 = seed_mean("global", 1, [0])
    g3 = seed_mean("global", 3, [0])
    comb = seed_mean("global", 3, [0], comb=True)
    local = seed_mean("local", 1, [0])
    rnd_g = seed_mean("random-global", 1, range(10))
    rnd_l = seed_mean("random-local", 1, range(10))
    elapsed = time.perf_counter() - start

    tie = 1e-6
    ok = (comb <= g3 + tie and g3 <= g1 + tie and g1 < rnd_g
          and local < rnd_l and elapsed < 300)
    _report("karate-trend", ok,
            f"comb={comb:.4f} <= g(k3)={g3:.4f} <= g(k1)={g1:.4f} < "
            f"random-g={rnd_g:.4f}; local={local:.4f} < random-l={rnd_l:.4f}; "
            f"{elapsed:.1f}s")
    assert comb <= g3 + tie
    assert g3 <= g1 + tie
    assert g1 < rnd_g
    assert local < rnd_l
    assert elapsed < 300


# -- criterion: pruning safety ------------------------------------------------

def _beam_fingerprint(beam):
    return [(c.identity(), c.objective, c.belief_on_subgraph.tobytes())
            for c in beam.candidates]


def test_pruning_safety(monkeypatch):
    mrf = karate_mrf()
    full = run_bp(mrf)
    targets = list(mrf.node_ids)

    # Rate 0 must be bit-identical to a search with pruning disabled outright.
    zero_cfg = SearchConfig(capacity=5, beam_width=2, method="global",
                            pruning_rate=0.0)
    with_machinery = [_beam_fingerprint(beam_search(mrf, full, t, zero_cfg))
                      for t in targets]
    import bpexplain.search as search_mod
    with monkeypatch.context() as m:
        m.setattr(search_mod, "prune_frontier",
                  lambda scored, rate: {n for n, _ in scored})
        disabled = [_beam_fingerprint(beam_search(mrf, full, t, zero_cfg))
                    for t in targets]
    identical = with_machinery == disabled

    base = explain_targets(mrf, targets,
                           SearchConfig(capacity=5, method="global",
                                        pruning_rate=0.0), full_bp=full)
    pruned = explain_targets(mrf, targets,
                             SearchConfig(capacity=5, method="global",
                                          pruning_rate=0.5), full_bp=full)
    reduction = 1 - count_bp_invocations(pruned) / count_bp_invocations(base)
    rel_degrade = (pruned.mean_objective - base.mean_objective) \
        / base.mean_objective
    ok = identical and reduction >= 0.25 and rel_degrade <= 0.10
    _report("pruning-safety", ok,
            f"rate-0 bit-identical={identical}, invocation reduction "
            f"{reduction:.1%} (>=25%), mean-d change {rel_degrade:+.1%} (<=10%)")
    assert identical
    assert reduction >= 0.25
    assert rel_degrade <= 0.10


# -- criterion: parallel batch scaling ----------------------------------------

@pytest.fixture(scope="module")
def big_er_model():
    edges = generate_synthetic("erdos-renyi", 10_000, 10 / 9_999, seed=1)
    nodes = sorted({u for e in edges for u in e})
    rng = np.random.default_rng(1)
    labels = {int(n): int(rng.integers(1, 3)) for n in nodes
              if rng.random() < 0.5}
    mrf = build_mrf(DatasetSpec(class_count=2), edges, labels)
    return mrf, nodes


def _scaling_runs(big_er_model, workers_list):
    mrf, nodes = big_er_model
    full = run_bp(mrf)
    rng = np.random.default_rng(7)
    targets = [int(nodes[i]) for i in
               sorted(rng.choice(len(nodes), size=200, replace=False))]
    cfg = SearchConfig(capacity=5, beam_width=1, method="global")
    runs = {}
    for w in workers_list:
        runs[w] = explain_targets(mrf, targets, cfg, workers=w, full_bp=full)
    return runs


def test_parallel_outputs_identical_across_workers(big_er_model):
    runs = _scaling_runs(big_er_model, [1, 2, 4])
    keys = {w: [(r.target, r.objective, r.subgraph_size, r.bp_invocations)
                for r in rep.per_target] for w, rep in runs.items()}
    ok = keys[1] == keys[2] == keys[4]
    _report("parallel-determinism", ok,
            "per-target outputs bit-identical for 1, 2 and 4 workers")
    assert ok


def test_parallel_scaling_speedup(big_er_model):
    runs = _scaling_runs(big_er_model, [1, 2, 4, 8])
    base = runs[1].total_wall_time
    speedups = {w: base / runs[w].total_wall_time for w in (2, 4, 8)}
    ok = all(speedups[w] >= 0.6 * w for w in (2, 4, 8))
    detail = (f"cores={os.cpu_count()}, explain-phase wall W1={base:.2f}s, " +
              ", ".join(f"W{w}: {speedups[w]:.2f}x (need >= {0.6 * w:.1f}x)"
                        for w in (2, 4, 8)))
    _report("parallel-scaling", ok, detail)
    for w in (2, 4, 8):
        assert speedups[w] >= 0.6 * w, (
            f"speedup {speedups[w]:.2f} < {0.6 * w:.1f} at {w} workers "
            f"(host exposes {os.cpu_count()} CPU core(s))")


# -- criterion: CLI determinism ------------------------------------------------

def test_cli_byte_identical_documents(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("0\t1\n0\t2\n")
    priors = tmp_path / "priors.tsv"
    priors.write_text("0\t0.5\t0.5\n1\t0.8\t0.2\n2\t0.1\t0.9\n")

    def run_all(tag):
        out = tmp_path / tag
        out.mkdir()
        assert main(["infer", "--preset", "karate",
                     "--out", str(out / "beliefs.txt")]) == 0
        assert main(["explain", "--edges", str(edges), "--priors", str(priors),
                     "--homophily", "0.99", "--target", "0", "--capacity", "3",
                     "--beam", "2", "--comb", "--seed", "3",
                     "--out", str(out / "exp")]) == 0
        assert main(["explain", "--preset", "karate", "--method",
                     "random-local", "--target", "7", "--capacity", "5",
                     "--seed", "11", "--out", str(out / "rnd")]) == 0
        assert main(["batch", "--preset", "karate", "--target-ratio", "0.5",
                     "--capacity", "4", "--seed", "2", "--workers", "2",
                     "--out", str(out / "report.txt")]) == 0
        assert main(["eval", "--preset", "karate", "--capacity", "4",
                     "--methods", "global-k1,local,random-global,combined",
                     "--out", str(out / "table.txt")]) == 0
        blobs = {}
        for path in sorted(out.rglob("*.txt")):
            blobs[str(path.relative_to(out))] = path.read_bytes()
        return blobs

    first = run_all("one")
    second = run_all("two")
    ok = first == second
    _report("cli-determinism", ok,
            f"{len(first)} documents from infer/explain/batch/eval compared")
    assert first == second
