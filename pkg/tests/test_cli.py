import numpy as np
import pytest

from bpexplain.cli import main


@pytest.fixture
def star_files(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("0\t1\n0\t2\n")
    priors = tmp_path / "priors.tsv"
    priors.write_text("0\t0.5\t0.5\n1\t0.8\t0.2\n2\t0.1\t0.9\n")
    return str(edges), str(priors)


def _belief_line(doc: str, node: int) -> np.ndarray:
    for line in doc.splitlines():
        if line.startswith(f"belief {node}:"):
            return np.array([float(t) for t in line.split(":")[1].split()])
    raise AssertionError(f"no belief line for node {node}")


def test_infer_star_fixture(star_files, tmp_path, capsys):
    edges, priors = star_files
    out = tmp_path / "beliefs.txt"
    code = main(["infer", "--edges", edges, "--priors", priors,
                 "--homophily", "0.99", "--out", str(out)])
    assert code == 0
    np.testing.assert_allclose(_belief_line(out.read_text(), 0),
                               [0.3182, 0.6818], atol=1e-4)


def test_infer_single_node_echoes_prior(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("")
    labels = tmp_path / "labels.tsv"
    labels.write_text("0\t2\n")
    out = tmp_path / "out.txt"
    code = main(["infer", "--edges", str(edges), "--labels", str(labels),
                 "--out", str(out)])
    assert code == 0
    np.testing.assert_allclose(_belief_line(out.read_text(), 0), [0.1, 0.9])


def test_infer_missing_edge_file_is_usage_error(tmp_path):
    assert main(["infer", "--edges", str(tmp_path / "nope.tsv")]) == 1


def test_infer_malformed_edge_file_is_data_error(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("0\t0\n")
    assert main(["infer", "--edges", str(edges)]) == 2


def test_infer_nonconvergence_distinct_exit(tmp_path, capsys):
    out = tmp_path / "b.txt"
    code = main(["infer", "--preset", "karate", "--max-iters", "1",
                 "--tolerance", "1e-12", "--out", str(out)])
    assert code == 4
    assert "converged: false" in out.read_text()


def test_unknown_flag_rejected(capsys):
    assert main(["infer", "--preset", "karate", "--frobnicate"]) == 1


def test_missing_subcommand_rejected(capsys):
    assert main([]) == 1


def test_explain_star_fixture(star_files, tmp_path, capsys):
    edges, priors = star_files
    out_dir = tmp_path / "exp"
    code = main(["explain", "--edges", edges, "--priors", priors,
                 "--homophily", "0.99", "--target", "0", "--capacity", "3",
                 "--beam", "1", "--out", str(out_dir)])
    assert code == 0
    doc = (out_dir / "explanation_1.txt").read_text()
    assert "nodes: 0 1 2" in doc
    for line in doc.splitlines():
        if line.startswith("objective:"):
            assert abs(float(line.split(":")[1])) < 1e-9
    summary = capsys.readouterr().out
    assert "candidate 1:" in summary


def test_explain_capacity_one_trivial_document(star_files, tmp_path):
    edges, priors = star_files
    out_dir = tmp_path / "exp"
    code = main(["explain", "--edges", edges, "--priors", priors,
                 "--target", "0", "--capacity", "1", "--out", str(out_dir)])
    assert code == 0
    doc = (out_dir / "explanation_1.txt").read_text()
    assert "nodes: 0\n" in doc


def test_explain_unknown_target(star_files):
    edges, priors = star_files
    assert main(["explain", "--edges", edges, "--priors", priors,
                 "--target", "42"]) != 0


def test_explain_karate_beam_documents(tmp_path, capsys):
    out_dir = tmp_path / "exp"
    code = main(["explain", "--preset", "karate", "--target", "16",
                 "--capacity", "5", "--beam", "3", "--comb",
                 "--out", str(out_dir)])
    assert code == 0
    docs = sorted(out_dir.glob("explanation_*.txt"))
    assert 1 <= len(docs) <= 3
    objectives = []
    for path in docs:
        for line in path.read_text().splitlines():
            if line.startswith("objective:"):
                objectives.append(float(line.split(":")[1]))
    assert objectives == sorted(objectives)
    assert (out_dir / "combined.txt").exists()


def test_batch_report_rows(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("\n".join(f"{i}\t{i+1}" for i in range(9)) + "\n")
    out = tmp_path / "report.txt"
    code = main(["batch", "--edges", str(edges), "--labeled-ratio", "0",
                 "--target-ratio", "1.0", "--capacity", "3",
                 "--out", str(out)])
    assert code == 0
    text = out.read_text()
    assert text.count("target ") == 10
    assert "targets: 10" in text


def test_batch_target_sampling_deterministic(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("\n".join(f"{i}\t{i+1}" for i in range(19)) + "\n")
    outs = []
    for name in ("a.txt", "b.txt"):
        out = tmp_path / name
        assert main(["batch", "--edges", str(edges), "--labeled-ratio", "0",
                     "--target-ratio", "0.3", "--seed", "5",
                     "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1]


def test_batch_workers_flag_does_not_change_objectives(tmp_path):
    edges = tmp_path / "edges.tsv"
    edges.write_text("\n".join(f"{i}\t{i+1}" for i in range(9)) + "\n")
    docs = []
    for workers in ("1", "2"):
        out = tmp_path / f"w{workers}.txt"
        assert main(["batch", "--edges", str(edges), "--labeled-ratio", "0",
                     "--target-ratio", "1.0", "--workers", workers,
                     "--out", str(out)]) == 0
        docs.append(out.read_text())
    assert docs[0].replace("workers: 1", "workers: 2") == docs[1]


def test_batch_targets_file(star_files, tmp_path):
    edges, priors = star_files
    targets = tmp_path / "targets.txt"
    targets.write_text("0\n2\n")
    out = tmp_path / "report.txt"
    assert main(["batch", "--edges", edges, "--priors", priors,
                 "--targets-file", str(targets), "--out", str(out)]) == 0
    assert out.read_text().count("target ") == 2


def test_eval_table_format(tmp_path):
    out = tmp_path / "table.txt"
    code = main(["eval", "--preset", "karate", "--capacity", "4",
                 "--methods", "global-k1,random-global", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method mean_objective[mean_size]"
    import re
    for line in lines[1:]:
        assert re.fullmatch(r"\S+ \d+(\.\d+)?(e-?\d+)?\[\d+\.\d\]", line), line


def test_eval_combined_row_smallest_mean(tmp_path):
    out = tmp_path / "table.txt"
    assert main(["eval", "--preset", "karate", "--capacity", "4",
                 "--methods", "global-k1,local,random-global,combined",
                 "--out", str(out)]) == 0
    means = {}
    for line in out.read_text().splitlines()[1:]:
        name, rest = line.split(" ", 1)
        means[name] = float(rest.split("[")[0])
    assert means["combined"] == min(means.values())
    assert means["random-global"] >= means["global-k1"]


def test_eval_unknown_method(tmp_path):
    assert main(["eval", "--preset", "karate", "--methods", "magic"]) == 1


def test_cli_outputs_byte_identical_across_runs(star_files, tmp_path):
    edges, priors = star_files
    blobs = []
    for tag in ("one", "two"):
        out_dir = tmp_path / tag
        assert main(["explain", "--edges", edges, "--priors", priors,
                     "--homophily", "0.99", "--target", "0", "--capacity", "3",
                     "--beam", "2", "--comb", "--seed", "9",
                     "--out", str(out_dir)]) == 0
        blobs.append(b"".join(p.read_bytes()
                              for p in sorted(out_dir.iterdir())))
    assert blobs[0] == blobs[1]
