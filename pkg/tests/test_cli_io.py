import json
import os
from pathlib import Path

import numpy as np
import pytest

from ergmee import Graph, ModelSpec, RngStream, Term, full_statistics, random_graph
from ergmee.cli import main
from ergmee.io import (
    load_attributes,
    load_edge_list,
    read_trace_csv,
    save_edge_list,
    trace_header,
)


class TestLoadEdgeList:
    def test_basic(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("0 1\n1 2\n")
        data = load_edge_list(p)
        assert data.graph.n == 3
        assert sorted(data.graph.edges()) == [(0, 1), (1, 2)]
        assert data.labels == ["0", "1", "2"]

    def test_duplicates_counted(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("0 1\n0 1\n1 0\n")
        data = load_edge_list(p)
        assert data.graph.edge_count == 1
        assert data.duplicates_dropped == 2

    def test_self_loops_dropped(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("0 0\na b\n")
        data = load_edge_list(p)
        assert data.graph.edge_count == 1
        assert data.self_loops_dropped == 1

    def test_malformed_line_reports_number(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("0 1\n0 1 2\n")
        with pytest.raises(ValueError, match=":2:"):
            load_edge_list(p)

    def test_empty_file_errors(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("# only a comment\n")
        with pytest.raises(ValueError, match="no edges"):
            load_edge_list(p)

    def test_string_labels_remapped_first_seen(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("alice bob\nbob carol\n# comment\ncarol alice\n")
        data = load_edge_list(p)
        assert data.labels == ["alice", "bob", "carol"]
        assert data.graph.edge_count == 3

    def test_round_trip_idempotent(self, tmp_path):
        p = tmp_path / "e.txt"
        p.write_text("2 1\n1 0\n2 0\n")
        data = load_edge_list(p)
        out1 = tmp_path / "o1.txt"
        save_edge_list(out1, data.graph, data.labels)
        data2 = load_edge_list(out1)
        out2 = tmp_path / "o2.txt"
        save_edge_list(out2, data2.graph, data2.labels)
        assert out1.read_text() == out2.read_text()


class TestLoadAttributes:
    def test_binary_and_categorical(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text(
            "node,plant_specific:b,e_class:c\n"
            "n0,1,alpha\n"
            "n1,0,beta\n"
            "n2,1,alpha\n"
        )
        data = load_attributes(p)
        table = data.bind(["n0", "n1", "n2"])
        assert table.binary_values("plant_specific") == [1, 0, 1]
        assert table.categorical_values("e_class") == [0, 1, 0]
        assert table.categorical_levels["e_class"] == ["alpha", "beta"]

    def test_tab_separated(self, tmp_path):
        p = tmp_path / "a.tsv"
        p.write_text("node\tflag:b\nx\t1\ny\t0\n")
        table = load_attributes(p).bind(["x", "y"])
        assert table.binary_values("flag") == [1, 0]

    def test_missing_node_coverage_names_nodes(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("node,flag:b\nn0,1\n")
        data = load_attributes(p)
        with pytest.raises(ValueError, match="n1"):
            data.bind(["n0", "n1"])

    def test_non_binary_value_rejected(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("node,flag:b\nn0,2\n")
        with pytest.raises(ValueError, match="non-0/1"):
            load_attributes(p)

    def test_missing_type_suffix_rejected(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("node,flag\nn0,1\n")
        with pytest.raises(ValueError, match="type suffix"):
            load_attributes(p)

    def test_categorical_first_seen_order(self, tmp_path):
        p = tmp_path / "a.csv"
        p.write_text("node,c:c\na,zed\nb,alpha\nc,zed\n")
        table = load_attributes(p).bind(["a", "b", "c"])
        assert table.categorical_values("c") == [0, 1, 0]
        assert table.categorical_levels["c"] == ["zed", "alpha"]


def _write_observed_network(tmp_path, n=40, density=0.12, seed=5) -> Path:
    g = random_graph(n, density, RngStream(seed))
    p = tmp_path / "observed.edges"
    save_edge_list(p, g)
    return p


class TestCliEstimate:
    def test_estimate_writes_artifacts_and_converges(self, tmp_path):
        edges = _write_observed_network(tmp_path)
        out = tmp_path / "run"
        code = main(
            [
                "estimate",
                "--edges", str(edges),
                "--model", "edge",
                "--outer-steps", "24000",
                "--inner-steps", "100",
                "--cd1-steps", "40000",
                "--gain-scale", "0.01",
                "--stop-when-converged",
                "--seed", "3",
                "--no-se",
                "--out", str(out),
            ]
        )
        assert code == 0
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["runs"][0]["status"] == "converged"
        assert manifest["config_hash"]
        assert manifest["config"]["seed"] == 3
        estimates = json.loads((out / "estimates.json").read_text())
        assert estimates["converged"] is True
        header, data = read_trace_csv(out / "trace.csv")
        assert header == trace_header(("edge",))
        assert data.shape[1] == 4  # step, theta, dz, acceptance
        steps = data[:, 0]
        assert np.all(np.diff(steps) > 0)  # strictly increasing step column
        assert (out / "nodes.tsv").exists()
        assert (out / "estimates.txt").exists()

    def test_same_seed_byte_identical_trace(self, tmp_path):
        edges = _write_observed_network(tmp_path)
        args = [
            "estimate",
            "--edges", str(edges),
            "--model", "edge",
            "--outer-steps", "300",
            "--inner-steps", "50",
            "--cd1-steps", "5000",
            "--seed", "11",
            "--no-se",
        ]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        assert main(args + ["--out", str(out1)]) in (0, 2)
        assert main(args + ["--out", str(out2)]) in (0, 2)
        assert (out1 / "trace.csv").read_bytes() == (out2 / "trace.csv").read_bytes()

    def test_different_seed_differs(self, tmp_path):
        edges = _write_observed_network(tmp_path)
        args = [
            "estimate", "--edges", str(edges), "--model", "edge",
            "--outer-steps", "200", "--inner-steps", "50",
            "--cd1-steps", "5000", "--no-se",
        ]
        out1, out2 = tmp_path / "r1", tmp_path / "r2"
        main(args + ["--seed", "1", "--out", str(out1)])
        main(args + ["--seed", "2", "--out", str(out2)])
        assert (out1 / "trace.csv").read_bytes() != (out2 / "trace.csv").read_bytes()

    def test_degenerate_model_exits_3(self, tmp_path):
        # huge positive edge and triangle weights collapse the chain onto
        # the complete graph; with a vanishing update step the run cannot
        # recover and must abort as degenerate
        edges = _write_observed_network(tmp_path, n=25, density=0.15)
        out = tmp_path / "run"
        code = main(
            [
                "estimate",
                "--edges", str(edges),
                "--model", "edge,alttriangle(2)",
                "--outer-steps", "4000",
                "--inner-steps", "200",
                "--cd1-steps", "2000",
                "--seed", "3",
                "--no-se",
                "--out", str(out),
                "--theta0", "5.0,5.0",
                "--target-step", "1e-9",
            ]
        )
        assert code == 3
        manifest = json.loads((out / "manifest.json").read_text())
        assert "degenerate" in manifest["runs"][0]["status"]
        # partial trace retained
        assert (out / "trace.csv").exists()

    def test_replicates_fan_out(self, tmp_path):
        edges = _write_observed_network(tmp_path, n=25)
        out = tmp_path / "run"
        code = main(
            [
                "estimate",
                "--edges", str(edges),
                "--model", "edge",
                "--outer-steps", "200",
                "--inner-steps", "50",
                "--cd1-steps", "5000",
                "--seed", "4",
                "--no-se",
                "--replicates", "3",
                "--threads", "2",
                "--out", str(out),
            ]
        )
        assert code in (0, 2)
        for r in range(3):
            assert (out / f"rep_{r:03d}" / "trace.csv").exists()
        manifest = json.loads((out / "manifest.json").read_text())
        seeds = {run["seed"] for run in manifest["runs"]}
        assert len(seeds) == 3

    def test_env_var_overrides_out_dir(self, tmp_path, monkeypatch):
        edges = _write_observed_network(tmp_path, n=20)
        env_out = tmp_path / "env_out"
        monkeypatch.setenv("ERGMEE_OUT_DIR", str(env_out))
        code = main(
            [
                "estimate", "--edges", str(edges), "--model", "edge",
                "--outer-steps", "100", "--inner-steps", "50",
                "--cd1-steps", "5000", "--no-se", "--out", str(tmp_path / "ignored"),
            ]
        )
        assert code in (0, 2)
        assert (env_out / "manifest.json").exists()
        assert not (tmp_path / "ignored").exists()

    def test_env_var_overrides_threads(self, tmp_path, monkeypatch):
        edges = _write_observed_network(tmp_path, n=20)
        out = tmp_path / "run"
        monkeypatch.setenv("ERGMEE_THREADS", "2")
        code = main(
            [
                "estimate", "--edges", str(edges), "--model", "edge",
                "--outer-steps", "100", "--inner-steps", "50",
                "--cd1-steps", "5000", "--no-se", "--replicates", "2",
                "--threads", "1", "--out", str(out),
            ]
        )
        assert code in (0, 2)
        assert (out / "rep_000" / "trace.csv").exists()
        assert (out / "rep_001" / "trace.csv").exists()

    def test_usage_error_exits_1(self, tmp_path):
        code = main(
            [
                "estimate", "--edges", str(tmp_path / "missing.edges"),
                "--model", "edge", "--out", str(tmp_path / "o"),
            ]
        )
        assert code == 1


class TestCliSimulate:
    def test_simulate_writes_networks_and_stats(self, tmp_path):
        out = tmp_path / "sim"
        code = main(
            [
                "simulate",
                "--model", "edge",
                "--theta", "0.0",
                "--n", "10",
                "--samples", "8",
                "--burn-in", "2000",
                "--sample-interval", "2000",
                "--seed", "5",
                "--out", str(out),
            ]
        )
        assert code == 0
        nets = sorted((out / "networks").glob("sample_*.edges"))
        assert len(nets) == 8
        manifest = json.loads((out / "manifest.json").read_text())
        # theta = 0: mean edge count near C(10,2)/2 = 22.5
        assert abs(manifest["statistic_means"][0] - 22.5) < 3.0

    def test_statistics_csv_matches_recomputation(self, tmp_path):
        out = tmp_path / "sim"
        main(
            [
                "simulate", "--model", "edge,alttriangle(2)",
                "--theta=-0.4,0.2", "--n", "12", "--samples", "5",
                "--burn-in", "3000", "--sample-interval", "1500",
                "--seed", "9", "--out", str(out),
            ]
        )
        spec = ModelSpec((Term.edge(), Term.alt_triangle(2.0)))
        # every statistics row recomputes exactly from its emitted network
        import csv as csv_mod

        with (out / "statistics.csv").open() as fh:
            rows = list(csv_mod.DictReader(fh))
        assert len(rows) == 5
        for idx, row in enumerate(rows):
            p = out / "networks" / f"sample_{idx:03d}.edges"
            data = load_edge_list(p)
            g = Graph.from_edges(12, list(data.graph.edges()))
            z = full_statistics(g, None, spec)
            assert float(row["edge"]) == pytest.approx(z[0])
            assert float(row["alt_triangle(2)"]) == pytest.approx(z[1], abs=1e-9)

    def test_seeds_differ(self, tmp_path):
        outs = []
        for seed in (1, 2):
            out = tmp_path / f"sim{seed}"
            main(
                [
                    "simulate", "--model", "edge", "--theta", "0.0",
                    "--n", "8", "--samples", "2", "--burn-in", "500",
                    "--sample-interval", "500", "--seed", str(seed),
                    "--out", str(out),
                ]
            )
            outs.append((out / "networks" / "sample_001.edges").read_text())
        assert outs[0] != outs[1]

    def test_theta_arity_checked(self, tmp_path):
        code = main(
            [
                "simulate", "--model", "edge,altstar(2)", "--theta", "0.0",
                "--n", "8", "--out", str(tmp_path / "x"),
            ]
        )
        assert code == 1


class TestCliCheck:
    def test_check_flow(self, tmp_path):
        # estimate a tiny edge-only model, then verify the estimates file
        edges = _write_observed_network(tmp_path, n=30, density=0.2, seed=8)
        out = tmp_path / "est"
        assert main(
            [
                "estimate", "--edges", str(edges), "--model", "edge",
                "--outer-steps", "24000", "--inner-steps", "100",
                "--cd1-steps", "40000", "--gain-scale", "0.01",
                "--stop-when-converged",
                "--seed", "2", "--no-se", "--out", str(out),
            ]
        ) == 0
        code = main(
            [
                "check",
                "--estimates", str(out / "estimates.json"),
                "--edges", str(edges),
                "--steps", "200000",
                "--sample-interval", "200",
                "--seed", "3",
                "--out", str(out),
            ]
        )
        assert code == 0
        payload = json.loads((out / "check.json").read_text())
        assert payload["passed"] is True
        assert abs(list(payload["t_statistics"].values())[0]) < 0.3

    def test_check_fails_on_perturbed_estimates(self, tmp_path):
        edges = _write_observed_network(tmp_path, n=30, density=0.2, seed=8)
        est = tmp_path / "estimates.json"
        est.write_text(
            json.dumps(
                {
                    "model": "edge",
                    "terms": [{"term": "edge", "theta": 0.8}],
                }
            )
        )
        code = main(
            [
                "check", "--estimates", str(est), "--edges", str(edges),
                "--steps", "100000", "--sample-interval", "200",
                "--seed", "3", "--out", str(tmp_path / "chk"),
            ]
        )
        assert code == 2

    def test_missing_estimates_file(self, tmp_path):
        code = main(
            [
                "check", "--estimates", str(tmp_path / "nope.json"),
                "--edges", str(tmp_path / "nope.edges"),
                "--out", str(tmp_path / "chk"),
            ]
        )
        assert code == 1
