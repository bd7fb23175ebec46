import json
import os

import numpy as np
import pytest

from helpers import path_graph
from polarnet import random_connected_graph
from polarnet.cli import run_cli
from polarnet.io import (
    FormatError,
    generate_random_beta,
    read_edge_list,
    read_node_attributes,
    write_edge_list,
    write_node_attributes,
)


@pytest.fixture
def path3(tmp_path):
    p = tmp_path / "path.tsv"
    p.write_text("# path\n0\t1\n1\t2\n")
    return p


@pytest.fixture
def instance(tmp_path):
    g = random_connected_graph(12, 24, seed=0)
    edges = tmp_path / "g.txt"
    nodes = tmp_path / "nodes.txt"
    write_edge_list(edges, g)
    beta = generate_random_beta(12, 0.35, 3)
    write_node_attributes(nodes, np.ones(12), beta)
    return edges, nodes


def run_json(argv, capsys):
    code = run_cli(argv)
    out = capsys.readouterr()
    return code, (json.loads(out.out) if code == 0 else None), out.err


class TestFormats:
    def test_round_trip(self, tmp_path):
        g = random_connected_graph(20, 40, seed=1, weight_range=(0.1, 9.9))
        write_edge_list(tmp_path / "e.txt", g)
        assert read_edge_list(tmp_path / "e.txt") == g
        rng = np.random.default_rng(2)
        kappa, beta = rng.uniform(0.1, 3, 20), rng.random(20)
        write_node_attributes(tmp_path / "n.txt", kappa, beta)
        k2, b2 = read_node_attributes(tmp_path / "n.txt", 20)
        np.testing.assert_array_equal(k2, kappa)
        np.testing.assert_array_equal(b2, beta)

    def test_konect_style(self, tmp_path):
        p = tmp_path / "k.txt"
        p.write_text("% sym unweighted\n% 3 2\n0 1 1 1234\n1 2 1 1240\n")
        g = read_edge_list(p)
        assert (g.n, g.m) == (3, 2)

    def test_malformed_line(self, tmp_path):
        p = tmp_path / "bad.txt"
        p.write_text("0 1\n1 x\n")
        with pytest.raises(FormatError, match=r"bad.txt:2"):
            read_edge_list(p)

    def test_attribute_errors(self, tmp_path):
        p = tmp_path / "a.txt"
        p.write_text("0 1.0 0\n1 -1 1\n")
        with pytest.raises(FormatError, match="kappa"):
            read_node_attributes(p, 2)
        p.write_text("0 1.0 0\n")
        with pytest.raises(FormatError, match="missing"):
            read_node_attributes(p, 2)

    def test_random_beta(self):
        assert np.all(generate_random_beta(50, 0.0, 1) == 1)
        assert np.all(generate_random_beta(50, 1.0, 1) == 0)
        np.testing.assert_array_equal(generate_random_beta(30, 0.35, 7), generate_random_beta(30, 0.35, 7))
        b = generate_random_beta(10000, 0.35, 0)
        frac = np.mean(b == 0)
        assert abs(frac - 0.35) < 5 * np.sqrt(0.35 * 0.65 / 10000)


class TestCli:
    def test_analyze_fd(self, path3, capsys):
        code, rep, _ = run_json(["analyze", "--edges", str(path3), "--model", "fd", "--s0", "0", "--s1", "2",
                                 "--rho", "0.5"], capsys)
        assert code == 0
        assert rep["disagreement"] == pytest.approx(0.5)
        assert rep["polarization"] == pytest.approx(0.5)
        assert rep["index"] == pytest.approx(0.5)

    def test_same_leaders(self, path3, capsys):
        code, _, err = run_json(["analyze", "--edges", str(path3), "--model", "fd", "--s0", "1", "--s1", "1"], capsys)
        assert code == 1 and "leaders must differ" in err

    def test_extraneous_parameter(self, path3, capsys):
        code, _, err = run_json(["analyze", "--edges", str(path3), "--model", "fj", "--s0", "1",
                                 "--prob-zero", "0.3"], capsys)
        assert code == 1 and "--s0" in err

    def test_usage_error(self, capsys):
        assert run_cli(["analyze"]) == 1
        assert "required" in capsys.readouterr().err

    def test_missing_file(self, tmp_path, capsys):
        code, _, err = run_json(["distances", "--edges", str(tmp_path / "nope"), "--u", "0", "--v", "1"], capsys)
        assert code == 1 and "nope" in err

    def test_malformed_reports_line(self, tmp_path, capsys):
        p = tmp_path / "bad.txt"
        p.write_text("0 1\n1 2 -3\n")
        code, _, err = run_json(["distances", "--edges", str(p), "--u", "0", "--v", "1"], capsys)
        assert code == 1 and "nonpositive weight" in err

    def test_solver_failure_exit_2(self, tmp_path, capsys):
        out = tmp_path / "d.json"
        code = run_cli(["design-sparse", "--n", "30", "--k", "120", "-W", "50", "--epsilon", "0.1", "--strict",
                        "-o", str(out)])
        assert code == 2
        assert "epsilon" in capsys.readouterr().err
        assert not out.exists()
        assert os.listdir(tmp_path) == []

    def test_analyze_outputs(self, path3, tmp_path, capsys):
        out, traj, edge = tmp_path / "r.json", tmp_path / "t.csv", tmp_path / "e.csv"
        code = run_cli(["analyze", "--edges", str(path3), "--model", "fd", "--s0", "0", "--s1", "2",
                        "-o", str(out), "--trajectory", str(traj), "--edge-csv", str(edge)])
        assert code == 0
        rep = json.loads(out.read_text())
        assert rep["trajectory_final_error"] < 1e-6
        assert traj.read_text().splitlines()[0] == "t,x_0,x_1,x_2"
        assert len(edge.read_text().splitlines()) == 3

    def test_distances(self, path3, capsys, tmp_path):
        code, rep, _ = run_json(["distances", "--edges", str(path3), "--u", "0", "--v", "2"], capsys)
        assert rep["resistance"] == pytest.approx(2.0)
        csv = tmp_path / "all.csv"
        assert run_cli(["distances", "--edges", str(path3), "--csv", str(csv)]) == 0
        assert len(csv.read_text().splitlines()) == 4

    def test_select_leader(self, tmp_path, capsys):
        p = tmp_path / "p5.txt"
        write_edge_list(p, path_graph(5))
        code, rep, _ = run_json(["select-leader", "--edges", str(p), "--s0", "0", "--rho", "1"], capsys)
        assert code == 0 and rep["s1"] == 4

    def test_design_sparse_graph_out(self, tmp_path, capsys):
        gout = tmp_path / "h.txt"
        code, rep, _ = run_json(["design-sparse", "--n", "20", "--k", "80", "-W", "40", "--epsilon", "0.8",
                                 "--graph-out", str(gout)], capsys)
        assert code == 0
        h = read_edge_list(gout)
        assert h.m == rep["edge_count"] <= 80
        assert h.total_weight <= 40 + 1e-9

    def test_design_weights(self, instance, capsys):
        edges, nodes = instance
        code, rep, _ = run_json(["design-weights", "--edges", str(edges), "--nodes", str(nodes), "--lower", "0.1",
                                 "--upper", "3", "-W", "24"], capsys)
        assert code == 0 and rep["converged"]
        assert rep["objective"] <= rep["start_objective"]

    def test_flip_prefs_k0(self, instance, capsys):
        edges, nodes = instance
        code, rep, _ = run_json(["flip-prefs", "--edges", str(edges), "--nodes", str(nodes), "--k", "0"], capsys)
        assert code == 0 and rep["flipped"] == []

    def test_flip_prefs_needs_mode(self, instance, capsys):
        edges, nodes = instance
        assert run_cli(["flip-prefs", "--edges", str(edges), "--nodes", str(nodes)]) == 1

    def test_seed_env_and_determinism(self, instance, tmp_path, monkeypatch, capsys):
        edges, _ = instance
        argv = ["experiment", "--edges", str(edges), "--trials", "5", "--lambda-count", "3"]
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        assert run_cli(argv + ["-o", str(a)]) == 0
        assert run_cli(argv + ["-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert json.loads(a.read_text())["metadata"]["seed"] == 42
        monkeypatch.setenv("POLARNET_SEED", "7")
        assert run_cli(argv + ["-o", str(a)]) == 0
        assert json.loads(a.read_text())["metadata"]["seed"] == 7

    def test_experiment_csv(self, instance, tmp_path, capsys):
        edges, _ = instance
        csv = tmp_path / "sweep.csv"
        code, rep, _ = run_json(["experiment", "--edges", str(edges), "--trials", "5", "--csv", str(csv)], capsys)
        assert code == 0
        lines = csv.read_text().splitlines()
        assert lines[0] == "lambda,k,index_l1,index_topk,index_random_mean,index_random_std"
        assert len(lines) == 13

    def test_module_entry_point(self, path3):
        import subprocess
        import sys

        res = subprocess.run([sys.executable, "-m", "polarnet", "distances", "--edges", str(path3),
                              "--u", "0", "--v", "1"], capture_output=True, text=True)
        assert res.returncode == 0 and json.loads(res.stdout)["resistance"] == pytest.approx(1.0)
