import json

import numpy as np
import pytest

import qpcut as qc
from qpcut.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_solve_on_edge_list(tmp_path, capsys):
    p = tmp_path / "p3.el"
    p.write_text("3 2\n1 2 1\n2 3 1\n")
    code, rep = run_cli(capsys, "solve", "--input", str(p), "--l", "1", "--u", "1")
    assert code == 0
    assert rep["opt_value"] == 1.0
    assert rep["status"] == "optimal"
    assert rep["n"] == 3
    assert sorted(rep["partition"]["v0"] + rep["partition"]["v1"]) == [0, 1, 2]


def test_solve_generated_bisection_matches_oracle(tmp_path, capsys):
    code, rep = run_cli(
        capsys, "solve", "--gen", "toroidal:4x5", "--seed", "1", "--bisection",
        "--json", str(tmp_path / "r.json"),
    )
    assert code == 0 and rep["status"] == "optimal"
    g = qc.gen_toroidal(4, 5, seed=1)
    opt, _ = qc.brute_force(g, qc.PartitionSpec(10, 10))
    assert rep["opt_value"] == opt
    assert rep["node_count"] >= 1
    on_disk = json.loads((tmp_path / "r.json").read_text())
    assert on_disk == rep


def test_bound_command(capsys):
    code, rep = run_cli(
        capsys, "bound", "--gen", "random:12x0.4", "--seed", "3", "--bisection", "--oracle"
    )
    assert code == 0
    assert rep["lb1"] <= rep["opt"] + 1e-6
    assert rep["lb2"] <= rep["opt"] + 1e-6


def test_generate_writes_loadable_file(tmp_path, capsys):
    out = tmp_path / "deb.el"
    code, rep = run_cli(capsys, "generate", "--gen", "debruijn:5", "--out", str(out))
    assert code == 0
    assert rep["n"] == 32
    g = qc.load_graph(out)
    assert g.n == 32
    assert np.array_equal(g.weights, qc.gen_debruijn(5).weights)


def test_check_on_oracle_optimum(tmp_path, capsys):
    g = qc.gen_random(8, 0.6, seed=2)
    spec = qc.PartitionSpec(4, 4)
    _, x = qc.brute_force(g, spec)
    gpath = tmp_path / "g.el"
    qc.save_edge_list(g, gpath)
    ppath = tmp_path / "x.txt"
    ppath.write_text("\n".join(str(v) for v in x))
    code, rep = run_cli(
        capsys, "check", "--input", str(gpath), "--point", str(ppath), "--l", "4", "--u", "4"
    )
    assert code == 0
    assert rep["p1"] and rep["local_min"]


def test_oracle_command(capsys):
    code, rep = run_cli(capsys, "oracle", "--gen", "planar:3x3", "--seed", "4", "--l", "4", "--u", "5")
    assert code == 0
    g = qc.gen_planar(3, 3, seed=4)
    opt, _ = qc.brute_force(g, qc.PartitionSpec(4, 5))
    assert rep["opt_value"] == opt


def test_error_paths(tmp_path, capsys):
    missing = tmp_path / "nope.el"
    assert main(["solve", "--input", str(missing), "--l", "1", "--u", "1"]) == 1
    capsys.readouterr()
    bad = tmp_path / "bad.el"
    bad.write_text("1 1\n1 1 7\n")
    assert main(["solve", "--input", str(bad), "--l", "0", "--u", "1"]) == 1
    capsys.readouterr()
    # infeasible size window
    ok = tmp_path / "ok.el"
    ok.write_text("2 1\n1 2 1\n")
    assert main(["solve", "--input", str(ok), "--l", "3", "--u", "3"]) == 1


def test_limit_exit_code(capsys):
    code = main(["solve", "--gen", "mixed:3x4", "--seed", "1", "--bisection", "--max-nodes", "2"])
    capsys.readouterr()
    assert code == 2


def test_format_override(tmp_path, capsys):
    # an .el file under a neutral extension still loads with --format
    p = tmp_path / "graph.dat"
    p.write_text("3 2\n1 2 1\n2 3 1\n")
    code, rep = run_cli(
        capsys, "solve", "--input", str(p), "--format", "el", "--l", "1", "--u", "1"
    )
    assert code == 0 and rep["opt_value"] == 1.0
    assert main(["solve", "--input", str(p), "--l", "1", "--u", "1"]) == 1  # no inferable format
    capsys.readouterr()


def test_threads_flag(capsys):
    code, rep = run_cli(
        capsys, "solve", "--gen", "random:10x0.5", "--seed", "5", "--bisection", "--threads", "2"
    )
    assert code == 0 and rep["status"] == "optimal"
    g = qc.gen_random(10, 0.5, 5)
    opt, _ = qc.brute_force(g, qc.PartitionSpec(5, 5))
    assert rep["opt_value"] == opt
