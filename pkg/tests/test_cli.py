import json
import subprocess
import sys

import pytest

from conftest import DATA
from leadersel.cli import format_table, main
from leadersel.graph import build_graph
from leadersel.selection import select_bruteforce

GRAPH = str(DATA / "example5.json")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("demoted", [1, 2, 3])
@pytest.mark.parametrize("graph", ["example5.json", "example5.csv"])
def test_table_golden(capsys, demoted, graph):
    code, out, _ = run(capsys, "table", "--graph", str(DATA / graph), "--leaders", "1,2,3",
                       "--demote", str(demoted))
    assert code == 0
    assert out == (DATA / f"table_demote{demoted}.csv").read_text()


def test_table_to_file(capsys, tmp_path):
    path = tmp_path / "t.csv"
    code, out, _ = run(capsys, "table", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "1",
                       "--out", str(path))
    assert code == 0 and out == ""
    assert path.read_text() == (DATA / "table_demote1.csv").read_text()


def test_format_table_rounds_half_even():
    rep = select_bruteforce(build_graph(5, [(1, 2), (2, 3), (3, 4), (4, 5)]),
                                    [1, 2, 3], [1])
    assert format_table(rep, decimals=1).splitlines()[1] == '"{2,3}",0.4'
    with pytest.raises(ValueError):
        format_table(rep, decimals=0)


def test_select_closed_form_and_brute_force(capsys):
    code, out, _ = run(capsys, "select", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "2")
    assert code == 0
    d = json.loads(out)
    assert d["closed_form_solution"] == [1, 3] and d["min_f"] == pytest.approx(0.4)
    code, out, _ = run(capsys, "select", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "2",
                       "--brute-force")
    d = json.loads(out)
    assert d["minimizers"] == [[1, 3]] and len(d["candidates"]) == 6


def test_select_sampling_needs_seed(capsys):
    with pytest.raises(SystemExit) as info:
        main(["select", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "2",
              "--brute-force", "--sample", "3"])
    assert info.value.code == 2


def test_domain_error_is_json_on_stderr(capsys):
    code, _, err = run(capsys, "select", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "9")
    assert code == 1
    assert json.loads(err)["error"] == "NotASubset"


def test_bad_graph_file(capsys):
    code, _, err = run(capsys, "validate", "--graph", str(DATA / "disconnected.json"))
    assert code == 1 and json.loads(err)["error"] == "DisconnectedGraph"
    code, _, err = run(capsys, "validate", "--graph", str(DATA / "missing.json"))
    assert code == 1 and json.loads(err)["error"] == "IOError"


def test_validate(capsys):
    code, out, _ = run(capsys, "validate", "--graph", GRAPH)
    d = json.loads(out)
    assert code == 0 and d["n"] == 5 and d["k"] == 6
    assert d["degrees"] == [2, 2, 3, 3, 2]
    assert d["laplacian_residual"] <= 1e-12


def test_h2norm(capsys):
    code, out, _ = run(capsys, "h2norm", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "1",
                       "--new", "2,4")
    d = json.loads(out)
    assert code == 0 and d["f"] == pytest.approx(1.4)
    assert abs(d["oracle"]["estimate"] - d["f"]) <= d["oracle"]["tolerance"]
    code, out, _ = run(capsys, "h2norm", "--graph", GRAPH, "--leaders", "1,2,3", "--no-oracle",
                       "--format", "csv")
    assert out.splitlines()[1].startswith("0.0,1.2")


def test_demote(capsys):
    code, out, _ = run(capsys, "demote", "--graph", GRAPH, "--leaders", "1,2,3", "-r", "1",
                       "--brute-force")
    d = json.loads(out)
    assert code == 0 and d["constant"] == pytest.approx(0.4)
    assert [e["g"] for e in d["entries"]] == pytest.approx([0.4] * 3)


def test_gen_is_deterministic(capsys):
    argv = ["gen", "--kind", "random", "--n", "8", "--seed", "5", "--weights", "loguniform"]
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b and json.loads(a)["n"] == 8
    with pytest.raises(SystemExit) as info:
        main(["gen", "--kind", "random", "--n", "8"])
    assert info.value.code == 2


def test_relax(capsys, tmp_path):
    summary = tmp_path / "s.json"
    code, out, _ = run(capsys, "relax", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "1",
                       "--x0", "random", "--seed", "3", "--summary", str(summary))
    s = json.loads(summary.read_text())
    assert code == 0 and s["converged"]
    assert abs(s["final_objective"] - 0.4) <= 1e-8
    assert out.splitlines()[0] == "iter,h,grad_norm"
    with pytest.raises(SystemExit) as info:
        main(["relax", "--graph", GRAPH, "--leaders", "1,2,3", "--x0", "random"])
    assert info.value.code == 2
    code, _, err = run(capsys, "relax", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "1",
                       "--step", "0.001", "--max-iter", "3")
    assert code == 1 and json.loads(err.splitlines()[-1])["error"] == "MaxIterExceeded"


def test_simulate(capsys, tmp_path):
    out_csv = tmp_path / "sim.csv"
    code, out, _ = run(capsys, "simulate", "--graph", GRAPH, "--leaders", "1,2,3", "--demote", "1",
                       "--new", "2,4", "--input", "pulse:alpha=1/-1/2,width=0.5",
                       "--stride", "100", "--out", str(out_csv))
    s = json.loads(out)
    assert code == 0 and s["passed"] and s["slack_ratio"] <= 1.0
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("t,x_1") and lines[0].endswith(",gap")
    with pytest.raises(SystemExit):
        main(["simulate", "--graph", GRAPH, "--leaders", "1,2,3", "--new", "1,2,3",
              "--input", "square:alpha=1"])


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "--graph", GRAPH, "--leaders", "1,2,3")
    d = json.loads(out)
    assert code == 0 and d["passed"]
    assert len(d["checks"]) == 11


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "leadersel", "table", "--graph", GRAPH,
                          "--leaders", "1,2,3", "--demote", "3"], capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout == (DATA / "table_demote3.csv").read_text()
