import csv
import io
import json

import pytest

from distlll.cli import ExperimentConfig, main, run_experiment
from distlll.exceptions import ParameterError


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def graph_file(tmp_path, capsys):
    path = tmp_path / "g.json"
    assert run(["gen", "graph", "--family", "random_regular", "--n", "60", "--d", "4", "--seed", "3",
                "--out", str(path)], capsys)[0] == 0
    return path


def test_gen_path_edges(capsys):
    code, out, _ = run(["gen", "graph", "--family", "path", "--n", "5"], capsys)
    assert code == 0
    assert len(json.loads(out)["edges"]) == 4


def test_gen_odd_regular_is_usage_error(capsys):
    code, _, err = run(["gen", "graph", "--family", "random_regular", "--n", "7", "--d", "3"], capsys)
    assert code == 2 and "error" in err


def test_missing_subcommand_is_usage_error(capsys):
    assert run([], capsys)[0] == 2
    assert run(["color", "rainbow", "x"], capsys)[0] == 2


def test_missing_file_is_usage_error(capsys, tmp_path):
    assert run(["decompose", str(tmp_path / "none.json")], capsys)[0] == 2


def test_decompose(graph_file, capsys):
    code, out, _ = run(["decompose", str(graph_file), "--lambda", "2"], capsys)
    data = json.loads(out)
    assert code == 0 and data["valid"]
    assert sorted(v for b in data["blocks"] for v in b) == list(range(60))


@pytest.mark.parametrize("problem,extra", [("defective", ["--f", "2"]), ("frugal", ["--beta", "2"])])
def test_color_and_verify(graph_file, tmp_path, capsys, problem, extra):
    colors = tmp_path / "c.json"
    code, _, _ = run(["color", problem, str(graph_file), "--out", str(colors)] + extra, capsys)
    assert code == 0
    code, out, _ = run(["verify", "--graph", str(graph_file), "--colors", str(colors), "--mode", problem] + extra,
                       capsys)
    assert code == 0 and json.loads(out)["verified"]


def test_verify_failure_exit_one(graph_file, tmp_path, capsys):
    colors = tmp_path / "bad.json"
    colors.write_text(json.dumps([0] * 60))
    code, _, _ = run(["verify", "--graph", str(graph_file), "--colors", str(colors), "--mode", "frugal",
                      "--beta", "1"], capsys)
    assert code == 1


def test_color_list(tmp_path, capsys):
    g = tmp_path / "g.json"
    g.write_text(json.dumps({"n": 3, "edges": [[0, 1], [1, 2]]}))
    lists = tmp_path / "l.json"
    lists.write_text(json.dumps({"0": [0, 1], "1": [1, 2], "2": [2, 3]}))
    code, out, _ = run(["color", "list", str(g), "--lists", str(lists), "--C", "1"], capsys)
    assert code == 0 and json.loads(out)["verified"]


def test_solve_and_verify_assignment(tmp_path, capsys):
    inst = tmp_path / "i.json"
    assert run(["gen", "instance", "--family", "conjunction_chain", "--n", "20", "--out", str(inst)], capsys)[0] == 0
    sol = tmp_path / "s.json"
    assert run(["solve", str(inst), "--alg", "base", "--seed", "4", "--out", str(sol)], capsys)[0] == 0
    code, out, _ = run(["verify", "--instance", str(inst), "--assignment", str(sol)], capsys)
    assert code == 0 and json.loads(out)["verified"]
    data = json.loads(sol.read_text())
    data["assignment"][0] = None
    sol.write_text(json.dumps(data))
    assert run(["verify", "--instance", str(inst), "--assignment", str(sol)], capsys)[0] == 1


def test_csv_format(graph_file, capsys):
    code, out, _ = run(["decompose", str(graph_file), "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 1 and rows[0]["valid"] == "True"


def test_bench_csv_row_count(capsys):
    code, out, _ = run(["bench", "defective", "--sizes", "40,80", "--seeds", "1,2,3", "--d", "4",
                        "--format", "csv"], capsys)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and len(rows) == 6


def test_bench_repeated_runs_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["bench", "solve", "--family", "sparse_conjunction", "--sizes", "50", "--seeds", "7"]
    assert run(args + ["--out", str(a)], capsys)[0] == 0
    assert run(args + ["--out", str(b)], capsys)[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_bench_config_file(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"task": "decompose", "generator": {"family": "path"}, "sizes": [20],
                               "seeds": [0], "params": {"lam": 2}}))
    code, out, _ = run(["bench", "decompose", "--config", str(cfg)], capsys)
    assert code == 0 and json.loads(out)["passed"]


def test_run_experiment_empty_seeds():
    report = run_experiment(ExperimentConfig("defective", sizes=[50], seeds=[]))
    assert report["runs"] == [] and report["aggregate"] == [] and report["passed"]


def test_run_experiment_same_seed_identical(tmp_path):
    outs = []
    for name in ("x.json", "y.json"):
        cfg = ExperimentConfig("frugal", {"family": "random_regular", "d": 3}, [40], [5, 5],
                               {"beta": 1}, str(tmp_path / name))
        run_experiment(cfg)
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    runs = json.loads(outs[0])["runs"]
    assert runs[0] == runs[1]


def test_experiment_config_validation():
    with pytest.raises(ParameterError):
        ExperimentConfig("paint")
    with pytest.raises(ParameterError):
        ExperimentConfig("solve", {"family": "random_regular"})
    with pytest.raises(ParameterError):
        ExperimentConfig("defective", sizes=[0])
