import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from ordcd.cli import SCHEMA_VERSION, main
from ordcd.simulate import fig1_model, sample


@pytest.fixture
def sim_csv(tmp_path):
    out = tmp_path / "d.csv"
    truth = tmp_path / "truth.edgelist"
    assert main(["simulate", "--p", "4", "--edges", "3", "--levels", "3", "--sigma", "1.5",
                 "--n", "300", "--seed", "1", "--out", str(out), "--truth", str(truth)]) == 0
    return out, truth


def _json_out(capsys):
    return json.loads(capsys.readouterr().out)


def test_fit_is_byte_identical(sim_csv, tmp_path):
    csv_path, _ = sim_csv
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for out in (a, b):
        assert main(["fit", "--csv", str(csv_path), "--search", "greedy", "--seed", "7", "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    payload = json.loads(a.read_text())
    assert payload["schema_version"] == SCHEMA_VERSION
    assert payload["config"]["seed"] == 7
    assert payload["config"]["subcommand"] == "fit"
    assert len(payload["result"]["local_scores"]) == 4


def test_fit_outputs_graph_files_and_eval(sim_csv, tmp_path, capsys):
    csv_path, truth = sim_csv
    el, dot = tmp_path / "g.edgelist", tmp_path / "g.dot"
    assert main(["fit", "--csv", str(csv_path), "--edgelist", str(el), "--dot", str(dot), "--out",
                 str(tmp_path / "r.json")]) == 0
    assert dot.read_text().startswith("digraph")
    assert main(["eval", "--estimated", str(el), "--truth", str(truth), "--csv", str(csv_path)]) == 0
    res = _json_out(capsys)
    assert res["shd"] >= 0 and res["true_edges"] == 3


def test_eval_known_shd(tmp_path, capsys):
    (tmp_path / "e").write_text("A -> B\nB -> C\n")
    (tmp_path / "t").write_text("B -> A\n")
    assert main(["eval", "--estimated", str(tmp_path / "e"), "--truth", str(tmp_path / "t")]) == 0
    assert _json_out(capsys)["shd"] == 2


def test_score_matches_library(sim_csv, tmp_path, capsys):
    from ordcd.dataset import from_csv
    from ordcd.graph import parse_edgelist
    from ordcd.scoring import global_bic

    csv_path, truth = sim_csv
    assert main(["score", "--csv", str(csv_path), "--graph", str(truth)]) == 0
    res = _json_out(capsys)
    data = from_csv(csv_path)
    expected, _ = global_bic(parse_edgelist(truth.read_text(), data.names), data)
    assert res["bic"] == expected


def test_constant_column_exit_2(tmp_path, capsys):
    p = tmp_path / "c.csv"
    p.write_text("a,b\n1,1\n2,1\n3,1\n")
    assert main(["fit", "--csv", str(p)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "DegenerateColumn" and err["exit_code"] == 2


def test_exhaustive_p5_exit_2(tmp_path, capsys):
    out = tmp_path / "d.csv"
    main(["simulate", "--p", "5", "--edges", "2", "--levels", "3", "--n", "50", "--seed", "0", "--out", str(out)])
    assert main(["fit", "--csv", str(out), "--search", "exhaustive"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "TooManyNodes"


def test_bad_config_key(tmp_path, capsys, sim_csv):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    assert main(["--config", str(cfg), "fit", "--csv", str(sim_csv[0])]) == 2


def test_config_file_round_trip(sim_csv, tmp_path):
    csv_path, _ = sim_csv
    first = tmp_path / "first.json"
    assert main(["fit", "--csv", str(csv_path), "--max-parents", "1", "--out", str(first)]) == 0
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(json.loads(first.read_text())["config"]))
    second = tmp_path / "second.json"
    assert main(["--config", str(cfg), "fit", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()


def test_pair_directory(tmp_path, capsys):
    pairs = tmp_path / "pairs"
    pairs.mkdir()
    rng = np.random.default_rng(3)
    labels = []
    for i in range(4):
        data = sample(fig1_model(), 3000, rng)
        direction = "forward"
        if i % 2:
            data = data.subset([2, 1])
            direction = "backward"
        data.to_csv(pairs / f"p{i}.csv")
        labels.append((f"p{i}", direction))
    lab = tmp_path / "labels.csv"
    with open(lab, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["pair", "direction"])
        w.writerows(labels)
    tsv = tmp_path / "out.tsv"
    assert main(["pair", "--csv", str(pairs), "--truth", str(lab), "--tsv", str(tsv)]) == 0
    res = _json_out(capsys)
    assert res["summary"]["accuracy"] == 1.0
    assert res["summary"]["auc"] == 1.0
    assert len(tsv.read_text().splitlines()) == 5


def test_discretize(tmp_path, capsys):
    src = tmp_path / "real.csv"
    rng = np.random.default_rng(0)
    rows = rng.normal(size=(40, 2))
    src.write_text("u,v\n" + "".join(f"{a},{b}\n" for a, b in rows))
    assert main(["discretize", "--csv", str(src), "--L", "4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "u,v"
    codes = np.array([[int(x) for x in ln.split(",")] for ln in lines[1:]])
    assert codes.shape == (40, 2)
    assert all(np.bincount(codes[:, j])[1:].tolist() == [10, 10, 10, 10] for j in range(2))
    with pytest.raises(SystemExit) as info:
        main(["discretize", "--csv", str(src)])
    assert info.value.code == 2


def test_simulate_confounder(tmp_path):
    out = tmp_path / "c.csv"
    assert main(["simulate", "--confounder", "--n", "100", "--seed", "2", "--out", str(out)]) == 0
    assert out.read_text().splitlines()[0].count(",") == 1


def test_experiment_writes_outputs(tmp_path, capsys):
    assert main(["experiment", "binary-null", "--repeats", "4", "--n", "200", "--out-dir", str(tmp_path)]) == 0
    res = _json_out(capsys)
    assert res["experiment"] == "binary-null"
    assert (tmp_path / "binary-null.tsv").exists() and (tmp_path / "binary-null.json").exists()
    assert res["config"]["extra"]["repeats"] == 4


def test_module_entry_point(sim_csv):
    proc = subprocess.run([sys.executable, "-m", "ordcd", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "ordcd" in proc.stdout
