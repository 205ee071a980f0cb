import csv
import json

import pytest

from lesiongraph.cli import main
from lesiongraph.ingest import FoldAssignment


def _run(*argv):
    assert main([str(a) for a in argv]) == 0


def test_ingest(small_root, tmp_path):
    _run("ingest", "--root", small_root, "--folds", 2, "--seed", 5, "--out", tmp_path / "folds.json")
    folds = FoldAssignment.load(tmp_path / "folds.json")
    assert folds.k == 2 and folds.seed == 5 and len(folds.fold_of) == 8


def test_stage_chain_matches_run(small_root, tmp_path, capsys):
    """Stage-by-stage invocation reproduces ``run`` for a single Gaussian level at tau = 0."""
    w = tmp_path
    common = ["--k-select", 8, "--classifiers", "knn,rf"]
    _run("ingest", "--root", small_root, "--folds", 2, "--out", w / "folds.json")
    _run("segment", "--root", small_root, "--levels", "12", "--out", w / "maps")
    _run("signals", "--root", small_root, "--maps", w / "maps", "--kind", "color", "--out", w / "signals")
    _run("graph", "--signals", w / "signals", "--out", w / "graphs")
    _run("prune", "--graphs", w / "graphs", "--tau", 0, "--out", w / "pruned")
    _run("features", "--graphs", w / "pruned", "--signals", w / "signals", "--out", w / "features")
    _run("fuse", "--root", small_root, "--features", w / "features", "--levels", "12", "--out", w / "features.csv")
    _run("cv", "--features", w / "features.csv", "--folds", w / "folds.json", *common,
         "--report", w / "report.json", "--export-dir", w / "export")

    _run("run", "--root", small_root, "--out", w / "run", "--levels", "12", "--weights", "gaussian",
         "--tau", 0, "--folds", 2, *common)
    staged = json.loads((w / "report.json").read_text())
    (run_dir,) = (w / "run").iterdir()
    piped = json.loads((run_dir / "report.json").read_text())
    for key in ("classifiers", "selection_by_source", "folds", "predictions"):
        assert staged[key] == piped[key], key
    assert (w / "features.csv").read_text() == (run_dir / "features.csv").read_text()
    assert (w / "export" / "fold00_train.csv").is_file()
    out = capsys.readouterr().out
    assert "rf" in out and "AUC" in out


def test_learn_with_trace(small_root, tmp_path):
    _run("segment", "--root", small_root, "--levels", "6,10", "--out", tmp_path / "maps")
    _run("signals", "--root", small_root, "--maps", tmp_path / "maps", "--kind", "geometric",
         "--out", tmp_path / "signals")
    _run("learn", "--signals", tmp_path / "signals", "--gamma", 0.3, "--trace", "--out", tmp_path / "graphs")
    image_dir = sorted((tmp_path / "graphs").iterdir())[0]
    names = sorted(p.name for p in image_dir.iterdir())
    assert "level0_n006.csv" in names and "level0_n006_trace.csv" in names
    meta = json.loads((image_dir / "level1_n010.json").read_text())
    assert meta["scheme"] == "learned"
    rows = list(csv.reader(open(image_dir / "level0_n006_trace.csv")))
    assert rows[0] == ["iteration", "objective"]
    values = [float(r[1]) for r in rows[1:]]
    assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))


def test_run_with_config_file_and_report(small_root, tmp_path, capsys):
    cfg = {"levels": [6], "weight_scheme": "learned", "selection_k": 5, "folds": 2, "classifiers": ["knn"],
           "include_conventional": False}
    (tmp_path / "cfg.json").write_text(json.dumps(cfg))
    _run("run", "--root", small_root, "--config", tmp_path / "cfg.json", "--out", tmp_path / "out", "--no-artifacts")
    (run_dir,) = (tmp_path / "out").iterdir()
    saved = json.loads((run_dir / "config.json").read_text())
    assert saved["levels"] == [6] and saved["include_conventional"] is False
    _run("report", "--report", run_dir / "report.json", "--out", tmp_path / "rep")
    rows = list(csv.DictReader(open(tmp_path / "rep" / "contribution.csv")))
    assert rows[0]["source"] == "level-6" and float(rows[0]["percent"]) == 100.0
    assert "level-6" in capsys.readouterr().out


def test_mode_flag_resets_default_levels(small_root, tmp_path):
    (tmp_path / "cfg.json").write_text(json.dumps({"mode": "seg"}))
    # switching mode on the command line without --levels picks that mode's default levels
    from lesiongraph.cli import build_parser

    args = build_parser().parse_args(["run", "--root", str(small_root), "--out", str(tmp_path), "--mode", "shg"])
    assert args.levels is None


def test_errors_exit_nonzero(tmp_path, capsys):
    (tmp_path / "images").mkdir()
    (tmp_path / "labels.csv").write_text("id,label\nq,benign\n")
    assert main(["ingest", "--root", str(tmp_path), "--out", str(tmp_path / "f.json")]) == 2
    assert "error:" in capsys.readouterr().err
    with pytest.raises(SystemExit):
        main(["segment", "--mode", "tree"])
