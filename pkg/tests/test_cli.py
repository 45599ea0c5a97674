import csv
import json

import pytest

from botsim import experiment
from botsim.cli import main

TINY = """
[simulation]
n_bots = 40
n_sensors = 2
duration = 8h
announcement_k = 4
[membership]
nl_capacity = 10
nl_low_watermark = 6
"""


@pytest.fixture
def conf(tmp_path):
    path = tmp_path / "tiny.conf"
    path.write_text(TINY, encoding="utf-8")
    return path


def read_rows(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def test_four_models_five_seeds(conf, tmp_path):
    out = tmp_path / "sweep"
    code = main(["run", str(conf), "--out", str(out), "--models", "ebay,beta,sl,ct", "--seeds", "0,1,2,3,4", "--quiet"])
    assert code == 0
    run_dirs = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert len(run_dirs) == 20
    assert "sl_seed3" in run_dirs
    rows = read_rows(out / "comparison.csv")
    assert len(rows) == 20
    assert {r["label"] for r in rows} == {"ebay", "beta", "sl", "ct"}
    for d in run_dirs:
        for name in ("metrics.csv", "events.csv", "summary.txt"):
            assert (out / d / name).is_file()
    assert (out / "plot.svg").read_text().count('class="series"') == 4


def test_baseline_pairing(conf, tmp_path):
    out = tmp_path / "paired"
    assert main(["run", str(conf), "--out", str(out), "--baseline", "--quiet"]) == 0
    rows = {r["label"]: r for r in read_rows(out / "comparison.csv")}
    assert set(rows) == {"baseline", "ebay"}
    assert rows["ebay"]["baseline_final_mean_in_degree"] == rows["baseline"]["final_mean_in_degree"]
    assert rows["baseline"]["precision"] == ""
    header = (out / "ebay_seed0" / "metrics.csv").read_text().splitlines()[0]
    assert header.startswith("time_s,in_degree_40,in_degree_41,mean_in_degree,blacklist_tp,blacklist_fp,online_bots,coverage")


def test_rerun_is_byte_identical(conf, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert main(["run", str(conf), "--out", str(out), "--baseline", "--seeds", "1,2", "--quiet"]) == 0
    files = ["comparison.csv", "plot.svg"] + [f"{label}_seed{s}/{name}" for label in ("baseline", "ebay")
                                               for s in (1, 2) for name in ("metrics.csv", "events.csv")]
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name


def test_unwritable_output_aborts_before_simulating(conf, tmp_path, monkeypatch, capsys):
    blocker = tmp_path / "occupied"
    blocker.write_text("not a directory")
    called = []
    monkeypatch.setattr(experiment, "_execute", lambda cfg: called.append(cfg))
    assert main(["run", str(conf), "--out", str(blocker / "x")]) == 3
    assert called == []
    err = capsys.readouterr().err.strip().splitlines()[-1]
    assert err.startswith("error: ")
    assert json.loads(err[len("error: "):])["kind"] == "output"


def test_output_dir_from_environment(conf, tmp_path, monkeypatch):
    target = tmp_path / "from_env"
    monkeypatch.setenv("BOTSIM_OUT", str(target))
    assert main(["run", str(conf), "--quiet"]) == 0
    assert (target / "comparison.csv").is_file()


def test_bad_config_reports_line(tmp_path, capsys):
    path = tmp_path / "bad.conf"
    path.write_text("[noise]\np_loss = 1.5\n")
    assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 2
    err = capsys.readouterr().err.strip()
    payload = json.loads(err[len("error: "):])
    assert payload["kind"] == "config" and "p_loss" in payload["message"]


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.conf")]) == 2
    assert '"kind": "config"' in capsys.readouterr().err


def test_failed_run_is_labelled(conf, tmp_path, monkeypatch):
    def boom(cfg):
        raise RuntimeError("synthetic failure")
    monkeypatch.setattr(experiment, "_execute", boom)
    out = tmp_path / "broken"
    assert main(["run", str(conf), "--out", str(out), "--quiet"]) == 1
    assert "synthetic failure" in (out / "ebay_seed0" / "FAILED").read_text()
    assert (out / "PARTIAL").is_file()


def test_module_entry_point(conf, tmp_path):
    import subprocess
    import sys
    out = tmp_path / "mod"
    proc = subprocess.run([sys.executable, "-m", "botsim", "run", str(conf), "--out", str(out), "--quiet"],
                          capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert (out / "ebay_seed0" / "summary.txt").is_file()
