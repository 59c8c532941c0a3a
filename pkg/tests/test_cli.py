import json
import subprocess
import sys

import pytest

from cfcp import load_csv
from cfcp.cli import main


def _cfg(tmp_path, **kw):
    d = dict(n_train=200, n_cal=100, n_test=200, runs=1, methods=["SplitCP", "CF-CP"], **kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(d))
    return str(path)


def test_run_writes_csv(tmp_path, capsys):
    out = tmp_path / "rows.csv"
    assert main(["run", "--config", _cfg(tmp_path), "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "method,metric,mean,std,runs,config_hash"
    assert any(line.startswith("CF-CP-mean,csd,0.0,") for line in lines)


def test_run_json_to_stdout(tmp_path, capsys):
    assert main(["run", "--config", _cfg(tmp_path), "--format", "json"]) == 0
    recs = json.loads(capsys.readouterr().out)
    assert {r["method"] for r in recs} == {"SplitCP", "CF-CP-mean", "CF-CP-max", "CF-CP-min"}


def test_sweep(tmp_path, capsys):
    assert main(["sweep", "--config", _cfg(tmp_path), "--sigmas", "0,0.4"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "sigma,method,csd_mean,csd_std"
    assert len(lines) == 1 + 2 * 4


@pytest.mark.parametrize("scm", ["reg", "clf"])
def test_gen(tmp_path, scm):
    out = tmp_path / f"{scm}.csv"
    assert main(["gen", "--scm", scm, "--n", "50", "--seed", "3", "--out", str(out)]) == 0
    ds = load_csv(out)
    assert len(ds) == 50 and ds.has_cf and ds.U is not None
    again = tmp_path / "again.csv"
    main(["gen", "--scm", scm, "--n", "50", "--seed", "3", "--out", str(again)])
    assert out.read_text() == again.read_text()


def _err(capsys):
    return json.loads(capsys.readouterr().err.strip().splitlines()[-1])


def test_config_error_is_json_on_stderr(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"alpha": 1.5}))
    assert main(["run", "--config", str(bad)]) == 1
    rec = _err(capsys)
    assert rec["error"] == "ConfigError" and "alpha" in rec["message"]


def test_missing_file_and_bad_json(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "nope.json")]) == 1
    assert _err(capsys)["error"] == "FileNotFoundError"
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    assert main(["run", "--config", str(broken)]) == 1
    assert _err(capsys)["error"] == "ConfigError"


def test_usage_errors(tmp_path, capsys):
    assert main(["frobnicate"]) == 2
    assert _err(capsys)["error"] == "ConfigError"
    assert main(["sweep", "--config", _cfg(tmp_path), "--sigmas", "a,b"]) == 1
    assert main(["gen", "--scm", "reg", "--n", "0", "--out", str(tmp_path / "x.csv")]) == 1


def test_module_entry_point(tmp_path):
    out = tmp_path / "g.csv"
    res = subprocess.run([sys.executable, "-m", "cfcp", "gen", "--scm", "reg", "--n", "5",
                          "--out", str(out)], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert out.exists()
