import json

import pytest

from tzeff.cli import main
from tzeff.config import ENV_VAR
from tzeff.replication import WeightMode, weight_function


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)


@pytest.fixture
def cache(tmp_path):
    spec = tmp_path / "scen.toml"
    spec.write_text('[scenario]\nseed = 4\nn_days = 300\nstart = "2005-01-03"\nnoise_vol = 0.05\n')
    data = tmp_path / "data"
    assert main(["synth", "--spec", str(spec), "--out", str(data)]) == 0
    c = tmp_path / "cache"
    assert main(["--cache", str(c), "ingest", str(data / "prices.csv"), "--market", "DE"]) == 0
    return c


def run(cache, capsys, *argv):
    code = main(["--cache", str(cache), *argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_synth_is_deterministic(tmp_path):
    for name in ("a", "b"):
        assert main(["synth", "--out", str(tmp_path / name)]) == 0
    for f in ("prices.csv", "scenario.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_ingest_records_seed(cache):
    info = json.loads((cache / "panel.json").read_text())
    assert info == {"market": "DE", "seed": 4, "sources": ["prices.csv"]}


def test_series(cache, tmp_path, capsys):
    code, out, _ = run(cache, capsys, "series", "--label", "M1", "--out", str(tmp_path / "o"))
    assert code == 0
    rolls = (tmp_path / "o" / "rolls_M1.csv").read_text().splitlines()
    assert rolls[0] == "date,from_contract,to_contract,raw_jump,shift"
    assert rolls[1].startswith("2005-02-01,M-2005-02,M-2005-03")


def test_replicate_logs_composition(cache, tmp_path, capsys):
    code, out, _ = run(cache, capsys, "replicate", "--target", "Q11", "--out", str(tmp_path))
    assert code == 0
    assert out.splitlines()[0] == "2005-01-03 AQ11 = M3+M4+M5"
    header = (tmp_path / "portfolio_Q11.csv").read_text().splitlines()[0]
    assert header.startswith("date,contract,composition,price,volume,w1")


def test_replicate_exact_weights(cache, tmp_path, capsys):
    code, _, _ = run(cache, capsys, "replicate", "--target", "Q11", "--exact-weights", "--out", str(tmp_path))
    assert code == 0
    row = (tmp_path / "portfolio_Q11.csv").read_text().splitlines()[1].split(",")
    expected = weight_function((3, 4, 5), mode=WeightMode.EXACT)
    assert row[5:8] == [f"{w:.4f}" for w in expected]


@pytest.mark.parametrize("kind", ["adf", "coint", "converge", "varratio"])
@pytest.mark.parametrize("volume", [False, True])
def test_test_subcommands(cache, tmp_path, capsys, kind, volume):
    argv = ["test", kind, "--target", "Q12", "--out", str(tmp_path)] + (["--volume-filter"] if volume else [])
    code, out, _ = run(cache, capsys, *argv)
    assert code == 0
    suffix = "_volume" if volume else ""
    assert (tmp_path / f"test_{kind}_Q12{suffix}.csv").is_file()


@pytest.mark.parametrize("costs", [None, "none", "DE"])
def test_trade(cache, tmp_path, capsys, costs):
    extra = [] if costs is None else ["--costs", costs]
    assert run(cache, capsys, "trade", "pd", "--target", "Y1", "--out", str(tmp_path), *extra)[0] == 0
    assert run(cache, capsys, "trade", "av", "--target", "Y1", "--out", str(tmp_path), *extra)[0] == 0
    assert (tmp_path / "pd_Y1.csv").is_file() and (tmp_path / "av_Y1.csv").is_file()


def test_unknown_cost_profile(cache, tmp_path, capsys):
    code, _, err = run(cache, capsys, "trade", "av", "--target", "Y1", "--costs", "ZZ", "--out", str(tmp_path))
    assert code == 2 and json.loads(err)["error"] == "invalid_config"


def test_report(cache, tmp_path, capsys):
    code, out, err = run(cache, capsys, "report", "--all", "--out", str(tmp_path / "r"))
    assert code in (0, 4)
    meta = json.loads((tmp_path / "r" / "metadata.json").read_text())
    assert meta["seed"] == 4
    assert (code == 4) == (meta["n_errors"] > 0)


def test_bad_label_exits_2(cache, tmp_path, capsys):
    code, _, err = run(cache, capsys, "series", "--label", "Q99z", "--out", str(tmp_path))
    assert code == 2
    assert "label" in json.loads(err)["message"]


def test_never_replicable_exits_3(tmp_path, capsys):
    rows = ["date,contract_code,settle,volume"]
    for d in ("2005-01-03", "2005-01-04"):
        rows += [f"{d},M-2005-{m:02d},50.0,1" for m in range(2, 8)]
    src = tmp_path / "jan.csv"
    src.write_text("\n".join(rows) + "\n")
    c = tmp_path / "c"
    assert main(["--cache", str(c), "ingest", str(src), "--market", "DE"]) == 0
    code, _, err = run(c, capsys, "replicate", "--target", "Q21", "--out", str(tmp_path))
    assert code == 3 and json.loads(err)["error"] == "empty_series"


def test_missing_cache_exits_3(tmp_path, capsys):
    code, _, err = run(tmp_path / "none", capsys, "test", "adf", "--target", "Q11")
    assert code == 3 and json.loads(err)["error"] == "missing_cache"


def test_insufficient_data_exits_3(tmp_path, capsys):
    rows = ["date,contract_code,settle,volume"]
    for d in ("2005-01-03", "2005-01-04", "2005-01-05", "2005-01-06", "2005-01-07"):
        for m in (2, 3, 4, 5, 6, 7):
            rows.append(f"{d},M-2005-{m:02d},50.0,1")
        rows.append(f"{d},Q-2005Q2,50.0,1")
    src = tmp_path / "tiny.csv"
    src.write_text("\n".join(rows) + "\n")
    c = tmp_path / "c"
    assert main(["--cache", str(c), "ingest", str(src), "--market", "DE"]) == 0
    code, _, err = run(c, capsys, "test", "adf", "--target", "Q11", "--out", str(tmp_path))
    assert code == 3


def test_parse_error_exits_3(tmp_path, capsys):
    src = tmp_path / "bad.csv"
    src.write_text("date,contract_code,settle,volume\n2005-01-03,M-2005-02,abc,1\n")
    code, _, err = run(tmp_path / "c", capsys, "ingest", str(src), "--market", "DE")
    assert code == 3
    assert json.loads(err)["error"] == "parse_error"


def test_bad_config_exits_2(cache, tmp_path, capsys, monkeypatch):
    cfg = tmp_path / "c.toml"
    cfg.write_text("bogus = 1\n")
    monkeypatch.setenv(ENV_VAR, str(cfg))
    code, _, _ = run(cache, capsys, "series", "--label", "M1", "--out", str(tmp_path))
    assert code == 2


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "tzeff", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "0.1.0"
