import pytest

from tzeff.config import DEFAULT_TARGETS, ENV_VAR, Config, from_mapping, load_config
from tzeff.contract_calendar import Segment
from tzeff.errors import ConfigError
from tzeff.replication import Compounding, WeightMode


def test_defaults():
    cfg = Config()
    assert cfg.targets == DEFAULT_TARGETS
    assert cfg.weights.mode is WeightMode.EQUAL
    assert cfg.weights.compounding is Compounding.CONTINUOUS
    assert cfg.nw_lag is None and cfg.returns == "log"
    assert load_config(None) == cfg


def test_load_file(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    p = tmp_path / "c.toml"
    p.write_text('weight_mode = "exact"\nnw_lag = 3\ntargets = ["Q11", "Y1"]\n[spreads.DE]\nM = 0.5\n')
    cfg = load_config(p)
    assert cfg.weight_mode is WeightMode.EXACT
    assert cfg.nw_lag == 3
    assert cfg.targets == ("Q11", "Y1")
    assert cfg.costs.side_spread("DE", Segment.MONTHLY) == pytest.approx(0.25)


def test_env_overrides_argument(tmp_path, monkeypatch):
    a, b = tmp_path / "a.toml", tmp_path / "b.toml"
    a.write_text('returns = "diff"\n')
    b.write_text('returns = "log"\nfee = 0.5\n')
    monkeypatch.setenv(ENV_VAR, str(b))
    cfg = load_config(a)
    assert cfg.returns == "log" and cfg.fee == 0.5


@pytest.mark.parametrize(
    "data",
    [
        {"nonsense": 1},
        {"weight_mode": "median"},
        {"nw_lag": -1},
        {"nw_lag": True},
        {"returns": "pct"},
        {"targets": ["Q99x"]},
        {"full_spread_on_side": "yes"},
        {"fee": -0.01},
        {"market": "XX"},
        {"spreads": {"DE": {"Z": 1.0}}},
    ],
)
def test_invalid_values(data):
    with pytest.raises(ConfigError):
        from_mapping(data)


def test_missing_and_malformed_files(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("rate = = 1\n")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(bad)


def test_digest_tracks_content():
    a, b = Config(), from_mapping({"fee": 0.02})
    assert a.digest() == Config().digest()
    assert a.digest() != b.digest()
    assert len(a.digest()) == 64
