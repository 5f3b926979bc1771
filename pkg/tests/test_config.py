import pytest

from obisim.config import ConfigError, ScenarioConfig, desk_scale, from_dict, load_config, paper_scale


def test_defaults_are_desk_scale():
    cfg = desk_scale()
    assert cfg.agents.zi.count + cfg.agents.informed.count == 100
    assert cfg.agents.obi.count == 5
    assert cfg.harness.days == 50


def test_paper_scale_reachable():
    cfg = paper_scale()
    assert cfg.agents.zi.count + cfg.agents.informed.count == 1_000
    assert cfg.agents.obi.count == 10


def test_load_toml(tiny_toml):
    cfg = load_config(tiny_toml)
    assert cfg.kernel.seed == 7
    assert cfg.agents.obi.count == 3


def test_computation_delay_keys():
    cfg = from_dict({"kernel": {"computation_delay": {"obi_ns": 5, "zi_ns": 7}}})
    assert cfg.kernel.computation_delay["obi"] == 5
    assert cfg.kernel.computation_delay["informed"] == 10_000
    with pytest.raises(ConfigError):
        from_dict({"kernel": {"computation_delay": {"obi": 5}}})


@pytest.mark.parametrize("data", [
    {"kernel": {"sede": 1}},
    {"agents": {"obi": {"H": 0.7}}},
    {"agents": {"zi": {"count": -1}}},
    {"harness": {"background_latency_ns": [10, 5]}},
    {"harness": {"obi_latencies": [1, 2]}},
    {"fundamental": {"kappa": 2.0}},
    {"exchange": "deep"},
    {"agents": {"informed": {"alpha_cents": "wide"}}},
    {"agents": {"informed": {"alpha_cents": -1}}},
])
def test_invalid_configs_rejected(data):
    with pytest.raises(ConfigError):
        from_dict(data)


def test_missing_and_malformed_files(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[kernel\nseed = 1")
    with pytest.raises(ConfigError, match="malformed"):
        load_config(bad)


def test_with_seed_leaves_original_alone():
    cfg = ScenarioConfig()
    other = cfg.with_seed(99)
    assert other.kernel.seed == 99 and cfg.kernel.seed == 1


NOMINAL = """
[fundamental]
kappa = 1.155e-12

[agents.zi]
sigma_pv_sq = 5e6

[agents.informed]
alpha_cents = "spread"

[agents.obi]
trade_size = 100
rearm = false
"""


def test_nominal_settings_load(tmp_path):
    path = tmp_path / "nominal.toml"
    path.write_text(NOMINAL)
    cfg = load_config(path)
    assert cfg.agents.informed.alpha_cents is None
    assert not cfg.agents.obi.rearm and cfg.agents.obi.trade_size == 100
    half_life_s = 0.6931 / cfg.fundamental.params(1).kappa / 1e9
    assert half_life_s == pytest.approx(600, rel=1e-3)
