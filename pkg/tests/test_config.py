import pytest

from hotspeckle.config import ConfigError, ToolConfig, dumps_config, load_config, parse_config


def test_defaults_round_trip(tmp_path):
    cfg = ToolConfig()
    path = tmp_path / "default.cfg"
    path.write_text(dumps_config(cfg))
    loaded = load_config(str(path))
    assert loaded == cfg


def test_overrides():
    cfg = parse_config(
        """
        # comment line
        fusion.alpha = 1.5
        fusion.sigma = 0.12
        filter.lam = 0.5
        filter.scales = 2,5
        dic.subset_size = 31
        dic.zncc_threshold = 0.7
        restore.nsr = 0.05
        restore.beta = 1e-4
        """
    )
    assert cfg.fusion.alpha == 1.5
    assert cfg.fusion.fusion_sigma == 0.12
    assert cfg.fusion.filter.lam == 0.5
    assert cfg.fusion.filter.scales == (2, 5)
    assert cfg.dic.subset_size == 31
    assert cfg.dic.zncc_threshold == 0.7
    assert cfg.nsr == 0.05
    assert cfg.restore_init.beta == 1e-4


def test_mu_kappa_auto():
    cfg = parse_config("filter.mu_kappa_inf = auto\n")
    assert cfg.fusion.filter.mu_kappa_inf is None
    cfg = parse_config("filter.mu_kappa_inf = 0.25\n")
    assert cfg.fusion.filter.mu_kappa_inf == 0.25


def test_unknown_key_rejected():
    with pytest.raises(ConfigError):
        parse_config("fusion.bogus = 1\n")
    with pytest.raises(ConfigError):
        parse_config("nosection = 1\n")
    with pytest.raises(ConfigError):
        parse_config("weird.key = 1\n")


def test_malformed_line_rejected():
    with pytest.raises(ConfigError):
        parse_config("fusion.alpha 0.5\n")


def test_bad_value_reports_line():
    with pytest.raises(ConfigError) as err:
        parse_config("dic.subset_size = soon\n")
    assert "line 1" in str(err.value)


def test_base_preserved():
    base = parse_config("fusion.alpha = 2.0\n")
    cfg = parse_config("dic.grid_step = 7\n", base)
    assert cfg.fusion.alpha == 2.0
    assert cfg.dic.grid_step == 7
