"""
Tests for the YAML run configuration.
"""

import logging

import pytest

from conftest import ROOT
from run_config import ConfigError, RunConfig, load_config


def test_bundled_defaults_match_builtin():
    assert RunConfig.from_yaml(ROOT / "config" / "default.yaml") == RunConfig()


def test_missing_keys_keep_defaults(tmp_path):
    path = tmp_path / "run.yaml"
    path.write_text("class_tol: 1.0e-6\nformats: [csv, svg]\n")
    config = RunConfig.from_yaml(path)
    assert config.class_tol == 1e-6
    assert config.formats == ["csv", "svg"]
    assert config.kkt_tol == RunConfig().kkt_tol


def test_unknown_keys_are_ignored(tmp_path, caplog):
    path = tmp_path / "run.yaml"
    path.write_text("gap_tol: 1.0e-5\ncolour: blue\n")
    with caplog.at_level(logging.WARNING):
        config = RunConfig.from_yaml(path)
    assert config.gap_tol == 1e-5
    assert "colour" in caplog.text


@pytest.mark.parametrize("overrides", [
    {"kkt_tol": 0.0},
    {"class_tol": -1e-7},
    {"path_cap": 0},
    {"breakpoint_cap": 2.5},
    {"subset_scan_cap": True},
    {"formats": ["csv", "pdf"]},
])
def test_invalid_values(overrides):
    with pytest.raises(ConfigError):
        RunConfig().with_overrides(**overrides)


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(tmp_path / "missing.yaml")
    broken = tmp_path / "broken.yaml"
    broken.write_text("kkt_tol: [1\n")
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(broken)
    listing = tmp_path / "list.yaml"
    listing.write_text("- 1\n- 2\n")
    with pytest.raises(ConfigError):
        RunConfig.from_yaml(listing)


def test_overrides_skip_none(default_config):
    config = default_config.with_overrides(gap_tol=None, path_cap=50, output_dir="out")
    assert config.gap_tol == default_config.gap_tol
    assert config.path_cap == 50
    assert config.output_dir == "out"
    assert default_config.path_cap == 10000


def test_solver_tolerances(default_config):
    tolerances = default_config.with_overrides(class_tol=1e-5, max_iterations=50).solver_tolerances()
    assert tolerances.class_tol == 1e-5
    assert tolerances.max_iterations == 50
    assert tolerances.kkt_tol == default_config.kkt_tol


def test_load_config_without_default_file(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    assert load_config() == RunConfig()
    (tmp_path / "config").mkdir()
    (tmp_path / "config" / "default.yaml").write_text("breakpoint_cap: 7\n")
    assert load_config().breakpoint_cap == 7
