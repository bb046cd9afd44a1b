"""
Tests for configuration loading, settings validation and logging setup
"""
import pytest
import yaml
from pydantic import ValidationError

from app import config as app_config
from app.config import DatabaseSettings, DevelopmentConfig, SolverSettings, StudySettings, get_app_config
from app.main import _prune_handlers, create_orchestrator
from config.config_loader import ConfigLoader


@pytest.fixture
def config_dir(tmp_path):
    base = {
        "solver": {"cg_tol": 1e-12, "min_iterations": 10000},
        "database": {"enabled": False, "url": "sqlite:///base.db"},
        "logging": {"root": {"level": "INFO"}},
    }
    (tmp_path / "config.yaml").write_text(yaml.safe_dump(base))
    (tmp_path / "testing.yaml").write_text(yaml.safe_dump({"solver": {"cg_tol": 1e-10}}))
    return tmp_path


class TestConfigLoader:
    """YAML layering and environment overrides"""

    def test_environment_overlay(self, config_dir, monkeypatch):
        monkeypatch.delenv("MFEM_CG_TOL", raising=False)
        loader = ConfigLoader(config_dir)
        config = loader.load("testing")
        assert config["solver"]["cg_tol"] == 1e-10
        assert config["solver"]["min_iterations"] == 10000
        assert loader.environment == "testing"

    def test_missing_overlay_keeps_base(self, config_dir):
        loader = ConfigLoader(config_dir)
        assert loader.load("staging")["database"]["url"] == "sqlite:///base.db"

    def test_environment_variables_win(self, config_dir, monkeypatch):
        monkeypatch.setenv("MFEM_CG_TOL", "1e-8")
        monkeypatch.setenv("MFEM_DATABASE_ENABLED", "yes")
        monkeypatch.setenv("MFEM_LOG_LEVEL", "DEBUG")
        loader = ConfigLoader(config_dir)
        loader.load("testing")
        assert loader.get("solver.cg_tol") == 1e-8
        assert loader.get("database.enabled") is True
        assert loader.get("logging.root.level") == "DEBUG"

    def test_invalid_override_is_ignored(self, config_dir, monkeypatch):
        monkeypatch.setenv("MFEM_CG_MIN_ITERATIONS", "many")
        loader = ConfigLoader(config_dir)
        loader.load("testing")
        assert loader.get("solver.min_iterations") == 10000

    def test_get_with_default(self, config_dir):
        loader = ConfigLoader(config_dir)
        assert loader.get("solver.missing", 42) == 42
        assert loader.get("solver.cg_tol.deeper") is None

    def test_reload(self, config_dir, monkeypatch):
        monkeypatch.delenv("MFEM_CG_TOL", raising=False)
        loader = ConfigLoader(config_dir)
        loader.load("testing")
        (config_dir / "testing.yaml").write_text(yaml.safe_dump({"solver": {"cg_tol": 1e-6}}))
        assert loader.load()["solver"]["cg_tol"] == 1e-10
        assert loader.reload("testing")["solver"]["cg_tol"] == 1e-6

    def test_broken_yaml(self, config_dir, monkeypatch):
        monkeypatch.delenv("MFEM_CG_TOL", raising=False)
        (config_dir / "testing.yaml").write_text("solver: [unclosed")
        loader = ConfigLoader(config_dir)
        assert loader.load("testing")["solver"]["cg_tol"] == 1e-12


class TestSettings:
    """Validated settings models"""

    def test_defaults(self):
        solver = SolverSettings()
        assert solver.cg_tol == 1e-12
        assert solver.dense_limit == 5000

    def test_tolerance_range(self):
        with pytest.raises(ValidationError):
            SolverSettings(cg_tol=0.0)
        with pytest.raises(ValidationError):
            SolverSettings(cg_tol=2.0)

    def test_level_ranges(self):
        study = StudySettings(levels_2d=[1, 3])
        assert study.levels(2) == [1, 2, 3]
        assert study.levels(3) == [0, 1, 2]
        with pytest.raises(ValidationError):
            StudySettings(levels_2d=(3, 3))
        with pytest.raises(ValidationError):
            StudySettings(levels_3d=(-1, 2))

    def test_postprocess_degree(self):
        with pytest.raises(ValidationError):
            StudySettings(postprocess_degree=3)

    def test_recording_needs_url(self):
        with pytest.raises(ValidationError):
            DatabaseSettings(enabled=True, url="")

    def test_config_selection(self, monkeypatch):
        assert get_app_config("testing") is app_config.TestingConfig
        assert get_app_config("unknown") is DevelopmentConfig
        monkeypatch.setenv("MFEM_ENV", "testing")
        assert get_app_config().TESTING
        assert app_config.TestingConfig.DATABASE.url == "sqlite:///:memory:"


class TestBootstrap:
    """Logging setup and orchestrator construction"""

    def test_prune_disabled_handlers(self):
        settings = {
            "version": 1,
            "handlers": {"console": {"class": "logging.StreamHandler"}, "file": None},
            "loggers": {"core": {"handlers": ["console", "file"]}},
            "root": {"handlers": ["file"]},
        }
        pruned = _prune_handlers(settings)
        assert list(pruned["handlers"]) == ["console"]
        assert pruned["loggers"]["core"]["handlers"] == ["console"]
        assert pruned["root"]["handlers"] == []
        # input is left untouched
        assert settings["handlers"]["file"] is None
        assert settings["root"]["handlers"] == ["file"]

    def test_create_orchestrator(self):
        orchestrator = create_orchestrator(tol=1e-10, record=False)
        assert orchestrator.tol == 1e-10
        assert orchestrator.solver.tol == 1e-10
        assert orchestrator.record is False
        assert orchestrator.dense_limit == app_config.TestingConfig.SOLVER.dense_limit
