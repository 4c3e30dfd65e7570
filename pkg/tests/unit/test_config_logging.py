import json
import logging

import pytest
from pydantic import ValidationError

from g2torus.core.config import Settings, Tolerances, settings
from g2torus.core.exceptions import BalanceError, ObstructedSourceError
from g2torus.schemas.report import ResidualEntry
from g2torus.schemas.scenario import RunConfig, ScenarioConfig, parse_rational
from g2torus.utils.logging import log_error, log_residual, setup_logging

from tests.conftest import UNIT_PERIODS


@pytest.mark.unit
class TestTolerances:
    def test_scaled(self):
        scaled = Tolerances().scaled(10.0)
        assert scaled.FIELD == pytest.approx(1e-8)
        assert scaled.IDENTITY == pytest.approx(1e-11)
        assert scaled.RANK_RTOL == Tolerances().RANK_RTOL

    def test_scale_must_be_positive(self):
        with pytest.raises(ValueError):
            Tolerances().scaled(0.0)


@pytest.mark.unit
class TestSettings:
    def test_threads_from_environment(self, monkeypatch):
        monkeypatch.setenv("THREADS", "4")
        assert Settings().THREADS == 4

    def test_threads_must_be_positive(self, monkeypatch):
        monkeypatch.setenv("THREADS", "0")
        with pytest.raises(ValidationError):
            Settings()

    def test_grid_must_be_power_of_two(self):
        for grid in (5, 12):
            with pytest.raises(ValidationError):
                Settings(DEFAULT_GRID=grid)


@pytest.mark.unit
class TestScenarioConfig:
    def test_parse_rational(self):
        assert parse_rational("1/3") * 3 == 1
        assert parse_rational(0.5) == parse_rational("1/2")
        assert parse_rational(2) == 2

    def test_defaults(self):
        cfg = ScenarioConfig(beta_periods=UNIT_PERIODS)
        assert cfg.t_fraction == 1
        assert cfg.alpha_fraction is None
        assert cfg.lattice.name == "T4"

    def test_grid_and_h0_follow_settings(self, monkeypatch):
        monkeypatch.setattr(settings, "DEFAULT_GRID", 8)
        monkeypatch.setattr(settings, "DEFAULT_H0", 2.5)
        cfg = ScenarioConfig(beta_periods=UNIT_PERIODS)
        assert cfg.grid == 8
        assert cfg.h0 == 2.5
        assert ScenarioConfig(beta_periods=UNIT_PERIODS, grid=32).grid == 32

    def test_rational_text(self):
        cfg = ScenarioConfig(beta_periods=UNIT_PERIODS, t_squared="2/4", alpha=-1)
        assert cfg.t_squared == "1/2"
        assert cfg.alpha_fraction == -1

    @pytest.mark.parametrize("overrides", [
        {"unknown": 1},
        {"t_squared": "abc"},
        {"t_squared": "-1"},
        {"alpha": "0"},
        {"grid": 12},
        {"side_lengths": [1.0, 1.0, 1.0]},
        {"beta_periods": [[1, -1, 0, 0, 0, 0]]},
        {"u_mode": "prescribed"},
        {"h0": 0.0},
        {"lattice": {"name": "K3"}},
        {"instantons": {"periods": [[1, -1, 0, 0, 0, 0]], "weights": [1, 2]}},
    ])
    def test_rejected(self, overrides):
        data = {"beta_periods": UNIT_PERIODS, **overrides}
        with pytest.raises(ValidationError):
            ScenarioConfig(**data)

    def test_run_config(self):
        run = RunConfig(command="verify", config="scenario.json", grid=8)
        assert run.seed == 0
        assert run.tol_scale == 1.0
        with pytest.raises(ValidationError):
            RunConfig(command="serve")
        with pytest.raises(ValidationError):
            RunConfig(command="verify", grid=6)


@pytest.mark.unit
class TestLogging:
    def setup_method(self):
        self.logger = logging.getLogger("g2torus.test")

    def test_invalid_level(self):
        with pytest.raises(ValueError):
            setup_logging("LOUD")

    def test_log_error_carries_mismatch(self, caplog):
        with caplog.at_level(logging.ERROR, logger="g2torus.test"):
            log_error(self.logger, ObstructedSourceError("no periodic solution", 2.5), {"command": "solve"})
        payload = json.loads(caplog.records[-1].getMessage().split("Error: ", 1)[1])
        assert payload["error_type"] == "ObstructedSourceError"
        assert payload["mismatch"] == 2.5
        assert payload["context"] == {"command": "solve"}

    def test_log_error_balance(self, caplog):
        with caplog.at_level(logging.ERROR, logger="g2torus.test"):
            log_error(self.logger, BalanceError("unbalanced", 3.0, 1.0))
        payload = json.loads(caplog.records[-1].getMessage().split("Error: ", 1)[1])
        assert payload["mismatch"] == 2.0
        assert "context" not in payload

    def test_failed_residual_is_a_warning(self, caplog):
        entry = ResidualEntry.check("bianchi", 1.0, 1e-9, "dH = <F^F>")
        with caplog.at_level(logging.INFO, logger="g2torus.test"):
            log_residual(self.logger, entry.model_dump())
        assert caplog.records[-1].levelno == logging.WARNING
        assert '"name": "bianchi"' in caplog.records[-1].getMessage()


@pytest.mark.unit
class TestResidualEntry:
    def test_check(self):
        entry = ResidualEntry.check("closed", 1e-12, 1e-9, "dφ ∧ φ = 0", reference=2.0)
        assert entry.passed
        assert entry.relative == pytest.approx(5e-13)
        assert ResidualEntry.check("closed", 1e-6, 1e-9, "dφ ∧ φ = 0").relative is None
