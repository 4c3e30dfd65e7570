import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from g2torus.core.config import Tolerances
from g2torus.core.exceptions import DomainError
from g2torus.schemas.report import ResidualEntry
from g2torus.schemas.scenario import RunConfig, ScenarioConfig
from g2torus.services.ansatz import Scenario, scenario_from_config

logger = logging.getLogger(__name__)


def load_scenario_config(path: str) -> ScenarioConfig:
    """
    Read and validate a scenario JSON file.

    Raises:
        OSError: unreadable file
        json.JSONDecodeError: malformed JSON
        pydantic.ValidationError: unknown keys or invalid values
    """
    with open(path, "r", encoding="utf-8") as handle:
        payload = json.load(handle)
    return ScenarioConfig.model_validate(payload)


@dataclass
class RunContext:
    """Everything a command handler needs for one run."""

    config: RunConfig
    tolerances: Tolerances
    scenario_config: Optional[ScenarioConfig] = None
    _scenario: Optional[Scenario] = field(default=None, repr=False)

    @property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.config.seed)

    def scenario(self, grid: Optional[int] = None) -> Scenario:
        if self.scenario_config is None:
            raise DomainError(f"command {self.config.command!r} needs --config")
        if self._scenario is None or grid is not None:
            built = scenario_from_config(self.scenario_config, grid or self.config.grid)
            if grid is not None:
                return built
            self._scenario = built
        return self._scenario


@dataclass
class CommandResult:
    residuals: List[ResidualEntry] = field(default_factory=list)
    sections: Dict[str, Any] = field(default_factory=dict)

    def extend(self, other: "CommandResult", prefix: str = ""):
        for entry in other.residuals:
            self.residuals.append(entry.model_copy(update={"name": f"{prefix}{entry.name}"}) if prefix else entry)
        self.sections.update(other.sections)


Handler = Callable[[RunContext], CommandResult]


@dataclass(frozen=True)
class Command:
    name: str
    handler: Handler
    needs_scenario: bool
    description: str


class CommandRouter:
    """Registry of CLI commands; routers from command modules are merged with include_router."""

    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, needs_scenario: bool = True, description: str = ""):
        def register(handler: Handler) -> Handler:
            if name in self.commands:
                raise ValueError(f"command {name!r} registered twice")
            self.commands[name] = Command(name, handler, needs_scenario, description or (handler.__doc__ or "").strip())
            return handler
        return register

    def include_router(self, router: "CommandRouter"):
        for name, command in router.commands.items():
            if name in self.commands:
                raise ValueError(f"command {name!r} registered twice")
            self.commands[name] = command

    def get(self, name: str) -> Command:
        try:
            return self.commands[name]
        except KeyError:
            raise DomainError(f"unknown command {name!r}") from None
