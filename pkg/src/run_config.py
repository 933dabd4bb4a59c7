"""
Run configuration for the routing game analyses.

Defaults live in config/default.yaml; command-line flags override single
values through ``RunConfig.with_overrides``.
"""

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import List, Optional, Union

import yaml

from convex_solvers import SolverTolerances
from network_processor import RoutingGameError

logger = logging.getLogger(__name__)

VALID_FORMATS = ("csv", "svg", "text", "json")


class ConfigError(RoutingGameError, ValueError):
    """Invalid configuration value."""


@dataclass(frozen=True)
class RunConfig:
    kkt_tol: float = 1e-9
    feas_tol: float = 1e-9
    class_tol: float = 1e-7
    gap_tol: float = 1e-6
    breakpoint_merge_tol: float = 1e-8
    path_cap: int = 10000
    breakpoint_cap: int = 10000
    subset_scan_cap: int = 4096
    max_iterations: int = 10000
    output_dir: str = "reports"
    formats: List[str] = field(default_factory=lambda: ["csv", "text"])
    samples_per_interval: int = 20
    scan_grid_points: int = 200
    show_progress: bool = True

    @classmethod
    def from_yaml(cls, path: Union[str, Path]) -> "RunConfig":
        """Load a configuration file; missing keys keep their defaults."""
        path = Path(path)
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except (OSError, yaml.YAMLError) as e:
            logger.error(f"Cannot load configuration {path}: {e}")
            raise ConfigError(f"Cannot load configuration {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Configuration {path} must be a mapping")

        # Unknown keys are reported but not fatal
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            logger.warning(f"Ignoring unknown configuration keys: {unknown}")
        config = cls(**{k: v for k, v in data.items() if k in known})
        config.validate()
        return config

    def with_overrides(self, **overrides) -> "RunConfig":
        """Copy with the given (non-None) values replaced."""
        # Unset command-line flags arrive as None
        overrides = {k: v for k, v in overrides.items() if v is not None}
        config = replace(self, **overrides)
        config.validate()
        return config

    def validate(self) -> None:
        """
        Check every value.

        Raises:
            ConfigError: non-positive tolerance or cap, or unknown output format
        """
        for name in ("kkt_tol", "feas_tol", "class_tol", "gap_tol", "breakpoint_merge_tol"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or value <= 0:
                raise ConfigError(f"{name} must be positive, got {value!r}")
        for name in ("path_cap", "breakpoint_cap", "subset_scan_cap", "max_iterations",
                     "samples_per_interval", "scan_grid_points"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, int) or value <= 0:
                raise ConfigError(f"{name} must be a positive integer, got {value!r}")
        bad = [f for f in self.formats if f not in VALID_FORMATS]
        if bad:
            raise ConfigError(f"Unknown output formats {bad}; choose from {list(VALID_FORMATS)}")

    def solver_tolerances(self) -> SolverTolerances:
        # Pivot and curvature tolerances keep their solver defaults
        return SolverTolerances(
            kkt_tol=self.kkt_tol,
            feas_tol=self.feas_tol,
            class_tol=self.class_tol,
            max_iterations=self.max_iterations,
        )

    def to_dict(self) -> dict:
        return asdict(self)


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Load ``path`` or config/default.yaml when present, otherwise built-in defaults."""
    if path is None:
        default = Path("config/default.yaml")
        if not default.exists():
            return RunConfig()
        path = default
    return RunConfig.from_yaml(path)
