"""configuration management for sirx: environment settings and experiment files."""

from __future__ import annotations

import hashlib
import json
import warnings
from pathlib import Path
from typing import Any, Literal

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from sirx._internal.baselines import BaselineOptions, StrategyKind, StrategySpec
from sirx._internal.centrality import CentralityMetric
from sirx._internal.control import FbsConfig
from sirx._internal.dynamics import (
    NodeState,
    SirParams,
    epidemic_threshold,
    seeded_initial_state,
    uniform_initial_state,
)
from sirx._internal.errors import ConfigError
from sirx._internal.generators import generate_ba, generate_er, generate_ws
from sirx._internal.graph import Graph, load_dataset, load_edge_list
from sirx._internal.logging import get_logger
from sirx._internal.parsing import apply_overrides
from sirx._internal.types import OverrideValue

# suppress pydantic warning about Field defaults
warnings.filterwarnings(
    "ignore", category=UserWarning, module="pydantic._internal._generate_schema"
)

logger = get_logger(__name__)


class Settings(BaseSettings):
    """environment settings for the sirx cli (prefix SIRX_)."""

    model_config = SettingsConfigDict(
        env_prefix="SIRX_",
        env_file=str(Path.cwd() / ".env"),
        env_file_encoding="utf-8",
        extra="ignore",
        case_sensitive=False,
    )

    output_dir: Path = Field(default=Path("results"), description="where run outputs are written")
    concurrency: int = Field(default=4, ge=1, description="strategies run at once")
    log_level: str = Field(default="WARNING", description="logging level")
    debug: bool = Field(default=False, description="re-raise errors with tracebacks")
    float_digits: int = Field(default=10, ge=1, le=17, description="significant digits in CSV output")
    data_dir: Path | None = Field(
        default=None, description="directory holding edge lists of datasets that are not shipped"
    )


settings = Settings()


class GeneratorSpec(BaseModel):
    """a synthetic network: ba(n, m_attach), ws(n, k, p) or er(n, m)."""

    model_config = ConfigDict(extra="forbid")

    kind: Literal["ba", "ws", "er"]
    n: int = Field(ge=1)
    m_attach: int | None = None
    k: int | None = None
    p: float | None = None
    m: int | None = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_kind_params(self) -> GeneratorSpec:
        required = {"ba": ("m_attach",), "ws": ("k", "p"), "er": ("m",)}[self.kind]
        missing = [name for name in required if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.kind} generator needs {', '.join(missing)}")
        return self

    def build(self, replication: int = 0) -> Graph:
        """generate the graph; replication r uses seed + r."""
        seed = self.seed + replication
        if self.kind == "ba":
            assert self.m_attach is not None
            return generate_ba(self.n, self.m_attach, seed)
        if self.kind == "ws":
            assert self.k is not None and self.p is not None
            return generate_ws(self.n, self.k, self.p, seed)
        assert self.m is not None
        return generate_er(self.n, self.m, seed)


class NetworkSource(BaseModel):
    """exactly one of an edge-list path, a shipped dataset, or a generator."""

    model_config = ConfigDict(extra="forbid")

    path: Path | None = None
    dataset: str | None = None
    generator: GeneratorSpec | None = None

    @model_validator(mode="after")
    def _exactly_one(self) -> NetworkSource:
        given = [name for name in ("path", "dataset", "generator") if getattr(self, name) is not None]
        if len(given) != 1:
            raise ValueError(f"network needs exactly one of path, dataset, generator (got {given or 'none'})")
        return self

    @property
    def is_stochastic(self) -> bool:
        return self.generator is not None

    def load(self, replication: int = 0) -> Graph:
        if self.path is not None:
            return load_edge_list(self.path)
        if self.dataset is not None:
            return load_dataset(self.dataset, settings.data_dir)
        assert self.generator is not None
        return self.generator.build(replication)

    def describe(self) -> str:
        if self.path is not None:
            return str(self.path)
        if self.dataset is not None:
            return self.dataset
        assert self.generator is not None
        return self.generator.kind


class ParamsConfig(BaseModel):
    """model parameters; β0 is given directly or as a multiple of β_c."""

    model_config = ConfigDict(extra="forbid")

    beta0: float | None = Field(default=None, ge=0.0)
    beta0_multiple: float | None = Field(default=None, gt=0.0)
    gamma0: float = Field(default=0.1, gt=0.0)
    u: float = Field(default=0.5, ge=0.0, le=1.0)
    c: float = Field(default=1.0, gt=0.0)
    w_total: float = Field(default=1.0, ge=0.0)
    horizon: float = Field(default=10.0, gt=0.0)
    steps: int = Field(default=200, ge=2)

    @model_validator(mode="after")
    def _one_beta(self) -> ParamsConfig:
        if self.beta0 is not None and self.beta0_multiple is not None:
            raise ValueError("give either beta0 or beta0_multiple, not both")
        if self.beta0 is None and self.beta0_multiple is None:
            self.beta0_multiple = 3.0
        return self

    def resolve(self, g: Graph) -> SirParams:
        """bind β0 against the graph's epidemic threshold when given as a multiple."""
        if self.beta0 is not None:
            beta0 = self.beta0
        else:
            assert self.beta0_multiple is not None
            threshold = epidemic_threshold(g)
            beta0 = self.beta0_multiple * threshold
            logger.info(
                "beta0 = %.6g (%.6g x beta_c = %.6g)", beta0, self.beta0_multiple, threshold
            )
        return SirParams(
            beta0=beta0,
            gamma0=self.gamma0,
            u=self.u,
            c=self.c,
            w_total=self.w_total,
            horizon=self.horizon,
            steps=self.steps,
        )


class InitialConfig(BaseModel):
    """uniform seeding (every node at i0) or seeded nodes (fully infected)."""

    model_config = ConfigDict(extra="forbid")

    mode: Literal["uniform", "seeded"] = "uniform"
    i0: float = Field(default=0.05, ge=0.0, le=1.0)
    nodes: list[int] | None = None
    count: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _seeded_needs_nodes(self) -> InitialConfig:
        if self.mode == "seeded" and (self.nodes is None) == (self.count is None):
            raise ValueError("seeded mode needs exactly one of nodes or count")
        return self

    @property
    def is_stochastic(self) -> bool:
        return self.mode == "seeded" and self.count is not None

    def build(self, n: int, seed: int, replication: int = 0) -> NodeState:
        if self.mode == "uniform":
            return uniform_initial_state(n, self.i0)
        if self.nodes is not None:
            return seeded_initial_state(n, self.nodes)
        assert self.count is not None
        if self.count > n:
            raise ConfigError(f"initial.count={self.count} exceeds the {n} nodes")
        rng = np.random.default_rng([seed, replication])
        return seeded_initial_state(n, sorted(rng.choice(n, size=self.count, replace=False).tolist()))


class AnalysisConfig(BaseModel):
    """correlation and degree-class settings."""

    model_config = ConfigDict(extra="forbid")

    metrics: list[CentralityMetric] = Field(default_factory=lambda: list(CentralityMetric))
    bins: int = Field(default=10, ge=2)
    early_fraction: float = Field(default=0.1, gt=0.0, le=1.0)
    late_fraction: float = Field(default=0.2, gt=0.0, le=1.0)


class ExperimentConfig(BaseModel):
    """one experiment file."""

    model_config = ConfigDict(extra="forbid")

    network: NetworkSource
    params: ParamsConfig = Field(default_factory=ParamsConfig)
    initial: InitialConfig = Field(default_factory=InitialConfig)
    strategies: list[StrategyKind] = Field(default_factory=lambda: list(StrategyKind), min_length=1)
    fbs: FbsConfig = Field(default_factory=FbsConfig)
    baselines: BaselineOptions = Field(default_factory=BaselineOptions)
    analysis: AnalysisConfig = Field(default_factory=AnalysisConfig)
    seed: int = 0
    replications: int = Field(default=1, ge=1)
    output_dir: Path | None = None
    concurrency: int | None = Field(default=None, ge=1)

    @model_validator(mode="after")
    def _unique_strategies(self) -> ExperimentConfig:
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("strategies must not repeat")
        return self

    def strategy_specs(self) -> list[StrategySpec]:
        return [StrategySpec(kind, self.baselines, self.fbs) for kind in self.strategies]

    def canonical_json(self) -> str:
        """sorted, whitespace-free JSON of the validated config."""
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


def _format_validation_error(error: ValidationError) -> str:
    parts = []
    for err in error.errors():
        location = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{location}: {err['msg']}")
    return "; ".join(parts)


def validate_experiment(data: dict[str, Any]) -> ExperimentConfig:
    """validate a config mapping.

    Raises:
        ConfigError: listing every validation error
    """
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"invalid config: {_format_validation_error(e)}") from e


def load_experiment_config(
    path: Path | str,
    overrides: dict[str, OverrideValue] | None = None,
    *,
    seed: int | None = None,
    strategies: list[str] | None = None,
    output_dir: Path | None = None,
) -> ExperimentConfig:
    """read a YAML experiment file and apply CLI overrides.

    a relative `network.path` is resolved against the config file's directory.

    Args:
        path: YAML file
        overrides: dotted `--set` overrides
        seed: replaces `seed` and, for a generated network, `network.generator.seed`
        strategies: replaces `strategies`
        output_dir: replaces `output_dir`

    Raises:
        ConfigError: if the file is missing, unparsable, or invalid
    """
    config_path = Path(path)
    if not config_path.is_file():
        raise ConfigError(f"config file not found: {config_path}")
    try:
        data = yaml.safe_load(config_path.read_text(encoding="utf-8"))
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {config_path}: {e}") from e
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{config_path} must hold a mapping at the top level")

    data = apply_overrides(data, overrides or {})
    if seed is not None:
        data["seed"] = seed
        network = data.get("network")
        if isinstance(network, dict) and isinstance(network.get("generator"), dict):
            network["generator"]["seed"] = seed
    if strategies:
        try:
            data["strategies"] = [StrategyKind(name).value for name in strategies]
        except ValueError as e:
            known = ", ".join(k.value for k in StrategyKind)
            raise ConfigError(f"{e} (known strategies: {known})") from e
    if output_dir is not None:
        data["output_dir"] = str(output_dir)

    network = data.get("network")
    if isinstance(network, dict) and isinstance(network.get("path"), str):
        edge_path = Path(network["path"])
        if not edge_path.is_absolute():
            network["path"] = str(config_path.parent / edge_path)

    return validate_experiment(data)
