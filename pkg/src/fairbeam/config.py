"""Scenario configuration: schema, defaults, JSON loading.

The JSON schema mirrors the standard macro-cell simulation setup: a 16x16
half-wavelength array, UE groups of equal size with 10-degree angular
spreads around a 50-degree elevation, azimuth means spaced evenly around the
circle, 8 RF chains per group, -174 dBm/Hz noise over 120 kHz, pathloss
exponent 3.76 over 10-100 m drops. Every field has a default except the UE
count, which must be given either as ``k`` (split evenly across ``n_groups``)
or as an explicit ``groups`` list.
"""

import json
from typing import Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from .bb_stage import FairnessSpec
from .channel import ArrayGeometry, GroupAngularSpec, PlacementBounds
from .errors import ConfigError
from .metrics import noise_power_watt
from .optimizers import ALGORITHMS, OptimizerConfig


class ArrayConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m_x: int = Field(default=16, ge=1)
    m_y: int = Field(default=16, ge=1)


class GroupConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    mean_eaod_deg: float = 50.0
    eaod_spread_deg: float = 10.0
    mean_aaod_deg: float = 25.0
    aaod_spread_deg: float = 10.0
    ue_count: int = Field(ge=1)


class GeometryConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    horizontal_min_m: float = 10.0
    horizontal_max_m: float = 100.0
    bs_height_m: float = 10.0
    ue_height_min_m: float = 1.5
    ue_height_max_m: float = 2.5


class OptimizerSettings(BaseModel):
    model_config = ConfigDict(extra="forbid")

    algorithms: list[str] = Field(default_factory=lambda: list(ALGORITHMS))
    n_agents: int = Field(default=100, ge=2)
    iterations: int = Field(default=10, ge=0)
    hyperparams: dict[str, dict[str, float]] = Field(default_factory=dict)

    @field_validator("algorithms")
    @classmethod
    def _known_algorithms(cls, v):
        if not v:
            raise ValueError("at least one algorithm is required")
        for name in v:
            if name not in ALGORITHMS:
                raise ValueError(f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHMS)}")
        if len(set(v)) != len(v):
            raise ValueError("duplicate algorithm names")
        return v

    @field_validator("hyperparams")
    @classmethod
    def _known_hyperparam_groups(cls, v):
        for name in v:
            if name not in ALGORITHMS:
                raise ValueError(f"hyperparams key {name!r} is not an algorithm name")
        return v


FairnessValue = Union[float, Literal["maxmin"]]


class SystemConfig(BaseModel):
    """Full scenario description; see the README for the field reference."""

    model_config = ConfigDict(extra="forbid")

    array: ArrayConfig = Field(default_factory=ArrayConfig)
    k: Optional[int] = Field(default=None, ge=1)
    n_groups: int = Field(default=2, ge=1)
    groups: Optional[list[GroupConfig]] = None
    n_rf_per_group: int = Field(default=8, ge=1)
    p_t_dbm: list[float] = Field(default_factory=lambda: [40.0])
    noise_psd_dbm_hz: float = -174.0
    bandwidth_hz: float = Field(default=120e3, gt=0)
    pathloss_exponent: float = Field(default=3.76, gt=0)
    pathloss_convention: Literal["amplitude", "power"] = "amplitude"
    n_paths: int = Field(default=20, ge=1)
    fairness: list[FairnessValue] = Field(default_factory=lambda: [0.0])
    optimizer: OptimizerSettings = Field(default_factory=OptimizerSettings)
    n_realizations: int = Field(default=5000, ge=1)
    master_seed: int = Field(default=1, ge=0)
    geometry: GeometryConfig = Field(default_factory=GeometryConfig)

    @field_validator("p_t_dbm", mode="before")
    @classmethod
    def _scalar_to_list(cls, v):
        if isinstance(v, (int, float)):
            return [v]
        return v

    @field_validator("fairness", mode="before")
    @classmethod
    def _fairness_to_list(cls, v):
        if isinstance(v, (int, float, str)):
            v = [v]
        out = []
        for item in v:
            if isinstance(item, str):
                item = item.strip().lower().replace("-", "").replace("_", "")
                if item != "maxmin":
                    raise ValueError(f"fairness entries are numbers or 'maxmin', got {item!r}")
                out.append("maxmin")
            else:
                if item < 0:
                    raise ValueError("alpha must be non-negative")
                out.append(float(item))
        if not out:
            raise ValueError("at least one fairness level is required")
        return out

    @model_validator(mode="after")
    def _resolve_and_check(self):
        if self.groups is None:
            if self.k is None:
                raise ValueError("UE count is required: set 'k' or an explicit 'groups' list")
            if self.k % self.n_groups:
                raise ValueError(f"k={self.k} does not split evenly into {self.n_groups} groups")
            per = self.k // self.n_groups
            self.groups = [
                GroupConfig(mean_aaod_deg=25.0 + 360.0 / self.n_groups * g, ue_count=per)
                for g in range(self.n_groups)
            ]
        else:
            self.n_groups = len(self.groups)
            total = sum(g.ue_count for g in self.groups)
            if self.k is None:
                self.k = total
            elif self.k != total:
                raise ValueError(f"k={self.k} but groups add up to {total} UEs")
        if not self.p_t_dbm:
            raise ValueError("at least one transmit power is required")
        n_rf = self.n_rf_per_group * self.n_groups
        m = self.array.m_x * self.array.m_y
        if not (self.k <= n_rf <= m):
            raise ValueError(
                f"need K <= N_RF <= M, got K={self.k}, N_RF={n_rf}, M={m}")
        return self

    # -- bridges into the domain types ------------------------------------

    @property
    def n_rf(self) -> int:
        return self.n_rf_per_group * self.n_groups

    @property
    def noise_power_w(self) -> float:
        return noise_power_watt(self.noise_psd_dbm_hz, self.bandwidth_hz)

    def array_geometry(self) -> ArrayGeometry:
        return ArrayGeometry(m_x=self.array.m_x, m_y=self.array.m_y)

    def resolved_groups(self) -> list:
        return [
            GroupAngularSpec(
                mean_eaod_deg=g.mean_eaod_deg,
                eaod_spread_deg=g.eaod_spread_deg,
                mean_aaod_deg=g.mean_aaod_deg,
                aaod_spread_deg=g.aaod_spread_deg,
                ue_count=g.ue_count,
            )
            for g in self.groups
        ]

    def placement_bounds(self) -> PlacementBounds:
        g = self.geometry
        return PlacementBounds(
            horizontal_min_m=g.horizontal_min_m,
            horizontal_max_m=g.horizontal_max_m,
            bs_height_m=g.bs_height_m,
            ue_height_min_m=g.ue_height_min_m,
            ue_height_max_m=g.ue_height_max_m,
        )

    def fairness_specs(self) -> list:
        return [FairnessSpec.parse(v) for v in self.fairness]

    def optimizer_config(self, algorithm: str, seed: int = 0) -> OptimizerConfig:
        return OptimizerConfig(
            algorithm=algorithm,
            n_agents=self.optimizer.n_agents,
            iterations=self.optimizer.iterations,
            seed=seed,
            hyperparams=dict(self.optimizer.hyperparams.get(algorithm, {})),
        )


def _format_validation_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        parts.append(f"{loc}: {err['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> SystemConfig:
    """Validate a raw mapping into a SystemConfig; ConfigError on failure."""
    try:
        return SystemConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_validation_error(exc)) from exc


def load_config(path) -> SystemConfig:
    """Load and validate a JSON config file; empty files mean all-defaults."""
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ConfigError(f"cannot read config file: {exc}") from exc
    text = text.strip() or "{}"
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config root must be a JSON object")
    return parse_config(data)


def save_config(cfg: SystemConfig, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(cfg.model_dump_json(indent=2))
        fh.write("\n")
