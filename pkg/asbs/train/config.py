# *******************************************************************************
# Copyright (c) 2026 Contributors to the asbs project
#
# See the NOTICE file(s) distributed with this work for additional
# information regarding copyright ownership.
#
# This program and the accompanying materials are made available under the
# terms of the Apache License Version 2.0 which is available at
# https://www.apache.org/licenses/LICENSE-2.0
#
# SPDX-License-Identifier: Apache-2.0
# *******************************************************************************
"""Run configuration loading and validation.

A run is described by a JSON document (or a shipped preset addressed as
``preset:<name>``). The document is validated with Pydantic, unknown keys are
rejected, and the result is returned as a :class:`RunConfig` model.

Sections:
    - ``mode``: one of ``asbs``, ``as``, ``naive``, ``memoryless``
    - ``energy``: ``family`` (MW, DW4, LJ, GMM40, GAUSS) and family ``params``
    - ``prior``: ``kind`` gaussian / dirac / harmonic plus its parameters
    - ``schedule``: ``kind`` geometric / constant / vp plus its parameters
    - ``sde``, ``train``, ``warm_start``, ``eval``, ``langevin``, ``seeds``

Example: MW-5 with a Gaussian prior

        {
            "mode": "asbs",
            "energy": {"family": "MW", "params": {"dim": 5, "delta": 4.0}},
            "prior": {"kind": "gaussian", "mean": 0.0, "std": 1.0},
            "schedule": {"kind": "constant", "sigma": 0.2},
            "train": {"stages": 5, "am_epochs": 100, "cm_epochs": 20,
                      "resample": 1000, "grad_steps": 200, "buffer_capacity": 10000}
        }

Any key can be overridden from the command line with ``section.key=value``;
the value is parsed as JSON when possible and taken as a string otherwise.
"""

import hashlib
import json
import logging
import os

from typing import Literal, Union, get_args, get_origin

import numpy as np

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from asbs.core.baseproc import (
    AnalyticCorrector,
    BaseProcess,
    DiracPrior,
    DriftKind,
    GaussianPrior,
    HarmonicPrior,
    LinearVPSchedule,
    NoiseSchedule,
    Prior,
    SdeConfig,
)
from asbs.core.diffnet import Activation, MlpSpec
from asbs.core.energy import EnergyFamily, EnergyModel, GradClipRule, make_energy
from asbs.core.errors import ConfigError
from asbs.metrics import AlignConfig, SinkhornConfig


logger = logging.getLogger(__name__)

MetricName = Literal["sinkhorn", "w2", "energy_w2", "geometric_w2", "mode_coverage", "energy_histogram"]
METRIC_NAMES: tuple[str, ...] = get_args(MetricName)

PRESET_PREFIX = "preset:"
PRESET_DIR = os.path.join(os.path.dirname(os.path.abspath(__file__)), "presets")
RNG_STREAMS = ("train", "sample", "eval", "langevin", "warm_start")


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EnergyConfig(_Section):
    family: EnergyFamily
    params: dict[str, Union[bool, int, float]] = Field(default_factory=dict)


class TrainConfig(_Section):
    stages: int = Field(default=5, ge=0)
    am_epochs: int = Field(default=100, ge=1)
    cm_epochs: int = Field(default=20, ge=1)
    resample: int = Field(default=1000, ge=1)
    grad_steps: int = Field(default=200, ge=1)
    buffer_capacity: int = Field(default=10_000, ge=1)
    batch_size: int = Field(default=512, ge=1)
    alpha_max: float | None = Field(default=None, gt=0)
    lr_control: float = Field(default=1e-3, gt=0)
    lr_corrector: float = Field(default=1e-3, gt=0)
    hidden_dim: int = Field(default=64, ge=1)
    n_layers: int = Field(default=4, ge=2)
    t_embed_dim: int = Field(default=128, ge=2)
    activation: Activation = Activation.GELU
    init: Literal["zero_corrector", "zero_control"] = "zero_corrector"
    max_retries: int = Field(default=0, ge=0)

    def mlp_spec(self, dim: int) -> MlpSpec:
        return MlpSpec(
            input_dim=dim,
            hidden_dim=self.hidden_dim,
            n_layers=self.n_layers,
            t_embed_dim=self.t_embed_dim,
            activation=self.activation,
        )

    @property
    def clip_rule(self) -> GradClipRule | None:
        return None if self.alpha_max is None else GradClipRule(self.alpha_max)


class WarmStartConfig(_Section):
    reference: str | None = None
    steps: int = Field(default=0, ge=0)
    batch_size: int = Field(default=512, ge=1)
    t_max: float = Field(default=1.0 - 1e-4, gt=0, lt=1)


class EvalConfig(_Section):
    sample_count: int = Field(default=2000, ge=1)
    metrics: list[MetricName] = Field(default_factory=lambda: ["sinkhorn", "energy_w2"])
    sinkhorn: SinkhornConfig = Field(default_factory=SinkhornConfig)
    align: AlignConfig = Field(default_factory=AlignConfig)
    histogram_bins: int = Field(default=50, ge=1)
    histogram_range: tuple[float, float] | None = None
    mode_radius: float | None = Field(default=None, gt=0)


class LangevinConfig(_Section):
    step_size: float = Field(default=1e-4, gt=0)
    n_steps: int = Field(default=1_000_000, ge=0)
    count: int = Field(default=10_000, ge=0)


class SeedConfig(_Section):
    master: int = Field(default=0, ge=0)


class RunConfig(_Section):
    mode: Literal["asbs", "as", "naive", "memoryless"] = "asbs"
    energy: EnergyConfig
    prior: Prior = Field(default_factory=GaussianPrior)
    schedule: NoiseSchedule
    sde: SdeConfig = Field(default_factory=SdeConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)
    warm_start: WarmStartConfig = Field(default_factory=WarmStartConfig)
    eval: EvalConfig = Field(default_factory=EvalConfig)
    langevin: LangevinConfig = Field(default_factory=LangevinConfig)
    seeds: SeedConfig = Field(default_factory=SeedConfig)

    @model_validator(mode="after")
    def _check_mode(self):
        vp = isinstance(self.schedule, LinearVPSchedule)
        if self.mode == "memoryless":
            if not vp or not isinstance(self.prior, GaussianPrior):
                raise ValueError("mode 'memoryless' needs the 'vp' schedule and a gaussian prior")
        elif vp:
            raise ValueError(f"mode '{self.mode}' needs a zero-drift schedule, not 'vp'")
        if self.mode == "as" and not isinstance(self.prior, DiracPrior):
            raise ValueError("mode 'as' needs a dirac prior")
        try:
            energy = self.build_energy()
        except (TypeError, ValueError) as exc:
            raise ValueError(f"energy: {exc}") from exc
        if isinstance(self.prior, HarmonicPrior) and self.prior.dim != energy.dim:
            raise ValueError(f"harmonic prior dimension {self.prior.dim} != energy dimension {energy.dim}")
        return self

    def build_energy(self) -> EnergyModel:
        return make_energy(self.energy.family, **self.energy.params)

    def build_process(self, energy: EnergyModel | None = None) -> BaseProcess:
        energy = energy or self.build_energy()
        particles = (energy.n_particles, energy.space_dim) if energy.n_particles > 0 else None
        return BaseProcess(
            schedule=self.schedule,
            prior=self.prior,
            dim=energy.dim,
            drift_kind=DriftKind.VP if isinstance(self.schedule, LinearVPSchedule) else DriftKind.ZERO,
            particles=particles,
            zcom=energy.zcom,
        )

    def build_analytic_corrector(self, process: BaseProcess | None = None) -> AnalyticCorrector:
        return AnalyticCorrector(process or self.build_process())

    def snapshot(self) -> dict:
        """JSON-ready dump that validates back into an equal model."""
        return self.model_dump(mode="json", by_alias=True)

    def content_hash(self) -> str:
        encoded = json.dumps(self.snapshot(), sort_keys=True, separators=(",", ":")).encode("utf-8")
        return hashlib.sha256(encoded).hexdigest()


def rng_streams(master: int) -> dict[str, np.random.Generator]:
    """Independent generators for every stochastic stage of a run, derived from one master seed."""
    children = np.random.SeedSequence(master).spawn(len(RNG_STREAMS))
    return {name: np.random.default_rng(seq) for name, seq in zip(RNG_STREAMS, children)}


def resolve_config_path(config_file: str) -> str:
    if config_file.startswith(PRESET_PREFIX):
        name = config_file[len(PRESET_PREFIX) :]
        path = os.path.join(PRESET_DIR, f"{name}.json")
        if not os.path.isfile(path):
            raise ConfigError(f"Unknown preset '{name}', available: {', '.join(list_presets())}")
        return path
    return config_file


def list_presets() -> list[str]:
    return sorted(f[: -len(".json")] for f in os.listdir(PRESET_DIR) if f.endswith(".json"))


def parse_override(override: str) -> tuple[list[str], object]:
    """Split ``section.key=value`` into a key path and a parsed value."""
    key, sep, raw = override.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"Override '{override}' is not of the form section.key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(document: dict, overrides) -> dict:
    for override in overrides:
        path, value = parse_override(override)
        node = document
        for part in path[:-1]:
            child = node.get(part)
            if child is None:
                child = node[part] = {}
            elif not isinstance(child, dict):
                raise ConfigError(f"Override '{override}': '{part}' is not a section")
            node = child
        node[path[-1]] = value
    return document


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<root>"
        lines.append(f"  {location}: {error['msg']}")
    return "\n".join(lines)


def validate_document(document: dict, source: str = "<document>") -> RunConfig:
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError(f"Invalid run configuration in '{source}':\n{_format_errors(exc)}") from exc


def load_configuration(config_file: str, overrides=()) -> RunConfig:
    """Load and validate a run configuration.

    :param str config_file: Path to a JSON document or ``preset:<name>``.
    :param overrides: ``section.key=value`` strings applied before validation.
    :raises ConfigError: If the file cannot be parsed or fails validation.
    """
    path = resolve_config_path(config_file)
    logger.info(f"Loading configuration from {path}")

    try:
        with open(path, "r") as f:
            document = json.load(f)
    except FileNotFoundError as exc:
        raise ConfigError(f"Configuration file '{path}' does not exist") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"Malformed JSON in '{path}' at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    if not isinstance(document, dict):
        raise ConfigError(f"Configuration in '{path}' must be a JSON object")

    return validate_document(apply_overrides(document, overrides), path)


def _annotation_name(annotation) -> str:
    if isinstance(annotation, type):
        return annotation.__name__
    return str(annotation).replace("typing.", "")


def _variants(annotation):
    """Model classes reachable from a field annotation (unions and Annotated included)."""
    args = get_args(annotation)
    if isinstance(annotation, type) and get_origin(annotation) is None and issubclass(annotation, BaseModel):
        return [annotation]
    found = []
    for arg in args:
        found.extend(_variants(arg))
    return found


def describe_model(model: type[BaseModel], prefix: str = "") -> list[str]:
    """One line per configuration key with its default, generated from the models."""
    lines = []
    for name, info in model.model_fields.items():
        key = f"{prefix}{info.alias or name}"
        submodels = _variants(info.annotation)
        if submodels and get_origin(info.annotation) is not list:
            for sub in submodels:
                kind = sub.model_fields.get("kind")
                label = f"{key}[kind={kind.default}]" if kind is not None and len(submodels) > 1 else key
                lines.extend(describe_model(sub, f"{label}."))
            continue
        if info.is_required():
            default = "<required>"
        elif info.default_factory is not None:
            default = repr(info.default_factory())
        else:
            default = repr(info.default.value if hasattr(info.default, "value") else info.default)
        lines.append(f"  {key} = {default}  ({_annotation_name(info.annotation)})")
    return lines


def config_help() -> str:
    return "Configuration keys (section.key = default):\n" + "\n".join(describe_model(RunConfig))
