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
import json
import os

import numpy as np
import pytest

from conftest import RESOURCES, load_resource_config

from asbs.core.baseproc import ConstantSchedule, DriftKind
from asbs.core.errors import ConfigError
from asbs.train import config_help, list_presets, load_configuration, rng_streams, validate_document
from asbs.train.config import apply_overrides, parse_override


def _resource_path(filename: str) -> str:
    return os.path.join(RESOURCES, filename)


def test_presets_validate() -> None:
    presets = list_presets()
    assert {"mw5_asbs", "mw5_as", "dw4_asbs", "lj13_asbs", "lj55_asbs", "gmm40_asbs", "demo_vp"} <= set(presets)
    for name in presets:
        cfg = load_configuration(f"preset:{name}")
        energy = cfg.build_energy()
        assert cfg.build_process(energy).dim == energy.dim


def test_sample_configs_validate() -> None:
    for filename in ["tiny_mw_config.json", "tiny_dw4_config.json"]:
        load_configuration(_resource_path(filename))


def test_unknown_key_is_rejected() -> None:
    with pytest.raises(ValueError) as info:
        load_configuration(_resource_path("unknown_key_config.json"))
    assert "train.learning_rate" in str(info.value)
    assert isinstance(info.value, ConfigError)


def test_malformed_json_reports_position() -> None:
    with pytest.raises(ConfigError, match=r"line \d+, column \d+"):
        load_configuration(_resource_path("malformed_config.json"))


def test_missing_file_and_unknown_preset(tmp_path) -> None:
    with pytest.raises(ConfigError):
        load_configuration(str(tmp_path / "missing.json"))
    with pytest.raises(ConfigError, match="mw5_asbs"):
        load_configuration("preset:no_such_preset")


def test_invalid_run_config_is_rejected(tmp_path) -> None:
    invalid = {
        # "schedule" missing
        "energy": {"family": "MW", "params": {"dim": 2}},
    }
    invalid_config_file = tmp_path / "invalid.json"
    invalid_config_file.write_text(json.dumps(invalid), encoding="utf-8")

    with pytest.raises(ValueError, match="schedule"):
        load_configuration(str(invalid_config_file))


@pytest.mark.parametrize(
    "sections",
    [
        {"mode": "as"},
        {"mode": "memoryless"},
        {"schedule": {"kind": "vp"}},
        {"energy": {"family": "MW", "params": {"dim": 2, "sigma": 1.0}}},
        {"prior": {"kind": "harmonic", "n_particles": 3, "space_dim": 2}},
        {"schedule": {"kind": "geometric", "beta_min": 1.0, "beta_max": 0.5}},
        {"train": {"n_layers": 1}},
    ],
)
def test_inconsistent_sections_are_rejected(sections) -> None:
    with pytest.raises(ConfigError):
        load_resource_config("tiny_mw_config.json", **sections)


def test_harmonic_prior_matches_particle_energy() -> None:
    cfg = load_resource_config("tiny_dw4_config.json")
    process = cfg.build_process()
    assert process.zcom
    assert process.particles == (4, 2)
    with pytest.raises(ConfigError):
        load_resource_config("tiny_dw4_config.json", prior={"kind": "harmonic", "n_particles": 3, "space_dim": 2})


def test_energy_switches_accept_flat_key_names() -> None:
    dw4 = {"family": "DW4", "params": {"n_particles": 4, "space_dim": 2, "dw4_exponentiated": True}}
    assert load_resource_config("tiny_dw4_config.json", energy=dw4).build_energy().exponentiated

    cfg = load_configuration(
        _resource_path("tiny_mw_config.json"),
        ["energy.family=LJ", "energy.params={\"n_particles\": 3, \"lj_flip_sign\": true}"],
    )
    assert cfg.build_energy().flip_sign


def test_overrides() -> None:
    assert parse_override("train.stages=3") == (["train", "stages"], 3)
    assert parse_override("warm_start.reference=ref.csv") == (["warm_start", "reference"], "ref.csv")
    assert parse_override("eval.metrics=[\"w2\"]") == (["eval", "metrics"], ["w2"])
    with pytest.raises(ConfigError):
        parse_override("train.stages")

    cfg = load_configuration(
        _resource_path("tiny_mw_config.json"), ["train.stages=3", "schedule.sigma=0.25", "seeds.master=11"]
    )
    assert cfg.train.stages == 3
    assert cfg.schedule == ConstantSchedule(sigma=0.25)
    assert cfg.seeds.master == 11

    with pytest.raises(ConfigError, match="train.learning_rate"):
        load_configuration(_resource_path("tiny_mw_config.json"), ["train.learning_rate=0.1"])
    with pytest.raises(ConfigError):
        apply_overrides({"train": 3}, ["train.stages=1"])


def test_snapshot_round_trip(tiny_config) -> None:
    snapshot = tiny_config.snapshot()
    assert snapshot["schedule"] == {"kind": "constant", "sigma": 0.5}
    again = validate_document(json.loads(json.dumps(snapshot)))
    assert again == tiny_config
    assert again.content_hash() == tiny_config.content_hash()


def test_build_process() -> None:
    cfg = load_configuration("preset:demo_vp")
    assert cfg.build_process().drift_kind is DriftKind.VP
    corrector = cfg.build_analytic_corrector()
    np.testing.assert_allclose(corrector(np.array([[0.5]])), [[-0.5]], rtol=1e-10)


def test_rng_streams_are_reproducible_and_distinct() -> None:
    first, second = rng_streams(4), rng_streams(4)
    assert set(first) == {"train", "sample", "eval", "langevin", "warm_start"}
    draws = {name: gen.integers(0, 2**62) for name, gen in first.items()}
    assert draws == {name: gen.integers(0, 2**62) for name, gen in second.items()}
    assert len(set(draws.values())) == len(draws)


def test_config_help_lists_keys() -> None:
    text = config_help()
    assert "train.stages = 5" in text
    assert "train.batch_size = 512" in text
    assert "schedule[kind=constant].sigma" in text
    assert "energy.family = <required>" in text
    assert "eval.sinkhorn.reg = 0.001" in text
