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
"""Per-stage checkpoints.

A checkpoint is a directory::

    stage_003/
        control.net      network container (parameters + Adam state)
        corrector.net    present when the sampler trains a corrector network
        meta.json        config snapshot, counters, seeds and loss traces

``meta.json`` holds no wall-clock values, so identical runs write identical
checkpoints.
"""

import json
import logging
import os
import re

import numpy as np

from asbs.core.diffnet import load_network, save_network
from asbs.core.errors import CheckpointError, ConfigError
from asbs.train.config import validate_document
from asbs.train.sampler import CorrectorSource, LossRecord, TrainedSampler, init_sampler


logger = logging.getLogger(__name__)

META_FILE = "meta.json"
CONTROL_FILE = "control.net"
CORRECTOR_FILE = "corrector.net"
FORMAT_VERSION = 1
_STAGE_DIR = re.compile(r"^stage_(\d+)$")


def stage_dir(out_dir: str, stage: int) -> str:
    return os.path.join(out_dir, f"stage_{stage:03d}")


def save_checkpoint(state: TrainedSampler, out_dir: str) -> str:
    """Write ``state`` to ``out_dir/stage_<k>`` and return that directory."""
    path = stage_dir(out_dir, state.stage)
    os.makedirs(path, exist_ok=True)
    save_network(os.path.join(path, CONTROL_FILE), state.control, state.control_adam)
    if state.corrector is not None:
        save_network(os.path.join(path, CORRECTOR_FILE), state.corrector, state.corrector_adam)
    meta = {
        "format_version": FORMAT_VERSION,
        "config": state.config.snapshot(),
        "energy": {"family": state.energy.name, "params": state.energy.params},
        "stage": state.stage,
        "counters": {
            "am_epochs": state.am_epochs,
            "cm_epochs": state.cm_epochs,
            "control_steps": state.control_steps,
            "corrector_steps": state.corrector_steps,
        },
        "corrector_source": state.corrector_source.value,
        "seeds": {"master": state.config.seeds.master},
        "losses": [record._asdict() for record in state.losses],
    }
    with open(os.path.join(path, META_FILE), "w", encoding="utf-8") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
    logger.info(f"Saved checkpoint {path}")
    return path


def latest_stage_dir(path: str) -> str:
    """Resolve a run directory to its newest stage directory; stage directories resolve to themselves."""
    if os.path.isfile(os.path.join(path, META_FILE)):
        return path
    if not os.path.isdir(path):
        raise CheckpointError(f"Checkpoint '{path}' does not exist")
    stages = [(int(m.group(1)), name) for name in os.listdir(path) if (m := _STAGE_DIR.match(name))]
    if not stages:
        raise CheckpointError(f"'{path}' contains no stage checkpoints")
    return os.path.join(path, max(stages)[1])


def load_checkpoint(path: str) -> TrainedSampler:
    """Rebuild a sampler from a stage directory (or the newest stage of a run directory)."""
    path = latest_stage_dir(path)
    try:
        with open(os.path.join(path, META_FILE), "r", encoding="utf-8") as f:
            meta = json.load(f)
    except (OSError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"Unreadable checkpoint metadata in '{path}': {exc}") from exc
    if meta.get("format_version") != FORMAT_VERSION:
        raise CheckpointError(f"'{path}' was not written by this version of asbs")

    try:
        config = validate_document(meta["config"], os.path.join(path, META_FILE))
        source = CorrectorSource(meta["corrector_source"])
    except (KeyError, ValueError, ConfigError) as exc:
        raise CheckpointError(f"Inconsistent checkpoint metadata in '{path}': {exc}") from exc

    state = init_sampler(config, np.random.default_rng(0), corrector_source=source)
    state.control, state.control_adam, _ = load_network(os.path.join(path, CONTROL_FILE))
    corrector_path = os.path.join(path, CORRECTOR_FILE)
    if os.path.isfile(corrector_path):
        state.corrector, state.corrector_adam, _ = load_network(corrector_path)
    elif source is CorrectorSource.NETWORK:
        state.corrector = state.corrector_adam = None

    counters = meta.get("counters", {})
    state.stage = int(meta.get("stage", 0))
    state.am_epochs = int(counters.get("am_epochs", 0))
    state.cm_epochs = int(counters.get("cm_epochs", 0))
    state.control_steps = int(counters.get("control_steps", 0))
    state.corrector_steps = int(counters.get("corrector_steps", 0))
    state.losses = [LossRecord(**record) for record in meta.get("losses", [])]
    if state.control.spec != config.train.mlp_spec(state.energy.dim):
        raise CheckpointError(f"Control network in '{path}' does not match the configured architecture")
    logger.info(f"Loaded checkpoint {path} (stage {state.stage})")
    return state


def write_loss_trace(path: str, state: TrainedSampler) -> None:
    """Loss traces as CSV: ``kind,stage,epoch,loss``."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write("kind,stage,epoch,loss\n")
        for record in state.losses:
            f.write(f"{record.kind},{record.stage},{record.epoch},{record.loss!r}\n")
