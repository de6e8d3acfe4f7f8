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
from .config import (
    METRIC_NAMES,
    EnergyConfig,
    EvalConfig,
    LangevinConfig,
    RunConfig,
    SeedConfig,
    TrainConfig,
    WarmStartConfig,
    apply_overrides,
    config_help,
    list_presets,
    load_configuration,
    rng_streams,
    validate_document,
)
from .buffer import BufferBatch, ReplayBuffer
from .sampler import CorrectorSource, LossRecord, TrainedSampler, init_sampler
from .trainer import (
    RUNNERS,
    adjoint_targets,
    am_epoch,
    cm_epoch,
    initial_state,
    run_as_baseline,
    run_asbs,
    run_fixed_corrector,
    run_memoryless_demo,
    sample,
    warm_start,
)
from .checkpoint import latest_stage_dir, load_checkpoint, save_checkpoint, write_loss_trace
