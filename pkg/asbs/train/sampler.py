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
"""State of a (partially) trained sampler.

The control is parametrized as ``u_theta(t, x) = sigma_t v_theta(t, x)`` and the
corrector as ``h_phi(x) = v_phi(1, x)``. A sampler can instead use the analytic
corrector ``grad log p_base_1``, which is how the memoryless baselines run.
"""

import logging

from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from asbs.core.baseproc import AnalyticCorrector, BaseProcess
from asbs.core.diffnet import AdamState, MlpParams, forward, init_params
from asbs.core.energy import EnergyModel
from asbs.core.utils import derive_seed
from asbs.train.buffer import ReplayBuffer
from asbs.train.config import RunConfig


logger = logging.getLogger(__name__)


class CorrectorSource(str, Enum):
    NETWORK = "network"
    ANALYTIC = "analytic"


class LossRecord(NamedTuple):
    kind: str
    stage: int
    epoch: int
    loss: float


@dataclass
class TrainedSampler:
    config: RunConfig
    energy: EnergyModel
    process: BaseProcess
    control: MlpParams
    control_adam: AdamState
    corrector: MlpParams | None
    corrector_adam: AdamState | None
    adjoint_buffer: ReplayBuffer
    corrector_buffer: ReplayBuffer
    corrector_source: CorrectorSource = CorrectorSource.NETWORK
    analytic: AnalyticCorrector | None = None
    stage: int = 0
    am_epochs: int = 0
    cm_epochs: int = 0
    control_steps: int = 0
    corrector_steps: int = 0
    losses: list[LossRecord] = field(default_factory=list)

    def control_drift(self, t, x: np.ndarray) -> np.ndarray:
        """``u_theta(t, x) = sigma_t v_theta(t, x)``."""
        v = forward(self.control.spec, self.control, t, x)
        return self.process.project(np.asarray(self.process.sigma(t)).reshape(-1, 1) * v)

    def corrector_value(self, x: np.ndarray) -> np.ndarray:
        """``h(x)``: the corrector network at ``t = 1``, or the analytic terminal score."""
        x = np.atleast_2d(x)
        if self.corrector_source is CorrectorSource.ANALYTIC:
            return self.analytic(x)
        if self.corrector is None:
            return np.zeros_like(x)
        return self.process.project(forward(self.corrector.spec, self.corrector, 1.0, x))

    def clone(self) -> "TrainedSampler":
        """Copy whose mutation leaves this state untouched (parameters and optimizer states are immutable)."""
        return replace(
            self,
            adjoint_buffer=self.adjoint_buffer.copy(),
            corrector_buffer=self.corrector_buffer.copy(),
            losses=list(self.losses),
        )

    def record(self, kind: str, epoch: int, loss: float) -> None:
        self.losses.append(LossRecord(kind, self.stage, epoch, float(loss)))


def init_sampler(
    config: RunConfig,
    rng: np.random.Generator,
    energy: EnergyModel | None = None,
    corrector_source: CorrectorSource = CorrectorSource.NETWORK,
) -> TrainedSampler:
    """Fresh sampler: random control, exact-zero corrector network.

    The control and corrector draw from two child seeds of ``rng`` whether or not
    a corrector network is built, so the control initialization depends only on
    ``rng``.
    """
    energy = energy or config.build_energy()
    process = config.build_process(energy)
    train = config.train
    spec = train.mlp_spec(energy.dim)
    control_seed, corrector_seed = derive_seed(rng).spawn(2)

    zero_control = train.init == "zero_control"
    control = init_params(spec, np.random.default_rng(control_seed), zero_final=zero_control)
    corrector = corrector_adam = None
    if corrector_source is CorrectorSource.NETWORK:
        corrector = init_params(spec, np.random.default_rng(corrector_seed), zero_final=True)
        corrector_adam = AdamState.zeros(spec.n_params, train.lr_corrector)

    analytic = None
    if corrector_source is CorrectorSource.ANALYTIC or zero_control:
        analytic = AnalyticCorrector(process)

    logger.info(f"Initialized {spec.n_params}-parameter control for {energy.name} (dim {energy.dim})")
    return TrainedSampler(
        config=config,
        energy=energy,
        process=process,
        control=control,
        control_adam=AdamState.zeros(spec.n_params, train.lr_control),
        corrector=corrector,
        corrector_adam=corrector_adam,
        adjoint_buffer=ReplayBuffer(train.buffer_capacity, energy.dim, with_target=True),
        corrector_buffer=ReplayBuffer(train.buffer_capacity, energy.dim),
        corrector_source=corrector_source,
        analytic=analytic,
    )
