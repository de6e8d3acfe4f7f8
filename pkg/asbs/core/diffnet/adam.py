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
"""Adam optimizer over flat parameter vectors.

The update is functional: :func:`adam_step` returns new parameters and a new
state and leaves its inputs untouched, so a caller can roll back by keeping the
old objects.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from asbs.core.diffnet.mlp import MlpParams


@dataclass(frozen=True, eq=False)
class AdamState:
    lr: float
    m: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def zeros(cls, n_params: int, lr: float, **hyper) -> "AdamState":
        return cls(lr=lr, m=np.zeros(n_params), v=np.zeros(n_params), **hyper)

    def hyperparameters(self) -> dict:
        return {"lr": self.lr, "step": self.step, "beta1": self.beta1, "beta2": self.beta2, "eps": self.eps}


def adam_step(state: AdamState, params: MlpParams, grad: np.ndarray) -> tuple[MlpParams, AdamState]:
    """One bias-corrected Adam update."""
    grad = np.asarray(grad, dtype=np.float64)
    if grad.shape != params.values.shape or state.m.shape != grad.shape:
        raise ValueError(
            f"Shape mismatch: params {params.values.shape}, grad {grad.shape}, moments {state.m.shape}"
        )
    step = state.step + 1
    m = state.beta1 * state.m + (1.0 - state.beta1) * grad
    v = state.beta2 * state.v + (1.0 - state.beta2) * grad * grad
    m_hat = m / (1.0 - state.beta1**step)
    v_hat = v / (1.0 - state.beta2**step)
    values = params.values - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)
    return MlpParams(params.spec, values), replace(state, m=m, v=v, step=step)
