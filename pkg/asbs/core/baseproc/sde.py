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
"""Euler-Maruyama simulation of the controlled SDE

    dX_t = [f_t(X_t) + sigma_t u_t(X_t)] dt + sigma_t dW_t,   X_0 ~ mu.

The noise of a step is drawn with the exact base variance ``kappa_{t+dt|t}``
rather than ``sigma_t^2 dt``; only the drift is discretized.

Paths are simulated in fixed-size shards, each driven by its own child seed,
so the output depends only on the generator passed in and never on the number
of worker threads.
"""

import logging

from typing import Callable, NamedTuple

import numpy as np

from pydantic import BaseModel, ConfigDict, Field

from asbs.core.baseproc.process import BaseProcess
from asbs.core.errors import NonFinite
from asbs.core.utils import derive_seed, parallel_map


logger = logging.getLogger(__name__)

SHARD_SIZE = 1024

Control = Callable[[float, np.ndarray], np.ndarray]


class SdeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    n_steps: int = Field(default=100, ge=1)
    record_trajectory: bool = False


class SimulationResult(NamedTuple):
    x0: np.ndarray
    x1: np.ndarray
    # (n_steps + 1, count, d) states on the uniform grid, when recorded
    trajectory: np.ndarray | None = None


def _check_finite(x: np.ndarray, t: float, step: int, offset: int) -> None:
    bad = ~np.all(np.isfinite(x), axis=-1)
    if np.any(bad):
        index = offset + int(np.argmax(bad))
        raise NonFinite(f"SDE state left the finite range at t={t:.4f} (step {step}), path {index}")


def _simulate_shard(proc, control, sde, seed, size, offset):
    rng = np.random.default_rng(seed)
    grid = np.linspace(0.0, 1.0, sde.n_steps + 1)
    x = proc.sample_prior(rng, size)
    x0 = x.copy()
    trajectory = [x0] if sde.record_trajectory else None

    for n in range(sde.n_steps):
        t, t_next = grid[n], grid[n + 1]
        dt = t_next - t
        drift = proc.drift(t, x)
        if control is not None:
            u = np.asarray(control(t, x), dtype=np.float64)
            _check_finite(u, t, n, offset)
            drift = drift + proc.sigma(t) * u
        noise = np.sqrt(proc.kappa(t, t_next)) * rng.standard_normal(x.shape)
        x = x + proc.project(drift) * dt + proc.project(noise)
        _check_finite(x, t_next, n + 1, offset)
        if trajectory is not None:
            trajectory.append(x)

    return x0, x, None if trajectory is None else np.stack(trajectory)


def simulate(
    proc: BaseProcess, control: Control | None, sde: SdeConfig, rng: np.random.Generator, count: int
) -> SimulationResult:
    """Simulate ``count`` paths and return their endpoints.

    :param control: ``u_t(x)`` evaluated on a ``(B, d)`` batch, or ``None`` for the base process.
        The drift contributed to the SDE is ``sigma_t u_t(x)``.
    :raises NonFinite: if a state or control value is not finite.
    """
    if count < 0:
        raise ValueError(f"count must be non-negative, got {count}")
    sizes = [min(SHARD_SIZE, count - start) for start in range(0, count, SHARD_SIZE)]
    seeds = derive_seed(rng).spawn(len(sizes))
    offsets = np.cumsum([0] + sizes[:-1]) if sizes else []

    shards = parallel_map(
        lambda job: _simulate_shard(proc, control, sde, job[0], job[1], job[2]),
        zip(seeds, sizes, offsets),
    )
    if not shards:
        empty = np.zeros((0, proc.dim))
        trajectory = np.zeros((sde.n_steps + 1, 0, proc.dim)) if sde.record_trajectory else None
        return SimulationResult(empty, empty.copy(), trajectory)

    x0 = np.concatenate([s[0] for s in shards])
    x1 = np.concatenate([s[1] for s in shards])
    trajectory = np.concatenate([s[2] for s in shards], axis=1) if sde.record_trajectory else None
    logger.debug(f"Simulated {count} paths in {len(shards)} shards with {sde.n_steps} steps")
    return SimulationResult(x0, x1, trajectory)
