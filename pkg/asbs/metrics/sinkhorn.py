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
"""Entropy-regularized optimal transport between two point clouds.

The reported value is the transport cost ``<pi*, C>`` of the entropic plan
with uniform marginals and squared-Euclidean ground cost, not the debiased
Sinkhorn divergence. The solves are delegated to POT: a log-domain Sinkhorn
at a single ``reg``, or a chain of stabilized solves over a decreasing ``reg``
schedule, each warm-started from the previous dual potentials.
"""

import logging

from typing import NamedTuple

import numpy as np
import ot

from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.distance import cdist


logger = logging.getLogger(__name__)

EPS_SCALING_FACTOR = 0.5
# Marginal violation accepted on the intermediate stages of the reg schedule.
STAGE_TOL = 1e-6


class SinkhornConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    reg: float = Field(default=1e-3, gt=0)
    max_iters: int = Field(default=10_000, ge=1)
    tol: float = Field(default=1e-9, gt=0)
    eps_scaling: bool = True


class SinkhornResult(NamedTuple):
    value: float
    converged: bool
    iterations: int

    @property
    def sqrt_value(self) -> float:
        return float(np.sqrt(max(self.value, 0.0)))


def reg_schedule(cost: np.ndarray, cfg: SinkhornConfig) -> list[float]:
    """Regularizations to solve at, ending at ``cfg.reg``."""
    schedule = [cfg.reg]
    if cfg.eps_scaling:
        reg = max(float(cost.max()), cfg.reg)
        while reg > cfg.reg:
            schedule.insert(-1, reg)
            reg *= EPS_SCALING_FACTOR
    return schedule


def _converged(log: dict, tol: float) -> bool:
    return bool(log["err"]) and float(log["err"][-1]) <= tol


def sinkhorn_plan(cost: np.ndarray, cfg: SinkhornConfig) -> tuple[np.ndarray, bool, int]:
    """Entropic plan for a cost matrix with uniform marginals.

    :return: ``(plan, converged, iterations)``; ``converged`` refers to the final ``reg``.
    """
    n, m = cost.shape
    if n == 0 or m == 0:
        raise ValueError("Sinkhorn needs at least one point on each side")
    a = np.full(n, 1.0 / n)
    b = np.full(m, 1.0 / m)

    schedule = reg_schedule(cost, cfg)
    if len(schedule) == 1:
        plan, log = ot.bregman.sinkhorn_log(
            a, b, cost, cfg.reg, numItermax=cfg.max_iters, stopThr=cfg.tol, log=True, warn=False
        )
        return plan, _converged(log, cfg.tol), int(log["niter"]) + 1

    total = 0
    warmstart = None
    for stage, reg in enumerate(schedule):
        tol = cfg.tol if stage == len(schedule) - 1 else max(cfg.tol, STAGE_TOL)
        plan, log = ot.bregman.sinkhorn_stabilized(
            a, b, cost, reg, numItermax=cfg.max_iters, stopThr=tol, warmstart=warmstart, log=True, warn=False
        )
        warmstart = log["warmstart"]
        total += int(log["n_iter"]) + 1
    return plan, _converged(log, cfg.tol), total


def sinkhorn_distance(a: np.ndarray, b: np.ndarray, cfg: SinkhornConfig | None = None) -> SinkhornResult:
    """Entropic OT cost between the empirical measures of ``a`` (n x d) and ``b`` (m x d).

    A run that hits ``max_iters`` still returns its value, flagged ``converged=False``.
    """
    cfg = cfg or SinkhornConfig()
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    cost = cdist(a, b, "sqeuclidean")
    plan, converged, iterations = sinkhorn_plan(cost, cfg)
    value = float(np.sum(plan * cost))
    if converged:
        logger.debug(f"Sinkhorn converged after {iterations} iterations: {value:.6g}")
    else:
        logger.warning(f"Sinkhorn did not converge within {cfg.max_iters} iterations (reg={cfg.reg:g})")
    return SinkhornResult(value, converged, iterations)
