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
"""Reference Schrödinger-bridge drift for 1D problems with a Brownian base.

The static bridge couples ``mu`` and ``nu`` through the base kernel,
``pi(x0, x1) = a(x0) p(x1 | x0) b(x1)``. On a grid, ``a`` and ``b`` are found by
POT's log-domain Sinkhorn with the base kernel as Gibbs kernel; the optimal control is then

    u_t(x) = sigma_t d/dx log phi_t(x),   phi_t(x) = int p(x1 | x_t = x) b(x1) dx1.
"""

import logging

from typing import Callable

import numpy as np
import ot

from scipy.special import logsumexp, softmax

from asbs.core.baseproc.schedule import NoiseSchedule


logger = logging.getLogger(__name__)

LogDensity = Callable[[np.ndarray], np.ndarray]


class EntropicBridge:
    """Solved two-marginal Schrödinger system on a 1D grid."""

    def __init__(
        self,
        log_mu: LogDensity,
        log_nu: LogDensity,
        schedule: NoiseSchedule,
        grid: np.ndarray,
        tol: float = 1e-12,
        max_iters: int = 100_000,
    ):
        self.schedule = schedule
        self.grid = np.asarray(grid, dtype=np.float64)
        k10 = schedule.kappa_total
        log_mu_w = log_mu(self.grid)
        log_mu_w = log_mu_w - logsumexp(log_mu_w)
        log_nu_w = log_nu(self.grid)
        log_nu_w = log_nu_w - logsumexp(log_nu_w)
        cost = 0.5 * (self.grid[:, None] - self.grid[None, :]) ** 2

        _, log = ot.bregman.sinkhorn_log(
            np.exp(log_mu_w), np.exp(log_nu_w), cost, k10, numItermax=max_iters, stopThr=tol, log=True, warn=False
        )
        self.converged = bool(log["err"]) and float(log["err"][-1]) < tol
        self.iterations = int(log["niter"]) + 1
        self.log_b = np.asarray(log["log_v"])
        if not self.converged:
            logger.warning(f"Entropic bridge did not converge within {max_iters} iterations")

    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        """``u_t(x) = sigma_t grad log phi_t(x)`` for ``t < 1``."""
        x = np.asarray(x, dtype=np.float64)
        k1t = float(self.schedule.kappa(t, 1.0))
        logits = -((self.grid[None, :] - x.ravel()[:, None]) ** 2) / (2.0 * k1t) + self.log_b[None, :]
        weights = softmax(logits, axis=1)
        score = (weights @ self.grid - x.ravel()) / k1t
        return (self.schedule.sigma(t) * score).reshape(x.shape)


def entropic_bridge_drift(
    log_mu: LogDensity,
    log_nu: LogDensity,
    schedule: NoiseSchedule,
    grid: np.ndarray,
    times: np.ndarray,
    points: np.ndarray,
) -> np.ndarray:
    """Optimal drift on the ``times x points`` grid, shape ``(len(times), len(points))``."""
    bridge = EntropicBridge(log_mu, log_nu, schedule, grid)
    return np.stack([bridge.drift(t, points) for t in times])
