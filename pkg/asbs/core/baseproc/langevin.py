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
"""Unadjusted Langevin algorithm, the MCMC baseline.

    x <- x - h grad E(x) + sqrt(2 h) xi
"""

import logging

import numpy as np

from asbs.core.baseproc.prior import Prior, sample_prior
from asbs.core.energy import EnergyModel
from asbs.core.errors import NonFinite


logger = logging.getLogger(__name__)

PROGRESS_STEPS = 10


def langevin_sample(
    energy: EnergyModel,
    step_size: float,
    n_steps: int,
    init: Prior,
    rng: np.random.Generator,
    count: int,
) -> np.ndarray:
    """Run ``count`` independent ULA chains from ``init`` and return their final states.

    Chains of ZCOM energies start from, and stay on, the zero center-of-mass subspace.

    :raises NonFinite: if any chain diverges.
    """
    if not step_size > 0:
        raise ValueError(f"step_size must be positive, got {step_size}")
    if n_steps < 0:
        raise ValueError(f"n_steps must be non-negative, got {n_steps}")

    x = energy.project(sample_prior(init, rng, count, energy.dim))
    if count == 0:
        return x
    scale = np.sqrt(2.0 * step_size)
    report_every = max(1, n_steps // PROGRESS_STEPS)
    for step in range(1, n_steps + 1):
        noise = energy.project(rng.standard_normal(x.shape))
        x = x - step_size * energy.grad(x) + scale * noise
        if not np.all(np.isfinite(x)):
            raise NonFinite(f"Langevin chain diverged at step {step} (step size {step_size:g})")
        if step % report_every == 0:
            logger.debug(f"Langevin step {step}/{n_steps}")
    return x
