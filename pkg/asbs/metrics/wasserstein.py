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
"""Exact Wasserstein-2 distances between equally sized sample sets."""

import logging

import numpy as np

from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist

from asbs.core.energy import EnergyModel
from asbs.core.errors import SizeMismatch
from asbs.core.utils import parallel_map
from asbs.metrics.geometry import AlignConfig, geometric_distance


logger = logging.getLogger(__name__)


def _check_sizes(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape[0] != b.shape[0]:
        raise SizeMismatch(f"W2 needs equal sample counts, got {a.shape[0]} and {b.shape[0]}")
    if a.ndim == 2 and b.ndim == 2 and a.shape[1] != b.shape[1]:
        raise SizeMismatch(f"Sample dimensions differ: {a.shape[1]} and {b.shape[1]}")


def w2_from_cost(cost: np.ndarray) -> float:
    """``sqrt`` of the mean cost of the optimal one-to-one assignment."""
    if cost.size == 0:
        return 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(np.sqrt(max(np.mean(cost[rows, cols]), 0.0)))


def w2_exact(a: np.ndarray, b: np.ndarray) -> float:
    """Exact W2 between the empirical measures of ``a`` and ``b`` (both ``n x d``)."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    _check_sizes(a, b)
    return w2_from_cost(cdist(a, b, "sqeuclidean"))


def geometric_w2(
    a: np.ndarray, b: np.ndarray, n_particles: int, space_dim: int, cfg: AlignConfig | None = None
) -> float:
    """W2 with the rotation-, reflection- and permutation-invariant ground distance.

    Rows of the cost matrix are filled on the worker pool.
    """
    cfg = cfg or AlignConfig()
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    _check_sizes(a, b)

    def row(x):
        return [geometric_distance(x, y, n_particles, space_dim, cfg) ** 2 for y in b]

    cost = np.asarray(parallel_map(row, a), dtype=np.float64).reshape(a.shape[0], b.shape[0])
    logger.debug(f"Filled a {cost.shape[0]}x{cost.shape[1]} geometric cost matrix")
    return w2_from_cost(cost)


def energy_w2(model: EnergyModel, a: np.ndarray, b: np.ndarray) -> float:
    """1D W2 between the energy values of two sample sets (sorted quantile matching)."""
    a, b = np.atleast_2d(a), np.atleast_2d(b)
    _check_sizes(a, b)
    if a.shape[0] == 0:
        return 0.0
    ea = np.sort(np.atleast_1d(model.energy(a)))
    eb = np.sort(np.atleast_1d(model.energy(b)))
    return float(np.sqrt(np.mean((ea - eb) ** 2)))
