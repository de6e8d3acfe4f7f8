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
"""Symmetry-aware distance between particle configurations.

``D(x, y) = min_{R in O(k), P in S(n)} |x - (R kron P) y|`` is approximated by
alternating orthogonal Procrustes (reflections allowed) with exact particle
assignment, started from two initial assignments and from both sides.
"""

import numpy as np

from pydantic import BaseModel, ConfigDict, Field
from scipy.optimize import linear_sum_assignment
from scipy.spatial.distance import cdist


class AlignConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    max_alternations: int = Field(default=10, ge=1)
    tol: float = Field(default=1e-8, ge=0)


def procrustes(target: np.ndarray, source: np.ndarray) -> np.ndarray:
    """Orthogonal ``R`` minimizing ``|target - source @ R|_F`` for ``(n, k)`` point sets."""
    u, _, vt = np.linalg.svd(source.T @ target)
    return u @ vt


def _sorted_assignment(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Match particles by rank of their distance to the center of mass, a rotation-invariant guess."""
    rx = np.argsort(np.linalg.norm(x - x.mean(axis=0), axis=1), kind="stable")
    ry = np.argsort(np.linalg.norm(y - y.mean(axis=0), axis=1), kind="stable")
    perm = np.empty(len(x), dtype=int)
    perm[rx] = ry
    return perm


def _align(x: np.ndarray, y: np.ndarray, perm: np.ndarray, cfg: AlignConfig) -> float:
    best = np.inf
    for _ in range(cfg.max_alternations):
        rot = procrustes(x, y[perm])
        y_rot = y @ rot
        _, perm = linear_sum_assignment(cdist(x, y_rot, "sqeuclidean"))
        dist = float(np.linalg.norm(x - y_rot[perm]))
        if best - dist <= cfg.tol:
            best = min(best, dist)
            break
        best = dist
    return best


def _one_sided(x: np.ndarray, y: np.ndarray, cfg: AlignConfig) -> float:
    starts = (np.arange(len(x)), _sorted_assignment(x, y))
    return min(_align(x, y, perm, cfg) for perm in starts)


def geometric_distance(x: np.ndarray, y: np.ndarray, n: int, k: int, cfg: AlignConfig | None = None) -> float:
    """Approximate ``D(x, y)`` for ZCOM-projected configurations of ``n`` particles in ``k`` dimensions.

    Never exceeds the plain Euclidean distance and is symmetric in ``x`` and ``y``.
    """
    cfg = cfg or AlignConfig()
    xs = np.asarray(x, dtype=np.float64).reshape(n, k)
    ys = np.asarray(y, dtype=np.float64).reshape(n, k)
    plain = float(np.linalg.norm(xs - ys))
    return min(plain, _one_sided(xs, ys, cfg), _one_sided(ys, xs, cfg))
