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
"""Energy landscape interface and family-independent helpers.

An :class:`EnergyModel` evaluates ``E(x)`` and its exact gradient on single
points of shape ``(d,)`` or on batches of shape ``(B, d)``. Particle systems
store ``n`` particles in ``k`` spatial dimensions as ``x = [x_1; ...; x_n]``.
"""

import logging
import threading

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum

import numpy as np

from asbs.core.errors import NonFinite


logger = logging.getLogger(__name__)

MIN_PAIR_DISTANCE = 1e-6


class EnergyFamily(str, Enum):
    MW = "MW"
    DW4 = "DW4"
    LJ = "LJ"
    GMM40 = "GMM40"
    GAUSS = "GAUSS"


@dataclass(frozen=True)
class GradClipRule:
    alpha_max: float

    def __post_init__(self):
        if not self.alpha_max > 0:
            raise ValueError(f"alpha_max must be positive, got {self.alpha_max}")


def clip_grad(g: np.ndarray, rule: GradClipRule | None) -> np.ndarray:
    """Rescale each sample's gradient so its L2 norm does not exceed ``rule.alpha_max``.

    Works on a single vector or row-wise on a batch. ``rule=None`` disables clipping.
    """
    g = np.asarray(g, dtype=np.float64)
    if rule is None:
        return g
    norms = np.linalg.norm(g, axis=-1, keepdims=True)
    scale = np.minimum(1.0, rule.alpha_max / np.where(norms > 0, norms, 1.0))
    return g * scale


def zcom_project(x: np.ndarray, n: int, k: int) -> np.ndarray:
    """Project onto the zero center-of-mass subspace, ``A = (I_n - 11^T/n) kron I_k``.

    Accepts ``(n*k,)`` or ``(..., n*k)`` arrays.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != n * k:
        raise ValueError(f"Vector length {x.shape[-1]} does not match n*k = {n}*{k}")
    particles = x.reshape(*x.shape[:-1], n, k)
    centered = particles - particles.mean(axis=-2, keepdims=True)
    return centered.reshape(x.shape)


def pair_geometry(x: np.ndarray, n: int, k: int):
    """Full pairwise displacement and distance tensors for a batch.

    :return: ``(diffs, dists, mask)`` with shapes ``(B, n, n, k)``, ``(B, n, n)``
        and ``(n, n)``; the diagonal of ``dists`` is set to 1 and masked out.
    :raises NonFinite: if two distinct particles are closer than ``MIN_PAIR_DISTANCE``.
    """
    particles = x.reshape(x.shape[0], n, k)
    diffs = particles[:, :, None, :] - particles[:, None, :, :]
    dists = np.linalg.norm(diffs, axis=-1)
    mask = ~np.eye(n, dtype=bool)
    if n > 1:
        closest = np.min(dists[:, mask])
        if not closest > MIN_PAIR_DISTANCE:
            raise NonFinite(f"Pairwise distance {closest:.3e} below {MIN_PAIR_DISTANCE:g}")
    dists = np.where(mask, dists, 1.0)
    return diffs, dists, mask


class EnergyModel(ABC):
    """An energy landscape ``E`` defining the Boltzmann target ``exp(-E)``.

    Instances are immutable apart from the evaluation counter, which is
    protected by a lock so a model can be shared across worker threads.
    """

    family: EnergyFamily

    def __init__(self, dim: int, n_particles: int = 0, space_dim: int = 1, zcom: bool = False):
        if dim <= 0:
            raise ValueError(f"dim must be positive, got {dim}")
        if n_particles > 0 and n_particles * space_dim != dim:
            raise ValueError(f"dim {dim} != n_particles {n_particles} x space_dim {space_dim}")
        if zcom and n_particles <= 0:
            raise ValueError("zcom requires a particle-structured model")
        self.dim = dim
        self.n_particles = n_particles
        self.space_dim = space_dim
        self.zcom = zcom
        self._evaluations = 0
        self._lock = threading.Lock()

    @property
    def name(self) -> str:
        return self.family.value

    @property
    @abstractmethod
    def params(self) -> dict:
        """Family parameters, recorded in run metadata."""

    @abstractmethod
    def _energy(self, x: np.ndarray) -> np.ndarray:
        """Energies of a ``(B, d)`` batch."""

    @abstractmethod
    def _grad(self, x: np.ndarray) -> np.ndarray:
        """Unprojected gradients of a ``(B, d)`` batch."""

    @property
    def evaluations(self) -> int:
        """Number of per-sample energy or gradient evaluations so far."""
        return self._evaluations

    def reset_counter(self) -> None:
        with self._lock:
            self._evaluations = 0

    def _count(self, batch: int) -> None:
        with self._lock:
            self._evaluations += batch

    def _as_batch(self, x):
        x = np.asarray(x, dtype=np.float64)
        single = x.ndim == 1
        batch = x[None, :] if single else x
        if batch.shape[-1] != self.dim:
            raise ValueError(f"{self.name}: expected dimension {self.dim}, got {batch.shape[-1]}")
        if not np.all(np.isfinite(batch)):
            raise NonFinite(f"{self.name}: non-finite input state")
        return batch, single

    def energy(self, x: np.ndarray):
        batch, single = self._as_batch(x)
        self._count(batch.shape[0])
        values = self._energy(batch) if batch.shape[0] else np.zeros(0)
        if not np.all(np.isfinite(values)):
            raise NonFinite(f"{self.name}: non-finite energy")
        return float(values[0]) if single else values

    def grad(self, x: np.ndarray) -> np.ndarray:
        batch, single = self._as_batch(x)
        self._count(batch.shape[0])
        g = self._grad(batch) if batch.shape[0] else np.zeros_like(batch)
        if not np.all(np.isfinite(g)):
            raise NonFinite(f"{self.name}: non-finite energy gradient")
        if self.zcom:
            g = zcom_project(g, self.n_particles, self.space_dim)
        return g[0] if single else g

    def project(self, x: np.ndarray) -> np.ndarray:
        """ZCOM-project ``x`` when the model lives on the zero center-of-mass subspace."""
        if not self.zcom:
            return np.asarray(x, dtype=np.float64)
        return zcom_project(x, self.n_particles, self.space_dim)

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim}, params={self.params})"


def energy_eval(model: EnergyModel, x: np.ndarray):
    return model.energy(x)


def energy_grad(model: EnergyModel, x: np.ndarray) -> np.ndarray:
    return model.grad(x)
