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
"""The uncontrolled base process and its closed-form kernels.

Two drifts are supported. With ``ZERO`` drift the base is a time-changed
Brownian motion, ``p(X_t | X_s) = N(X_s, kappa_{t|s} I)``. With ``VP`` drift,
``f_t(x) = -beta_t x / 2`` paired with ``sigma_t = sqrt(beta_t)``, the base is
an Ornstein-Uhlenbeck process whose marginals contract towards ``N(0, I)``.
"""

import logging

from dataclasses import dataclass
from enum import Enum

import numpy as np

from scipy import linalg

from asbs.core.baseproc.prior import (
    HarmonicPrior,
    Prior,
    prior_covariance,
    prior_location,
    sample_prior,
)
from asbs.core.baseproc.schedule import LinearVPSchedule, NoiseSchedule
from asbs.core.energy import zcom_project
from asbs.core.errors import UnsupportedBase


logger = logging.getLogger(__name__)


class DriftKind(str, Enum):
    ZERO = "zero"
    VP = "vp"


@dataclass(frozen=True)
class BaseProcess:
    schedule: NoiseSchedule
    prior: Prior
    dim: int
    drift_kind: DriftKind = DriftKind.ZERO
    particles: tuple[int, int] | None = None
    zcom: bool = False

    def __post_init__(self):
        object.__setattr__(self, "drift_kind", DriftKind(self.drift_kind))
        is_vp_schedule = isinstance(self.schedule, LinearVPSchedule)
        if (self.drift_kind is DriftKind.VP) != is_vp_schedule:
            raise UnsupportedBase("The VP drift must be paired with the 'vp' schedule and vice versa")
        if self.zcom and self.particles is None:
            raise ValueError("zcom requires the particle shape (n, k)")
        if self.particles is not None and self.particles[0] * self.particles[1] != self.dim:
            raise ValueError(f"Particle shape {self.particles} does not match dimension {self.dim}")

    @property
    def is_vp(self) -> bool:
        return self.drift_kind is DriftKind.VP

    def sigma(self, t):
        return self.schedule.sigma(t)

    def kappa(self, s, t):
        return self.schedule.kappa(s, t)

    def drift(self, t: float, x: np.ndarray) -> np.ndarray:
        if self.is_vp:
            return -0.5 * self.schedule.beta(t) * x
        return np.zeros_like(x)

    def project(self, x: np.ndarray) -> np.ndarray:
        if not self.zcom:
            return x
        return zcom_project(x, *self.particles)

    def sample_prior(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return sample_prior(self.prior, rng, count, self.dim, self.particles if self.zcom else None)


def _column(t, size: int) -> np.ndarray:
    return np.broadcast_to(np.asarray(t, dtype=np.float64), (size,))[:, None]


def bridge_sample(proc: BaseProcess, x0: np.ndarray, x1: np.ndarray, t, rng: np.random.Generator) -> np.ndarray:
    """Draw ``X_t ~ p_base(X_t | X_0, X_1)`` for a batch of endpoint pairs.

    For the Brownian base the bridge is ``N((1-g) x0 + g x1, kappa_{t|0} kappa_{1|t} / kappa_{1|0} I)``
    with ``g = kappa_{t|0} / kappa_{1|0}``. ``t`` is a scalar or one time per row.
    """
    if proc.is_vp:
        return vp_bridge_sample(proc, x0, x1, t, rng)
    x0, x1 = np.atleast_2d(x0), np.atleast_2d(x1)
    t = _column(t, x0.shape[0])
    k_t0 = proc.kappa(0.0, t)
    k_1t = proc.kappa(t, 1.0)
    k_10 = proc.schedule.kappa_total
    gamma = k_t0 / k_10
    mean = (1.0 - gamma) * x0 + gamma * x1
    std = np.sqrt(np.maximum(k_t0 * k_1t / k_10, 0.0))
    return mean + std * proc.project(rng.standard_normal(x0.shape))


def base_score(proc: BaseProcess, x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    """``grad_{x1} log p_base(X_1 | X_0) = -(x1 - x0) / kappa_{1|0}`` for the Brownian base."""
    if proc.is_vp:
        raise UnsupportedBase("Corrector matching is only defined for the zero-drift base")
    return -(np.asarray(x1, dtype=np.float64) - np.asarray(x0, dtype=np.float64)) / proc.schedule.kappa_total


def vp_coeffs(proc: BaseProcess, t):
    """``(kappa_t, kappabar_t) = (exp(-1/2 int_t^1 beta), exp(-1/2 int_0^t beta))``."""
    if not proc.is_vp:
        raise UnsupportedBase("VP coefficients need the VP base process")
    schedule = proc.schedule
    t = np.asarray(t, dtype=np.float64)
    beta_t = schedule.beta(t)
    kappa_t = np.exp(-0.25 * (1.0 - t) * (beta_t + schedule.beta(1.0)))
    kappabar_t = np.exp(-0.25 * t * (beta_t + schedule.beta(0.0)))
    return kappa_t, kappabar_t


def vp_bridge_moments(proc: BaseProcess, t):
    """Coefficients ``(c0, c1, var)`` of the VP bridge ``N(c0 x0 + c1 x1, var I)``."""
    kappa_t, kappabar_t = vp_coeffs(proc, t)
    _, kappabar_1 = vp_coeffs(proc, 1.0)
    denom = 1.0 - kappabar_1**2
    c0 = kappabar_t * (1.0 - kappa_t**2) / denom
    c1 = kappa_t * (1.0 - kappabar_t**2) / denom
    var = (1.0 - kappa_t**2) * (1.0 - kappabar_t**2) / denom
    return c0, c1, var


def vp_bridge_sample(proc: BaseProcess, x0: np.ndarray, x1: np.ndarray, t, rng: np.random.Generator) -> np.ndarray:
    x0, x1 = np.atleast_2d(x0), np.atleast_2d(x1)
    c0, c1, var = vp_bridge_moments(proc, _column(t, x0.shape[0]))
    noise = proc.project(rng.standard_normal(x0.shape))
    return c0 * x0 + c1 * x1 + np.sqrt(np.maximum(var, 0.0)) * noise


class AnalyticCorrector:
    """Closed-form ``grad log p_base_1``, the terminal marginal of the uncontrolled process.

    For Gaussian-family priors ``p_base_1`` is Gaussian: under the Brownian base
    its covariance is ``Sigma_0 + kappa_{1|0} I``; under the VP base it is
    ``kappabar_1^2 Sigma_0 + (1 - kappabar_1^2) I`` around ``kappabar_1 m``.
    It is the exact minimizer of corrector matching when the prior is a point
    mass, and therefore the fixed corrector of the memoryless baselines.
    """

    def __init__(self, proc: BaseProcess):
        dim = proc.dim
        cov0 = prior_covariance(proc.prior, dim)
        mean0 = prior_location(proc.prior, dim)
        if proc.is_vp:
            _, kappabar_1 = vp_coeffs(proc, 1.0)
            self.mean = float(kappabar_1) * mean0
            cov = kappabar_1**2 * cov0 + (1.0 - kappabar_1**2) * np.eye(dim)
        else:
            self.mean = mean0
            cov = cov0 + proc.schedule.kappa_total * np.eye(dim)
        self.proc = proc
        self._isotropic = not isinstance(proc.prior, HarmonicPrior)
        if self._isotropic:
            self.variance = float(cov[0, 0])
        else:
            self._cov_factor = linalg.cho_factor(cov)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        centered = x - self.mean
        if self._isotropic:
            score = -centered / self.variance
        else:
            score = -linalg.cho_solve(self._cov_factor, np.atleast_2d(centered).T).T.reshape(x.shape)
        return self.proc.project(score)

