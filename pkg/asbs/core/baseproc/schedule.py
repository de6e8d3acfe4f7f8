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
"""Noise schedules ``sigma_t`` and their accumulated variance ``kappa_{t|s}``.

Schedules are pydantic models discriminated on ``kind`` so that they can be
embedded directly in a run configuration::

    {"kind": "geometric", "beta_min": 0.001, "beta_max": 1.0}
    {"kind": "constant", "sigma": 0.2}
    {"kind": "vp", "beta_min": 0.1, "beta_max": 20.0}

``kappa(s, t)`` is always the closed form of ``int_s^t sigma_tau^2 dtau``.
"""

from abc import ABC, abstractmethod
from typing import Annotated, Literal, Union

import numpy as np

from pydantic import BaseModel, ConfigDict, Field, model_validator


class _Schedule(BaseModel, ABC):
    model_config = ConfigDict(extra="forbid", frozen=True)

    @abstractmethod
    def sigma(self, t):
        """Diffusion coefficient at time ``t``."""

    @abstractmethod
    def kappa(self, s, t):
        """Accumulated variance ``int_s^t sigma^2``."""

    @property
    def kappa_total(self) -> float:
        """``kappa_{1|0}``."""
        return float(self.kappa(0.0, 1.0))


class GeometricSchedule(_Schedule):
    """``sigma_t = beta_min (beta_max/beta_min)^(1-t) sqrt(2 ln(beta_max/beta_min))``, decaying in ``t``."""

    kind: Literal["geometric"] = "geometric"
    beta_min: float = Field(gt=0)
    beta_max: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.beta_max > self.beta_min:
            raise ValueError(f"beta_max ({self.beta_max}) must exceed beta_min ({self.beta_min})")
        return self

    def sigma(self, t):
        ratio = self.beta_max / self.beta_min
        t = np.asarray(t, dtype=np.float64)
        return self.beta_min * ratio ** (1.0 - t) * np.sqrt(2.0 * np.log(ratio))

    def kappa(self, s, t):
        q = self.beta_min / self.beta_max
        s, t = np.asarray(s, dtype=np.float64), np.asarray(t, dtype=np.float64)
        return self.beta_max**2 * (q ** (2.0 * s) - q ** (2.0 * t))


class ConstantSchedule(_Schedule):
    kind: Literal["constant"] = "constant"
    sigma_value: float = Field(gt=0, alias="sigma")

    model_config = ConfigDict(extra="forbid", frozen=True, populate_by_name=True)

    def sigma(self, t):
        return np.full(np.shape(t), self.sigma_value) if np.ndim(t) else self.sigma_value

    def kappa(self, s, t):
        return self.sigma_value**2 * (np.asarray(t, dtype=np.float64) - np.asarray(s, dtype=np.float64))


class LinearVPSchedule(_Schedule):
    """``sigma_t = sqrt(beta_t)`` with ``beta_t = (1-t) beta_max + t beta_min``.

    Only meaningful together with the variance-preserving drift ``-beta_t x / 2``.
    """

    kind: Literal["vp"] = "vp"
    beta_min: float = Field(default=0.1, gt=0)
    beta_max: float = Field(default=20.0, gt=0)

    @model_validator(mode="after")
    def _check_order(self):
        if not self.beta_max > self.beta_min:
            raise ValueError(f"beta_max ({self.beta_max}) must exceed beta_min ({self.beta_min})")
        return self

    def beta(self, t):
        t = np.asarray(t, dtype=np.float64)
        return (1.0 - t) * self.beta_max + t * self.beta_min

    def sigma(self, t):
        return np.sqrt(self.beta(t))

    def kappa(self, s, t):
        s, t = np.asarray(s, dtype=np.float64), np.asarray(t, dtype=np.float64)
        return (t - s) * (self.beta(s) + self.beta(t)) / 2.0


NoiseSchedule = Annotated[
    Union[GeometricSchedule, ConstantSchedule, LinearVPSchedule],
    Field(discriminator="kind"),
]


def sigma(schedule: NoiseSchedule, t):
    return schedule.sigma(t)


def kappa(schedule: NoiseSchedule, s, t):
    """Accumulated variance ``kappa_{t|s}`` for ``0 <= s <= t <= 1``."""
    return schedule.kappa(s, t)
