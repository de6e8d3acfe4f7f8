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
"""Source distributions ``mu`` of the base process.

Three priors are supported:

* ``gaussian``: isotropic ``N(mean, std^2 I)``;
* ``dirac``: a point mass, the memoryless special case;
* ``harmonic``: the anisotropic Gaussian ``exp(-(alpha/2) sum_{i<j} |x_i - x_j|^2)``
  of a particle system, regularized by ``eps`` so that its precision is
  positive definite.
"""

import logging

from typing import Annotated, Literal, Union

import numpy as np

from pydantic import BaseModel, ConfigDict, Field
from scipy import linalg

from asbs.core.energy import zcom_project
from asbs.core.errors import FactorizationFailed


logger = logging.getLogger(__name__)


class _Prior(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class GaussianPrior(_Prior):
    kind: Literal["gaussian"] = "gaussian"
    mean: float | list[float] = 0.0
    std: float = Field(default=1.0, gt=0)


class DiracPrior(_Prior):
    kind: Literal["dirac"] = "dirac"
    point: float | list[float] = 0.0


class HarmonicPrior(_Prior):
    kind: Literal["harmonic"] = "harmonic"
    n_particles: int = Field(ge=2)
    space_dim: int = Field(ge=1)
    alpha: float = Field(default=1.0, gt=0)
    eps: float = Field(default=1e-4, gt=0)

    @property
    def dim(self) -> int:
        return self.n_particles * self.space_dim


Prior = Annotated[Union[GaussianPrior, DiracPrior, HarmonicPrior], Field(discriminator="kind")]


def _location(value, dim: int) -> np.ndarray:
    loc = np.broadcast_to(np.asarray(value, dtype=np.float64), (dim,))
    return np.array(loc)


def prior_location(prior: Prior, dim: int) -> np.ndarray:
    """Mean of the prior as a ``(dim,)`` vector."""
    if isinstance(prior, GaussianPrior):
        return _location(prior.mean, dim)
    if isinstance(prior, DiracPrior):
        return _location(prior.point, dim)
    return np.zeros(dim)


def harmonic_precision(prior: HarmonicPrior) -> np.ndarray:
    """``R + eps I`` with ``x^T R x = alpha sum_{i<j} |x_i - x_j|^2``.

    ``R = alpha (L kron I_k)`` where ``L = n I - 1 1^T`` is the Laplacian of the
    complete graph on the particles.
    """
    n, k = prior.n_particles, prior.space_dim
    laplacian = n * np.eye(n) - np.ones((n, n))
    return prior.alpha * np.kron(laplacian, np.eye(k)) + prior.eps * np.eye(n * k)


def harmonic_factor(prior: HarmonicPrior) -> np.ndarray:
    """Lower Cholesky factor ``C`` of ``R + eps I``."""
    try:
        return linalg.cholesky(harmonic_precision(prior), lower=True)
    except linalg.LinAlgError as exc:
        raise FactorizationFailed(
            f"Harmonic precision is not positive definite (alpha={prior.alpha}, eps={prior.eps})"
        ) from exc


def prior_covariance(prior: Prior, dim: int) -> np.ndarray:
    """Dense covariance matrix of the prior (zero for a point mass)."""
    if isinstance(prior, GaussianPrior):
        return prior.std**2 * np.eye(dim)
    if isinstance(prior, DiracPrior):
        return np.zeros((dim, dim))
    factor = harmonic_factor(prior)
    inv_factor = linalg.solve_triangular(factor, np.eye(dim), lower=True)
    return inv_factor.T @ inv_factor


def sample_prior(
    prior: Prior, rng: np.random.Generator, count: int, dim: int, zcom: tuple[int, int] | None = None
) -> np.ndarray:
    """Draw ``count`` samples of dimension ``dim`` from ``prior``.

    :param zcom: ``(n, k)`` particle shape; when given, samples are ZCOM-projected.
    :raises FactorizationFailed: if a harmonic precision cannot be factorized.
    """
    if isinstance(prior, HarmonicPrior):
        if prior.dim != dim:
            raise ValueError(f"Harmonic prior has dimension {prior.dim}, process has {dim}")
        factor = harmonic_factor(prior)
        z = rng.standard_normal((dim, count))
        samples = linalg.solve_triangular(factor, z, lower=True, trans="T").T
    elif isinstance(prior, GaussianPrior):
        samples = _location(prior.mean, dim) + prior.std * rng.standard_normal((count, dim))
    else:
        samples = np.tile(_location(prior.point, dim), (count, 1))

    if zcom is not None:
        samples = zcom_project(samples, *zcom)
    return samples
