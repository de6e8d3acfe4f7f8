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
"""Analytic energy families: many-well, DW-4, Lennard-Jones, the 40-mode GMM and a Gaussian."""

import logging

import numpy as np

from scipy.special import logsumexp, softmax

from asbs.core.energy.model import EnergyFamily, EnergyModel, pair_geometry


logger = logging.getLogger(__name__)

GMM40_DEFAULT_SEED = 40
GMM40_N_MODES = 40
GMM40_BOX = 40.0


class ManyWell(EnergyModel):
    """``E(x) = sum_i (x_i^2 - delta)^2``; modes at every sign pattern of ``+-sqrt(delta)``."""

    family = EnergyFamily.MW

    def __init__(self, dim: int = 5, delta: float = 4.0):
        super().__init__(dim=dim)
        self.delta = float(delta)

    @property
    def params(self) -> dict:
        return {"dim": self.dim, "delta": self.delta}

    def _energy(self, x):
        return np.sum((x**2 - self.delta) ** 2, axis=-1)

    def _grad(self, x):
        return 4.0 * x * (x**2 - self.delta)


class DoubleWell4(EnergyModel):
    """Pairwise double-well potential on particles, 4 particles in 2D by default.

    ``E(x) = 1/(2 tau) sum_{i<j} [a r + b r^2 + c r^4]`` with ``r = d_ij - d0``.
    ``exponentiated=True`` evaluates ``exp`` of that sum instead; it is not used by any preset.
    """

    family = EnergyFamily.DW4

    def __init__(
        self,
        n_particles: int = 4,
        space_dim: int = 2,
        a: float = 0.0,
        b: float = -4.0,
        c: float = 0.9,
        d0: float = 1.0,
        tau: float = 1.0,
        exponentiated: bool = False,
    ):
        super().__init__(dim=n_particles * space_dim, n_particles=n_particles, space_dim=space_dim, zcom=True)
        self.a, self.b, self.c, self.d0, self.tau = float(a), float(b), float(c), float(d0), float(tau)
        self.exponentiated = exponentiated

    @property
    def params(self) -> dict:
        return {
            "n_particles": self.n_particles,
            "space_dim": self.space_dim,
            "a": self.a,
            "b": self.b,
            "c": self.c,
            "d0": self.d0,
            "tau": self.tau,
            "exponentiated": self.exponentiated,
        }

    def _pair_sum(self, dists, mask):
        r = dists - self.d0
        terms = self.a * r + self.b * r**2 + self.c * r**4
        return 0.5 * np.sum(np.where(mask, terms, 0.0), axis=(-2, -1)) / (2.0 * self.tau)

    def _energy(self, x):
        _, dists, mask = pair_geometry(x, self.n_particles, self.space_dim)
        s = self._pair_sum(dists, mask)
        return np.exp(s) if self.exponentiated else s

    def _grad(self, x):
        diffs, dists, mask = pair_geometry(x, self.n_particles, self.space_dim)
        r = dists - self.d0
        dterm = (self.a + 2.0 * self.b * r + 4.0 * self.c * r**3) / (2.0 * self.tau)
        coeff = np.where(mask, dterm / dists, 0.0)
        g = np.sum(coeff[..., None] * diffs, axis=2).reshape(x.shape)
        if self.exponentiated:
            g = g * np.exp(self._pair_sum(dists, mask))[:, None]
        return g


class LennardJones(EnergyModel):
    """Lennard-Jones cluster with a harmonic tether to the center of mass.

    ``E(x) = eps/(2 tau) sum_{i<j} [(r_m/d)^6 - (r_m/d)^12] + c/2 sum_i |x_i - C(x)|^2``.
    By default the pair term has the sign above; ``flip_sign=True`` gives the conventional
    repulsive core ``(r_m/d)^12 - (r_m/d)^6``.
    """

    family = EnergyFamily.LJ

    def __init__(
        self,
        n_particles: int = 13,
        space_dim: int = 3,
        r_m: float = 1.0,
        eps: float = 1.0,
        c_osc: float = 0.5,
        tau: float = 1.0,
        flip_sign: bool = False,
    ):
        super().__init__(dim=n_particles * space_dim, n_particles=n_particles, space_dim=space_dim, zcom=True)
        self.r_m, self.eps, self.c_osc, self.tau = float(r_m), float(eps), float(c_osc), float(tau)
        self.flip_sign = flip_sign

    @property
    def params(self) -> dict:
        return {
            "n_particles": self.n_particles,
            "space_dim": self.space_dim,
            "r_m": self.r_m,
            "eps": self.eps,
            "c_osc": self.c_osc,
            "tau": self.tau,
            "flip_sign": self.flip_sign,
        }

    @property
    def _sign(self) -> float:
        return -1.0 if self.flip_sign else 1.0

    def oscillator_energy(self, x: np.ndarray) -> np.ndarray:
        particles = np.atleast_2d(x).reshape(-1, self.n_particles, self.space_dim)
        centered = particles - particles.mean(axis=1, keepdims=True)
        return 0.5 * self.c_osc * np.sum(centered**2, axis=(-2, -1))

    def _energy(self, x):
        _, dists, mask = pair_geometry(x, self.n_particles, self.space_dim)
        s6 = (self.r_m / dists) ** 6
        pair = self._sign * np.where(mask, s6 - s6**2, 0.0)
        lj = 0.5 * np.sum(pair, axis=(-2, -1)) * self.eps / (2.0 * self.tau)
        return lj + self.oscillator_energy(x)

    def _grad(self, x):
        diffs, dists, mask = pair_geometry(x, self.n_particles, self.space_dim)
        s6 = (self.r_m / dists) ** 6
        dpair = self._sign * (self.eps / (2.0 * self.tau)) * (-6.0 * s6 + 12.0 * s6**2) / dists
        coeff = np.where(mask, dpair / dists, 0.0)
        g_pair = np.sum(coeff[..., None] * diffs, axis=2)
        particles = x.reshape(x.shape[0], self.n_particles, self.space_dim)
        g_osc = self.c_osc * (particles - particles.mean(axis=1, keepdims=True))
        return (g_pair + g_osc).reshape(x.shape)


class GaussianMixture40(EnergyModel):
    """Negative log density of an equal-weight isotropic mixture in 2D.

    Mode centers are drawn uniformly in ``[-40, 40]^2`` from ``seed``, so the
    same seed always rebuilds the same landscape.
    """

    family = EnergyFamily.GMM40

    def __init__(self, seed: int = GMM40_DEFAULT_SEED, mode_std: float = 1.0, n_modes: int = GMM40_N_MODES):
        super().__init__(dim=2)
        self.seed = int(seed)
        self.mode_std = float(mode_std)
        self.n_modes = int(n_modes)
        self.centers = np.random.default_rng(self.seed).uniform(-GMM40_BOX, GMM40_BOX, size=(self.n_modes, 2))
        self.centers.setflags(write=False)

    @property
    def params(self) -> dict:
        return {"seed": self.seed, "mode_std": self.mode_std, "n_modes": self.n_modes}

    def _log_components(self, x):
        sq = np.sum((x[:, None, :] - self.centers[None, :, :]) ** 2, axis=-1)
        var = self.mode_std**2
        return -0.5 * sq / var - np.log(2.0 * np.pi * var) - np.log(self.n_modes)

    def _energy(self, x):
        return -logsumexp(self._log_components(x), axis=-1)

    def _grad(self, x):
        resp = softmax(self._log_components(x), axis=-1)
        mean = resp @ self.centers
        return (x - mean) / self.mode_std**2

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        """Exact draws: a uniformly chosen mode plus isotropic Gaussian noise."""
        modes = rng.integers(0, self.n_modes, size=count)
        return self.centers[modes] + self.mode_std * rng.standard_normal((count, 2))


class Quadratic(EnergyModel):
    """``E(x) = |x - mean|^2 / (2 std^2)``, the energy of an isotropic Gaussian target."""

    family = EnergyFamily.GAUSS

    def __init__(self, dim: int = 1, mean: float = 0.0, std: float = 1.0):
        super().__init__(dim=dim)
        if not std > 0:
            raise ValueError(f"std must be positive, got {std}")
        self.mean = float(mean)
        self.std = float(std)

    @property
    def params(self) -> dict:
        return {"dim": self.dim, "mean": self.mean, "std": self.std}

    def _energy(self, x):
        return 0.5 * np.sum((x - self.mean) ** 2, axis=-1) / self.std**2

    def _grad(self, x):
        return (x - self.mean) / self.std**2

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return self.mean + self.std * rng.standard_normal((count, self.dim))


def gmm40_sample_truth(model: GaussianMixture40, rng: np.random.Generator, count: int) -> np.ndarray:
    return model.sample(rng, count)


# Flat configuration spellings of the constructor switches.
PARAM_ALIASES = {
    EnergyFamily.DW4: {"dw4_exponentiated": "exponentiated"},
    EnergyFamily.LJ: {"lj_flip_sign": "flip_sign"},
}


def make_energy(family: EnergyFamily | str, **params) -> EnergyModel:
    """Build an energy model from its family name and keyword parameters.

    Keys in :data:`PARAM_ALIASES` are accepted in place of the constructor name.
    """
    family = EnergyFamily(family)
    for alias, name in PARAM_ALIASES.get(family, {}).items():
        if alias in params:
            if name in params:
                raise TypeError(f"'{alias}' and '{name}' set the same parameter of {family.value}")
            params[name] = params.pop(alias)
    builders = {
        EnergyFamily.MW: ManyWell,
        EnergyFamily.DW4: DoubleWell4,
        EnergyFamily.LJ: LennardJones,
        EnergyFamily.GMM40: GaussianMixture40,
        EnergyFamily.GAUSS: Quadratic,
    }
    model = builders[family](**params)
    logger.debug(f"Built energy {model!r}")
    return model
