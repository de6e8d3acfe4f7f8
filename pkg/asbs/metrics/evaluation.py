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
"""Evaluation helpers: mode coverage, exact many-well samples, energy histograms and metric reports."""

import json
import logging
import os

from typing import NamedTuple

import numpy as np

from pydantic import BaseModel, ConfigDict, Field
from scipy.stats import norm

from asbs.core.energy import EnergyModel


logger = logging.getLogger(__name__)


def mode_coverage(samples: np.ndarray, centers: np.ndarray, radius: float) -> tuple[int, np.ndarray]:
    """Count the modes with at least one sample within ``radius`` of their center.

    :return: ``(found, mask)`` where ``mask[i]`` tells whether mode ``i`` was found.
    """
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    centers = np.atleast_2d(centers)
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, centers.shape[1])
    mask = np.zeros(centers.shape[0], dtype=bool)
    for start in range(0, samples.shape[0], 4096):
        chunk = samples[start : start + 4096]
        d2 = np.sum((chunk[:, None, :] - centers[None, :, :]) ** 2, axis=-1)
        mask |= np.any(d2 <= radius**2, axis=0)
    return int(mask.sum()), mask


class _WellProposal:
    """Two-Gaussian proposal at ``+-sqrt(delta)`` for the 1D density ``exp(-(x^2 - delta)^2)``.

    With variance ``1/(2 delta)`` each component dominates the target on its half-line,
    so ``target <= 2 s sqrt(2 pi) * proposal`` everywhere.
    """

    def __init__(self, delta: float):
        if not delta > 0:
            raise ValueError(f"delta must be positive, got {delta}")
        self.delta = delta
        self.center = np.sqrt(delta)
        self.scale = 1.0 / np.sqrt(2.0 * delta)
        self.log_bound = np.log(2.0 * self.scale * np.sqrt(2.0 * np.pi))

    @staticmethod
    def log_target(x, delta):
        return -((x**2 - delta) ** 2)

    def log_density(self, x):
        return np.logaddexp(
            norm.logpdf(x, self.center, self.scale), norm.logpdf(x, -self.center, self.scale)
        ) - np.log(2.0)

    def draw(self, rng, size):
        signs = np.where(rng.random(size) < 0.5, -1.0, 1.0)
        return signs * self.center + self.scale * rng.standard_normal(size)


def mw5_truth_sample(rng: np.random.Generator, count: int, delta: float = 4.0, dim: int = 5) -> np.ndarray:
    """Exact samples of ``exp(-sum_i (x_i^2 - delta)^2)`` by per-coordinate rejection sampling."""
    proposal = _WellProposal(delta)
    needed = count * dim
    accepted = []
    total = 0
    while total < needed:
        batch = max(2 * (needed - total), 1024)
        x = proposal.draw(rng, batch)
        log_ratio = proposal.log_target(x, delta) - proposal.log_density(x) - proposal.log_bound
        keep = x[np.log(rng.random(batch)) < log_ratio]
        accepted.append(keep)
        total += keep.size
    values = np.concatenate(accepted)[:needed] if accepted else np.zeros(0)
    return values.reshape(count, dim)


class EnergyHistogram(NamedTuple):
    edges: np.ndarray
    counts: np.ndarray
    underflow: int
    overflow: int

    @property
    def total(self) -> int:
        return int(self.counts.sum()) + self.underflow + self.overflow


def energy_histogram(
    model: EnergyModel, samples: np.ndarray, bins: int, value_range: tuple[float, float] | None = None
) -> EnergyHistogram:
    """Histogram of sample energies; values outside ``value_range`` go to under/overflow."""
    if bins < 1:
        raise ValueError(f"bins must be >= 1, got {bins}")
    samples = np.asarray(samples, dtype=np.float64).reshape(-1, model.dim)
    energies = np.atleast_1d(model.energy(samples)) if samples.shape[0] else np.zeros(0)
    if value_range is None:
        value_range = (float(energies.min()), float(energies.max())) if energies.size else (0.0, 1.0)
    low, high = value_range
    if high <= low:
        high = low + 1.0
    counts, edges = np.histogram(energies, bins=bins, range=(low, high))
    return EnergyHistogram(edges, counts, int(np.sum(energies < low)), int(np.sum(energies > high)))


def histogram_from_values(values: np.ndarray, bins: int, value_range: tuple[float, float]) -> EnergyHistogram:
    """Histogram of raw 1D values, used for the terminal samples of 1D toys."""
    values = np.ravel(values)
    low, high = value_range
    counts, edges = np.histogram(values, bins=bins, range=(low, high))
    return EnergyHistogram(edges, counts, int(np.sum(values < low)), int(np.sum(values > high)))


def write_histogram_csv(path, histogram: EnergyHistogram) -> None:
    """``bin_left,bin_right,count`` rows; under/overflow use infinite outer edges."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    edges = histogram.edges
    with open(path, "w", encoding="utf-8") as f:
        f.write("bin_left,bin_right,count\n")
        f.write(f"-inf,{float(edges[0])!r},{histogram.underflow}\n")
        for left, right, count in zip(edges[:-1], edges[1:], histogram.counts):
            f.write(f"{float(left)!r},{float(right)!r},{int(count)}\n")
        f.write(f"{float(edges[-1])!r},inf,{histogram.overflow}\n")
    logger.debug(f"Wrote histogram with {len(histogram.counts)} bins to {path}")


class MetricResult(BaseModel):
    model_config = ConfigDict(extra="forbid")

    name: str
    value: float
    sqrt_value: float | None = None
    converged: bool = True
    iterations: int | None = None
    config: dict = Field(default_factory=dict)


class MetricReport(BaseModel):
    model_config = ConfigDict(extra="forbid")

    source: str
    reference: str
    sample_count: int
    reference_count: int
    metrics: list[MetricResult] = Field(default_factory=list)
    histograms: list[str] = Field(default_factory=list)


def write_report(path, report: MetricReport) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(report.model_dump(), f, indent=2)
    for metric in report.metrics:
        logger.info(f"{metric.name}: {metric.value:.6g}")
