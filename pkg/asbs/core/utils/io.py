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
"""CSV helpers for sample matrices.

Samples are written with ``%.17g`` so that every float64 value round-trips
exactly through text.
"""

import logging
import os

import numpy as np

from asbs.core.errors import EmptyReference


logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def column_names(dim: int) -> list[str]:
    return [f"x{i}" for i in range(dim)]


def write_samples_csv(path, samples: np.ndarray) -> None:
    """Write a ``count x d`` matrix as CSV with a ``x0,...,x{d-1}`` header."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2:
        raise ValueError(f"Expected a 2D sample matrix, got shape {samples.shape}")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        f.write(",".join(column_names(samples.shape[1])) + "\n")
        if samples.shape[0]:
            np.savetxt(f, samples, delimiter=",", fmt=FLOAT_FORMAT)
    logger.debug(f"Wrote {samples.shape[0]} samples to {path}")


def _is_numeric_row(cells: list[str]) -> bool:
    try:
        [float(c) for c in cells]
    except ValueError:
        return False
    return True


def read_samples_csv(path, allow_empty: bool = True) -> np.ndarray:
    """Read a sample matrix written by :func:`write_samples_csv` (header optional).

    :param path: CSV file, one sample per row.
    :param bool allow_empty: When False, a file without data rows raises :class:`EmptyReference`.
    :return: ``count x d`` float64 matrix.
    """
    with open(path, "r", encoding="utf-8") as f:
        lines = [line.strip() for line in f if line.strip()]

    dim = None
    if lines and not _is_numeric_row(lines[0].split(",")):
        dim = len(lines[0].split(","))
        lines = lines[1:]

    if not lines:
        if not allow_empty:
            raise EmptyReference(f"Reference file '{path}' has no sample rows")
        return np.zeros((0, dim or 0), dtype=np.float64)

    rows = [[float(c) for c in line.split(",")] for line in lines]
    samples = np.asarray(rows, dtype=np.float64)
    if dim is not None and samples.shape[1] != dim:
        raise ValueError(f"'{path}': header has {dim} columns but rows have {samples.shape[1]}")
    return samples
