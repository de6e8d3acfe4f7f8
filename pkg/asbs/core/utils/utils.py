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
import logging
import os

from concurrent.futures import ThreadPoolExecutor

import numpy as np


CONSOLE_WIDTH = 80
THREADS_ENV_VARIABLE = "ASBS_NUM_THREADS"
logger = logging.getLogger(__name__)


def padder(string: str, length: int = CONSOLE_WIDTH) -> str:
    """Pad a string with dashes to fit in a given length.

    :param str string: The string to pad.
    :param int length: The total length of the padded string, defaults to CONSOLE_WIDTH.
    :return: The padded string.
    :rtype: str
    """
    str_len = len(string)
    left = round((length - 2 - str_len) / 2)
    right = length - 2 - str_len - left
    return f"{left * '-'} {string} {right * '-'}"


def derive_seed(rng: np.random.Generator) -> np.random.SeedSequence:
    """Draw a fresh seed sequence from a generator.

    Child streams spawned from the returned sequence are a pure function of the
    generator state, which keeps sharded work reproducible.
    """
    return np.random.SeedSequence(int(rng.integers(0, 2**63 - 1)))


def num_threads() -> int:
    """Worker count for sharded work, read from ``ASBS_NUM_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV_VARIABLE)
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring non-integer {THREADS_ENV_VARIABLE}={raw!r}")
        return 1
    return max(1, value)


def parallel_map(func, items):
    """Map ``func`` over ``items`` preserving order, on a thread pool when configured."""
    items = list(items)
    workers = min(num_threads(), len(items))
    if workers <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
