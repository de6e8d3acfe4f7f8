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
import functools
import os

from unittest import mock

import numpy as np
import pytest

from asbs.core.utils.utils import THREADS_ENV_VARIABLE


DEFAULT_SEED = 20250601


def pytest_addoption(parser):
    parser.addoption(
        "--seed",
        action="store",
        type=int,
        default=DEFAULT_SEED,
        help="Master seed for the rng fixture",
    )
    parser.addoption(
        "--run-slow",
        action="store_true",
        required=False,
        help="Run statistical and end-to-end tests marked 'slow'",
    )


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running statistical or end-to-end test")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow", None):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def seed(request):
    """Master seed of the session, set with --seed."""
    yield request.config.getoption("--seed")


@pytest.fixture()
def rng(seed, request):
    """Generator seeded from the master seed and the test name, so tests do not share streams."""
    name = request.node.nodeid.encode("utf-8")
    yield np.random.default_rng([seed, *name])


def with_threads(count):
    """Decorator running a test with ``ASBS_NUM_THREADS`` set to ``count``.

    Example:
        @with_threads(4)
        def test_simulation_is_thread_count_independent(rng):
            ...
    """

    def decorator(func):
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            with mock.patch.dict(os.environ, {THREADS_ENV_VARIABLE: str(count)}):
                return func(*args, **kwargs)

        return wrapper

    return decorator
