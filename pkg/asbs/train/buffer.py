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
"""Fixed-capacity FIFO replay buffer of ``(X0, X1[, target])`` records."""

import logging

from typing import NamedTuple

import numpy as np


logger = logging.getLogger(__name__)


class BufferBatch(NamedTuple):
    x0: np.ndarray
    x1: np.ndarray
    target: np.ndarray | None


class ReplayBuffer:
    """Ring storage with oldest-first eviction and uniform sampling over current contents.

    :param int capacity: Maximum number of records.
    :param int dim: Dimension of each state.
    :param bool with_target: Whether records carry a regression target.
    """

    def __init__(self, capacity: int, dim: int, with_target: bool = False):
        if capacity < 1:
            raise ValueError(f"capacity must be positive, got {capacity}")
        self.capacity = capacity
        self.dim = dim
        self.with_target = with_target
        self._x0 = np.zeros((capacity, dim))
        self._x1 = np.zeros((capacity, dim))
        self._target = np.zeros((capacity, dim)) if with_target else None
        self._next = 0
        self._size = 0
        self.inserted = 0
        self.evicted = 0

    def __len__(self) -> int:
        return self._size

    def push(self, x0: np.ndarray, x1: np.ndarray, target: np.ndarray | None = None) -> None:
        x0, x1 = np.atleast_2d(x0), np.atleast_2d(x1)
        if (target is None) == self.with_target:
            raise ValueError("Target presence does not match the buffer layout")
        count = x0.shape[0]
        self.inserted += count
        self.evicted += max(0, self._size + count - self.capacity)
        if count > self.capacity:
            x0, x1 = x0[-self.capacity :], x1[-self.capacity :]
            target = None if target is None else np.atleast_2d(target)[-self.capacity :]
            count = self.capacity
        slots = (self._next + np.arange(count)) % self.capacity
        self._x0[slots] = x0
        self._x1[slots] = x1
        if target is not None:
            self._target[slots] = target
        self._next = (self._next + count) % self.capacity
        self._size = min(self.capacity, self._size + count)
        logger.debug(f"Buffer holds {self._size}/{self.capacity} records ({self.evicted} evicted)")

    def sample(self, rng: np.random.Generator, size: int) -> BufferBatch:
        """Draw ``size`` records uniformly with replacement."""
        if self._size == 0:
            raise ValueError("Cannot sample from an empty replay buffer")
        idx = rng.integers(0, self._size, size=size)
        target = None if self._target is None else self._target[idx]
        return BufferBatch(self._x0[idx], self._x1[idx], target)

    def contents(self) -> BufferBatch:
        """Current records, oldest first."""
        start = self._next if self._size == self.capacity else 0
        order = (start + np.arange(self._size)) % self.capacity
        target = None if self._target is None else self._target[order]
        return BufferBatch(self._x0[order], self._x1[order], target)

    def copy(self) -> "ReplayBuffer":
        clone = ReplayBuffer(self.capacity, self.dim, self.with_target)
        clone._x0, clone._x1 = self._x0.copy(), self._x1.copy()
        clone._target = None if self._target is None else self._target.copy()
        clone._next, clone._size = self._next, self._size
        clone.inserted, clone.evicted = self.inserted, self.evicted
        return clone
