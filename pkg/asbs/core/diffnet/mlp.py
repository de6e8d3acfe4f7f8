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
"""A fixed-topology MLP ``v(t, x)`` with hand-written reverse-mode gradients.

Topology::

    h_0 = x_embed(x) + t_embed(t)
    h_i = W_i act(h_{i-1}) + b_i        for i = 1..n_layers
    v(t, x) = h_{n_layers}

``x_embed`` is affine, ``t_embed`` is a linear map of sinusoidal time features.
All parameters live in one flat float64 vector; :meth:`MlpSpec.layout` gives
the offsets and shapes of every tensor inside it.
"""

import logging

from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple

import numpy as np

from scipy.special import erf, expit


logger = logging.getLogger(__name__)

T_PERIOD_MIN = 1e-3
T_PERIOD_MAX = 1.0
_SQRT2 = np.sqrt(2.0)
_INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


class Activation(str, Enum):
    GELU = "GELU"
    SiLU = "SiLU"


def _act(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.GELU:
        return 0.5 * z * (1.0 + erf(z / _SQRT2))
    return z * expit(z)


def _act_prime(kind: Activation, z: np.ndarray) -> np.ndarray:
    if kind is Activation.GELU:
        return 0.5 * (1.0 + erf(z / _SQRT2)) + z * _INV_SQRT_2PI * np.exp(-0.5 * z * z)
    s = expit(z)
    return s * (1.0 + z * (1.0 - s))


class LayerSlot(NamedTuple):
    name: str
    shape: tuple
    offset: int

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


@dataclass(frozen=True)
class MlpSpec:
    input_dim: int
    hidden_dim: int = 64
    n_layers: int = 4
    t_embed_dim: int = 128
    activation: Activation = Activation.GELU

    def __post_init__(self):
        object.__setattr__(self, "activation", Activation(self.activation))
        if self.n_layers < 2:
            raise ValueError(f"n_layers must be >= 2, got {self.n_layers}")
        for name in ("input_dim", "hidden_dim", "t_embed_dim"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.t_embed_dim % 2:
            raise ValueError(f"t_embed_dim must be even (sine and cosine pairs), got {self.t_embed_dim}")

    def layout(self) -> list[LayerSlot]:
        shapes = [
            ("x_embed.weight", (self.hidden_dim, self.input_dim)),
            ("x_embed.bias", (self.hidden_dim,)),
            ("t_embed.weight", (self.hidden_dim, self.t_embed_dim)),
        ]
        for i in range(1, self.n_layers + 1):
            out_dim = self.input_dim if i == self.n_layers else self.hidden_dim
            shapes.append((f"layer_{i}.weight", (out_dim, self.hidden_dim)))
            shapes.append((f"layer_{i}.bias", (out_dim,)))
        slots, offset = [], 0
        for name, shape in shapes:
            slot = LayerSlot(name, shape, offset)
            slots.append(slot)
            offset += slot.size
        return slots

    @property
    def n_params(self) -> int:
        last = self.layout()[-1]
        return last.offset + last.size

    def to_dict(self) -> dict:
        return {
            "input_dim": self.input_dim,
            "hidden_dim": self.hidden_dim,
            "n_layers": self.n_layers,
            "t_embed_dim": self.t_embed_dim,
            "activation": self.activation.value,
        }


@dataclass(frozen=True, eq=False)
class MlpParams:
    spec: MlpSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        if values.shape != (self.spec.n_params,):
            raise ValueError(f"Expected {self.spec.n_params} parameters, got shape {values.shape}")
        object.__setattr__(self, "values", values)

    def views(self) -> dict[str, np.ndarray]:
        return unpack(self.spec, self.values)

    def copy(self) -> "MlpParams":
        return MlpParams(self.spec, self.values.copy())


def unpack(spec: MlpSpec, values: np.ndarray) -> dict[str, np.ndarray]:
    """Named reshaped views into a flat parameter (or gradient) vector."""
    return {s.name: values[s.offset : s.offset + s.size].reshape(s.shape) for s in spec.layout()}


class Batch(NamedTuple):
    """Regression batch: times ``(B,)``, inputs ``(B, d)``, targets ``(B, d)``, weights ``(B,)``."""

    t: np.ndarray
    x: np.ndarray
    target: np.ndarray
    weight: np.ndarray | None = None


def init_params(spec: MlpSpec, rng: np.random.Generator, zero_final: bool = False) -> MlpParams:
    """LeCun-normal weights, zero biases. ``zero_final`` makes the network the exact zero function."""
    values = np.zeros(spec.n_params)
    final = f"layer_{spec.n_layers}.weight"
    for slot in spec.layout():
        if slot.name.endswith(".bias") or (zero_final and slot.name == final):
            continue
        fan_in = slot.shape[1]
        values[slot.offset : slot.offset + slot.size] = rng.standard_normal(slot.size) / np.sqrt(fan_in)
    return MlpParams(spec, values)


def time_features(spec: MlpSpec, t: np.ndarray) -> np.ndarray:
    """Sine/cosine features with periods spaced geometrically in ``[1e-3, 1]``."""
    half = spec.t_embed_dim // 2
    periods = np.geomspace(T_PERIOD_MIN, T_PERIOD_MAX, half)
    angles = 2.0 * np.pi * np.asarray(t, dtype=np.float64)[:, None] / periods[None, :]
    return np.concatenate([np.sin(angles), np.cos(angles)], axis=-1)


def _broadcast_inputs(spec, t, x):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != spec.input_dim:
        raise ValueError(f"Expected input dimension {spec.input_dim}, got {x.shape[-1]}")
    t = np.broadcast_to(np.asarray(t, dtype=np.float64), (x.shape[0],))
    return t, x, single


def _forward(params: MlpParams, t: np.ndarray, x: np.ndarray):
    spec = params.spec
    w = params.views()
    phi = time_features(spec, t)
    h = x @ w["x_embed.weight"].T + w["x_embed.bias"] + phi @ w["t_embed.weight"].T
    pre = [h]
    for i in range(1, spec.n_layers + 1):
        h = _act(spec.activation, h) @ w[f"layer_{i}.weight"].T + w[f"layer_{i}.bias"]
        pre.append(h)
    return h, (phi, pre)


def forward(spec: MlpSpec, params: MlpParams, t, x: np.ndarray) -> np.ndarray:
    """Evaluate ``v(t, x)`` for a single point or a batch (``t`` scalar or ``(B,)``)."""
    if params.spec != spec:
        raise ValueError("Parameter vector was built for a different MlpSpec")
    t, x, single = _broadcast_inputs(spec, t, x)
    out, _ = _forward(params, t, x)
    return out[0] if single else out


def loss_and_grad(spec: MlpSpec, params: MlpParams, batch: Batch) -> tuple[float, np.ndarray]:
    """Weighted MSE ``mean_b w_b |v(t_b, x_b) - target_b|^2`` and its exact parameter gradient."""
    t, x, _ = _broadcast_inputs(spec, batch.t, batch.x)
    target = np.atleast_2d(np.asarray(batch.target, dtype=np.float64))
    size = x.shape[0]
    if size == 0:
        raise ValueError("loss_and_grad needs a nonempty batch")
    weight = np.ones(size) if batch.weight is None else np.broadcast_to(np.asarray(batch.weight, float), (size,))

    out, (phi, pre) = _forward(params, t, x)
    residual = out - target
    loss = float(np.mean(weight * np.sum(residual**2, axis=-1)))

    w = params.views()
    grad = np.zeros_like(params.values)
    g = unpack(spec, grad)

    delta = (2.0 / size) * weight[:, None] * residual
    for i in range(spec.n_layers, 0, -1):
        a = _act(spec.activation, pre[i - 1])
        g[f"layer_{i}.weight"][...] = delta.T @ a
        g[f"layer_{i}.bias"][...] = delta.sum(axis=0)
        delta = (delta @ w[f"layer_{i}.weight"]) * _act_prime(spec.activation, pre[i - 1])
    g["x_embed.weight"][...] = delta.T @ x
    g["x_embed.bias"][...] = delta.sum(axis=0)
    g["t_embed.weight"][...] = delta.T @ phi
    return loss, grad
