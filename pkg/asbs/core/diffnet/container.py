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
"""Self-describing binary container for network parameters.

Byte layout (all integers little-endian)::

    offset  size  content
    0       8     magic b"ASBSNET\x01"
    8       8     uint64 header length H
    16      H     UTF-8 JSON header
    16+H    ...   payload: float64 little-endian arrays, back to back

The header carries ``endianness`` ("little"), ``dtype`` ("float64"), the
network spec, its layout table (name, shape, offset per tensor), optional
optimizer hyperparameters and a ``sections`` table giving each payload
array's name, shape and element offset. Any language that can parse JSON and
read raw doubles can load the file.
"""

import json
import logging
import os
import struct

import numpy as np

from asbs.core.diffnet.adam import AdamState
from asbs.core.diffnet.mlp import MlpParams, MlpSpec
from asbs.core.errors import CheckpointError


logger = logging.getLogger(__name__)

MAGIC = b"ASBSNET\x01"
_LENGTH = struct.Struct("<Q")
_DTYPE = np.dtype("<f8")


def write_container(path, header: dict, arrays: dict[str, np.ndarray]) -> None:
    sections, offset = [], 0
    for name, array in arrays.items():
        array = np.asarray(array, dtype=np.float64)
        sections.append({"name": name, "shape": list(array.shape), "offset": offset})
        offset += array.size
    full_header = {**header, "endianness": "little", "dtype": "float64", "sections": sections}
    encoded = json.dumps(full_header, sort_keys=True, separators=(",", ":")).encode("utf-8")

    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(_LENGTH.pack(len(encoded)))
        f.write(encoded)
        for array in arrays.values():
            f.write(np.ascontiguousarray(array, dtype=_DTYPE).tobytes())


def read_container(path) -> tuple[dict, dict[str, np.ndarray]]:
    try:
        with open(path, "rb") as f:
            blob = f.read()
    except OSError as exc:
        raise CheckpointError(f"Cannot read checkpoint '{path}': {exc}") from exc

    if blob[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"'{path}' is not an asbs network container")
    start = len(MAGIC) + _LENGTH.size
    if len(blob) < start:
        raise CheckpointError(f"'{path}' is truncated")
    (header_len,) = _LENGTH.unpack_from(blob, len(MAGIC))
    payload_bytes = len(blob) - start - header_len
    if payload_bytes < 0 or payload_bytes % _DTYPE.itemsize:
        raise CheckpointError(f"'{path}' is truncated")
    try:
        header = json.loads(blob[start : start + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"'{path}' has a corrupt header") from exc
    if header.get("endianness") != "little" or header.get("dtype") != "float64":
        raise CheckpointError(f"'{path}' uses an unsupported encoding")

    payload = np.frombuffer(blob, dtype=_DTYPE, offset=start + header_len)
    arrays = {}
    for section in header["sections"]:
        count = int(np.prod(section["shape"], dtype=np.int64))
        chunk = payload[section["offset"] : section["offset"] + count]
        if chunk.size != count:
            raise CheckpointError(f"'{path}' is truncated in section '{section['name']}'")
        arrays[section["name"]] = chunk.astype(np.float64).reshape(section["shape"])
    return header, arrays


def save_network(path, params: MlpParams, adam: AdamState | None = None, extra: dict | None = None) -> None:
    """Persist a network (and optionally its optimizer state) to ``path``."""
    spec = params.spec
    header = {
        "format": "asbs-network",
        "spec": spec.to_dict(),
        "layout": [{"name": s.name, "shape": list(s.shape), "offset": s.offset} for s in spec.layout()],
        "extra": extra or {},
    }
    arrays = {"params": params.values}
    if adam is not None:
        header["adam"] = adam.hyperparameters()
        arrays["adam.m"] = adam.m
        arrays["adam.v"] = adam.v
    write_container(path, header, arrays)
    logger.debug(f"Saved network with {spec.n_params} parameters to {path}")


def load_network(path) -> tuple[MlpParams, AdamState | None, dict]:
    header, arrays = read_container(path)
    if header.get("format") != "asbs-network":
        raise CheckpointError(f"'{path}' does not hold a network")
    try:
        spec = MlpSpec(**header["spec"])
        params = MlpParams(spec, arrays["params"])
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"'{path}' has an inconsistent network header: {exc}") from exc

    adam = None
    if "adam" in header:
        hyper = dict(header["adam"])
        adam = AdamState(m=arrays["adam.m"], v=arrays["adam.v"], **hyper)
    return params, adam, header.get("extra", {})
