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
"""Exceptions raised by the sampler engine.

All errors derive from :class:`SamplerError` so callers (the CLI in particular)
can map them onto exit codes without catching unrelated failures.
"""


class SamplerError(Exception):
    """Base class for every error raised by asbs."""


class NonFinite(SamplerError, ArithmeticError):
    """A state, energy or gradient left the finite range.

    Raised instead of clamping so that integrator blow-ups are visible.
    """


class FactorizationFailed(SamplerError):
    """A precision matrix could not be factorized (not symmetric positive definite)."""


class UnsupportedBase(SamplerError):
    """The requested operation is not defined for the configured base process."""


class EmptyReference(SamplerError):
    """A reference sample file holds no rows."""


class SizeMismatch(SamplerError, ValueError):
    """Two sample sets that must have equal sizes do not."""


class ConfigError(SamplerError, ValueError):
    """A run configuration is malformed or references unknown keys."""


class CheckpointError(SamplerError):
    """A checkpoint is unreadable, truncated or was written by a foreign tool."""
