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
from .schedule import ConstantSchedule, GeometricSchedule, LinearVPSchedule, NoiseSchedule, kappa, sigma
from .prior import (
    DiracPrior,
    GaussianPrior,
    HarmonicPrior,
    Prior,
    harmonic_precision,
    prior_covariance,
    prior_location,
    sample_prior,
)
from .process import (
    AnalyticCorrector,
    BaseProcess,
    DriftKind,
    base_score,
    bridge_sample,
    vp_bridge_moments,
    vp_bridge_sample,
    vp_coeffs,
)
from .sde import SHARD_SIZE, SdeConfig, SimulationResult, simulate
from .langevin import langevin_sample
