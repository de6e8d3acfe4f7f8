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
from .model import (
    EnergyFamily,
    EnergyModel,
    GradClipRule,
    clip_grad,
    energy_eval,
    energy_grad,
    zcom_project,
)
from .families import (
    DoubleWell4,
    GaussianMixture40,
    LennardJones,
    ManyWell,
    Quadratic,
    gmm40_sample_truth,
    make_energy,
)
