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
from .sinkhorn import SinkhornConfig, SinkhornResult, sinkhorn_distance, sinkhorn_plan
from .geometry import AlignConfig, geometric_distance, procrustes
from .wasserstein import energy_w2, geometric_w2, w2_exact, w2_from_cost
from .evaluation import (
    EnergyHistogram,
    MetricReport,
    MetricResult,
    energy_histogram,
    histogram_from_values,
    mode_coverage,
    mw5_truth_sample,
    write_histogram_csv,
    write_report,
)
from .oracle import EntropicBridge, entropic_bridge_drift
