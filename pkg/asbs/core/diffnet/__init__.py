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
from .mlp import Activation, Batch, MlpParams, MlpSpec, forward, init_params, loss_and_grad, unpack
from .adam import AdamState, adam_step
from .container import load_network, read_container, save_network, write_container
