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
import json
import os

import pytest

from asbs.train import validate_document


pytest_plugins = ["asbs.plugins.core"]

RESOURCES = os.path.join(os.path.dirname(__file__), "resources")
REPLACED_SECTIONS = ("energy", "prior", "schedule")


def load_resource_config(name, **sections):
    """Validate a JSON config from test/resources.

    Keyword sections are merged into the document; ``energy``, ``prior`` and
    ``schedule`` are replaced whole since their keys depend on ``kind``.
    """
    with open(os.path.join(RESOURCES, name), "r") as f:
        document = json.load(f)
    for key, value in sections.items():
        if isinstance(value, dict) and key not in REPLACED_SECTIONS:
            value = {**document.get(key, {}), **value}
        document[key] = value
    return validate_document(document, name)


@pytest.fixture()
def tiny_config():
    """A small MW-2 run that trains in well under a second per epoch."""
    yield load_resource_config("tiny_mw_config.json")
