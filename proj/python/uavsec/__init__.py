# SPDX-License-Identifier: Apache-2.0
#
# uavsec: secrecy-rate simulation and solvers for multi-UAV RSMA downlinks
# Copyright (C) 2026 The uavsec authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Secrecy-rate simulation and solvers for multi-UAV RSMA downlinks."""

from uavsec._core import (
    ExperimentConfig,
    HNetEnv,
    UavsecError,
    __version__,
    dbm_to_watts,
    emit_cdf,
    fnv1a64,
    load_config,
    oracle_instances,
    parse_config,
    run,
)

__all__ = [
    "ExperimentConfig",
    "HNetEnv",
    "UavsecError",
    "__version__",
    "dbm_to_watts",
    "emit_cdf",
    "fnv1a64",
    "load_config",
    "oracle_instances",
    "parse_config",
    "run",
]
