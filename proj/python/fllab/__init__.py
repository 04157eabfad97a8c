#
# Copyright 2026 The fllab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
#

"""Python bindings for the fllab C++ core."""

from fllab._core import (
    ConfigError,
    Error,
    InvalidArgument,
    NumericalError,
    command_names,
    dp_sigma,
    mine_estimate,
    multi_round,
    normalize_config,
    per_round_case1,
    per_round_case2,
    psnr,
    run_command,
    secure_mean,
    user_sampling_bound,
)

__all__ = [
    "ConfigError",
    "Error",
    "InvalidArgument",
    "NumericalError",
    "command_names",
    "dp_sigma",
    "mine_estimate",
    "multi_round",
    "normalize_config",
    "per_round_case1",
    "per_round_case2",
    "psnr",
    "run_command",
    "secure_mean",
    "user_sampling_bound",
]
