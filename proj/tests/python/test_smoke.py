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

import math

import numpy as np
import pytest

import fllab


def test_case1_hand_value():
    assert fllab.per_round_case1(2, 1, 2, 0.0) == 1.0
    assert fllab.per_round_case1(3, 4, 10, 2.0) > fllab.per_round_case1(6, 4, 10, 2.0)


def test_case1_rejects_single_user():
    with pytest.raises(fllab.InvalidArgument):
        fllab.per_round_case1(1, 1, 2, 0.0)


def test_reductions():
    one = fllab.per_round_case1(10, 8, 50, 3.0)
    assert fllab.multi_round(one, 1) == one
    assert fllab.user_sampling_bound(10, 8, 50, 3.0, 7, 10) == pytest.approx(7 * one, rel=1e-12)


def test_dp_sigma():
    assert fllab.dp_sigma(10, 1 / 1200) == pytest.approx(math.sqrt(2 * math.log(1.25 * 1200)) / 10, abs=1e-12)


def test_psnr():
    a = [0.2] * 16
    assert fllab.psnr(a, [0.3] * 16) == pytest.approx(20.0)


def test_mine_sees_dependence():
    rng = np.random.default_rng(0)
    x = rng.standard_normal((600, 1))
    z = 0.9 * x + math.sqrt(1 - 0.81) * rng.standard_normal((600, 1))
    dep = fllab.mine_estimate(x, z, iterations=600, seed=1)
    ind = fllab.mine_estimate(x, rng.standard_normal((600, 1)), iterations=600, seed=1)
    assert dep["bits"] > 0.7
    assert abs(ind["bits"]) < 0.2
    assert len(dep["trace_bits"]) == 6


def test_secure_mean_with_dropout():
    rng = np.random.default_rng(1)
    u = rng.uniform(-0.5, 0.5, size=(5, 12))
    survivors = [0, 2, 3]
    got = np.array(fllab.secure_mean(u, survivors, seed=9))
    assert np.max(np.abs(got - u[survivors].mean(axis=0))) <= 1 / (2 * 65536)


def test_config_round_trip_and_errors():
    text = fllab.normalize_config("[fl]\nnum_users = 4\n")
    assert fllab.normalize_config(text) == text
    with pytest.raises(fllab.ConfigError):
        fllab.normalize_config("[fl]\nnum_userz = 4\n")


def test_run_command(tmp_path):
    assert "bounds" in fllab.command_names()
    cfg = "[bounds]\nd_star = 10\nc0 = 1\n[sweep]\nnum_users = 1, 2, 4\n"
    csv, warnings = fllab.run_command("bounds", cfg, str(tmp_path))
    lines = csv.strip().split("\n")
    assert lines[0].startswith("schema_version,")
    assert len(lines) == 4
    assert "undefined" in lines[1]
    assert (tmp_path / "bounds.csv").read_text() == csv
    assert warnings == []
