# Copyright 2026 The wcopt Authors
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


import copy
import json
import math
import os
import pathlib

import pytest

import wcopt

CONFIG_DIR = pathlib.Path(
    os.environ.get("WCOPT_CONFIG_DIR", pathlib.Path(__file__).resolve().parents[2] / "configs"))


def small_convex():
    return {
        "schema": "wcopt.config/1",
        "problem": {"kind": "absolute_regression", "dim": 3, "planted_norm": 1.0,
                    "noise": 0.1, "radius": 1.5},
        "pool": {"size": 200, "seed": 3},
        "optimizer": {"kind": "sgd", "output": "average"},
        "regime": "convex",
        "grid": {"n": [20, 40, 80, 160]},
        "trials": 20,
        "stability": {"measures": ["arguments"], "probes": 50},
        "gap": {"kinds": ["function_values"], "draws": 4,
                "metrics": ["population_risk"], "fit": []},
        "master_seed": 9,
    }


@pytest.mark.parametrize("lam,w", [(0.5, 2.0), (1.0, -0.3), (2.0, 5.0)])
def test_prox_closed_forms(lam, w):
    quad = wcopt.prox_oracle_1d("quadratic", lam, w)
    assert quad["prox_point"] == pytest.approx(w / (1.0 + lam), abs=1e-12)
    absv = wcopt.prox_oracle_1d("absolute", lam, w)
    expected = math.copysign(max(abs(w) - lam, 0.0), w)
    assert absv["prox_point"] == pytest.approx(expected, abs=1e-12)
    assert absv["envelope_gradient"] == pytest.approx((w - expected) / lam, abs=1e-12)


def test_inclusion_matches_enumeration():
    for n in range(1, 5):
        for t in range(0, 4):
            exact = wcopt.inclusion_probability(n, t, "exact")
            assert exact == pytest.approx(wcopt.enumerated_inclusion_frequency(n, t), abs=1e-12)
            assert exact <= wcopt.inclusion_probability(n, t, "bound") + 1e-15


def test_dp_noise_scale_formula():
    g, t, n, eps, delta, beta = 2.0, 100, 3000, 1.0, 1e-3, 0.3
    expected = 14 * g**2 * t / (beta * n**2 * eps) * (math.log(1 / delta) / ((1 - beta) * eps) + 1)
    assert wcopt.dp_noise_scale(g, t, n, eps, delta, beta) == pytest.approx(expected, rel=1e-12)
    ok, beta = wcopt.dp_privacy_precheck(t, 10, eps, delta)
    assert not ok and beta > 0


def test_fit_rate_exact_power_law():
    pts = [(n, 3.0 * n ** -0.5) for n in (10, 20, 40, 80)]
    fit = wcopt.fit_rate(pts)
    assert fit["slope"] == pytest.approx(-0.5, abs=1e-12)
    assert fit["r_squared"] == pytest.approx(1.0, abs=1e-12)


def test_run_config_deterministic_and_thread_invariant():
    a = wcopt.run_config(small_convex(), threads=1)
    b = wcopt.run_config(small_convex(), threads=2)
    assert a == b
    assert a["schema"] == "wcopt.report/1"
    assert any(r["kind"] == "stability" for r in a["rows"])


def test_csv_output_header():
    text = wcopt.sweep(small_convex(), "n", fmt="csv", threads=1)
    assert text.splitlines()[0] == "kind,n,T,eta,measure,estimate,std_error,bound,slope,r2"


def test_enumerate_config_file():
    report = wcopt.enumerate_config(str(CONFIG_DIR / "enumerate_quadratic.json"))
    kinds = {r["kind"] for r in report["rows"]}
    assert {"exact", "inclusion"} <= kinds


def test_validation_error_lists_violations():
    bad = copy.deepcopy(small_convex())
    bad["trials"] = 0
    bad["pool"]["size"] = -1
    with pytest.raises(wcopt.ValidationError) as info:
        wcopt.run_config(bad)
    assert str(info.value).count("\n  - ") >= 2
    assert issubclass(wcopt.ValidationError, wcopt.ConfigError)


def test_domain_error():
    with pytest.raises(wcopt.Error):
        wcopt.prox_oracle_1d("quadratic", -1.0, 0.0)


def test_normalize_config_fills_defaults():
    norm = wcopt.normalize_config(small_convex())
    assert "threads" not in norm
    assert norm["optimizer"]["kind"] == "sgd"
    assert json.loads(json.dumps(norm)) == norm


def test_acceptance_subset():
    results = wcopt.run_acceptance(only=[1, 4, 11])
    assert [r["id"] for r in results] == [1, 4, 11]
    assert all(r["passed"] for r in results), results
