import csv
import io
import json

import numpy as np
import pytest

from ppwass.metrics import INF
from ppwass.verify.experiments import ExperimentReport, experiment_hard_core, experiment_two_runs, rows_to_csv


def test_two_runs_q0_is_exact_zero():
    rep = experiment_two_runs(50, 0.0, 1.0, 20, seed=0)
    assert rep.primary == 0.0 and rep.baseline == 0.0 and rep.dual_lower == 0.0
    assert rep.bound["bound_capped"] == 0.0 and rep.closed_form_bound == 0.0
    assert rep.verdict


def test_two_runs_report_fields():
    rep = experiment_two_runs(400, 0.05, 1.0, 40, seed=1)
    assert rep.bound["bound_capped"] == pytest.approx(0.0975, abs=1e-12)
    assert rep.closed_form_bound == pytest.approx(0.17875, abs=1e-12)
    assert 0 <= rep.dual_lower <= rep.primary + 1e-9
    assert rep.corrected == max(0.0, rep.primary - rep.baseline)
    assert rep.combined_se == pytest.approx(np.hypot(rep.primary_se, rep.baseline_se))
    d = json.loads(rep.to_json())
    assert d["model"]["n"] == 400 and d["verdict"] == rep.verdict
    rows = list(csv.DictReader(io.StringIO(rep.to_csv("tr"))))
    names = [r["name"] for r in rows]
    assert names[:2] == ["tr.primary_d2", "tr.baseline_d2"]
    assert float(rows[0]["value"]) == rep.primary
    assert {r["verdict"] for r in rows} <= {"pass", "fail", ""}
    with pytest.raises(ValueError):
        experiment_two_runs(400, 0.05, 1.0, 3)


def test_two_runs_deterministic_and_p_inf():
    a = experiment_two_runs(100, 0.1, INF, 10, seed=5)
    b = experiment_two_runs(100, 0.1, INF, 10, seed=5)
    assert a.to_json() == b.to_json()
    assert a.primary <= 1.0


def test_two_runs_grows_with_q():
    # the corrected distance tracks the clumping, which rises with q
    vals = [experiment_two_runs(200, q, 1.0, 60, seed=2) for q in (0.02, 0.1, 0.3)]
    assert vals[0].corrected - 3 * vals[0].combined_se <= vals[2].corrected + 3 * vals[2].combined_se
    assert vals[2].corrected > 0


def test_hard_core_small_radius():
    rep = experiment_hard_core(2, 1.1, 1e-6, 1.0, 20, burn_in=500, thin=20, seed=3)
    assert rep.extra["identity_verdict"]
    assert rep.extra["lambda_hat"] == pytest.approx(1.1, abs=0.6)
    assert rep.bound["bound_capped"] < 1e-6
    assert rep.dual_verdict and rep.verdict
    assert rep.extra["n_probes"] == 16
    rows = rep.rows("hc")
    assert rows[-1]["name"] == "hc.empty_ball_identity"


def test_csv_format():
    text = rows_to_csv([{"name": "a", "value": 0.1, "stderr": "", "bound": 1, "verdict": "pass"}])
    assert text == "name,value,stderr,bound,verdict\r\na,0.1,,1,pass\r\n"


def test_report_verdict_logic():
    base = dict(model={}, bound={"bound_capped": 0.1}, closed_form_bound=0.2, primary=0.5, primary_se=0.01,
                baseline=0.38, baseline_se=0.01, dual_lower=0.1)
    assert ExperimentReport(**base).verdict
    assert not ExperimentReport(**{**base, "baseline": 0.3}).bound_verdict
    assert not ExperimentReport(**{**base, "dual_lower": 0.6}).dual_verdict
    assert not ExperimentReport(**base, extra={"identity_verdict": False}).verdict
