"""End-to-end comparisons of bound versus empirical d2 distance.

The population distance is estimated by the exact empirical d2 between a
sample of the process and a Poisson sample with the same expectation measure.
Even two samples of one law sit at a positive empirical distance, so a second
Poisson sample provides a same-law baseline that is subtracted. Standard
errors come from the spread of matched pair costs in the optimal assignment.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ..metrics import INF
from ..processes import (
    ContinuousIntensity,
    HardCoreModel,
    TwoRunsModel,
    batch_means_stderr,
    empty_ball_indicators,
    estimate_hc_intensity,
    hard_core_samples,
    sample_poisson,
    sample_two_runs,
)
from ..statistics import make_kernel, make_statistic
from ..stein import hard_core_bound, hard_core_theorem_bound, two_runs_bound, two_runs_theorem_bound
from ..transport import SampleSet, dual_lower_bound, empirical_d2p_detail


@dataclass
class ExperimentReport:
    model: dict
    bound: dict
    closed_form_bound: float
    primary: float
    primary_se: float
    baseline: float
    baseline_se: float
    dual_lower: float
    extra: dict = field(default_factory=dict)

    @property
    def corrected(self) -> float:
        return max(0.0, self.primary - self.baseline)

    @property
    def combined_se(self) -> float:
        return math.hypot(self.primary_se, self.baseline_se)

    @property
    def bound_verdict(self) -> bool:
        return self.corrected <= self.bound["bound_capped"] + 3 * self.combined_se

    @property
    def dual_verdict(self) -> bool:
        return self.dual_lower <= self.primary + 1e-9 and self.primary <= 1.0

    @property
    def verdict(self) -> bool:
        ok = self.bound_verdict and self.dual_verdict
        if "identity_verdict" in self.extra:
            ok = ok and self.extra["identity_verdict"]
        return ok

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(
            corrected=self.corrected,
            combined_se=self.combined_se,
            bound_verdict=self.bound_verdict,
            dual_verdict=self.dual_verdict,
            verdict=self.verdict,
        )
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, default=_jsonable)

    def rows(self, prefix: str) -> list[dict]:
        cap = self.bound["bound_capped"]
        rows = [
            _row(f"{prefix}.primary_d2", self.primary, self.primary_se, "", ""),
            _row(f"{prefix}.baseline_d2", self.baseline, self.baseline_se, "", ""),
            _row(f"{prefix}.corrected_vs_bound", self.corrected, self.combined_se, cap, self.bound_verdict),
            _row(f"{prefix}.dual_lower_vs_primary", self.dual_lower, "", self.primary, self.dual_verdict),
            _row(f"{prefix}.closed_form_bound", self.closed_form_bound, "", "", ""),
        ]
        if "identity_verdict" in self.extra:
            e = self.extra
            rows.append(
                _row(
                    f"{prefix}.empty_ball_identity",
                    e["empty_ball_prob"],
                    e["identity_se"],
                    e["lambda_hat"] / self.model["beta"],
                    e["identity_verdict"],
                )
            )
        return rows

    def to_csv(self, prefix: str = "experiment") -> str:
        return rows_to_csv(self.rows(prefix))


def _row(name, value, stderr, bound, verdict) -> dict:
    if isinstance(verdict, (bool, np.bool_)):
        verdict = "pass" if verdict else "fail"
    return {"name": name, "value": value, "stderr": stderr, "bound": bound, "verdict": verdict}


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=["name", "value", "stderr", "bound", "verdict"], lineterminator="\r\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: (repr(float(v)) if isinstance(v, (float, np.floating)) else v) for k, v in r.items()})
    return buf.getvalue()


def _jsonable(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(type(o))


def _compare(space, process, ref1, ref2, p, stats):
    a, b1, b2 = SampleSet(space, process), SampleSet(space, ref1), SampleSet(space, ref2)
    primary, matched_p, _ = empirical_d2p_detail(a, b1, p)
    baseline, matched_b, _ = empirical_d2p_detail(b1, b2, p)
    n = len(process)
    se = lambda m: float(m.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    dual = dual_lower_bound(a, b1, stats)
    return primary, se(matched_p), baseline, se(matched_b), dual


def _dual_order(p):
    # statistics need a finite order; Lipschitz for d1p implies Lipschitz for every larger order
    return 2.0 if p == INF else p


def experiment_two_runs(n: int, q: float, p: float, n_samples: int, seed=None) -> ExperimentReport:
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be even and >= 2")
    rng = np.random.default_rng(seed)
    model = TwoRunsModel(n, q)
    target = model.target
    runs = [sample_two_runs(model, rng)[0] for _ in range(n_samples)]
    refs = [sample_poisson(target, rng) for _ in range(2 * n_samples)]
    pd = _dual_order(p)
    stats = [
        make_statistic("ustat_avg", model.space, pd, make_kernel("K0")),
        make_statistic("ustat_centered", model.space, pd, make_kernel("K0")),
    ]
    primary, se_p, baseline, se_b, dual = _compare(model.space, runs, refs[:n_samples], refs[n_samples:], p, stats)
    report = two_runs_theorem_bound(n, q, p)
    return ExperimentReport(
        model={"process": "two-runs", "n": n, "q": q, "p": p, "n_samples": n_samples, "seed": seed},
        bound=report.to_dict(),
        closed_form_bound=two_runs_bound(n, q, p),
        primary=primary,
        primary_se=se_p,
        baseline=baseline,
        baseline_se=se_b,
        dual_lower=dual,
    )


def experiment_hard_core(
    dim: int,
    beta: float,
    r: float,
    p: float,
    n_samples: int,
    burn_in: int = 10**5,
    thin: int = 10**3,
    seed=None,
    n_intensity: int | None = None,
    n_probes: int = 16,
) -> ExperimentReport:
    """Hard-core process on the unit torus against Poisson(lambda_hat).

    lambda_hat comes from an independent chain (10 * n_samples states by
    default, so its error does not swamp the identity check); the compared states also feed
    the empty-ball identity check P[no point within r of x] = lambda / beta,
    averaged over a fixed grid of probe locations x.
    """
    if n_samples < 2 or n_samples % 2:
        raise ValueError("n_samples must be even and >= 2")
    ss = np.random.SeedSequence(seed)
    s_int, s_cmp, s_ref = ss.spawn(3)
    model = HardCoreModel(dim, beta, r, burn_in, thin)
    lam_hat, lam_se = estimate_hc_intensity(model, n_intensity or 10 * n_samples, np.random.default_rng(s_int))
    states = hard_core_samples(model, n_samples, np.random.default_rng(s_cmp))
    rng = np.random.default_rng(s_ref)
    spec = ContinuousIntensity(model.space, lam_hat)
    refs = [sample_poisson(spec, rng) for _ in range(2 * n_samples)]
    pd = _dual_order(p)
    stats = [
        make_statistic("ustat_avg", model.space, pd, make_kernel("K0")),
        make_statistic("ustat_avg", model.space, pd, make_kernel("K1", 3)),
    ]
    primary, se_p, baseline, se_b, dual = _compare(model.space, states, refs[:n_samples], refs[n_samples:], p, stats)

    side = int(math.ceil(n_probes ** (1 / dim)))
    axis = (np.arange(side) + 0.5) / side
    probes = np.array(np.meshgrid(*[axis] * dim, indexing="ij")).reshape(dim, -1).T
    empty = empty_ball_indicators(states, r, probes)
    p_empty = float(empty.mean())
    identity_se = math.hypot(batch_means_stderr(empty), lam_se / beta)
    identity_ok = abs(p_empty - lam_hat / beta) <= 3 * identity_se

    report = hard_core_theorem_bound(dim, r, lam_hat, p)
    return ExperimentReport(
        model={
            "process": "hard-core",
            "dim": dim,
            "beta": beta,
            "r": r,
            "p": p,
            "n_samples": n_samples,
            "burn_in": burn_in,
            "thin": thin,
            "seed": seed,
        },
        bound=report.to_dict(),
        closed_form_bound=hard_core_bound(dim, r, lam_hat, p),
        primary=primary,
        primary_se=se_p,
        baseline=baseline,
        baseline_se=se_b,
        dual_lower=dual,
        extra={
            "lambda_hat": lam_hat,
            "lambda_se": lam_se,
            "empty_ball_prob": p_empty,
            "identity_se": identity_se,
            "identity_verdict": bool(identity_ok),
            "n_probes": len(probes),
        },
    )
