"""Verification suites behind ``ppwass verify``.

Each suite returns a list of CSV rows ``{name, value, stderr, bound, verdict}``.
Defaults are desk-scale; the acceptance tests call the same functions with
larger controls.
"""

from __future__ import annotations

import math
import time

import numpy as np

from ..ground import DiscreteAtoms, Torus, UnitCube
from ..matching import brute_force_assignment, min_bottleneck_assignment, min_sum_assignment
from ..metrics import INF, d1_prime, d1p
from ..processes import (
    DiscreteIntensity,
    HardCoreModel,
    TwoRunsModel,
    batch_means_stderr,
    hard_core_samples,
    sample_immigration_death,
    sample_two_runs,
)
from ..statistics import make_kernel, make_statistic
from ..stein import gamma1, gamma1_limit, gamma1_maximum_form, gamma2, kappa0, c1, c2
from ..transport import SampleSet, dual_lower_bound, empirical_d2p
from .experiments import _row, experiment_hard_core, experiment_two_runs
from .lipschitz import PairGenerator, lipschitz_suite
from .stein_solution import (
    StateLattice,
    estimate_h,
    exact_h_discrete,
    lattice_delta_scan,
    lattice_pairs,
    scan_limits,
)
from .testfunctions import from_statistic, make_distance_test_function

SUITES = ("metrics", "statistics", "constants", "stein", "two-runs", "hard-core")

STEIN_ORDERS = (1.0, 2.0, 5.0, INF)
STEIN_LAMBDAS = (0.5, 1.5, 4.0)
BOUND_MARGIN = 1e-8


# ---------------------------------------------------------------- metrics


def assignment_rows(n_matrices: int = 200, max_n: int = 7, seed=0) -> list[dict]:
    rng = np.random.default_rng(seed)
    worst_sum = worst_bn = 0.0
    for _ in range(n_matrices):
        n = int(rng.integers(1, max_n + 1))
        c = rng.random((n, n))
        if rng.random() < 0.3:
            c = np.round(c * 4) / 4  # ties
        worst_sum = max(worst_sum, abs(min_sum_assignment(c)[1] - brute_force_assignment(c, "sum")))
        worst_bn = max(worst_bn, abs(min_bottleneck_assignment(c)[1] - brute_force_assignment(c, "bottleneck")))
    return [
        _row("assignment.min_sum_vs_brute_force", worst_sum, "", 1e-12, worst_sum <= 1e-12),
        _row("assignment.bottleneck_vs_brute_force", worst_bn, "", 1e-12, worst_bn <= 1e-12),
    ]


def metric_spaces(seed=0) -> dict:
    rng = np.random.default_rng(seed)
    return {
        "cube1": UnitCube(1),
        "cube2": UnitCube(2),
        "torus2": Torus(2),
        "atoms6": DiscreteAtoms(rng.random((6, 2))),
    }


def _random_triple(gen: PairGenerator, rng):
    if rng.random() < 0.7:
        n = int(rng.integers(gen.min_size, gen.max_size + 1))
        sizes = (n, n, n)
    else:
        sizes = rng.integers(gen.min_size, gen.max_size + 1, 3)
    return [gen.points(int(s), rng) for s in sizes]


def metric_axiom_rows(space, label: str, n_checks: int = 2000, seed=0, orders=(1.0, 2.0, 3.0, INF)) -> list[dict]:
    rng = np.random.default_rng(seed)
    gen = PairGenerator(space, max_size=5)
    sym_bad = bounded_bad = perm_bad = mono_bad = 0
    tri = 0.0
    for _ in range(n_checks):
        x, y, z = _random_triple(gen, rng)
        xp = x[rng.permutation(len(x))]
        vals = []
        for p in orders:
            dxy = d1p(space, x, y, p)
            vals.append(dxy)
            sym_bad += dxy != d1p(space, y, x, p)
            bounded_bad += not (0.0 <= dxy <= 1.0)
            perm_bad += dxy != d1p(space, xp, y, p)
            tri = max(tri, dxy - d1p(space, x, z, p) - d1p(space, z, y, p))
        mono_bad += any(b < a - 1e-12 for a, b in zip(vals, vals[1:]))
        e = d1_prime(space, x, y)
        sym_bad += e != d1_prime(space, y, x)
        perm_bad += e != d1_prime(space, xp, y)
        bounded_bad += not (abs(len(x) - len(y)) <= e <= max(len(x), len(y)) + 1e-12)
        tri = max(tri, e - d1_prime(space, x, z) - d1_prime(space, z, y))
    pre = f"metrics.{label}"
    return [
        _row(f"{pre}.symmetry_violations", sym_bad, "", 0, sym_bad == 0),
        _row(f"{pre}.triangle_excess", tri, "", 1e-12, tri <= 1e-12),
        _row(f"{pre}.bound_violations", bounded_bad, "", 0, bounded_bad == 0),
        _row(f"{pre}.multiset_violations", perm_bad, "", 0, perm_bad == 0),
        _row(f"{pre}.monotone_in_p_violations", mono_bad, "", 0, mono_bad == 0),
    ]


def transport_rows(n_pairs: int = 100, seed=0, orders=(1.0, 1.5, 2.0, 3.0, INF)) -> list[dict]:
    """Dual sandwich and monotonicity in p of empirical d2 on random sample-set pairs.

    Points lie in [0, 0.7]^2 so the K1 kernel applies; statistics use the
    metric's order (2 for p = inf, valid since d1p is increasing in p).
    """
    rng = np.random.default_rng(seed)
    space = UnitCube(2)
    gen = PairGenerator(space, max_size=5, hi=0.7)
    stats = {
        p: [
            make_statistic("ustat_avg", space, p, make_kernel("K0")),
            make_statistic("ustat_centered", space, p, make_kernel("K0")),
            make_statistic("ustat_avg", space, p, make_kernel("K1", 2)),
            make_statistic("nn_avg", space, p),
        ]
        for p in (1.0, 1.5, 2.0, 3.0)
    }
    excess = -math.inf
    mono_bad = 0
    for _ in range(n_pairs):
        n = int(rng.integers(1, 9))
        a = SampleSet(space, [gen.points(int(rng.integers(0, 6)), rng) for _ in range(n)])
        b = SampleSet(space, [gen.points(int(rng.integers(0, 6)), rng) for _ in range(n)])
        vals = [empirical_d2p(a, b, p) for p in orders]
        mono_bad += any(y < x for x, y in zip(vals, vals[1:]))
        for p, v in zip(orders, vals):
            excess = max(excess, dual_lower_bound(a, b, stats[2.0 if p == INF else p]) - v)
    return [
        _row("transport.dual_lower_minus_d2", excess, "", 1e-9, excess <= 1e-9),
        _row("transport.monotone_in_p_violations", mono_bad, "", 0, mono_bad == 0),
    ]


def metrics_suite(n_checks: int = 2000, seed=0) -> list[dict]:
    rows = assignment_rows(seed=seed)
    for k, (label, space) in enumerate(metric_spaces(seed).items()):
        rows += metric_axiom_rows(space, label, n_checks, seed=(seed, k))
    return rows + transport_rows(seed=seed)


# ---------------------------------------------------------------- statistics


def statistic_cases(orders=(1.0, 2.0, 3.0)):
    """(statistic, space, generator) triples covering every built-in statistic."""
    cube2 = UnitCube(2)
    # kernels beyond K0 need patterns of diameter <= 1
    gen_small = PairGenerator(cube2, max_size=6, hi=0.7)
    gen_full = PairGenerator(cube2, max_size=6)
    out = []
    for p in orders:
        for kind in ("ustat_avg", "ustat_centered"):
            out.append((make_statistic(kind, cube2, p, make_kernel("K0")), cube2, gen_full))
            for name in ("K1", "K2", "K3"):
                for l in (2, 3):
                    out.append((make_statistic(kind, cube2, p, make_kernel(name, l)), cube2, gen_small))
        for dim in (1, 2, 3):
            space = UnitCube(dim)
            out.append((make_statistic("nn_avg", space, p), space, PairGenerator(space, max_size=7)))
    return out


def statistics_suite(n_pairs: int = 1000, seed=0, orders=(1.0, 2.0, 3.0)) -> list[dict]:
    rows = []
    for k, (stat, space, gen) in enumerate(statistic_cases(orders)):
        rep = lipschitz_suite(stat, space, gen, n_pairs, seed=(seed, k))
        name = f"lipschitz.{stat.name}.D{space.dim}.p{stat.p:g}"
        rows.append(_row(name, rep.worst_ratio, "", rep.lipschitz, rep.passed))
    return rows


# ---------------------------------------------------------------- constants


def constants_suite(n_random: int = 50, seed=0) -> list[dict]:
    rng = np.random.default_rng(seed)
    rows = []
    k0 = kappa0()
    resid = kappa0_residual(k0)
    rows.append(_row("constants.kappa0_residual", resid, "", 1e-12, resid < 1e-12))
    g = gamma1(1.0)
    rows.append(_row("constants.gamma1_at_1", g, "", 1.61, 1.6097 <= g <= 1.61))
    for label, lo, hi in (("p_in_(1,2]", 1.0, 2.0), ("p_in_(2,inf)", 2.0, 50.0)):
        ps = lo + (hi - lo) * rng.random(n_random)
        ps = ps[ps > lo]
        rel = max(abs(gamma1(p) - gamma1_maximum_form(p)) / gamma1(p) for p in ps)
        rows.append(_row(f"constants.gamma1_display_vs_proof.{label}", rel, "", 1e-10, rel <= 1e-10))
    right = abs(gamma1(1 + 1e-6) - g)
    rows.append(_row("constants.gamma1_continuity_at_1", right, "", 1e-3, right <= 1e-3))
    jump = max(abs(gamma1(2 - 1e-9) - gamma1(2.0)), abs(gamma1(2 + 1e-9) - gamma1(2.0)))
    rows.append(_row("constants.gamma1_continuity_at_2", jump, "", 1e-5, jump <= 1e-5))
    lim1 = 1 + 1 / (4 * math.e * (k0 - 1))
    d1_ = abs(gamma1(1e6) - lim1)
    rows.append(_row("constants.gamma1_large_p_limit", d1_, "", 1e-3, d1_ <= 1e-3 and abs(gamma1_limit() - lim1) < 1e-12))
    d2_ = abs(gamma2(1e6) - 1.5)
    rows.append(_row("constants.gamma2_large_p_limit", d2_, "", 1e-3, d2_ <= 1e-3))
    return rows


def kappa0_residual(k: float) -> float:
    """|1/k + (2 e k)^(-1/2) - 1|, zero at the defining fixed point."""
    return abs(1 / k + (2 * math.e * k) ** -0.5 - 1)


# ---------------------------------------------------------------- stein


def stein_specs(seed=0) -> list[tuple[str, DiscreteIntensity]]:
    rng = np.random.default_rng(seed)
    out = []
    for lam in STEIN_LAMBDAS:
        space3 = DiscreteAtoms(rng.random((3, 2)))
        w = rng.dirichlet(np.ones(3))
        out.append((f"atoms3.lam{lam:g}", DiscreteIntensity(space3, w * lam)))
        space2 = DiscreteAtoms(rng.random((2, 1)))
        w = rng.dirichlet(np.ones(2))
        out.append((f"atoms2.lam{lam:g}", DiscreteIntensity(space2, w * lam)))
    return out


def stein_test_functions(space, p: float, n_functions: int, rng) -> list:
    """Distance test functions around random patterns plus K0 statistics."""
    stat_p = 2.0 if p == INF else p
    fs = [
        from_statistic(make_statistic("ustat_avg", space, stat_p, make_kernel("K0")), space, p),
        from_statistic(make_statistic("ustat_centered", space, stat_p, make_kernel("K0")), space, p),
    ]
    while len(fs) < n_functions:
        xi0 = rng.integers(0, space.n_atoms, int(rng.integers(0, 6)))
        fs.append(make_distance_test_function(space, xi0, p, complement=bool(rng.random() < 0.5)))
    return fs


def stein_scan_rows(
    n_functions: int = 20, seed=0, orders=STEIN_ORDERS, n_pairs: int = 300, exhaustive_limit: int = 4
) -> list[dict]:
    """Exact Stein solutions: residuals on interior states and the three difference bounds.

    3-atom specs scan all states inside the scan limits with sampled pairs for
    the third bound; 2-atom specs take every pair of states with counts <=
    ``exhaustive_limit``.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for label, spec in stein_specs(seed):
        lat = StateLattice(spec)
        space = spec.space
        lam = spec.lambda_total
        if space.n_atoms == 2:
            limits = (exhaustive_limit,) * 2
            pairs = lattice_pairs(limits)
        else:
            limits = scan_limits(lat)
            pairs = lattice_pairs(limits, n_pairs, rng)
        resid = 0.0
        for p in orders:
            k1, k2 = c1(p, lam), c2(p, lam)
            w = [0.0, 0.0, 0.0]
            for f in stein_test_functions(space, p, n_functions, rng):
                table = exact_h_discrete(f, spec, lattice=lat)
                resid = max(resid, float(table.residuals().max()))
                s = lattice_delta_scan(table, limits, pairs)
                w = [max(w[0], s.max_abs_dh), max(w[1], s.max_abs_d2h), max(w[2], s.max_lip3_ratio)]
            pre = f"stein.{label}.p{'inf' if p == INF else f'{p:g}'}"
            rows.append(_row(f"{pre}.max_dh", w[0], "", k1, w[0] <= k1 + BOUND_MARGIN))
            rows.append(_row(f"{pre}.max_d2h", w[1], "", k2, w[1] <= k2 + BOUND_MARGIN))
            rows.append(_row(f"{pre}.max_lip3_ratio", w[2], "", k2, w[2] <= k2 + BOUND_MARGIN))
        rows.append(_row(f"stein.{label}.max_interior_residual", resid, "", 1e-8, resid < 1e-8))
    return rows


def stein_mc_rows(n_mc: int = 2000, seed=0) -> list[dict]:
    """Monte-Carlo h against the exact table on a 2-atom spec with lambda = 1.5."""
    space = DiscreteAtoms(np.array([[0.2], [0.7]]))
    spec = DiscreteIntensity(space, np.array([0.6, 0.9]))
    f = make_distance_test_function(space, np.array([0, 1]), 1.0)
    table = exact_h_discrete(f, spec)
    rows = []
    for k, xi in enumerate((np.array([], int), np.array([0, 1]), np.array([1, 1, 1]))):
        est = estimate_h(f, spec, xi, n_mc=n_mc, seed=(seed, k))
        err = abs(est.value - table(xi))
        rows.append(_row(f"stein.mc_vs_exact.state{k}", err, est.stderr, 3 * est.stderr, err <= 3 * est.stderr))
    return rows


def immigration_death_rows(n_draws: int = 20000, t: float = 40.0, seed=0) -> list[dict]:
    """Total counts of the immigration-death process at time t versus Poisson(lambda)."""
    from scipy.stats import poisson

    rng = np.random.default_rng(seed)
    space = DiscreteAtoms(np.array([[0.1], [0.4], [0.9]]))
    spec = DiscreteIntensity(space, np.array([0.5, 1.0, 1.5]))
    xi0 = np.array([0, 0, 1, 2, 2, 2, 2, 2])
    counts = np.array([len(sample_immigration_death(spec, xi0, t, rng)) for _ in range(n_draws)])
    tv = count_tv(counts, poisson(spec.lambda_total))
    return [_row("laws.immigration_death_t40_tv", tv, "", 0.02, tv <= 0.02)]


def count_tv(counts, law) -> float:
    """Total variation between the empirical law of ``counts`` and a discrete law."""
    counts = np.asarray(counts, dtype=int)
    top = int(max(counts.max(initial=0), law.isf(1e-12))) + 1
    emp = np.bincount(counts, minlength=top + 1)[: top + 1] / len(counts)
    ks = np.arange(top + 1)
    ref = law.pmf(ks)
    return 0.5 * float(np.abs(emp - ref).sum() + law.sf(top))


def stein_suite(n_functions: int = 20, seed=0) -> list[dict]:
    return stein_scan_rows(n_functions, seed) + stein_mc_rows(seed=seed) + immigration_death_rows(seed=seed)


# ---------------------------------------------------------------- end-to-end


def two_runs_mean_rows(n: int = 400, q: float = 0.05, n_draws: int = 20000, seed=0) -> list[dict]:
    rng = np.random.default_rng(seed)
    model = TwoRunsModel(n, q)
    counts = np.array([len(sample_two_runs(model, rng)[0]) for _ in range(n_draws)], dtype=float)
    se = counts.std(ddof=1) / math.sqrt(n_draws)
    err = abs(counts.mean() - n * q * q)
    return [_row("laws.two_runs_mean_count", counts.mean(), se, n * q * q, err <= 3 * se)]


def two_runs_suite(n: int = 400, q: float = 0.05, p: float = 1.0, n_samples: int = 200, seed=0) -> list[dict]:
    rep = experiment_two_runs(n, q, p, n_samples, seed)
    return rep.rows("two_runs") + two_runs_mean_rows(n, q, seed=seed)


def hard_core_limit_rows(beta: float = 1.1, n_draws: int = 20000, seed=0) -> list[dict]:
    """Hard-core counts at r -> 0+ versus Poisson(beta)."""
    from scipy.stats import poisson

    model = HardCoreModel(2, beta, 1e-9, burn_in=2000, thin=50)
    counts = np.array([len(x) for x in hard_core_samples(model, n_draws, seed)])
    tv = count_tv(counts, poisson(beta))
    return [_row("laws.hard_core_small_r_tv", tv, batch_means_stderr(counts), 0.02, tv <= 0.02)]


def hard_core_suite(
    dim: int = 2, beta: float = 1.1, r: float = 0.05, p: float = 1.0, n_samples: int = 200, seed=0
) -> list[dict]:
    rep = experiment_hard_core(dim, beta, r, p, n_samples, seed=seed)
    return rep.rows("hard_core") + hard_core_limit_rows(beta, seed=seed)


def run_suite(name: str, seed=0) -> list[dict]:
    table = {
        "metrics": lambda: metrics_suite(seed=seed),
        "statistics": lambda: statistics_suite(seed=seed),
        "constants": lambda: constants_suite(seed=seed),
        "stein": lambda: stein_suite(seed=seed),
        "two-runs": lambda: two_runs_suite(seed=seed),
        "hard-core": lambda: hard_core_suite(seed=seed),
    }
    if name == "all":
        return [row for key in SUITES for row in table[key]()]
    if name not in table:
        raise ValueError(f"unknown suite {name!r}")
    t0 = time.perf_counter()
    rows = table[name]()
    rows.append(_row(f"{name}.runtime_seconds", time.perf_counter() - t0, "", "", ""))
    return rows
