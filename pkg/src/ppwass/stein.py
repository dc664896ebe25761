"""Stein factors and Poisson process approximation bounds.

Closed forms for kappa0, gamma1, gamma2 and the factors c1, c2 entering the
bound on the d2 distance between a point process and the Poisson process with
the same expectation measure, plus the specialisations to the 2-runs process
and the stationary hard-core process.

The order p is matched exactly at 1 and at INF; every other real p >= 1 uses
the generic branches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

from .metrics import INF, check_order

E = math.e


def _pow(x: float, a: float) -> float:
    # x ** a through exp/log; 0 ** 0 = 1 and 0 ** a = 0 for a > 0
    if x == 0.0:
        return 1.0 if a == 0.0 else 0.0
    return math.exp(a * math.log(x))


def kappa0() -> float:
    return 4 * E / (1 + 4 * E - math.sqrt(1 + 8 * E))


def kappa1() -> float:
    return 2.0 - kappa0()


def kappa(p: float) -> float:
    """p/(p-1) * kappa0^(1-1/p) - kappa1, for 1 < p < INF."""
    k0 = kappa0()
    return p / (p - 1) * _pow(k0, 1 - 1 / p) - kappa1()


def beta(p: float) -> float:
    return 1 + _pow(2.0, 1 / p) + _pow(2 / 3, 1 / p)


def kappa2(p: float) -> float:
    return _pow(beta(p) / 2, p)


def gamma1(p: float) -> float:
    p = check_order(p)
    if p == INF:
        raise ValueError("gamma1 is not defined at p = INF")
    k0, k1 = kappa0(), kappa1()
    if p == 1.0:
        return math.sqrt(2 / E) + 2 * _pow(k0 * math.exp(k0), -0.5)
    denom = p * _pow(k0, 1 - 1 / p) - k1 * (p - 1)
    if p <= 2.0:
        return math.sqrt(2 / E) + 2 * _pow((2 - p) / denom, (2 - p) / (2 * (p - 1)))
    s2e = math.sqrt(2 * E)
    return p / (p - 1) + p / (p - 1) / s2e * _pow((p - 2) / (s2e * denom), (p - 2) / p)


def gamma1_maximum_form(p: float) -> float:
    """gamma1 as the maximum of the bounding term over lambda, before simplification.

    Independent algebraic route used to cross-check the closed-form branches.
    """
    if not (1.0 < p < INF):
        raise ValueError("maximum form defined for 1 < p < INF")
    kp = kappa(p)
    if p <= 2.0:
        a = (2 - p) / ((p - 1) * kp)
        return (
            math.sqrt(2 / E)
            + p / (p - 1) * _pow(a, (2 - p) / (2 * (p - 1)))
            - kp * _pow(a, p / (2 * (p - 1)))
        )
    c = (1 / (2 * E)) * ((p - 2) / ((p - 1) * kp)) ** 2
    return p / (p - 1) + math.sqrt(2 / E) * _pow(c, 0.5 - 1 / p) - kp * _pow(c, 1 - 1 / p)


def gamma1_limit() -> float:
    """Limit of gamma1 as p -> INF."""
    return 1 + 1 / (4 * E * (kappa0() - 1))


def gamma2(p: float) -> float:
    p = check_order(p)
    if p == 1.0 or p == INF:
        raise ValueError("gamma2 is defined for 1 < p < INF only")
    return beta(p) * p * p / ((p - 1) * (2 * p - 1))


def _check_lambda(lam: float) -> float:
    lam = float(lam)
    if not (lam >= 0.0) or math.isinf(lam):
        raise ValueError(f"total mass must be finite and >= 0, got {lam}")
    return lam


def c1(p: float, lambda_total: float) -> float:
    p = check_order(p)
    lam = _check_lambda(lambda_total)
    if p == INF or lam == 0.0:
        return 1.0
    return min(1.0, gamma1(p) * _pow(lam, -1 / max(2.0, p)))


def c2(p: float, lambda_total: float) -> float:
    p = check_order(p)
    lam = _check_lambda(lambda_total)
    if p == INF or lam == 0.0:
        return 1.0
    if p == 1.0:
        logp = max(0.0, math.log(6 * lam / 11))
        return min(1.0, 11 / 6 * (1 + 2 * logp) / lam)
    return min(1.0, gamma2(p) * _pow(lam, -1 / p))


@dataclass
class SteinConstants:
    p: float
    lambda_total: float
    kappa0: float
    kappa1: float
    gamma1: float | None
    gamma2: float | None
    c1: float
    c2: float
    beta: float | None = None
    kappa_p: float | None = None
    kappa2: float | None = None

    @classmethod
    def evaluate(cls, p: float, lambda_total: float) -> "SteinConstants":
        p = check_order(p)
        generic = 1.0 < p < INF
        return cls(
            p=p,
            lambda_total=float(lambda_total),
            kappa0=kappa0(),
            kappa1=kappa1(),
            gamma1=gamma1(p) if p < INF else None,
            gamma2=gamma2(p) if generic else None,
            c1=c1(p, lambda_total),
            c2=c2(p, lambda_total),
            beta=beta(p) if p < INF else None,
            kappa_p=kappa(p) if generic else None,
            kappa2=kappa2(p) if p < INF else None,
        )


@dataclass
class BoundReport:
    p: float
    lambda_total: float
    I1: float
    I2: float
    eps1_raw: float | None
    eps2_raw: float | None
    c1: float
    c2: float
    term_main: float
    eps1: float
    eps2: float
    bound_raw: float
    bound_capped: float
    clamped: bool = False
    constants: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["p"] = "inf" if self.p == INF else self.p
        for k in ("eps1", "eps2"):
            if math.isinf(d[k]):
                d[k] = None
        return d


def theorem_bound(p, lambda_total, I1, I2, eps1_raw=None, eps2_raw=None) -> BoundReport:
    """Combine the ingredients of the general bound.

    ``bound_raw = c2 * (I1 + I2) + min(c1 * eps1_raw, c2 * eps2_raw)``; an
    ingredient passed as None drops out of the minimum. A negative ``I1 + I2``
    is clamped to zero with a warning flag set on the report.
    """
    p = check_order(p)
    if eps1_raw is None and eps2_raw is None:
        raise ValueError("supply at least one of eps1_raw, eps2_raw")
    if I1 < 0:
        raise ValueError("I1 must be >= 0")
    for name, v in (("eps1_raw", eps1_raw), ("eps2_raw", eps2_raw)):
        if v is not None and v < 0:
            raise ValueError(f"{name} must be >= 0")
    k1, k2 = c1(p, lambda_total), c2(p, lambda_total)
    local = I1 + I2
    clamped = local < 0
    if clamped:
        warnings.warn("I1 + I2 < 0; main term clamped to 0", stacklevel=2)
        local = 0.0
    term_main = k2 * local
    eps1 = k1 * eps1_raw if eps1_raw is not None else math.inf
    eps2 = k2 * eps2_raw if eps2_raw is not None else math.inf
    raw = term_main + min(eps1, eps2)
    consts = SteinConstants.evaluate(p, lambda_total)
    return BoundReport(
        p=p,
        lambda_total=float(lambda_total),
        I1=float(I1),
        I2=float(I2),
        eps1_raw=eps1_raw,
        eps2_raw=eps2_raw,
        c1=k1,
        c2=k2,
        term_main=term_main,
        eps1=eps1,
        eps2=eps2,
        bound_raw=raw,
        bound_capped=min(raw, 1.0),
        clamped=clamped,
        constants={k: v for k, v in asdict(consts).items() if k not in ("p", "lambda_total")},
    )


# ---------------------------------------------------------------- 2-runs


def two_runs_ingredients(n: int, q: float) -> tuple[float, float, float, float]:
    """(lambda_total, I1, I2, eps2_raw) under singleton neighbourhoods."""
    _check_two_runs(n, q)
    return n * q**2, n * q**4, 0.0, 2 * n * q**3 * (1 - q)


def two_runs_bound(n: int, q: float, p: float) -> float:
    """Closed-form bound for the 2-runs process (no saturation at 1)."""
    _check_two_runs(n, q)
    p = check_order(p)
    lam = n * q * q
    tail = q * (2 - q)
    if q == 0.0:
        return 0.0
    if p == 1.0:
        return 11 / 6 * (1 + 2 * max(0.0, math.log(6 * lam / 11))) * tail
    if p == INF:
        return lam * tail
    return gamma2(p) * _pow(lam, 1 - 1 / p) * tail


def two_runs_theorem_bound(n: int, q: float, p: float) -> BoundReport:
    lam, i1, i2, e2 = two_runs_ingredients(n, q)
    return theorem_bound(p, lam, i1, i2, eps2_raw=e2)


def _check_two_runs(n, q):
    if n < 1:
        raise ValueError("n must be >= 1")
    if not (0.0 <= q <= 1.0):
        raise ValueError("q must lie in [0, 1]")


# ---------------------------------------------------------------- hard core


def ball_volume(dim: int) -> float:
    if dim < 1:
        raise ValueError("dimension must be >= 1")
    return math.exp(dim / 2 * math.log(math.pi) - math.lgamma(dim / 2 + 1))


def hard_core_eps1_raw(dim: int, r: float, lambda_total: float) -> float:
    return 2 * lambda_total**2 * ball_volume(dim) * r**dim


def hard_core_bound(dim: int, r: float, lambda_total: float, p: float) -> float:
    """Closed-form bound for the stationary hard-core process on the unit torus."""
    p = check_order(p)
    if r < 0 or lambda_total < 0:
        raise ValueError("r and lambda must be nonnegative")
    base = 2 * ball_volume(dim) * r**dim
    if p == INF:
        return base * lambda_total**2
    return gamma1(p) * base * _pow(lambda_total, 2 - 1 / max(2.0, p))


def hard_core_theorem_bound(dim: int, r: float, lambda_total: float, p: float) -> BoundReport:
    return theorem_bound(p, lambda_total, 0.0, 0.0, eps1_raw=hard_core_eps1_raw(dim, r, lambda_total))
