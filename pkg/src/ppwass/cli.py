"""Batch command-line front end: ``ppwass dist|wdist|bound|simulate|verify``.

Exit codes: 0 success, 1 failed verdict, 2 usage or parse error.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import tempfile

import numpy as np

from .ground import DiscreteAtoms, GroundSpace, Torus, UnitCube
from .metrics import INF, d1_prime, d1p
from .processes import (
    ContinuousIntensity,
    HardCoreModel,
    TwoRunsModel,
    hard_core_samples,
    sample_immigration_death,
    sample_poisson,
    sample_two_runs,
)
from .stein import hard_core_bound, hard_core_theorem_bound, theorem_bound, two_runs_bound, two_runs_theorem_bound
from .transport import SampleSet, empirical_d2p
from .verify.experiments import rows_to_csv
from .verify.suites import SUITES, run_suite


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- pattern files


def _fmt_float(x: float) -> str:
    if not math.isfinite(x):
        raise UsageError("non-finite number in output")
    return format(x, ".17g")


def canonical_json(obj) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    if isinstance(obj, dict):
        items = (json.dumps(str(k)) + ": " + canonical_json(obj[k]) for k in sorted(obj))
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ", ".join(canonical_json(v) for v in obj) + "]"
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def space_to_dict(space: GroundSpace) -> dict:
    if isinstance(space, DiscreteAtoms):
        if not space.euclidean:
            raise UsageError("only atoms with the capped Euclidean table can be written")
        return {"type": "discrete", "dim": space.dim, "atoms": space.locations.tolist()}
    return {"type": space.kind, "dim": space.dim}


def dump_patterns(space: GroundSpace, patterns) -> str:
    if isinstance(space, DiscreteAtoms):
        pats = [[int(i) for i in np.asarray(x)] for x in patterns]
    else:
        pats = [np.asarray(x, dtype=float).reshape(-1, space.dim).tolist() for x in patterns]
    return canonical_json({"space": space_to_dict(space), "patterns": pats}) + "\n"


def space_from_dict(d) -> GroundSpace:
    if not isinstance(d, dict):
        raise UsageError("'space' must be an object")
    kind = d.get("type")
    dim = d.get("dim")
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise UsageError("'dim' must be a positive integer")
    has_atoms = "atoms" in d
    if (kind == "discrete") != has_atoms:
        raise UsageError("'atoms' must be present exactly when type is 'discrete'")
    if kind == "cube":
        return UnitCube(dim)
    if kind == "torus":
        return Torus(dim)
    if kind == "discrete":
        atoms = np.asarray(d["atoms"], dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] != dim or len(atoms) == 0:
            raise UsageError("'atoms' must be a non-empty list of dim-vectors")
        return DiscreteAtoms(atoms)
    raise UsageError(f"unknown space type {kind!r}")


def parse_patterns(text: str) -> tuple[GroundSpace, list[np.ndarray]]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise UsageError(f"invalid JSON: {e}") from None
    if not isinstance(doc, dict) or set(doc) != {"space", "patterns"}:
        raise UsageError("document must have exactly the keys 'space' and 'patterns'")
    try:
        space = space_from_dict(doc["space"])
        if not isinstance(doc["patterns"], list):
            raise UsageError("'patterns' must be a list")
        pats = []
        for raw in doc["patterns"]:
            if isinstance(space, DiscreteAtoms):
                arr = np.asarray(raw)
                if arr.size and arr.dtype.kind not in "iu":
                    raise UsageError("discrete patterns list integer atom indices")
                pats.append(space.validate(arr.astype(int)))
            else:
                arr = np.asarray(raw, dtype=float)
                if arr.size == 0:
                    arr = arr.reshape(0, space.dim)
                pats.append(space.validate(arr))
    except (ValueError, TypeError) as e:
        raise UsageError(str(e)) from None
    return space, pats


def read_patterns(path: str):
    try:
        with open(path, encoding="utf-8") as fh:
            return parse_patterns(fh.read())
    except OSError as e:
        raise UsageError(str(e)) from None


def _write_atomic(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".ppwass-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


# ---------------------------------------------------------------- commands


def _order(s: str) -> float:
    if s.lower() in ("inf", "infinity"):
        return INF
    try:
        p = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid order {s!r}") from None
    if not p >= 1:
        raise argparse.ArgumentTypeError("order must be >= 1")
    return p


def format_value(v: float) -> str:
    """12 significant digits, fixed notation for values in [0, 1]."""
    if v == 0:
        return "0.000000000000"
    return format(v, "#.12g")


def _pick(pats, index, label):
    if index is None:
        if len(pats) != 1:
            raise UsageError(f"{label} holds {len(pats)} patterns; select one with --index-{label[-1]}")
        return pats[0]
    if not 0 <= index < len(pats):
        raise UsageError(f"--index-{label[-1]} out of range")
    return pats[index]


def cmd_dist(args) -> int:
    sa, pa = read_patterns(args.file_a)
    sb, pb = read_patterns(args.file_b)
    if sa != sb:
        raise UsageError("files declare different spaces")
    x, y = _pick(pa, args.index_a, "file a"), _pick(pb, args.index_b, "file b")
    v = d1p(sa, x, y, args.p) if args.metric == "d1" else d1_prime(sa, x, y)
    print(format_value(v))
    return 0


def cmd_wdist(args) -> int:
    sa, pa = read_patterns(args.file_a)
    sb, pb = read_patterns(args.file_b)
    if sa != sb:
        raise UsageError("files declare different spaces")
    if len(pa) != len(pb) or not pa:
        raise UsageError("files must hold the same positive number of patterns")
    print(format_value(empirical_d2p(SampleSet(sa, pa), SampleSet(sb, pb), args.p)))
    return 0


def _need(args, *names):
    missing = [n for n in names if getattr(args, n) is None]
    if missing:
        raise UsageError("missing " + ", ".join("--" + m.replace("_", "-") for m in missing))


def cmd_bound(args) -> int:
    p = args.p
    if args.model == "two-runs":
        _need(args, "n", "q")
        if args.n < 1 or not 0 <= args.q <= 1:
            raise UsageError("need n >= 1 and 0 <= q <= 1")
        out = {
            "model": {"name": "two-runs", "n": args.n, "q": args.q},
            "closed_form": two_runs_bound(args.n, args.q, p),
            "theorem": two_runs_theorem_bound(args.n, args.q, p).to_dict(),
        }
    elif args.model == "hard-core":
        _need(args, "dim", "r", "lam")
        if args.dim < 1 or args.r < 0 or args.lam < 0:
            raise UsageError("need dim >= 1, r >= 0, lambda >= 0")
        out = {
            "model": {"name": "hard-core", "dim": args.dim, "r": args.r, "lambda": args.lam},
            "closed_form": hard_core_bound(args.dim, args.r, args.lam, p),
            "theorem": hard_core_theorem_bound(args.dim, args.r, args.lam, p).to_dict(),
        }
    else:
        _need(args, "lam", "i1")
        if args.eps1 is None and args.eps2 is None:
            raise UsageError("raw model needs --eps1 or --eps2")
        try:
            rep = theorem_bound(p, args.lam, args.i1, args.i2, args.eps1, args.eps2)
        except ValueError as e:
            raise UsageError(str(e)) from None
        out = {"model": {"name": "raw"}, "closed_form": None, "theorem": rep.to_dict()}
    if out["closed_form"] is not None:
        out["closed_form_capped"] = min(out["closed_form"], 1.0)
    print(json.dumps(out, sort_keys=True, indent=2))
    return 0


def _continuous_space(args) -> GroundSpace:
    if args.dim is None or args.dim < 1:
        raise UsageError("--dim must be a positive integer")
    return UnitCube(args.dim) if args.space == "cube" else Torus(args.dim)


def cmd_simulate(args) -> int:
    if args.n_samples < 0:
        raise UsageError("--n-samples must be >= 0")
    rng = np.random.default_rng(args.seed)
    m = args.model
    if m == "poisson":
        _need(args, "rate")
        spec = ContinuousIntensity(_continuous_space(args), args.rate)
        space = spec.space
        pats = [sample_poisson(spec, rng) for _ in range(args.n_samples)]
    elif m == "immigration-death":
        _need(args, "rate", "t")
        spec = ContinuousIntensity(_continuous_space(args), args.rate)
        space = spec.space
        xi0 = space.empty()
        if args.init is not None:
            s0, p0 = read_patterns(args.init)
            if s0 != space or len(p0) != 1:
                raise UsageError("--init must hold one pattern on the simulated space")
            xi0 = p0[0]
        pats = [sample_immigration_death(spec, xi0, args.t, rng) for _ in range(args.n_samples)]
    elif m == "two-runs":
        _need(args, "n", "q")
        try:
            model = TwoRunsModel(args.n, args.q)
        except ValueError as e:
            raise UsageError(str(e)) from None
        space = model.space
        pats = [sample_two_runs(model, rng)[0] for _ in range(args.n_samples)]
    else:
        _need(args, "dim", "beta", "r")
        try:
            model = HardCoreModel(args.dim, args.beta, args.r, args.burn_in, args.thin)
        except ValueError as e:
            raise UsageError(str(e)) from None
        space = model.space
        pats = hard_core_samples(model, args.n_samples, rng)
    _write_atomic(args.out, dump_patterns(space, pats))
    return 0


def cmd_verify(args) -> int:
    rows = run_suite(args.suite, seed=args.seed)
    _write_atomic(args.out, rows_to_csv(rows))
    failed = [r["name"] for r in rows if r["verdict"] == "fail"]
    for name in failed:
        print(f"FAIL {name}", file=sys.stderr)
    return 1 if failed else 0


# ---------------------------------------------------------------- parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="ppwass", description="Wasserstein distances and Poisson process approximation bounds.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    d = sub.add_parser("dist", help="d1p or d1' between two single patterns")
    d.add_argument("file_a")
    d.add_argument("file_b")
    d.add_argument("--p", type=_order, default=1.0)
    d.add_argument("--metric", choices=("d1", "d1prime"), default="d1")
    d.add_argument("--index-a", type=int)
    d.add_argument("--index-b", type=int)
    d.set_defaults(func=cmd_dist)

    w = sub.add_parser("wdist", help="empirical d2 between two equal-size sample files")
    w.add_argument("file_a")
    w.add_argument("file_b")
    w.add_argument("--p", type=_order, default=1.0)
    w.set_defaults(func=cmd_wdist)

    b = sub.add_parser("bound", help="approximation bound as JSON")
    b.add_argument("--model", choices=("two-runs", "hard-core", "raw"), required=True)
    b.add_argument("--p", type=_order, default=1.0)
    b.add_argument("--n", type=int)
    b.add_argument("--q", type=float)
    b.add_argument("--dim", type=int)
    b.add_argument("--r", type=float)
    b.add_argument("--lam", "--lambda", dest="lam", type=float)
    b.add_argument("--i1", type=float)
    b.add_argument("--i2", type=float, default=0.0)
    b.add_argument("--eps1", type=float)
    b.add_argument("--eps2", type=float)
    b.set_defaults(func=cmd_bound)

    s = sub.add_parser("simulate", help="draw patterns and write a pattern file")
    s.add_argument("--model", choices=("poisson", "two-runs", "hard-core", "immigration-death"), required=True)
    s.add_argument("--n-samples", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.add_argument("--space", choices=("cube", "torus"), default="cube")
    s.add_argument("--dim", type=int)
    s.add_argument("--rate", type=float)
    s.add_argument("--t", type=float)
    s.add_argument("--init")
    s.add_argument("--n", type=int)
    s.add_argument("--q", type=float)
    s.add_argument("--beta", type=float)
    s.add_argument("--r", type=float)
    s.add_argument("--burn-in", type=int, default=10**5)
    s.add_argument("--thin", type=int, default=10**3)
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run verification suites; CSV report")
    v.add_argument("--suite", choices=SUITES + ("all",), required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--out")
    v.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as e:
        print(f"ppwass: error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
