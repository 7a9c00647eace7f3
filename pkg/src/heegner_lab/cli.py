"""Command-line driver.  Every subcommand writes one JSON report and exits
with status 1 when any assertion in it fails (2 for a rejected config)."""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction

import sympy

from . import __version__, checks, cmfield, distributions as dist, interp, qexp
from .groups import DirichletCharacter
from .padic import PadicContext
from .weight import WeightDisc

SCHEMA_VERSION = 1


@dataclass
class RunConfig:
    p: int = 5
    D: int = 1
    N: int = 13
    k0: int = 0
    r: int = 1
    dmax: int = 12
    S: int = 16
    precision: int = 10
    seed: int = 0
    fixtures: dict = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {unknown}")
        return cls(**data)

    def validate(self) -> list:
        problems = []
        for name in ("p", "D", "N", "k0", "r", "dmax", "S", "precision", "seed"):
            if not isinstance(getattr(self, name), int):
                problems.append({"field": name, "error": "must be an integer"})
        if problems:
            return problems
        if self.p == 2:
            problems.append({"field": "p", "error": "p = 2 is excluded: the code assumes p is odd"})
        elif not sympy.isprime(self.p):
            problems.append({"field": "p", "error": "p must be prime"})
        if self.D <= 0 or sympy.ntheory.factor_.core(self.D) != self.D:
            problems.append({"field": "D", "error": "D must be a positive squarefree integer"})
        if self.N < 1:
            problems.append({"field": "N", "error": "N must be positive"})
        elif not problems and self.N % self.p == 0:
            problems.append({"field": "N", "error": "p must not divide N"})
        if self.r < 1:
            problems.append({"field": "r", "error": "r must be >= 1"})
        if self.dmax < 1:
            problems.append({"field": "dmax", "error": "dmax must be >= 1"})
        if self.S < 1:
            problems.append({"field": "S", "error": "S must be >= 1"})
        if self.precision < 1:
            problems.append({"field": "precision", "error": "precision must be >= 1"})
        return problems

    def heegner_problems(self) -> list:
        try:
            ok, cert = cmfield.heegner_check(self.D, self.N)
        except ValueError as exc:
            return [{"field": "N", "error": str(exc)}]
        return [] if ok else [{"field": "N", "error": "Heegner hypothesis fails", "certificate": _jsonable(cert)}]

    def ctx(self) -> PadicContext:
        return PadicContext(self.p, precision=self.precision)

    def disc(self, ctx=None) -> WeightDisc:
        return WeightDisc(ctx or self.ctx(), self.k0, self.r, self.dmax)


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (int, str, bool)) or x is None:
        return x
    if isinstance(x, float):
        return x if x == x and abs(x) != float("inf") else str(x)
    if isinstance(x, Fraction):
        return str(x)
    if hasattr(x, "to_json"):
        return x.to_json()
    return str(x)


class Report:
    def __init__(self, command: str, config: RunConfig, args: dict):
        self.command = command
        self.config = config
        self.args = args
        self.assertions = []
        self.results = {}

    def check(self, name: str, ok: bool, **details) -> bool:
        self.assertions.append({"name": name, "pass": bool(ok), **_jsonable(details)})
        return ok

    def add_result(self, result: checks.CheckResult):
        self.assertions.append({"name": result.name, "pass": result.ok, "details": _jsonable(result.details)})

    @property
    def passed(self) -> bool:
        return all(a["pass"] for a in self.assertions)

    def to_json(self) -> dict:
        return {"schemaVersion": SCHEMA_VERSION, "version": __version__, "command": self.command,
                "config": asdict(self.config), "seed": self.config.seed, "args": self.args,
                "passed": self.passed, "assertions": self.assertions, "results": _jsonable(self.results)}


# ---------------------------------------------------------------------------
# subcommands


def cmd_heegner_check(cfg, args, rep):
    ok, cert = cmfield.heegner_check(cfg.D, cfg.N)
    rep.results["certificate"] = cert
    rep.check("heegner hypothesis", ok, D=cfg.D, N=cfg.N)


def cmd_classgroup(cfg, args, rep):
    d = args.dK if args.dK is not None else cmfield.fundamental_discriminant(cfg.D)
    if not cmfield.is_fundamental_discriminant(d):
        rep.check("fundamental discriminant", False, dK=d)
        return
    cls = cmfield.ClassGroupData(cmfield.QuadField.from_discriminant(d))
    rep.results["classGroup"] = cls.to_json()
    rep.results["order"] = cls.h
    rep.check("enumeration order equals closure order", cls.h == cmfield.closure_order(cls), h=cls.h)


def cmd_rayclass(cfg, args, rep):
    m = args.m if args.m is not None else 1
    frakN = cmfield.choose_frakN(cfg.D, cfg.N)
    R = cmfield.ray_class_group(cfg.D, frakN, cfg.p, m)
    rep.results["rayClass"] = R.to_json()
    rep.check("order matches the exact sequence", R.order == R.expected_order(), order=R.order,
              expected=R.expected_order())


def cmd_cmpoint(cfg, args, rep):
    m = args.m if args.m is not None else 1
    ctx = cfg.ctx()
    cm = cmfield.cm_point(cfg.D, cfg.N, cfg.p, m, ctx)
    rep.results["cmPoint"] = cm.to_json()
    rng = random.Random(cfg.seed)
    for i in range(args.units):
        g, s, xy = checks.random_cm_unit(cm, rng)
        (a, b), (c, d) = ((g.a, g.b), (g.c, g.d))
        left = (cm.z0 * a + c, cm.z0 * b + d)
        ok = (left[0] - s * cm.z0).is_zero() and (left[1] - s).is_zero()
        rep.check(f"(z0, 1) is a left eigenvector, unit {i}", ok, u=list(xy))


def cmd_eigen_dist(cfg, args, rep):
    m = args.m if args.m is not None else 1
    ctx = PadicContext(cfg.p, precision=cfg.precision + args.guard_digits)
    cm = cmfield.cm_point(cfg.D, cfg.N, cfg.p, m, ctx)
    weight = cfg.disc(ctx) if args.k is None else args.k
    e = dist.eigen_dist(weight, args.j, m, args.n, cm, cfg.S)
    rep.results["distribution"] = e.to_json()
    if args.k is None:
        return
    eg = dist.eigen_dist(args.k, args.j, m, args.n, cm, cfg.S + args.guard_moments)
    rng = random.Random(cfg.seed)
    for i in range(args.units):
        g, s, xy = checks.random_cm_unit(cm, rng)
        f = dist.act_D(g, eg)
        sk = s ** (-args.k)
        upto = cfg.S - args.k
        ok = args.j == 0 and all(
            min(f.moments[t].precision, (eg.moments[t] * sk).precision) >= cfg.precision
            and f.moments[t].with_precision(cfg.precision) == (eg.moments[t] * sk).with_precision(cfg.precision)
            for t in range(upto + 1))
        if args.j == 0:
            rep.check(f"eigen law for unit {i}", ok, u=list(xy), moments=upto + 1)


def cmd_mom_check(cfg, args, rep):
    rep.add_result(checks._timed("moment interpolation", checks.mom_interpolation, p=cfg.p, D=cfg.D, N=cfg.N,
                                 S=cfg.S, precision=cfg.precision, r=cfg.r))


def cmd_congruence_report(cfg, args, rep):
    rep.add_result(checks._timed("congruence floors", checks.congruence_floors, p=cfg.p, D=cfg.D, N=cfg.N,
                                 S=cfg.S, precision=cfg.precision, k0=cfg.k0, r=cfg.r))


def cmd_norm_shift_check(cfg, args, rep):
    rep.add_result(checks._timed("norm-relation shift", checks.norm_shift, p=cfg.p, D=cfg.D, N=cfg.N,
                                 S=cfg.S, precision=cfg.precision, k0=cfg.k0, r=cfg.r))


def cmd_euler_factors(cfg, args, rep):
    t = checks.triple_5_4_a(cfg.precision)
    rep.results["triple"] = {"f": t.f.label, "D": t.K.D, "p": t.p,
                             "ab": [t.a, t.b], "alpha": t.alpha.to_json(), "noble": t.noble}
    report = interp.constants_report(t)
    rep.results["constants"] = report
    rep.check("Euler factor is nonzero", not interp.euler_factor_value(t).is_zero())
    rep.check("alpha is noble", t.noble)


def cmd_cancellation_check(cfg, args, rep):
    k = args.k if args.k is not None else 2
    try:
        proof = interp.euler_cancellation_check(k=k, assumed=args.assume)
    except interp.RelationError as exc:
        rep.check("cancellation identity", False, error=str(exc))
        return
    rep.results["proof"] = proof.to_json()
    rep.check("cancellation identity", proof.holds, exponent=proof.exponent)
    spots = interp.cancellation_spot_checks(k, cfg.ctx(), args.spots, cfg.seed, proof.exponent)
    rep.check("numeric spot checks", all(spots), passed=sum(spots), total=len(spots))


def cmd_gauss_sum(cfg, args, rep):
    N = args.modulus
    chars = [e for e in DirichletCharacter.all_mod(N) if e.is_primitive()]
    out = []
    for i, eps in enumerate(chars):
        if eps.order() % cfg.p == 0 or N % cfg.p == 0:
            out.append({"index": i, "order": eps.order(), "skipped": "needs a ramified extension"})
            continue
        ctx = interp.gauss_context(eps, cfg.p, cfg.precision)
        G = interp.gauss_sum(eps, ctx)
        out.append({"index": i, "order": eps.order(), "value": G.to_json(), "residueDegree": ctx.f})
        rep.check(f"G(eps)G(eps-bar) = eps(-1)N, character {i}", interp.gauss_check(eps, cfg.p, cfg.precision))
    rep.results["gaussSums"] = out


def cmd_qexp(cfg, args, rep):
    ctx = PadicContext(args.p or cfg.p, precision=cfg.precision)
    p = ctx.p
    f = qexp.load_newform(args.newform, ctx) if args.newform else qexp.load_fixture(args.fixture, ctx)
    rep.check("newform invariants", not f.check_invariants(), problems=f.check_invariants())
    g = f.qexp()
    show = args.show
    if args.op in ("stabilise", "stabilize"):
        roots = qexp.hecke_roots(f, p)
        if not roots.split:
            rep.results["extension"] = roots.extension
            rep.check("Hecke roots in the context", False)
            return
        root = roots.alpha if args.root == "alpha" else roots.beta
        h = qexp.p_stabilize(f, p, root)
        rep.check("U_p eigenvalue", qexp.stabilization_check(f, p, root), root=root.to_json())
    elif args.op == "deplete":
        h = qexp.deplete(g, p)
        rep.check("depletion is idempotent", qexp.deplete(h, p) == h)
    else:
        h = qexp.theta_power(qexp.deplete(g, p), args.t, p)
        back = qexp.theta_power(h, -args.t, p)
        rep.check("theta round trip", back == qexp.deplete(g, p), t=args.t)
    rep.check("U_p V_p = id", qexp.U_p(qexp.V_p(g, p), p) == g.truncate(g.M // p))
    rep.results["expansion"] = {"M": h.M, "an": [_jsonable(h.an[n]) for n in range(1, min(show, h.M) + 1)]}


def cmd_family_twist_check(cfg, args, rep):
    rep.add_result(checks._timed("family theta twist", checks.family_twist, p=cfg.p, precision=cfg.precision))


def cmd_bdp_skeleton(cfg, args, rep):
    rep.add_result(checks._timed("orthogonality", checks.bdp_skeleton, precision=cfg.precision))


def cmd_selftest(cfg, args, rep):
    for result in checks.run_acceptance():
        rep.add_result(result)


COMMANDS = {
    "heegner-check": cmd_heegner_check,
    "classgroup": cmd_classgroup,
    "rayclass": cmd_rayclass,
    "cmpoint": cmd_cmpoint,
    "eigen-dist": cmd_eigen_dist,
    "mom-check": cmd_mom_check,
    "congruence-report": cmd_congruence_report,
    "norm-shift-check": cmd_norm_shift_check,
    "euler-factors": cmd_euler_factors,
    "cancellation-check": cmd_cancellation_check,
    "gauss-sum": cmd_gauss_sum,
    "qexp": cmd_qexp,
    "family-twist-check": cmd_family_twist_check,
    "bdp-skeleton": cmd_bdp_skeleton,
    "selftest": cmd_selftest,
}

NEEDS_HEEGNER = {"rayclass", "cmpoint", "eigen-dist", "mom-check", "congruence-report", "norm-shift-check"}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--precision", type=int)
    common.add_argument("--moments", type=int, dest="S", metavar="S")
    common.add_argument("--p", type=int)
    common.add_argument("--D", type=int)
    common.add_argument("--N", type=int)

    parser = argparse.ArgumentParser(prog="heegner-lab", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "classgroup":
            sp.add_argument("--dK", type=int)
        if name in ("rayclass", "cmpoint", "eigen-dist"):
            sp.add_argument("--m", type=int)
        if name in ("cmpoint", "eigen-dist"):
            sp.add_argument("--units", type=int, default=5)
        if name == "eigen-dist":
            sp.add_argument("--j", type=int, default=0)
            sp.add_argument("--n", type=int, default=1)
            sp.add_argument("--k", type=int, help="integer weight; omit for the family on the configured disc")
            sp.add_argument("--guard-moments", type=int, default=10)
            sp.add_argument("--guard-digits", type=int, default=2)
        if name == "cancellation-check":
            sp.add_argument("--k", type=int)
            sp.add_argument("--assume", type=int, help="relation exponent to test instead of certifying one")
            sp.add_argument("--spots", type=int, default=20)
        if name == "gauss-sum":
            sp.add_argument("--modulus", type=int, required=True)
        if name == "qexp":
            sp.add_argument("--fixture", default="11a", choices=qexp.FIXTURES)
            sp.add_argument("--newform", help="path to a newform JSON record")
            sp.add_argument("--op", default="stabilise", choices=["stabilise", "stabilize", "deplete", "theta"])
            sp.add_argument("--root", default="alpha", choices=["alpha", "beta"])
            sp.add_argument("--t", type=int, default=-1)
            sp.add_argument("--show", type=int, default=20)
    return parser


def make_config(args) -> RunConfig:
    data = {}
    if args.config:
        with open(args.config) as fh:
            data = json.load(fh)
    cfg = RunConfig.from_json(data)
    for name in ("seed", "precision", "S", "p", "D", "N"):
        v = getattr(args, name, None)
        if v is not None:
            setattr(cfg, name, v)
    return cfg


def _emit(report: dict, out):
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = make_config(args)
    except (ValueError, TypeError, json.JSONDecodeError) as exc:
        _emit({"schemaVersion": SCHEMA_VERSION, "command": args.command, "rejected": True,
               "problems": [{"error": str(exc)}]}, args.out)
        return 2
    problems = cfg.validate()
    if not problems and args.command in NEEDS_HEEGNER:
        problems = cfg.heegner_problems()
    if problems:
        _emit({"schemaVersion": SCHEMA_VERSION, "command": args.command, "rejected": True,
               "config": asdict(cfg), "problems": problems}, args.out)
        return 2
    argdict = {k: v for k, v in sorted(vars(args).items())
               if k not in ("command", "config", "out", "seed", "precision", "S", "p", "D", "N")}
    rep = Report(args.command, cfg, argdict)
    try:
        COMMANDS[args.command](cfg, args, rep)
    except Exception as exc:  # partial report, then a failing exit code
        rep.check("command completed", False, error=f"{type(exc).__name__}: {exc}")
    _emit(rep.to_json(), args.out)
    return 0 if rep.passed else 1


if __name__ == "__main__":
    sys.exit(main())
