"""Command line front end.

Every verb builds a report dict of named checks and expressions. Reports are
printed either as sorted ``key: value`` lines or as JSON with sorted keys, so
repeated runs on the same input give byte-identical output. The process exits
with 0 when every check passes, 1 when some check fails, 2 on usage errors and
with the error's own code when the engine raises.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .diffpoly import DiffPoly, JetContext, even, odd
from .errors import SuperjetError
from .textio import format_poly, parse_poly

SCHEMA = 1

EXAMPLES = ("kdv", "kdv-family", "b2", "virasoro-1d")


def _rat(x) -> str:
    x = Fraction(x)
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def _parse_c(text: str):
    if text == "symbolic":
        return None
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"--c expects p/q or 'symbolic', got {text!r}") from None


def _expr(p: DiffPoly) -> str:
    return format_poly(p)


def _derivation(D, gens) -> dict:
    from .diffpoly import gen_name
    return {gen_name(g): _expr(D.images[g]) for g in gens}


def _residual_text(res: dict) -> dict:
    from .diffpoly import gen_name
    return {gen_name(g): _expr(v) for g, v in sorted(res.items())}


# verbs ------------------------------------------------------------------------------

def _bihamiltonian_checks(P0, P1) -> dict:
    from .variational import schouten
    out = {}
    for name, a, b in (("[P0,P0]", P0, P0), ("[P0,P1]", P0, P1), ("[P1,P1]", P1, P1)):
        r = schouten(a, b)
        out[name] = {"pass": r.is_zero(), "value": _expr(r.rep)}
    return out


def _family_functionals(c=None):
    from .variational import LocalFunctional
    from .virsolve import kdv_family_context
    ctx = kdv_family_context()
    P0 = LocalFunctional(parse_poly("1/2*th1_0*th1_1", ctx))
    cc = "c" if c is None else f"({_rat(c)})"
    P1 = LocalFunctional(parse_poly(f"1/2*u1_0*th1_0*th1_1 + 1/2*{cc}*eps^2*th1_0*th1_3", ctx))
    return P0, P1


def cmd_schouten(args) -> dict:
    """[P,Q] for two given functionals, or the bihamiltonian checks of the built-in pairs."""
    from .variational import LocalFunctional, schouten
    if args.P is not None:
        ctx = JetContext(args.fields, max_odd_level=0, parameters=(("eps", -1), "c", "c0"))
        P = LocalFunctional(parse_poly(args.P, ctx))
        Q = LocalFunctional(parse_poly(args.Q, ctx))
        r = schouten(P, Q)
        return {"checks": {}, "bracket": _expr(r.rep), "zero": r.is_zero()}
    checks = {}
    for label, c in (("kdv", Fraction(1, 8)), ("kdv-family", None)):
        for k, v in _bihamiltonian_checks(*_family_functionals(c)).items():
            checks[f"{label} {k}"] = v
    return {"checks": checks}


def cmd_wdvv(args) -> dict:
    from .frobenius import load_frobenius, wdvv_check
    data = load_frobenius(args.file)
    ok, where = wdvv_check(data.F)
    return {
        "checks": {"wdvv": {"pass": ok, "first_failure": list(where) if where else None}},
        "potential": _expr(data.F),
        "eta": [[_rat(x) for x in row] for row in data.eta],
        "mu": [_rat(x) for x in data.mu],
        "charge": _rat(data.d),
    }


def kdv_super_flows(max_level: int | None = None):
    """Pair at c = 1/8 with the flows d/dt (KdV), d/dtau_0 and d/dtau_1."""
    from .superext import BihamPair, odd_flow, super_flow
    from .variational import LocalFunctional
    P0, P1 = _family_functionals(Fraction(1, 8))
    pair = BihamPair(P0, P1, max_level=max_level)
    X = LocalFunctional(parse_poly("(u1_0*u1_1 + 1/12*eps^2*u1_3)*th1_0", pair.ctx))
    return pair, {"t": super_flow(X, pair), "tau_0": odd_flow(0, pair), "tau_1": odd_flow(1, pair)}


def cmd_kdv_super(args) -> dict:
    from .superext import verify_commute
    pair, flows = kdv_super_flows(args.max_level)
    names = sorted(flows)
    checks = {}
    for i, a in enumerate(names):
        for b in names[i:]:
            res = verify_commute(flows[a], flows[b], pair)
            checks[f"[{a},{b}]"] = {"pass": not res, "residual": _residual_text(res)}
    gens = [even(1), odd(1)]
    return {"checks": checks, "flows": {k: _derivation(D, gens) for k, D in flows.items()}}


def cmd_virasoro_ops(args) -> dict:
    from .frobenius import load_frobenius, virasoro_closure, virasoro_family
    data = load_frobenius(args.file)
    fam = virasoro_family(data, args.cutoff)
    closure = virasoro_closure(fam, args.cutoff)
    checks = {}
    for (i, j), res in sorted(closure.items()):
        checks[f"[L{i},L{j}] = {i - j}*L{i + j}"] = {"pass": not res, "residual_terms": len(res)}
    L1 = fam[1]
    report = {
        "checks": checks,
        "mu": [_rat(x) for x in data.mu],
        "cutoff": args.cutoff,
        "L1_diagonal": {f"t{a}_{p}": _rat(L1.b((a, p), (a, p + 1)))
                        for a in range(1, data.n + 1) for p in range(args.cutoff - 1)},
        "L1_second_order": {f"t{a}_{p},t{b}_{q}": _rat(v) for ((), ((a, p), (b, q))), v in
                            ((k, v) for k, v in sorted(L1.terms.items()) if not k[0] and len(k[1]) == 2)},
        "L0_scalar": _rat(fam[0].scalar),
    }
    return report


def cmd_virasoro_solve(args) -> dict:
    from .virsolve import linearizability_check_1d, run_pipeline_1d
    r = run_pipeline_1d(max_level=args.max_level)
    vals = {} if args.c is None else {"c": args.c}

    def sp(p):
        return _expr(p.specialize(vals))

    v, s = even(1), odd(1)
    lin = linearizability_check_1d(r.O2, vals)
    checks = {name: {"pass": ok} for name, ok in r.closed.items()}
    for name, res in sorted(r.s2.residuals.items()):
        checks[f"[d/ds_2,d/d{name}]"] = {"pass": not res, "residual": _residual_text(res)}
    return {
        "checks": checks,
        "c": "symbolic" if args.c is None else _rat(args.c),
        "h": {str(p): sp(r.hierarchy.h[(1, p)]) for p in range(0, 3)},
        "I_0": {k: sp(p) for k, p in _named(r.I[0].images, (v, s)).items()},
        "I_1": {k: sp(p) for k, p in _named(r.I[1].images, (v, s)).items()},
        "X_circ": {k: sp(p) for k, p in _named(r.x_circ.images, (v, s)).items()},
        "C": {k: sp(p) for k, p in _named(r.C.images, (v, s)).items()},
        "X": {k: sp(p) for k, p in _named(r.s2.X.images, (v, s)).items()},
        "ds2": {k: sp(p) for k, p in _named(r.s2.flow.images, (v, s)).items()},
        "O2": sp(r.O2),
        "linearizable": lin.holds,
        "linearizability_conditions": [f"{c} = 0" for c in map(str, lin.conditions)],
    }


def _named(images: dict, gens) -> dict:
    from .diffpoly import gen_name
    return {gen_name(g): images[g] for g in gens}


def cmd_verify_example(args) -> dict:
    name = args.name
    if name == "kdv":
        checks = {}
        for k, v in _bihamiltonian_checks(*_family_functionals(Fraction(1, 8))).items():
            checks[k] = v
        sub = cmd_kdv_super(args)
        checks.update(sub["checks"])
        return {"checks": checks, "example": name}
    if name == "kdv-family":
        return {"checks": _bihamiltonian_checks(*_family_functionals()), "example": name}
    if name == "b2":
        args.file = "b2"
        w = cmd_wdvv(args)
        ops = cmd_virasoro_ops(args)
        checks = dict(w["checks"])
        checks.update(ops["checks"])
        L1 = ops["L1_second_order"]
        checks["L1 cross term 3/16"] = {"pass": L1.get("t1_0,t2_0") == "3/16"}
        return {"checks": checks, "example": name, "mu": w["mu"]}
    if name == "virasoro-1d":
        args.c = None
        rep = cmd_virasoro_solve(args)
        rep["example"] = name
        return rep
    raise SystemExit(f"unknown example {name!r}; choose from {', '.join(EXAMPLES)}")


# driver -------------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json"), default="text")
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--cutoff", type=int, default=8, help="time-index cutoff for tau operators")
    common.add_argument("--c", type=_parse_c, default=None, metavar="p/q|symbolic",
                        help="value of the central-invariant parameter")
    common.add_argument("--max-level", type=int, default=None,
                        help="odd level bound (default from SUPERJET_MAX_LEVEL, else 4)")

    ap = argparse.ArgumentParser(prog="superjet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"superjet {__version__}")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("schouten", parents=[common], help="Schouten bracket or bihamiltonian checks")
    p.add_argument("P", nargs="?")
    p.add_argument("Q", nargs="?")
    p.add_argument("--fields", type=int, default=1)
    p.set_defaults(func=cmd_schouten)

    p = sub.add_parser("wdvv-check", parents=[common], help="associativity of a Frobenius potential")
    p.add_argument("file")
    p.set_defaults(func=cmd_wdvv)

    p = sub.add_parser("kdv-super", parents=[common], help="commutators of the super KdV flows")
    p.set_defaults(func=cmd_kdv_super)

    p = sub.add_parser("virasoro-ops", parents=[common], help="L_{-1}..L_2 on tau-cover times")
    p.add_argument("file", nargs="?", default="b2")
    p.set_defaults(func=cmd_virasoro_ops)

    p = sub.add_parser("virasoro-solve-1d", parents=[common], help="deformed d/ds_2 for the one-field family")
    p.set_defaults(func=cmd_virasoro_solve)

    p = sub.add_parser("verify-example", parents=[common], help="bundled end-to-end checks")
    p.add_argument("name", choices=EXAMPLES)
    p.set_defaults(func=cmd_verify_example)
    return ap


def _text_lines(obj, prefix="") -> list[str]:
    if isinstance(obj, dict):
        out = []
        for k in sorted(obj, key=str):
            out.extend(_text_lines(obj[k], f"{prefix}{k}." if prefix or k else ""))
        return out
    if isinstance(obj, list):
        return [f"{prefix[:-1]}: {json.dumps(obj, sort_keys=True)}"]
    return [f"{prefix[:-1]}: {obj}"]


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    lines = []
    for name in sorted(report.get("checks", {})):
        ok = report["checks"][name]["pass"]
        lines.append(f"{'PASS' if ok else 'FAIL'}  {name}")
    rest = {k: v for k, v in report.items() if k != "checks"}
    lines.extend(_text_lines(rest))
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.max_level is not None and args.max_level < 1:
        ap.error("--max-level must be positive")
    if args.verb == "schouten" and (args.P is None) != (args.Q is None):
        ap.error("schouten takes two functionals or none")
    try:
        body = args.func(args)
    except SuperjetError as exc:
        err = {"schema": SCHEMA, "verb": args.verb, "error": {"name": exc.name, "code": exc.exit_code,
                                                             "message": str(exc)}}
        sys.stderr.write(render(err, args.format) if args.format == "json" else f"error: {exc.name}: {exc}\n")
        return exc.exit_code
    report = {"schema": SCHEMA, "verb": args.verb}
    report.update(body)
    ok = all(c["pass"] for c in report.get("checks", {}).values())
    report["ok"] = ok
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
