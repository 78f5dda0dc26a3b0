"""End-to-end acceptance checks, one reported line per criterion.

Run directly (``python tests/test_acceptance.py``) or through pytest; the
PASS/FAIL lines are repeated in the terminal summary.
"""

import sys
from fractions import Fraction

import pytest
import sympy

import golden as G
import test_properties as props
from superjet.cli import kdv_super_flows
from superjet.diffpoly import JetContext, dx, even, odd
from superjet.frobenius import biham_from_frobenius, virasoro_closure, virasoro_family, wdvv_check
from superjet.superext import is_local, odd_flow, verify_commute
from superjet.textio import parse_poly
from superjet.variational import LocalFunctional, schouten
from superjet.virsolve import linearizability_check_1d

RESULTS = []
NOTES = []
V, S = even(1), odd(1)

# eps Phi^0_2 from invert_dx, frozen
EPHI_2_ORACLE = ("4/3*s1_2_0 - 2/3*u1_0*s1_1_0 - 1/6*u1_0^2*th1_0"
                 " - c*eps^2*(2/3*u1_2*th1_0 + 4/3*u1_1*th1_1 + 4/3*u1_0*th1_2) - 16/15*c^2*eps^4*th1_4")


def report(label, ok):
    RESULTS.append((label, bool(ok)))
    print(f"{'PASS' if ok else 'FAIL'}  {label}")
    return bool(ok)


def check_all(prefix, items):
    ok = True
    for name, value in items:
        ok &= report(f"{prefix} {name}", value)
    assert ok


def _pair_checks(P0, P1):
    return [("[P0,P0] = 0", schouten(P0, P0).is_zero()),
            ("[P0,P1] = 0", schouten(P0, P1).is_zero()),
            ("[P1,P1] = 0", schouten(P1, P1).is_zero())]


def _family(c):
    ctx = JetContext(1, parameters=(("eps", -1), "c"))
    P0 = LocalFunctional(parse_poly("1/2*th1_0*th1_1", ctx))
    P1 = LocalFunctional(parse_poly(f"1/2*u1_0*th1_0*th1_1 + 1/2*({c})*eps^2*th1_0*th1_3", ctx))
    return P0, P1


def test_1_bihamiltonian():
    items = [("kdv " + n, v) for n, v in _pair_checks(*_family("1/8"))]
    items += [("c-family " + n, v) for n, v in _pair_checks(*_family("c"))]
    check_all("1", items)


def test_2_super_kdv_commute():
    pair, flows = kdv_super_flows()
    names = sorted(flows)
    items = []
    for i, a in enumerate(names):
        for b in names[i:]:
            items.append((f"[d/d{a}, d/d{b}] = 0", not verify_commute(flows[a], flows[b], pair)))
    check_all("2", items)


def test_3_exactness(family_pair, b2):
    ctx = family_pair.ctx
    Z = LocalFunctional(ctx.sigma(1))
    pb = biham_from_frobenius(b2)
    Zb = LocalFunctional(pb.ctx.sigma(1))
    check_all("3", [("family [int s, P1] = P0", schouten(Z, family_pair.P1) == family_pair.P0),
                    ("B2 [int s_1, P1] = P0", schouten(Zb, pb.P1) == pb.P0)])


def _same(a, b):
    return (a.with_context(b.ctx) - b).is_zero()


def _golden_items(r):
    P = lambda text: parse_poly(text, r.cover.ctx)  # noqa: E731
    h, flows = r.hierarchy.h, r.hierarchy.flows
    ds2 = ("3/8*eps*(u1_1*f1_1 + (" + G.V_T1 + ")*f1_0) + 15/8*t1_0*(" + G.V_T2 + ") + "
           + G.DS2_V_LOCAL)
    return [
        ("h_1", _same(h[(1, 1)], P(G.H1))),
        ("h_2", _same(h[(1, 2)], P(G.H2))),
        ("dv/dt_1", _same(flows[("t", 1, 1)].image(V), P(G.V_T1))),
        ("ds_0/dt_1", _same(flows[("t", 1, 1)].image(S), P(G.S_T1))),
        ("dv/dt_2", _same(flows[("t", 1, 2)].image(V), P(G.V_T2))),
        ("ds_0/dt_2", _same(flows[("t", 1, 2)].image(S), P(G.S_T2))),
        ("eps Phi^0_0", _same(r.cover.phi[(0, 0)], P(G.EPHI_0))),
        ("eps Phi^0_1", _same(r.cover.phi[(0, 1)], P(G.EPHI_1))),
        ("I_0 v", _same(r.I[0].images[V], P(G.I0_V))),
        ("I_0 s_0", _same(r.I[0].images[S], P(G.I0_S))),
        ("I_1 v", _same(r.I[1].images[V], P(G.I1_V))),
        ("I_1 s_0", _same(r.I[1].images[S], P(G.I1_S))),
        ("X° v", _same(r.x_circ.images[V], P(G.XC_V))),
        ("X° s_0", _same(r.x_circ.images[S], P(G.XC_S))),
        ("C v", _same(r.C.images[V], P(G.C_V))),
        ("dv/ds_2", _same(r.s2.flow.image(V), P(ds2))),
    ]


def test_4_golden_pipeline(pipeline):
    check_all("4", _golden_items(pipeline))


def test_4_odd_potential_two_oracle(pipeline):
    r = pipeline
    P = lambda text: parse_poly(text, r.cover.ctx)  # noqa: E731
    oracle = P(EPHI_2_ORACLE)
    pair = r.cover.pair
    D0 = odd_flow(0, r.hierarchy.pair)
    rhs = pair.reduce(D0(r.hierarchy.h[(1, 2)]).with_context(r.cover.ctx))
    ref = P(G.EPHI_2_REFERENCE_READING)
    items = [("eps Phi^0_2 = invert_dx oracle", _same(r.cover.phi[(0, 2)], oracle)),
             ("eps Phi^0_2 oracle differentiates to dh_2/dtau_0", _same(pair.reduce(dx(oracle)), rhs))]
    check_all("4", items)
    same_as_ref = _same(ref, oracle)
    note = f"4 eps Phi^0_2 reference line {'agrees with' if same_as_ref else 'differs from'} the oracle"
    NOTES.append(note)
    print("NOTE  " + note)


@pytest.mark.xfail(strict=True, reason="the reference odd component of C is not annihilated by [d/dtau_0, .]; "
                                       "the computed one differs in the u*s_0^2 coefficient (3 vs 1)")
def test_4_C_odd_component_reference(pipeline):
    P = parse_poly(G.C_S_REFERENCE, pipeline.cover.ctx)
    ok = report("4 C s_0 equals reference expression", _same(pipeline.C.images[S], P))
    assert ok


def test_5_virasoro_residual(pipeline):
    O2 = pipeline.O2
    c = sympy.Symbol("c")
    items = [("O_2 = (3c - 3/8)(v^2/2 + 2/3 eps^2 c v'')", _same(O2, parse_poly(G.O2, O2.ctx))),
             ("O_2 = 0 at c = 1/8", O2.specialize({"c": sympy.Rational(1, 8)}).is_zero())]
    sym = linearizability_check_1d(O2)
    items.append(("linearizability condition is 3c - 3/8 = 0",
                  sym.holds is None and sym.conditions == [O2.ctx.K.from_expr(3 * c - sympy.Rational(3, 8))]))
    iff = True
    for val in (sympy.Rational(1, 8), 0, 1, sympy.Rational(1, 6), sympy.Rational(-2, 3), sympy.Rational(3, 8)):
        res = linearizability_check_1d(O2, {"c": val})
        iff &= (res.holds is True) == (3 * val - sympy.Rational(3, 8) == 0)
    items.append(("linearizable iff 3c - 3/8 = 0 (six sample values)", iff))
    check_all("5", items)


def test_6_symmetry(pipeline):
    res = pipeline.s2.residuals
    check_all("6", [(f"[d/ds_2, d/d{k}] = 0", not res[k]) for k in ("tau_0", "tau_1", "t_1", "t_2")])


def test_7_b2_operators(b2):
    fam = virasoro_family(b2, cutoff=10)
    L1 = fam[1]
    diag = all(L1.b((1, p), (1, p + 1)) == (p + Fraction(1, 4)) * (p + Fraction(5, 4))
               and L1.b((2, p), (2, p + 1)) == (p + Fraction(3, 4)) * (p + Fraction(7, 4))
               for p in range(10 - 1))
    closure = virasoro_closure(fam, 10)
    check_all("7", [
        ("wdvv", wdvv_check(b2.F) == (True, None)),
        ("eta = antidiag(1, 1)", b2.eta == [[0, 1], [1, 0]]),
        ("mu = diag(-1/4, 1/4)", b2.mu == [Fraction(-1, 4), Fraction(1, 4)]),
        ("L_1 cross term 3/16", L1.a((1, 0), (2, 0)) == Fraction(3, 16)),
        ("L_1 diagonal families", diag),
        ("[L_i, L_j] = (i - j) L_{i+j} on the safe window",
         bool(closure) and all(not v for v in closure.values())),
    ])


def test_8_locality(family_pair):
    ctx = family_pair.ctx
    a = family_pair.reduce(ctx.sigma(1, 1, 1))
    b = family_pair.reduce(ctx.sigma(1, 2, 1))
    check_all("8", [("is_local(s_1^1)", is_local(a) is True), ("not is_local(s_2^1)", is_local(b) is False)])


PROPERTY_SUITES = [
    ("graded commutativity/associativity (200)", props.test_graded_commutativity_and_associativity, False),
    ("Schouten antisymmetry (100)", props.test_schouten_antisymmetry, False),
    ("Schouten graded Jacobi (100)", props.test_schouten_jacobi, False),
    ("D of a bracket (50)", props.test_dp_of_bracket_is_commutator, False),
    ("even variational derivative of a bracket (50)", props.test_variational_derivative_of_bracket_even, False),
    ("odd variational derivative of a bracket (50)", props.test_variational_derivative_of_bracket_odd, False),
    ("Euler operator kills dx (100)", props.test_euler_operator_kills_total_derivatives, False),
    ("tau_k T_m identity on KdV (25)", props.test_tau_of_shift_identity, True),
    ("rewrite confluence (100)", props.test_rewrite_confluence, True),
]


def test_9_property_suites(family_pair):
    from superjet.superext import BihamPair
    P0, P1 = _family("1/8")
    kdv = BihamPair(P0, P1, max_level=4)
    items = []
    for name, fn, needs_pair in PROPERTY_SUITES:
        try:
            fn(kdv) if needs_pair else fn()
            ok = True
        except AssertionError:
            ok = False
        items.append((name, ok))
    check_all("9", items)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", "-p", "no:cacheprovider"]))
