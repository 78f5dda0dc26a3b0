from fractions import Fraction

import pytest

from superjet.diffpoly import JetContext, dx, even, odd
from superjet.errors import DegenerateMetric, NonInvertibleLeadingJacobian, NotHydrodynamic, OddLevelTooHigh
from superjet.textio import parse_poly
from superjet.variational import (
    LocalFunctional, commutator, dp_derivation, functional, ham_operator, hydro_metric, miura,
    schouten, var_derivative,
)


@pytest.fixture
def ctx():
    return JetContext(1, parameters=(("eps", -1), "c"))


def F(text, ctx):
    return LocalFunctional(parse_poly(text, ctx))


def P(text, ctx):
    return parse_poly(text, ctx)


def test_functional_kills_total_derivatives(ctx):
    assert functional(dx(P("u1_0^2", ctx))).is_zero()
    assert functional(P("u1_0*u1_2", ctx)) == functional(P("-u1_1^2", ctx))
    assert not functional(P("th1_0*th1_1", ctx)).is_zero()


def test_var_derivative_examples(ctx):
    # Euler operator by hand: d/du(u^3/6) - dx(d/du_x(-eps^2/24 u_x^2)) = u^2/2 + eps^2/12 u_xx
    assert var_derivative(F("1/6*u1_0^3 - 1/24*eps^2*u1_1^2", ctx), even(1)) == P("1/2*u1_0^2 + 1/12*eps^2*u1_2", ctx)
    # d/dth(1/2 th th') - dx(d/dth'(1/2 th th')) = 1/2 th' + 1/2 th' = th'
    assert var_derivative(P("1/2*th1_0*th1_1", ctx), odd(1)) == P("th1_1", ctx)
    assert var_derivative(dx(P("u1_0^3*u1_2 + u1_1*th1_0*th1_2", ctx)), even(1)).is_zero()


def test_kdv_pair_is_bihamiltonian(ctx):
    P0 = F("1/2*th1_0*th1_1", ctx)
    P1 = F("1/2*u1_0*th1_0*th1_1 + 1/16*eps^2*th1_0*th1_3", ctx)
    assert schouten(P0, P0).is_zero()
    assert schouten(P0, P1).is_zero()
    assert schouten(P1, P1).is_zero()


def test_family_is_exact(ctx):
    Z = F("th1_0", ctx)
    P1 = F("1/2*u1_0*th1_0*th1_1 + 1/2*c*eps^2*th1_0*th1_3", ctx)
    assert schouten(Z, P1) == F("1/2*th1_0*th1_1", ctx)


def test_non_bihamiltonian_pair_detected(ctx):
    P1 = F("1/2*u1_0^2*th1_0*th1_1", ctx)
    assert not schouten(P1, P1).is_zero() or not schouten(F("1/2*u1_0*u1_1*th1_0*th1_1", ctx), P1).is_zero()


def test_dp_derivation_examples(ctx):
    D0 = dp_derivation(F("1/2*th1_0*th1_1", ctx))
    assert D0.images[even(1)] == P("th1_1", ctx)
    assert D0.images[odd(1)].is_zero()
    D1 = dp_derivation(F("1/2*u1_0*th1_0*th1_1", ctx))
    assert D1.images[odd(1)] == P("1/2*th1_0*th1_1", ctx)
    assert D1.parity == 1


def test_commutator_examples(ctx):
    D0 = dp_derivation(F("1/2*th1_0*th1_1", ctx))
    assert commutator(D0, D0).is_zero()
    X = F("(u1_0*u1_1 + 1/12*eps^2*u1_3)*th1_0", ctx)
    Dt = dp_derivation(X)
    assert commutator(Dt, Dt).is_zero()


def test_ham_operator_examples(ctx):
    op0 = ham_operator(F("1/2*th1_0*th1_1", ctx))
    assert op0.entry(1, 1) == {1: ctx.const(1)}
    op1 = ham_operator(F("1/2*u1_0*th1_0*th1_1 + 1/16*eps^2*th1_0*th1_3", ctx))
    ent = op1.entry(1, 1)
    assert ent[0] == P("1/2*u1_1", ctx)
    assert ent[1] == ctx.u()
    assert ent[3] == P("1/8*eps^2", ctx)
    opc = ham_operator(F("1/2*u1_0*th1_0*th1_1 + 1/2*c*eps^2*th1_0*th1_3", ctx))
    assert opc.entry(1, 1)[3] == P("c*eps^2", ctx)


def test_ham_operator_roundtrip(ctx):
    Pf = F("1/2*u1_0*th1_0*th1_1 + 1/2*c*eps^2*th1_0*th1_3 + u1_2*th1_0*th1_1", ctx)
    assert ham_operator(Pf).apply_to_odd(1) == var_derivative(Pf, odd(1))


def test_ham_operator_rejects_levels():
    ctx = JetContext(1, max_odd_level=1)
    with pytest.raises(OddLevelTooHigh):
        ham_operator(LocalFunctional(ctx.sigma(1, 1) * ctx.sigma(1, 0, 1)))


def test_hydro_metric_one_field(ctx):
    g, gamma = hydro_metric(F("1/2*u1_0*th1_0*th1_1", ctx))
    assert g[0][0] == ctx.u()
    assert gamma[(1, 1, 1)] == ctx.const(Fraction(1, 2))
    g0, gamma0 = hydro_metric(F("1/2*th1_0*th1_1", ctx))
    assert g0[0][0] == ctx.const(1) and gamma0 == {}


def test_hydro_metric_b2():
    ctx = JetContext(2)
    # variables: u1 = v, u2 = u
    P1 = LocalFunctional(parse_poly(
        "4*u2_0^3*th1_0*th1_1 + 1/4*u2_0*th2_0*th2_1 + u1_0*th1_0*th2_1 + 1/4*u1_1*th1_0*th2_0", ctx))
    g, _ = hydro_metric(P1)
    assert g[0][0] == parse_poly("8*u2_0^3", ctx)
    assert g[0][1] == ctx.u(1) and g[1][0] == ctx.u(1)
    assert g[1][1] == parse_poly("1/2*u2_0", ctx)


def test_hydro_metric_errors(ctx):
    with pytest.raises(NotHydrodynamic):
        hydro_metric(F("1/2*th1_0*th1_3", ctx))
    with pytest.raises(DegenerateMetric):
        hydro_metric(LocalFunctional(JetContext(2).zero_poly()))


def test_miura_identity_and_linear(ctx):
    expr = P("u1_0*th1_0*th1_2 + eps^2*u1_3*th1_1", ctx)
    assert miura(expr, {1: ctx.u()}) == expr
    there = miura(expr, {1: ctx.u().scale(2)})
    assert miura(there, {1: ctx.u().scale(Fraction(1, 2))}) == expr


def test_miura_adjoint_formula(ctx):
    # w~ = w + eps w': theta = theta~ - eps theta~'
    out = miura(ctx.sigma(), {1: P("u1_0 + eps*u1_1", ctx)})
    assert out == P("th1_0 - eps*th1_1", ctx)


def test_miura_singular_jacobian(ctx):
    with pytest.raises(NonInvertibleLeadingJacobian):
        miura(ctx.u(), {1: P("u1_1", ctx)})
