"""Seeded randomized identities for the ring, the bracket and the super extension."""

import random

import pytest

from randpoly import rand_bounded, rand_mixed, rand_poly
from superjet.diffpoly import JetContext, dx, even, odd, super_degree
from superjet.superext import BihamPair, odd_flow, reduce_stepwise, shift_T, shift_Tkl
from superjet.textio import parse_poly
from superjet.variational import LocalFunctional, commutator, dp_derivation, schouten, var_derivative


def sign(e):
    return -1 if e % 2 else 1


def contexts():
    return [JetContext(1), JetContext(2)]


def _functional(ctx, rng, d):
    return LocalFunctional(rand_bounded(ctx, rng, d))


@pytest.fixture(scope="module")
def kdv():
    ctx = JetContext(1)
    P0 = LocalFunctional(parse_poly("1/2*th1_0*th1_1", ctx))
    P1 = LocalFunctional(parse_poly("1/2*u1_0*th1_0*th1_1 + 1/16*eps^2*th1_0*th1_3", ctx))
    return BihamPair(P0, P1, max_level=4)


def test_graded_commutativity_and_associativity():
    rng = random.Random(20240611)
    for i in range(200):
        ctx = contexts()[i % 2]
        da, db = rng.randint(0, 2), rng.randint(0, 2)
        a = rand_poly(ctx, rng, da, terms=2, max_jet=3)
        b = rand_poly(ctx, rng, db, terms=2, max_jet=3)
        assert a * b == (b * a).scale(sign(da * db)), i
        x, y, z = (rand_mixed(ctx, rng, terms=2, max_jet=3) for _ in range(3))
        assert (x * y) * z == x * (y * z), i
        assert x * (y + z) == x * y + x * z, i


def test_schouten_antisymmetry():
    rng = random.Random(11)
    for i in range(100):
        ctx = contexts()[i % 2]
        p, q = rng.randint(0, 3), rng.randint(0, 3)
        P, Q = _functional(ctx, rng, p), _functional(ctx, rng, q)
        assert schouten(P, Q) == schouten(Q, P).scale(sign(p * q)), (i, P, Q)


def test_schouten_jacobi():
    rng = random.Random(12)
    for i in range(100):
        ctx = contexts()[i % 2]
        p, q, r = (rng.randint(0, 3) for _ in range(3))
        P, Q, R = _functional(ctx, rng, p), _functional(ctx, rng, q), _functional(ctx, rng, r)
        total = (schouten(schouten(P, Q), R).scale(sign(r * p))
                 + schouten(schouten(Q, R), P).scale(sign(p * q))
                 + schouten(schouten(R, P), Q).scale(sign(q * r)))
        assert total.is_zero(), (i, P, Q, R)


def _bracket_pairs(seed, count):
    rng = random.Random(seed)
    for i in range(count):
        ctx = contexts()[i % 2]
        p, q = rng.randint(1, 3), rng.randint(1, 3)
        yield i, ctx, p, q, _functional(ctx, rng, p), _functional(ctx, rng, q)


def test_dp_of_bracket_is_commutator():
    # (-1)^{p-1} D_[P,Q] = [D_P, D_Q]
    for i, ctx, p, q, P, Q in _bracket_pairs(13, 50):
        B = schouten(P, Q)
        gens = [even(a) for a in range(1, ctx.n + 1)] + [odd(a) for a in range(1, ctx.n + 1)]
        C = commutator(dp_derivation(P), dp_derivation(Q), on=gens)
        if B.is_zero():
            assert all(v.is_zero() for v in C.images.values()), i
            continue
        DB = dp_derivation(B)
        for g in gens:
            assert DB.images[g].scale(sign(p - 1)) == C.images[g], (i, g)


def test_variational_derivative_of_bracket_even():
    # d[P,Q]/du = D_P(dQ/du) + (-1)^{pq} D_Q(dP/du)
    for i, ctx, p, q, P, Q in _bracket_pairs(14, 50):
        B = schouten(P, Q)
        DP, DQ = dp_derivation(P), dp_derivation(Q)
        for a in range(1, ctx.n + 1):
            u = even(a)
            rhs = DP(var_derivative(Q, u)) + DQ(var_derivative(P, u)).scale(sign(p * q))
            assert var_derivative(B, u) == rhs, (i, a)


def test_variational_derivative_of_bracket_odd():
    # (-1)^{p-1} d[P,Q]/dtheta = D_P(dQ/dtheta) - (-1)^{(p-1)(q-1)} D_Q(dP/dtheta)
    for i, ctx, p, q, P, Q in _bracket_pairs(15, 50):
        B = schouten(P, Q)
        DP, DQ = dp_derivation(P), dp_derivation(Q)
        for a in range(1, ctx.n + 1):
            t = odd(a)
            rhs = DP(var_derivative(Q, t)) - DQ(var_derivative(P, t)).scale(sign((p - 1) * (q - 1)))
            assert var_derivative(B, t).scale(sign(p - 1)) == rhs, (i, a)


def test_euler_operator_kills_total_derivatives():
    rng = random.Random(16)
    for i in range(100):
        ctx = contexts()[i % 2]
        f = rand_poly(ctx, rng, rng.randint(0, 3), terms=3, max_jet=3)
        df = dx(f)
        for a in range(1, ctx.n + 1):
            assert var_derivative(df, even(a)).is_zero(), i
            assert var_derivative(df, odd(a)).is_zero(), i
        assert LocalFunctional(df).is_zero(), i


def test_tau_of_shift_identity(kdv):
    # d/dtau_k T_m(X) = T_{m,k}(D_P1 X) - T_{m+1,k}(D_P0 X) for X of super degree one
    rng = random.Random(17)
    D0, D1 = dp_derivation(kdv.P0), dp_derivation(kdv.P1)
    flows = {k: odd_flow(k, kdv) for k in range(4)}
    for i in range(25):
        X = rand_bounded(kdv.ctx, rng, 1, max_diff=3)
        k, m = rng.randint(0, 3), rng.randint(0, 3)
        lhs = kdv.reduce(flows[k](shift_T(m, X, kdv)))
        rhs = shift_Tkl(m, k, D1(X), kdv) - shift_Tkl(m + 1, k, D0(X), kdv)
        assert lhs == kdv.reduce(rhs), (i, k, m, X)


def test_rewrite_confluence(kdv):
    rng = random.Random(18)
    for i in range(100):
        x = rand_poly(kdv.ctx, rng, rng.randint(1, 2), terms=3, max_jet=4, level=3)
        nf = kdv.reduce(x)
        assert nf == reduce_stepwise(x, kdv, seed=i), i
        assert nf == reduce_stepwise(x, kdv, seed=1000 + i), i


def test_shifts_commute_with_dx(kdv):
    rng = random.Random(19)
    for i in range(30):
        k, l = rng.randint(0, 3), rng.randint(0, 3)
        X = rand_bounded(kdv.ctx, rng, 1, max_diff=3)
        assert shift_T(k, dx(X), kdv) == kdv.reduce(dx(shift_T(k, X, kdv))), i
        Y = rand_bounded(kdv.ctx, rng, 2, max_diff=3)
        assert shift_Tkl(k, l, dx(Y), kdv) == kdv.reduce(dx(shift_Tkl(k, l, Y, kdv))), i


def test_bracket_degree():
    rng = random.Random(20)
    for i in range(40):
        ctx = contexts()[i % 2]
        p, q = rng.randint(0, 3), rng.randint(0, 3)
        B = schouten(_functional(ctx, rng, p), _functional(ctx, rng, q))
        if not B.is_zero():
            assert super_degree(B.rep) == p + q - 1
