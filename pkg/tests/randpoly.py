"""Seeded random elements of the jet ring for the property suites."""

import random
from fractions import Fraction

from superjet.diffpoly import even, odd


def rand_coeff(rng: random.Random) -> Fraction:
    return Fraction(rng.choice([-3, -2, -1, 1, 2, 3, 5]), rng.choice([1, 1, 2, 3]))


def rand_monomial(ctx, rng, super_degree, max_jet=4, max_even=2, level=0, eps=True):
    p = ctx.const(rand_coeff(rng))
    for _ in range(rng.randint(0, max_even)):
        p = p * ctx.gen(even(rng.randint(1, ctx.n), rng.randint(0, max_jet)))
    seen = set()
    while len(seen) < super_degree:
        g = odd(rng.randint(1, ctx.n), rng.randint(0, level), rng.randint(0, max_jet))
        if g not in seen:
            seen.add(g)
            p = p * ctx.gen(g)
    if eps and rng.random() < 0.3:
        p = p * ctx.eps(2)
    return p


def rand_poly(ctx, rng, super_degree, terms=3, **kw):
    out = ctx.zero_poly()
    for _ in range(rng.randint(1, terms)):
        out = out + rand_monomial(ctx, rng, super_degree, **kw)
    return out


def rand_mixed(ctx, rng, terms=3, **kw):
    """Random element with mixed super degrees up to 2."""
    out = ctx.zero_poly()
    for _ in range(terms):
        out = out + rand_monomial(ctx, rng, rng.randint(0, 2), **kw)
    return out


def rand_bounded(ctx, rng, super_degree, max_diff=4, terms=2, max_even=2, eps=False):
    """Random element of fixed super degree whose monomials have differential degree <= max_diff."""
    out = ctx.zero_poly()
    floor = super_degree * (super_degree - 1) // 2
    for _ in range(rng.randint(1, terms)):
        budget = rng.randint(min(floor, max_diff), max_diff)
        while True:
            odds = {odd(rng.randint(1, ctx.n), 0, rng.randint(0, budget)) for _ in range(super_degree)}
            if len(odds) == super_degree and sum(o[3] for o in odds) <= budget:
                break
        budget -= sum(o[3] for o in odds)
        p = ctx.const(rand_coeff(rng))
        for _ in range(rng.randint(0, max_even)):
            s = rng.randint(0, budget)
            budget -= s
            p = p * ctx.gen(even(rng.randint(1, ctx.n), s))
        for o in sorted(odds):
            p = p * ctx.gen(o)
        if eps and rng.random() < 0.3:
            p = p * ctx.eps(2)
        out = out + p
    return out
