import pytest

from superjet.diffpoly import JetContext, diff_degree, dx, even, odd, partial, super_degree
from superjet.errors import ContextMismatch, NotHomogeneous, UnknownGenerator
from superjet.textio import parse_poly


@pytest.fixture
def ctx():
    return JetContext(1, max_odd_level=1)


def P(text, ctx):
    return parse_poly(text, ctx)


def test_add_identities(ctx):
    u = ctx.u()
    th = ctx.sigma()
    assert u + ctx.zero_poly() == u
    assert th + th == th.scale(2)
    assert (u * th + (-(u * th))).is_zero()


def test_add_context_mismatch(ctx):
    other = JetContext(2)
    with pytest.raises(ContextMismatch):
        ctx.u() + other.u()


def test_grassmann_products(ctx):
    th0, th1 = ctx.sigma(1, 0, 0), ctx.sigma(1, 0, 1)
    assert (th0 * th0).is_zero()
    assert th1 * th0 == -(th0 * th1)
    u = ctx.u()
    assert u * (u * th0) == P("u1_0^2*th1_0", ctx)


def test_odd_order_is_level_then_field_then_jet(ctx):
    x = ctx.sigma(1, 1, 0) * ctx.sigma(1, 0, 3)
    assert str(x) == "-s1_0_3*s1_1_0"


def test_dx_examples(ctx):
    assert dx(ctx.u()) == ctx.u(1, 1)
    assert dx(P("u1_0*th1_0", ctx)) == P("u1_1*th1_0 + u1_0*th1_1", ctx)
    assert dx(P("u1_0*u1_1", ctx)) == P("u1_1^2 + u1_0*u1_2", ctx)


def test_dx_of_parameters_is_zero(ctx):
    assert dx(ctx.eps(2)).is_zero()


def test_partial_examples(ctx):
    assert partial(P("u1_0^2", ctx), even(1)) == P("2*u1_0", ctx)
    assert partial(P("th1_0*th1_1", ctx), odd(1, 0, 1)) == P("-th1_0", ctx)
    assert partial(ctx.u(), odd(1)).is_zero()


def test_odd_partial_squares_to_zero(ctx):
    f = P("u1_0*th1_0*th1_1 + th1_1*th1_2", ctx)
    g = odd(1, 0, 1)
    assert partial(partial(f, g), g).is_zero()


def test_degrees(ctx):
    assert super_degree(P("th1_0*th1_1", ctx)) == 2
    assert diff_degree(P("u1_0*u1_1", ctx)) == 1
    assert diff_degree(P("eps^2*u1_3", ctx)) == 1
    with pytest.raises(NotHomogeneous):
        super_degree(P("u1_0 + th1_0", ctx))
    with pytest.raises(NotHomogeneous):
        diff_degree(P("u1_1 + u1_2", ctx))


def test_unknown_generators(ctx):
    with pytest.raises(UnknownGenerator):
        ctx.u(2)
    with pytest.raises(UnknownGenerator):
        ctx.sigma(1, 2)


def test_zero_is_empty(ctx):
    assert ctx.zero_poly().terms == {}
    assert ctx.const(0).is_zero()


def test_specialize_parameters():
    ctx = JetContext(1, parameters=(("eps", -1), "c"))
    f = P("c*eps^2*u1_2 + u1_0", ctx)
    assert f.specialize({"c": 0}) == ctx.u()
