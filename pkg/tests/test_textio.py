import json

import pytest

from superjet.diffpoly import JetContext
from superjet.errors import ParseSyntaxError, UnknownGenerator
from superjet.textio import format_poly, parse_poly, poly_from_json, poly_to_json


@pytest.fixture
def ctx():
    return JetContext(1, max_odd_level=2, parameters=(("eps", -1), "c"))


def test_kdv_density_parses(ctx):
    f = parse_poly("u1_0 * u1_1 + 1/12 * eps^2 * u1_3", ctx)
    assert format_poly(f) == "u1_0*u1_1 + 1/12*eps^2*u1_3"


def test_theta_square_vanishes(ctx):
    assert parse_poly("th1_0 * th1_0", ctx).is_zero()


def test_alias_th_is_level_zero(ctx):
    assert parse_poly("th1_2", ctx) == parse_poly("s1_0_2", ctx)


@pytest.mark.parametrize("bad", ["u1_", "u1_0 +", "(u1_0", "u1_0 ** 2", "3/0"])
def test_malformed_input(ctx, bad):
    with pytest.raises(ParseSyntaxError) as err:
        parse_poly(bad, ctx)
    assert err.value.line == 1 and err.value.column >= 1


def test_unknown_names(ctx):
    with pytest.raises(UnknownGenerator):
        parse_poly("u3_0", ctx)
    with pytest.raises(UnknownGenerator):
        parse_poly("d*u1_0", ctx)


@pytest.mark.parametrize("text", [
    "u1_0*u1_1 + 1/12*eps^2*u1_3",
    "(c + 1/2)*u1_0*th1_0*th1_1 - 2/3*c^2*eps^4*th1_0*th1_5",
    "-s1_2_0*s1_1_3 + 7",
    "0",
])
def test_print_parse_roundtrip(ctx, text):
    f = parse_poly(text, ctx)
    assert parse_poly(format_poly(f), ctx) == f


def test_json_roundtrip_is_stable(ctx):
    f = parse_poly("(c + 1/2)*u1_0*th1_0*th1_1 - 2/3*c^2*eps^4*th1_0*th1_5", ctx)
    data = poly_to_json(f)
    assert poly_from_json(json.loads(json.dumps(data)), ctx) == f
    assert json.dumps(data, sort_keys=True) == json.dumps(poly_to_json(f), sort_keys=True)
    nums = [piece["num"] for t in data["terms"] for piece in t["coeff"]]
    assert all(isinstance(n, str) for n in nums)
