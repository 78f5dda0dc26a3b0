"""Graded-commutative differential polynomials on a jet superspace.

Generators are plain tuples so that keys hash and compare quickly:

* even jet ``u^{a,s}``          -> ``(0, a, s)``
* tau-cover potential ``f_{a,p}`` -> ``(1, a, p)``
* time ``t^{a,p}``              -> ``(2, a, p)``
* odd jet ``sigma_{a,m}^s``     -> ``(0, m, a, s)``
* odd time ``tau_p``            -> ``(1, p, 0, 0)``

Even generators have length 3, odd ones length 4. Field indices start at 1.
A monomial key is ``(graded_param_exponents, even_part, odd_part)`` where
``even_part`` is a sorted tuple of ``(generator, exponent)`` pairs and
``odd_part`` is a strictly increasing tuple of odd generators. Odd jets are
ordered lexicographically by ``(m, a, s)`` since the tuple starts with the
level.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from gmpy2 import mpq
from sympy import QQ
from sympy.polys.rings import PolyElement, ring

from .errors import ContextMismatch, NotHomogeneous, UnknownGenerator

Gen = tuple
Key = tuple

_RINGS: dict[tuple[str, ...], object] = {}


def coefficient_ring(names: tuple[str, ...]):
    """Polynomial ring QQ[names], shared between contexts with the same names."""
    if not names:
        return QQ
    if names not in _RINGS:
        _RINGS[names] = ring(",".join(names), QQ)[0]
    return _RINGS[names]


# generator constructors -----------------------------------------------------

def even(alpha: int, s: int = 0) -> Gen:
    return (0, alpha, s)


def odd(alpha: int, m: int = 0, s: int = 0) -> Gen:
    return (0, m, alpha, s)


def fvar(alpha: int, p: int) -> Gen:
    return (1, alpha, p)


def tvar(alpha: int, p: int) -> Gen:
    return (2, alpha, p)


def tauvar(p: int) -> Gen:
    return (1, p, 0, 0)


def is_odd(g: Gen) -> bool:
    return len(g) == 4


def is_jet(g: Gen) -> bool:
    return g[0] == 0


def jet_order(g: Gen) -> int:
    if g[0] != 0:
        return 0
    return g[3] if len(g) == 4 else g[2]


def gen_name(g: Gen) -> str:
    if len(g) == 3:
        prefix = "uft"[g[0]]
        return f"{prefix}{g[1]}_{g[2]}"
    if g[0] == 0:
        return f"s{g[2]}_{g[1]}_{g[3]}"
    return f"tau{g[1]}"


def shift_jet(g: Gen, k: int = 1) -> Gen:
    if len(g) == 3:
        return (0, g[1], g[2] + k)
    return (0, g[1], g[2], g[3] + k)


# context ---------------------------------------------------------------------

class JetContext:
    """Ambient data shared by a family of polynomials.

    ``parameters`` is a sequence of names or ``(name, weight)`` pairs. A
    parameter with nonzero weight (the dispersion parameter ``eps`` has weight
    -1) is a graded parameter and its exponent lives in the monomial key; the
    others generate the coefficient ring QQ[params].
    """

    def __init__(
        self,
        n_fields: int = 1,
        field_names: Iterable[str] | None = None,
        max_odd_level: int = 0,
        parameters: Iterable = (("eps", -1),),
        formal_dx: Mapping[Gen, "DiffPoly"] | None = None,
    ):
        if n_fields < 1:
            raise ValueError("n_fields must be positive")
        names = list(field_names) if field_names is not None else [f"u{a}" for a in range(1, n_fields + 1)]
        if len(names) != n_fields or len(set(names)) != n_fields:
            raise ValueError("field names must be distinct, one per field")
        graded: list[tuple[str, int]] = []
        plain: list[str] = []
        for p in parameters:
            name, weight = (p, 0) if isinstance(p, str) else (p[0], int(p[1]))
            if weight:
                graded.append((name, weight))
            else:
                plain.append(name)
        allp = [g[0] for g in graded] + plain
        if len(set(allp)) != len(allp) or set(allp) & set(names):
            raise ValueError("parameters must be distinct and disjoint from field names")
        self.n = n_fields
        self.field_names = tuple(names)
        self.max_odd_level = max_odd_level
        self.graded_params = tuple(graded)
        self.plain_params = tuple(plain)
        self.K = coefficient_ring(self.plain_params)
        self.one = self.K.one
        self.zero = self.K.zero
        self.formal_dx: dict[Gen, DiffPoly] = dict(formal_dx or {})
        self.signature = (self.n, self.field_names, self.graded_params, self.plain_params)
        self.no_grade = (0,) * len(self.graded_params)

    def extend(self, max_odd_level: int | None = None, formal_dx: Mapping | None = None) -> "JetContext":
        """A compatible context with a different level bound or extra formal generators."""
        params = list(self.graded_params) + list(self.plain_params)
        ctx = JetContext(
            self.n, self.field_names,
            self.max_odd_level if max_odd_level is None else max_odd_level,
            params,
        )
        ctx.formal_dx = dict(self.formal_dx)
        if formal_dx:
            ctx.formal_dx.update(formal_dx)
        return ctx

    def __repr__(self) -> str:
        return (f"JetContext(n={self.n}, fields={self.field_names}, max_odd_level={self.max_odd_level}, "
                f"params={[g[0] for g in self.graded_params] + list(self.plain_params)})")

    # coefficients
    def coerce(self, x):
        if isinstance(x, PolyElement):
            if self.K is QQ:
                if not x.is_ground:
                    raise ContextMismatch("parameter-dependent coefficient in a parameter-free context")
                return mpq(x.LC) if x else mpq(0)
            if x.ring is not self.K:
                return self.K.from_sympy(x.as_expr())
            return x
        if isinstance(x, Fraction):
            x = mpq(x.numerator, x.denominator)
        elif isinstance(x, str):
            x = mpq(Fraction(x).numerator, Fraction(x).denominator)
        elif isinstance(x, int):
            x = mpq(x)
        if self.K is QQ:
            return mpq(x)
        return self.K(x)

    def check_gen(self, g: Gen) -> None:
        alpha = g[1] if len(g) == 3 else g[2]
        if len(g) == 4 and g[0] == 1:
            return
        if not 1 <= alpha <= self.n:
            raise UnknownGenerator(f"field index {alpha} out of range 1..{self.n}")
        if len(g) == 4 and g[1] > self.max_odd_level:
            raise UnknownGenerator(f"odd level {g[1]} exceeds the context bound {self.max_odd_level}")

    # constructors
    def gen(self, g: Gen, coeff=1) -> "DiffPoly":
        self.check_gen(g)
        key = (self.no_grade, ((g, 1),), ()) if len(g) == 3 else (self.no_grade, (), (g,))
        return DiffPoly(self, {key: self.coerce(coeff)})

    def u(self, alpha: int = 1, s: int = 0) -> "DiffPoly":
        return self.gen(even(alpha, s))

    def sigma(self, alpha: int = 1, m: int = 0, s: int = 0) -> "DiffPoly":
        return self.gen(odd(alpha, m, s))

    def const(self, x=1) -> "DiffPoly":
        c = self.coerce(x)
        return DiffPoly(self, {(self.no_grade, (), ()): c} if c else {})

    def param(self, name: str, power: int = 1) -> "DiffPoly":
        for i, (gname, _) in enumerate(self.graded_params):
            if gname == name:
                exps = list(self.no_grade)
                exps[i] = power
                return DiffPoly(self, {(tuple(exps), (), ()): self.one})
        if name in self.plain_params:
            if power < 0:
                raise ValueError("only graded parameters may carry negative exponents")
            x = self.K.gens[self.plain_params.index(name)] ** power
            return DiffPoly(self, {(self.no_grade, (), ()): x})
        raise UnknownGenerator(f"unknown parameter {name!r}")

    def eps(self, power: int = 1) -> "DiffPoly":
        return self.param(self.graded_params[0][0], power)

    def zero_poly(self) -> "DiffPoly":
        return DiffPoly(self, {})

    def coeff_param(self, name: str):
        """The ring element for an ungraded parameter."""
        return self.K.gens[self.plain_params.index(name)]


def join_contexts(a: JetContext, b: JetContext) -> JetContext:
    if a is b:
        return a
    if a.signature != b.signature:
        raise ContextMismatch(f"{a!r} vs {b!r}")
    ra = (a.max_odd_level, len(a.formal_dx))
    rb = (b.max_odd_level, len(b.formal_dx))
    return a if ra >= rb else b


# key helpers -------------------------------------------------------------------

def _merge_even(e1: tuple, e2: tuple) -> tuple:
    if not e1:
        return e2
    if not e2:
        return e1
    d = dict(e1)
    for g, k in e2:
        d[g] = d.get(g, 0) + k
    return tuple(sorted(d.items()))


def _merge_odd(o1: tuple, o2: tuple):
    """Concatenate two odd products and sort; returns (sign, merged) or None if zero."""
    if not o1:
        return 1, o2
    if not o2:
        return 1, o1
    out = []
    inversions = 0
    i = j = 0
    n1, n2 = len(o1), len(o2)
    while i < n1 and j < n2:
        x, y = o1[i], o2[j]
        if x == y:
            return None
        if x < y:
            out.append(x)
            i += 1
        else:
            out.append(y)
            inversions += n1 - i
            j += 1
    out.extend(o1[i:])
    out.extend(o2[j:])
    return (-1 if inversions & 1 else 1), tuple(out)


def _add_grades(a: tuple, b: tuple) -> tuple:
    if not a:
        return a
    return tuple(x + y for x, y in zip(a, b))


def mul_keys(k1: Key, k2: Key):
    r = _merge_odd(k1[2], k2[2])
    if r is None:
        return None
    sign, o = r
    return sign, (_add_grades(k1[0], k2[0]), _merge_even(k1[1], k2[1]), o)


@dataclass(frozen=True)
class Monomial:
    coeff: object
    grades: tuple
    even_part: tuple
    odd_part: tuple


class DiffPoly:
    """Element of the jet superalgebra in canonical form (a dict key -> coefficient)."""

    __slots__ = ("ctx", "terms", "_hash")

    def __init__(self, ctx: JetContext, terms: dict | None = None):
        self.ctx = ctx
        self.terms = terms if terms is not None else {}
        self._hash = None

    # basic protocol
    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self) -> int:
        return len(self.terms)

    def _coerce_other(self, other) -> "DiffPoly":
        if isinstance(other, DiffPoly):
            return other
        return self.ctx.const(other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, DiffPoly):
            if other == 0:
                return not self.terms
            other = self.ctx.const(other)
        if self.ctx.signature != other.ctx.signature:
            return False
        return self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __add__(self, other) -> "DiffPoly":
        other = self._coerce_other(other)
        ctx = join_contexts(self.ctx, other.ctx)
        if len(other.terms) > len(self.terms):
            big, small = other.terms, self.terms
        else:
            big, small = self.terms, other.terms
        out = dict(big)
        for k, c in small.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return DiffPoly(ctx, out)

    __radd__ = __add__

    def __neg__(self) -> "DiffPoly":
        return DiffPoly(self.ctx, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other) -> "DiffPoly":
        return self + (-self._coerce_other(other))

    def __rsub__(self, other) -> "DiffPoly":
        return self._coerce_other(other) - self

    def scale(self, c) -> "DiffPoly":
        c = self.ctx.coerce(c)
        if not c:
            return DiffPoly(self.ctx, {})
        out = {}
        for k, v in self.terms.items():
            w = v * c
            if w:
                out[k] = w
        return DiffPoly(self.ctx, out)

    def __mul__(self, other) -> "DiffPoly":
        if not isinstance(other, DiffPoly):
            return self.scale(other)
        ctx = join_contexts(self.ctx, other.ctx)
        out: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                r = mul_keys(k1, k2)
                if r is None:
                    continue
                sign, k = r
                c = c1 * c2
                if sign < 0:
                    c = -c
                v = out.get(k)
                if v is None:
                    out[k] = c
                else:
                    v = v + c
                    if v:
                        out[k] = v
                    else:
                        del out[k]
        return DiffPoly(ctx, out)

    def __rmul__(self, other) -> "DiffPoly":
        return self.scale(other)

    def __pow__(self, k: int) -> "DiffPoly":
        out = self.ctx.const(1)
        for _ in range(k):
            out = out * self
        return out

    # structure
    def monomials(self) -> list[Monomial]:
        return [Monomial(self.terms[k], k[0], k[1], k[2]) for k in sorted_keys(self.terms)]

    def generators(self) -> set:
        gens = set()
        for _, e, o in self.terms:
            gens.update(g for g, _ in e)
            gens.update(o)
        return gens

    def coefficient_of(self, key: Key):
        return self.terms.get(key, self.ctx.zero)

    def max_jet(self) -> int:
        best = -1
        for g in self.generators():
            if g[0] == 0:
                best = max(best, jet_order(g))
        return best

    def max_level(self) -> int:
        best = -1
        for _, _, o in self.terms:
            for g in o:
                if g[0] == 0:
                    best = max(best, g[1])
        return best

    def with_context(self, ctx: JetContext) -> "DiffPoly":
        if ctx.signature != self.ctx.signature:
            raise ContextMismatch("cannot rebind to an incompatible context")
        return DiffPoly(ctx, self.terms)

    # derivations
    def dx(self) -> "DiffPoly":
        return dx(self)

    def partial(self, g: Gen) -> "DiffPoly":
        return partial(self, g)

    def super_degree(self) -> int:
        return super_degree(self)

    def diff_degree(self) -> int:
        return diff_degree(self)

    def substitute(self, mapping: Mapping[Gen, "DiffPoly"]) -> "DiffPoly":
        return substitute(self, mapping)

    def map_coefficients(self, fn: Callable) -> "DiffPoly":
        out = {}
        for k, c in self.terms.items():
            c2 = fn(c)
            if c2:
                out[k] = c2
        return DiffPoly(self.ctx, out)

    def specialize(self, values: Mapping[str, object]) -> "DiffPoly":
        """Substitute rational values for ungraded parameters (the context is kept)."""
        ctx = self.ctx
        if ctx.K is QQ or not values:
            return self
        subs = [(ctx.coeff_param(n), QQ.convert(Fraction(v)) if not isinstance(v, mpq) else v)
                for n, v in values.items()]
        return self.map_coefficients(lambda c: c.subs(subs))

    def __str__(self) -> str:
        from .textio import format_poly
        return format_poly(self)

    def __repr__(self) -> str:
        return f"DiffPoly({self})"

    def to_json(self) -> dict:
        from .textio import poly_to_json
        return poly_to_json(self)


def sort_key(key: Key):
    grades, ev, od = key
    total = sum(k * jet_order(g) for g, k in ev) + sum(jet_order(g) for g in od)
    deg = sum(k for _, k in ev)
    return (len(od), total, grades, deg, od, ev)


def sorted_keys(terms) -> list:
    return sorted(terms, key=sort_key)


# operations --------------------------------------------------------------------

def add(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a + b


def mul(a: DiffPoly, b: DiffPoly) -> DiffPoly:
    return a * b


def negate(a: DiffPoly) -> DiffPoly:
    return -a


def _accumulate(out: dict, k: Key, c) -> None:
    v = out.get(k)
    if v is None:
        out[k] = c
    else:
        v = v + c
        if v:
            out[k] = v
        else:
            del out[k]


def _replace_even(ev: tuple, g: Gen, new: Gen | None) -> tuple:
    d = dict(ev)
    if d[g] == 1:
        del d[g]
    else:
        d[g] -= 1
    if new is not None:
        d[new] = d.get(new, 0) + 1
    return tuple(sorted(d.items()))


def dx(a: DiffPoly) -> DiffPoly:
    """Total x-derivative. Formal generators use the context table; undeclared times are constants."""
    ctx = a.ctx
    out: dict = {}
    extra: list[DiffPoly] = []
    for key, c in a.terms.items():
        grades, ev, od = key
        for g, e in ev:
            if g[0] == 0:
                nk = (grades, _replace_even(ev, g, (0, g[1], g[2] + 1)), od)
                _accumulate(out, nk, c * e)
            else:
                dg = ctx.formal_dx.get(g)
                if dg is None:
                    if g[0] == 2:
                        continue
                    raise UnknownGenerator(f"no x-derivative declared for {gen_name(g)}")
                rest = DiffPoly(ctx, {(grades, _replace_even(ev, g, None), ()): c * e})
                tail = DiffPoly(ctx, {(ctx.no_grade, (), od): ctx.one})
                extra.append(rest * dg * tail)
        for j, o in enumerate(od):
            if o[0] != 0:
                continue
            no = (0, o[1], o[2], o[3] + 1)
            if j + 1 < len(od) and od[j + 1] == no:
                continue
            nk = (grades, ev, od[:j] + (no,) + od[j + 1:])
            _accumulate(out, nk, c)
    res = DiffPoly(ctx, out)
    for e in extra:
        res = res + e
    return res


def dx_n(a: DiffPoly, k: int) -> DiffPoly:
    for _ in range(k):
        a = dx(a)
    return a


def partial(a: DiffPoly, g: Gen) -> DiffPoly:
    """Graded partial derivative; odd derivatives act from the left."""
    out: dict = {}
    if len(g) == 3:
        for key, c in a.terms.items():
            grades, ev, od = key
            for h, e in ev:
                if h == g:
                    _accumulate(out, (grades, _replace_even(ev, g, None), od), c * e)
                    break
    else:
        for key, c in a.terms.items():
            grades, ev, od = key
            if g not in od:
                continue
            j = od.index(g)
            _accumulate(out, (grades, ev, od[:j] + od[j + 1:]), -c if j & 1 else c)
    return DiffPoly(a.ctx, out)


def key_super_degree(key: Key) -> int:
    return len(key[2])


def key_diff_degree(ctx: JetContext, key: Key) -> int:
    grades, ev, od = key
    d = sum(k * jet_order(g) for g, k in ev) + sum(jet_order(g) for g in od)
    for (_, w), e in zip(ctx.graded_params, grades):
        d += w * e
    return d


def _homogeneous(values: set, what: str):
    if len(values) > 1:
        raise NotHomogeneous(f"polynomial is not homogeneous in {what}: {sorted(values)}")
    return values.pop() if values else 0


def super_degree(a: DiffPoly) -> int:
    return _homogeneous({len(k[2]) for k in a.terms}, "super degree")


def diff_degree(a: DiffPoly) -> int:
    return _homogeneous({key_diff_degree(a.ctx, k) for k in a.terms}, "differential degree")


def substitute(a: DiffPoly, mapping: Mapping[Gen, DiffPoly]) -> DiffPoly:
    """Replace generators by polynomials, respecting the order of odd factors."""
    ctx = a.ctx
    keep: dict = {}
    res = None
    for key, c in a.terms.items():
        grades, ev, od = key
        if not any(g in mapping for g, _ in ev) and not any(o in mapping for o in od):
            keep[key] = c
            continue
        base_ev = tuple((g, e) for g, e in ev if g not in mapping)
        term = DiffPoly(ctx, {(grades, base_ev, ()): c})
        for g, e in ev:
            if g in mapping:
                for _ in range(e):
                    term = term * mapping[g]
        for o in od:
            term = term * (mapping[o] if o in mapping else DiffPoly(ctx, {(ctx.no_grade, (), (o,)): ctx.one}))
        res = term if res is None else res + term
    out = DiffPoly(ctx, keep)
    return out if res is None else out + res


def monomial_poly(ctx: JetContext, key: Key, coeff=None) -> DiffPoly:
    return DiffPoly(ctx, {key: ctx.one if coeff is None else coeff})


def split_by_grade(a: DiffPoly) -> dict:
    """Group terms by graded-parameter exponents."""
    out: dict = {}
    for k, c in a.terms.items():
        out.setdefault(k[0], {})[k] = c
    return {g: DiffPoly(a.ctx, t) for g, t in out.items()}
