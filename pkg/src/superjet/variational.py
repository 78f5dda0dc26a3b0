"""Local functionals, variational derivatives, the Schouten bracket and derivations."""

from __future__ import annotations

from functools import lru_cache

from gmpy2 import mpq

from .diffpoly import (
    DiffPoly, Gen, JetContext, dx, dx_n, even, jet_order, mul_keys, odd, partial,
    substitute, super_degree,
)
from .errors import (
    DegenerateMetric, NonInvertibleLeadingJacobian, NotHomogeneous, NotHydrodynamic,
    OddLevelTooHigh,
)


# canonical forms modulo total derivatives -----------------------------------------

def _content(key) -> tuple:
    """Multiset data preserved by dx: per-field even counts and per-(level, field) odd counts."""
    grades, ev, od = key
    ec: dict = {}
    for g, e in ev:
        if g[0] != 0:
            raise ValueError("functionals may only contain jet variables")
        ec[g[1]] = ec.get(g[1], 0) + e
    oc: dict = {}
    for o in od:
        if o[0] != 0:
            raise ValueError("functionals may only contain jet variables")
        oc[(o[1], o[2])] = oc.get((o[1], o[2]), 0) + 1
    total = sum(e * g[2] for g, e in ev) + sum(o[3] for o in od)
    return tuple(sorted(ec.items())), tuple(sorted(oc.items())), total


def _partitions(total: int, parts: int, max_part: int | None = None):
    """Nonincreasing tuples of `parts` nonnegative ints summing to `total`."""
    if max_part is None:
        max_part = total
    if parts == 0:
        if total == 0:
            yield ()
        return
    for first in range(min(total, max_part), -1, -1):
        if first * parts < total:
            break
        for rest in _partitions(total - first, parts - 1, first):
            yield (first,) + rest


def _distinct_sets(total: int, parts: int):
    """Strictly increasing tuples of `parts` nonnegative ints summing to `total`."""
    for p in _partitions(total, parts):
        if len(set(p)) == len(p):
            yield tuple(sorted(p))


def _slice_monomials(even_counts: tuple, odd_counts: tuple, total: int) -> list:
    """All (even, odd) monomial parts with the given content and total jet order."""
    slots = [("e", a, k) for a, k in even_counts] + [("o", mk, k) for mk, k in odd_counts]
    out = []

    def rec(i, remaining, ev, od):
        if i == len(slots):
            if remaining == 0:
                out.append((tuple(sorted(ev.items())), tuple(sorted(od))))
            return
        kind, label, k = slots[i]
        for share in range(remaining + 1):
            gen = _partitions(share, k) if kind == "e" else _distinct_sets(share, k)
            for p in gen:
                if kind == "e":
                    ev2 = dict(ev)
                    for s in p:
                        g = (0, label, s)
                        ev2[g] = ev2.get(g, 0) + 1
                    rec(i + 1, remaining - share, ev2, od)
                else:
                    m, a = label
                    rec(i + 1, remaining - share, ev, od + [(0, m, a, s) for s in p])

    rec(0, total, {}, [])
    return out


def _pivot_rank(mono) -> tuple:
    ev, od = mono
    jets = sorted([g[2] for g, e in ev for _ in range(e)] + [o[3] for o in od], reverse=True)
    return (tuple(jets), od, ev)


@lru_cache(maxsize=None)
def _exact_basis(even_counts: tuple, odd_counts: tuple, total: int) -> dict:
    """Reduced echelon basis of dx(lower slice) keyed by pivot monomial (highest-jet first).

    Each entry is ``(row, pre)`` with ``row == dx(sum(pre))`` as dicts of monomials.
    """
    if total == 0:
        return {}
    ctx = _scratch_context(even_counts, odd_counts)
    pivots: dict = {}
    for ev, od in _slice_monomials(even_counts, odd_counts, total - 1):
        d = dx(DiffPoly(ctx, {(ctx.no_grade, ev, od): ctx.one}))
        row = {(k[1], k[2]): mpq(c) for k, c in d.terms.items()}
        pre = {(ev, od): mpq(1)}
        for p, (prow, ppre) in pivots.items():
            a = row.get(p)
            if a:
                _axpy(row, -a, prow)
                _axpy(pre, -a, ppre)
        if not row:
            continue
        p = max(row, key=_pivot_rank)
        inv = 1 / row[p]
        row = {j: v * inv for j, v in row.items()}
        pre = {j: v * inv for j, v in pre.items()}
        for q, (qrow, qpre) in pivots.items():
            a = qrow.get(p)
            if a:
                _axpy(qrow, -a, row)
                _axpy(qpre, -a, pre)
        pivots[p] = (row, pre)
    return pivots


def _axpy(target: dict, a, src: dict) -> None:
    for j, v in src.items():
        w = target.get(j, 0) + a * v
        if w:
            target[j] = w
        else:
            target.pop(j, None)


@lru_cache(maxsize=None)
def _scratch_context(even_counts: tuple, odd_counts: tuple) -> JetContext:
    n = max([a for a, _ in even_counts] + [a for (_, a), _ in odd_counts] + [1])
    lvl = max([m for (m, _), _ in odd_counts] + [0])
    return JetContext(n, max_odd_level=lvl, parameters=())


def _reduce_slices(f: DiffPoly):
    """Split f into (remainder modulo Im(dx), preimage of the removed part)."""
    ctx = f.ctx
    slices: dict = {}
    for key, c in f.terms.items():
        ec, oc, total = _content(key)
        slices.setdefault((ec, oc, total, key[0]), {})[key] = c
    out: dict = {}
    prim: dict = {}
    for (ec, oc, total, grades), terms in slices.items():
        basis = _exact_basis(ec, oc, total)
        work = {(k[1], k[2]): c for k, c in terms.items()}
        for p in sorted((m for m in work if m in basis), key=_pivot_rank, reverse=True):
            a = work.get(p)
            if not a:
                continue
            row, pre = basis[p]
            for j, v in row.items():
                w = work.get(j, ctx.zero) - a * v
                if w:
                    work[j] = w
                else:
                    work.pop(j, None)
            for (ev, od), v in pre.items():
                k = (grades, ev, od)
                w = prim.get(k, ctx.zero) + a * v
                if w:
                    prim[k] = w
                else:
                    prim.pop(k, None)
        for (ev, od), c in work.items():
            out[(grades, ev, od)] = c
    return DiffPoly(ctx, out), DiffPoly(ctx, prim)


def canonical_representative(f: DiffPoly) -> DiffPoly:
    """Representative of the class of f modulo Im(dx), unique for each class."""
    return _reduce_slices(f)[0]


def integrate_exact(f: DiffPoly) -> DiffPoly | None:
    """g with dx(g) == f when f is a total derivative in the free jet ring, else None."""
    rest, g = _reduce_slices(f)
    return g if rest.is_zero() else None


class LocalFunctional:
    """The class of a density modulo total x-derivatives."""

    __slots__ = ("rep",)

    def __init__(self, density: DiffPoly, canonical: bool = False):
        self.rep = density if canonical else canonical_representative(density)

    @property
    def ctx(self) -> JetContext:
        return self.rep.ctx

    def __eq__(self, other) -> bool:
        if isinstance(other, LocalFunctional):
            return self.rep == other.rep
        if other == 0:
            return self.rep.is_zero()
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.rep)

    def __bool__(self) -> bool:
        return not self.rep.is_zero()

    def is_zero(self) -> bool:
        return self.rep.is_zero()

    def __add__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep + other.rep, canonical=True)

    def __sub__(self, other: "LocalFunctional") -> "LocalFunctional":
        return LocalFunctional(self.rep - other.rep, canonical=True)

    def __neg__(self) -> "LocalFunctional":
        return LocalFunctional(-self.rep, canonical=True)

    def scale(self, c) -> "LocalFunctional":
        return LocalFunctional(self.rep.scale(c), canonical=True)

    def __mul__(self, c) -> "LocalFunctional":
        return self.scale(c)

    __rmul__ = __mul__

    def super_degree(self) -> int:
        return super_degree(self.rep)

    def __str__(self) -> str:
        return f"int({self.rep})"

    __repr__ = __str__

    def to_json(self) -> dict:
        d = self.rep.to_json()
        d["functional"] = True
        return d


def functional(f: DiffPoly) -> LocalFunctional:
    return LocalFunctional(f)


# variational derivatives ---------------------------------------------------------

def _as_density(F) -> DiffPoly:
    return F.rep if isinstance(F, LocalFunctional) else F


def var_derivative(F, target: Gen) -> DiffPoly:
    """Euler operator with respect to a level-0 generator (u^a or sigma_{a,0})."""
    f = _as_density(F)
    out = f.ctx.zero_poly()
    top = max((jet_order(g) for g in f.generators() if g[0] == 0), default=0)
    for s in range(top, -1, -1):
        g = (0, target[1], s) if len(target) == 3 else (0, target[1], target[2], s)
        term = partial(f, g)
        if s == top:
            out = term
        else:
            out = term - dx(out)
    return out


def _degree(F) -> int:
    f = _as_density(F)
    if f.is_zero():
        return 0
    return super_degree(f)


def schouten(P: LocalFunctional, Q: LocalFunctional) -> LocalFunctional:
    """[P,Q] = int(dP/dtheta_a dQ/du^a + (-1)^p dP/du^a dQ/dtheta_a)."""
    if P.is_zero() or Q.is_zero():
        return LocalFunctional(P.ctx.zero_poly(), canonical=True)
    p = _degree(P)
    _degree(Q)
    ctx = P.ctx
    total = ctx.zero_poly()
    for a in range(1, ctx.n + 1):
        dPt = var_derivative(P, odd(a))
        dQu = var_derivative(Q, even(a))
        dPu = var_derivative(P, even(a))
        dQt = var_derivative(Q, odd(a))
        total = total + dPt * dQu
        second = dPu * dQt
        total = total + (second if p % 2 == 0 else -second)
    return LocalFunctional(total)


# derivations ------------------------------------------------------------------------

class EvolDerivation:
    """A derivation commuting with dx, given by images of the jet-0 generators.

    Images of higher jets are dx^s of the jet-0 image, passed through
    ``normalize`` when the ambient ring carries relations.
    """

    def __init__(self, images: dict, parity: int, normalize=None, name: str = ""):
        self.images = dict(images)
        self.parity = parity % 2
        self.normalize = normalize
        self.name = name
        self._cache: dict = {}

    def _base(self, g: Gen) -> Gen:
        if g[0] != 0:
            return g
        return (0, g[1], 0) if len(g) == 3 else (0, g[1], g[2], 0)

    def image(self, g: Gen) -> DiffPoly:
        hit = self._cache.get(g)
        if hit is not None:
            return hit
        base = self._base(g)
        if base not in self.images:
            from .diffpoly import gen_name
            from .errors import LevelOutOfRange
            raise LevelOutOfRange(f"derivation {self.name or ''} has no image for {gen_name(base)}")
        if base == g:
            res = self.images[g]
        else:
            prev = self.image(g[:-1] + (g[-1] - 1,))
            res = dx(prev)
            if self.normalize is not None:
                res = self.normalize(res)
        self._cache[g] = res
        return res

    def __call__(self, f: DiffPoly) -> DiffPoly:
        return self.apply(f)

    def apply(self, f: DiffPoly) -> DiffPoly:
        ctx = f.ctx
        k = self.parity
        acc: dict = {}
        pieces: list[DiffPoly] = []
        for key, c in f.terms.items():
            grades, ev, od = key
            for idx, (g, e) in enumerate(ev):
                img = self.image(g)
                if img.is_zero():
                    continue
                d = dict(ev)
                if e == 1:
                    del d[g]
                else:
                    d[g] = e - 1
                left = (grades, tuple(sorted(d.items())), ())
                pieces.append(_mono_times(ctx, left, c * e, img, (ctx.no_grade, (), od)))
            for i, o in enumerate(od):
                img = self.image(o)
                if img.is_zero():
                    continue
                sign = -1 if (k and i % 2) else 1
                left = (grades, ev, od[:i])
                right = (ctx.no_grade, (), od[i + 1:])
                pieces.append(_mono_times(ctx, left, c if sign > 0 else -c, img, right))
        out = DiffPoly(ctx, acc)
        for p in pieces:
            out = out + p
        return out

    def restricted(self, gens) -> "EvolDerivation":
        return EvolDerivation({g: self.images[g] for g in gens}, self.parity, self.normalize, self.name)

    def is_zero(self) -> bool:
        return all(v.is_zero() for v in self.images.values())

    def __add__(self, other: "EvolDerivation") -> "EvolDerivation":
        keys = set(self.images) & set(other.images)
        return EvolDerivation({g: self.images[g] + other.images[g] for g in keys}, self.parity,
                              self.normalize or other.normalize)

    def __sub__(self, other: "EvolDerivation") -> "EvolDerivation":
        keys = set(self.images) & set(other.images)
        return EvolDerivation({g: self.images[g] - other.images[g] for g in keys}, self.parity,
                              self.normalize or other.normalize)

    def scale(self, c) -> "EvolDerivation":
        return EvolDerivation({g: v.scale(c) for g, v in self.images.items()}, self.parity, self.normalize)

    def __repr__(self) -> str:
        from .diffpoly import gen_name
        inner = ", ".join(f"{gen_name(g)} -> {v}" for g, v in sorted(self.images.items()))
        return f"EvolDerivation({inner})"


def _mono_times(ctx: JetContext, left_key, coeff, poly: DiffPoly, right_key) -> DiffPoly:
    """coeff * m_left * poly * m_right for monomials given by keys."""
    out: dict = {}
    for k, c in poly.terms.items():
        r = mul_keys(left_key, k)
        if r is None:
            continue
        s1, k1 = r
        r = mul_keys(k1, right_key)
        if r is None:
            continue
        s2, k2 = r
        v = coeff * c
        if s1 * s2 < 0:
            v = -v
        w = out.get(k2)
        if w is None:
            out[k2] = v
        else:
            w = w + v
            if w:
                out[k2] = w
            else:
                del out[k2]
    return DiffPoly(ctx, out)


def commutator(D1: EvolDerivation, D2: EvolDerivation, on=None) -> EvolDerivation:
    """Graded commutator D1 D2 - (-1)^{kl} D2 D1 on the common jet-0 generators."""
    gens = sorted(on if on is not None else set(D1.images) & set(D2.images))
    sign = -1 if (D1.parity and D2.parity) else 1
    images = {}
    for g in gens:
        a = D1.apply(D2.image(g))
        b = D2.apply(D1.image(g))
        images[g] = a + b if sign < 0 else a - b
    norm = D1.normalize or D2.normalize
    if norm is not None:
        images = {g: norm(v) for g, v in images.items()}
    return EvolDerivation(images, D1.parity + D2.parity, norm)


def level0_generators(ctx: JetContext, max_level: int = 0) -> list[Gen]:
    gens = [even(a) for a in range(1, ctx.n + 1)]
    gens += [odd(a, m) for m in range(max_level + 1) for a in range(1, ctx.n + 1)]
    return gens


def dp_derivation(P: LocalFunctional) -> EvolDerivation:
    """D_P: u^a -> dP/dtheta_a, theta_a -> (-1)^p dP/du^a."""
    ctx = P.ctx
    p = _degree(P) if not P.is_zero() else 0
    images = {}
    for a in range(1, ctx.n + 1):
        images[even(a)] = var_derivative(P, odd(a))
        d = var_derivative(P, even(a))
        images[odd(a)] = d if p % 2 == 0 else -d
    return EvolDerivation(images, p - 1, name="D_P")


# Hamiltonian operators -----------------------------------------------------------------

class HamOperator:
    """Matrix of differential operators: entries[(a, b)] = {s: coefficient}."""

    def __init__(self, ctx: JetContext, entries: dict):
        self.ctx = ctx
        self.entries = entries

    def entry(self, a: int, b: int) -> dict:
        return self.entries.get((a, b), {})

    def apply_to_odd(self, a: int, level: int = 0) -> DiffPoly:
        """sum_{b,s} P^{ab}_s sigma_{b,level}^s."""
        out = self.ctx.zero_poly()
        for b in range(1, self.ctx.n + 1):
            for s, coef in self.entry(a, b).items():
                out = out + coef * self.ctx.sigma(b, level, s)
        return out

    def __str__(self) -> str:
        rows = []
        for (a, b), ops in sorted(self.entries.items()):
            terms = " + ".join(f"({c})*d^{s}" for s, c in sorted(ops.items(), reverse=True))
            rows.append(f"[{a},{b}]: {terms}")
        return "\n".join(rows)


def ham_operator(P: LocalFunctional) -> HamOperator:
    ctx = P.ctx
    if P.rep.max_level() > 0:
        raise OddLevelTooHigh("Hamiltonian operators are read off level-0 odd variables only")
    if not P.is_zero() and _degree(P) != 2:
        raise NotHomogeneous("a Hamiltonian operator needs a bivector (super degree 2)")
    entries: dict = {}
    for a in range(1, ctx.n + 1):
        d = var_derivative(P, odd(a))
        for key, c in d.terms.items():
            (o,) = key[2]
            b, s = o[2], o[3]
            coef = DiffPoly(ctx, {(key[0], key[1], ()): c})
            slot = entries.setdefault((a, b), {})
            slot[s] = slot[s] + coef if s in slot else coef
    return HamOperator(ctx, entries)


def hydro_metric(P: LocalFunctional):
    """Read g^{ab} and Gamma^{ab}_c off a hydrodynamic bivector."""
    ctx = P.ctx
    op = ham_operator(P)
    n = ctx.n
    g = [[ctx.zero_poly() for _ in range(n)] for _ in range(n)]
    gamma = {}
    for (a, b), ops in op.entries.items():
        for s, coef in ops.items():
            if s > 1 or any(k[0] != ctx.no_grade for k in coef.terms):
                raise NotHydrodynamic("operator has terms beyond first order or carries graded parameters")
            if s == 1:
                if coef.max_jet() > 0:
                    raise NotHydrodynamic("leading coefficient depends on jets")
                g[a - 1][b - 1] = coef
            else:
                for c in range(1, n + 1):
                    gam = partial(coef, even(c, 1))
                    if gam.max_jet() > 0:
                        raise NotHydrodynamic("connection coefficient depends on jets")
                    if not gam.is_zero():
                        gamma[(a, b, c)] = gam
                rest = coef
                for c in range(1, n + 1):
                    rest = rest - gamma.get((a, b, c), ctx.zero_poly()) * ctx.u(c, 1)
                if not rest.is_zero():
                    raise NotHydrodynamic("zeroth-order term is not linear in first jets")
    if _det(g, ctx).is_zero():
        raise DegenerateMetric("det g vanishes identically")
    return g, gamma


def _det(m, ctx):
    n = len(m)
    if n == 1:
        return m[0][0]
    total = ctx.zero_poly()
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        term = m[0][j] * _det(minor, ctx)
        total = total + term if j % 2 == 0 else total - term
    return total


# Miura transformations ------------------------------------------------------------------

def miura(expr: DiffPoly, mapping: dict) -> DiffPoly:
    """Pull expr back along w~^a = mapping[a](w).

    Even jets go to dx^s of the mapping; odd variables of every level follow
    phi_{a,m}^s = dx^s sum_t (-dx)^t (dw~^b/dw^{a,t} phi~_{b,m}).
    """
    ctx = expr.ctx
    n = ctx.n
    jac = [[partial(mapping[b], even(a, 0)) for a in range(1, n + 1)] for b in range(1, n + 1)]
    lead = [[DiffPoly(ctx, {k: c for k, c in e.terms.items() if k[0] == ctx.no_grade}) for e in row]
            for row in jac]
    if _det(lead, ctx).is_zero():
        raise NonInvertibleLeadingJacobian("degree-zero Jacobian of the map is singular")
    sub: dict = {}
    for g in expr.generators():
        if g[0] != 0:
            continue
        if len(g) == 3:
            sub[g] = dx_n(mapping[g[1]], g[2])
        else:
            m, a, s = g[1], g[2], g[3]
            base = ctx.zero_poly()
            top = max(mapping[b].max_jet() for b in range(1, n + 1))
            for t in range(max(top, 0) + 1):
                piece = ctx.zero_poly()
                for b in range(1, n + 1):
                    piece = piece + partial(mapping[b], even(a, t)) * ctx.sigma(b, m)
                for _ in range(t):
                    piece = -dx(piece)
                base = base + piece
            sub[g] = dx_n(base, s)
    return substitute(expr, sub)
