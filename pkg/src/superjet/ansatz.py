"""Graded monomial bases and linear ansatz solves.

A :class:`Grading` assigns rational weights to fields, odd variables, odd
levels and graded parameters so that dx and the recursion rewrite preserve
the total weight. Together with the eps-graded differential degree and the
super degree this cuts the normal-form monomials into finite slices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .diffpoly import DiffPoly, JetContext, key_diff_degree
from .errors import NoSolution, NotHomogeneous
from .linsolve import SparseSystem, expand_coeff, mono_coeff, param_monomials, solve


@dataclass(frozen=True)
class Grading:
    even_weight: tuple           # per field, index 0 is field 1
    odd_weight: tuple            # weight of sigma_{a,0}
    level_step: tuple            # weight added per odd level
    grade_weight: tuple          # per graded parameter
    param_monomials: Callable | None = None   # grades -> list of exponent tuples

    def key_weight(self, key) -> Fraction:
        grades, ev, od = key
        w = Fraction(0)
        for g, e in ev:
            if g[0] != 0:
                raise ValueError("weights are defined on jet variables only")
            w += self.even_weight[g[1] - 1] * e
        for o in od:
            w += self.odd_weight[o[2] - 1] + self.level_step[o[2] - 1] * o[1]
        for gw, e in zip(self.grade_weight, grades):
            w += gw * e
        return w

    def weight(self, f: DiffPoly) -> Fraction:
        ws = {self.key_weight(k) for k in f.terms}
        if len(ws) > 1:
            raise NotHomogeneous(f"not homogeneous in weight: {sorted(ws)}")
        return ws.pop() if ws else Fraction(0)


@dataclass
class AnsatzSpace:
    """Unknown rational multiples of (parameter monomial x jet monomial)."""

    ctx: JetContext
    basis: list                              # monomial keys
    params: list = field(default_factory=list)   # per basis entry, list of exponent tuples

    def unknowns(self) -> list[tuple[int, tuple]]:
        return [(i, e) for i, plist in enumerate(self.params) for e in plist]

    def __len__(self) -> int:
        return sum(len(p) for p in self.params)


def enumerate_monomials(ctx: JetContext, grading: Grading, *, super_degree: int, diff_degree: int,
                        weight: Fraction, max_level: int, max_grade: int = 8) -> list:
    """All normal-form monomial keys of the slice (levels >= 1 only at jet 0)."""
    n = ctx.n
    out = []
    if len(ctx.graded_params) > 1:
        raise ValueError("ansatz enumeration supports a single graded parameter")
    graded = len(ctx.graded_params) == 1
    gw = grading.grade_weight[0] if graded else Fraction(0)
    gdeg = ctx.graded_params[0][1] if graded else 0
    for e in (range(max_grade + 1) if graded else [0]):
        jets = diff_degree - gdeg * e
        wbudget = weight - gw * e
        if jets < 0 or wbudget < 0:
            continue
        grades = (e,) if graded else ()
        odd_choices = []
        for a in range(1, n + 1):
            w0 = grading.odd_weight[a - 1]
            for s in range(jets + 1):
                odd_choices.append(((0, 0, a, s), s, w0))
            for m in range(1, max_level + 1):
                odd_choices.append(((0, m, a, 0), 0, w0 + grading.level_step[a - 1] * m))
        odd_choices.sort()

        def odd_rec(start, need, jet_left, w_left, chosen):
            if need == 0:
                even_rec(1, 0, jet_left, w_left, [], tuple(chosen))
                return
            for i in range(start, len(odd_choices)):
                g, s, w = odd_choices[i]
                if s <= jet_left and w <= w_left:
                    odd_rec(i + 1, need - 1, jet_left - s, w_left - w, chosen + [g])

        def even_rec(a, s, jet_left, w_left, chosen, od):
            if w_left == 0 and jet_left == 0:
                out.append((grades, _collect(chosen), od))
                return
            if a > n:
                return
            wa = grading.even_weight[a - 1]
            if wa <= 0:
                raise ValueError("even weights must be positive")
            if s > jet_left:
                even_rec(a + 1, 0, jet_left, w_left, chosen, od)
                return
            if wa <= w_left:
                even_rec(a, s, jet_left - s, w_left - wa, chosen + [(0, a, s)], od)
            even_rec(a, s + 1, jet_left, w_left, chosen, od)

        odd_rec(0, super_degree, jets, wbudget, [])
    return sorted(set(out))


def _collect(gens: list) -> tuple:
    d: dict = {}
    for g in gens:
        d[g] = d.get(g, 0) + 1
    return tuple(sorted(d.items()))


def build_space(ctx: JetContext, keys: list, grading: Grading | None, default_degree: int) -> AnsatzSpace:
    params = []
    for k in keys:
        if grading is not None and grading.param_monomials is not None:
            params.append(list(grading.param_monomials(k[0])))
        else:
            params.append(param_monomials(len(ctx.plain_params), default_degree))
    return AnsatzSpace(ctx, list(keys), params)


def solve_linear_ansatz(space: AnsatzSpace, images: Callable, target, require_unique: bool = False):
    """Find x in span(space) with images(x) == target; images must be QQ[params]-linear.

    ``images`` may return a DiffPoly or a dict of labelled DiffPolys (one per
    equation), in which case ``target`` is a dict with the same labels.
    Returns (solution polynomial, list of free unknown labels); free unknowns
    are set to zero. With ``require_unique`` a nonzero nullity raises NoSolution.
    """
    ctx = space.ctx
    K = ctx.K
    unknowns = space.unknowns()
    eq_index: dict = {}
    system = SparseSystem(len(unknowns))
    rows: dict = {}
    for j, (i, exps) in enumerate(unknowns):
        mono = DiffPoly(ctx, {space.basis[i]: mono_coeff(K, exps)})
        for label, col in _labelled(images(mono)):
            for key, c in col.terms.items():
                for e, r in expand_coeff(c, K).items():
                    idx = eq_index.setdefault((label, key, e), len(eq_index))
                    rows.setdefault(idx, {})[j] = r
    rhs: dict = {}
    for label, part in _labelled(target):
        for key, c in part.terms.items():
            for e, r in expand_coeff(c, K).items():
                idx = eq_index.get((label, key, e))
                if idx is None:
                    raise NoSolution("target has a term outside the image of the ansatz")
                rhs[idx] = r
    for idx, row in rows.items():
        system.add(row, rhs.get(idx, 0))
    sol = solve(system)
    if require_unique and sol.free:
        raise NoSolution(f"solution is not unique (nullity {len(sol.free)})")
    out = ctx.zero_poly()
    for j, (i, exps) in enumerate(unknowns):
        v = sol.values[j]
        if v:
            out = out + DiffPoly(ctx, {space.basis[i]: mono_coeff(K, exps) * v})
    free = [unknowns[j] for j in sol.free]
    return out, free


def _labelled(x):
    if isinstance(x, dict):
        return sorted(x.items(), key=lambda kv: repr(kv[0]))
    return [(None, x)]


def slice_of(ctx: JetContext, f: DiffPoly, grading: Grading) -> tuple:
    """(super degree, eps-graded differential degree, weight) of a homogeneous f."""
    sds = {len(k[2]) for k in f.terms}
    dds = {key_diff_degree(ctx, k) for k in f.terms}
    if len(sds) > 1 or len(dds) > 1:
        raise NotHomogeneous("input is not homogeneous")
    return sds.pop(), dds.pop(), grading.weight(f)
