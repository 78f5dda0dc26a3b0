"""The extended ring with odd variables of every level, and its flows.

Odd generators ``sigma_{a,m}^s`` with ``m >= 1`` and ``s >= 1`` are rewritten
through the recursion ``eta^{ab} sigma_{b,m}^1 = P_1^{ab} sigma_{b,m-1}`` and
its x-derivatives, so a normal form only keeps ``sigma_{a,m}^0`` at positive
levels. Locality then reads off directly from the generators that remain.
"""

from __future__ import annotations

import os
import random
import threading
from fractions import Fraction

from gmpy2 import mpq
from sympy import Matrix, Rational

from .ansatz import Grading, build_space, enumerate_monomials, slice_of, solve_linear_ansatz
from .diffpoly import DiffPoly, JetContext, dx, dx_n, even, gen_name, join_contexts, odd, substitute
from .errors import (
    EtaNotConstant, EtaSingular, LevelOutOfRange, MixedOddLevels, NoSolution, NotBihamiltonian,
    NotBihamiltonianVectorField, NotExact, NotHomogeneous,
)
from .variational import (
    EvolDerivation, LocalFunctional, commutator, ham_operator, integrate_exact, level0_generators,
    schouten, var_derivative,
)

DEFAULT_MAX_LEVEL = 4


def default_max_level() -> int:
    raw = os.environ.get("SUPERJET_MAX_LEVEL")
    if raw is None or raw == "":
        return DEFAULT_MAX_LEVEL
    level = int(raw)
    if level < 1:
        raise ValueError("SUPERJET_MAX_LEVEL must be a positive integer")
    return level


def _is_offending(g) -> bool:
    return len(g) == 4 and g[0] == 0 and g[1] >= 1 and g[3] >= 1


class BihamPair:
    """A compatible pair (P0, P1) with P0 in flat constant form."""

    def __init__(self, P0: LocalFunctional, P1: LocalFunctional, *, max_level: int | None = None,
                 grading: Grading | None = None, check: bool = True):
        base = join_contexts(P0.ctx, P1.ctx)
        if check:
            for name, a, b in (("[P0,P0]", P0, P0), ("[P0,P1]", P0, P1), ("[P1,P1]", P1, P1)):
                if not schouten(a, b).is_zero():
                    raise NotBihamiltonian(f"{name} does not vanish")
        self.max_level = default_max_level() if max_level is None else max_level
        self.ctx: JetContext = base.extend(max_odd_level=self.max_level)
        self.P0 = LocalFunctional(P0.rep.with_context(self.ctx))
        self.P1 = LocalFunctional(P1.rep.with_context(self.ctx))
        self.grading = grading
        self.eta, self.eta_inv = _flat_metric(P0)
        self.ham1 = ham_operator(P1)
        self._lock = threading.Lock()
        self._nf: dict = {}

    @property
    def n(self) -> int:
        return self.ctx.n

    # recursion ---------------------------------------------------------------
    def raw_rule(self, a: int, m: int) -> DiffPoly:
        """eta_{ac} P_1^{cb} sigma_{b,m-1}, the unreduced right side for sigma_{a,m}^1."""
        ctx = self.ctx
        out = ctx.zero_poly()
        for c in range(1, self.n + 1):
            w = self.eta_inv[a - 1][c - 1]
            if not w:
                continue
            for b in range(1, self.n + 1):
                for s, coef in self.ham1.entry(c, b).items():
                    out = out + coef.with_context(ctx).scale(w) * ctx.sigma(b, m - 1, s)
        return out

    def normal_form_of(self, g) -> DiffPoly:
        """Normal form of a single offending generator sigma_{a,m}^s (m, s >= 1)."""
        hit = self._nf.get(g)
        if hit is not None:
            return hit
        _, m, a, s = g
        if s == 1:
            res = self.reduce(self.raw_rule(a, m))
        else:
            res = self.reduce(dx(self.normal_form_of((0, m, a, s - 1))))
        with self._lock:
            self._nf.setdefault(g, res)
        return self._nf[g]

    def reduce(self, x: DiffPoly) -> DiffPoly:
        if x.ctx is not self.ctx:
            x = x.with_context(self.ctx)
        while True:
            bad = sorted(g for g in x.generators() if _is_offending(g))
            if not bad:
                return x
            x = substitute(x, {g: self.normal_form_of(g) for g in bad})


def _flat_metric(P0: LocalFunctional):
    op = ham_operator(P0)
    n = P0.ctx.n
    eta = [[Fraction(0)] * n for _ in range(n)]
    for (a, b), ops in op.entries.items():
        for s, coef in ops.items():
            if coef.is_zero():
                continue
            if s != 1 or len(coef.terms) != 1:
                raise EtaNotConstant("P0 is not of the form 1/2 int eta^{ab} sigma_a sigma_b^1")
            (key, c), = coef.terms.items()
            if key != (P0.ctx.no_grade, (), ()):
                raise EtaNotConstant("P0 coefficients depend on jets or eps")
            if P0.ctx.K is not None and hasattr(c, "is_ground") and not c.is_ground:
                raise EtaNotConstant("P0 coefficients depend on parameters")
            v = mpq(c.LC) if hasattr(c, "LC") else mpq(c)
            eta[a - 1][b - 1] = Fraction(int(v.numerator), int(v.denominator))
    M = Matrix(n, n, lambda i, j: Rational(eta[i][j].numerator, eta[i][j].denominator))
    if M.det() == 0:
        raise EtaSingular("eta is singular")
    Minv = M.inv()
    inv = [[Fraction(int(Minv[i, j].p), int(Minv[i, j].q)) for j in range(n)] for i in range(n)]
    return eta, inv


def reduce_recursion(x: DiffPoly, pair: BihamPair) -> DiffPoly:
    return pair.reduce(x)


def reduce_stepwise(x: DiffPoly, pair: BihamPair, seed: int = 0) -> DiffPoly:
    """Normal form through single raw rewrites in a random order (independent of the cache)."""
    rng = random.Random(seed)
    x = x.with_context(pair.ctx)
    while True:
        bad = sorted(g for g in x.generators() if _is_offending(g))
        if not bad:
            return x
        g = rng.choice(bad)
        _, m, a, s = g
        x = substitute(x, {g: dx_n(pair.raw_rule(a, m), s - 1)})


def is_local(x: DiffPoly) -> bool:
    """True iff the normal form x lies in the level-0 ring."""
    return not any(len(g) == 4 and g[0] == 0 and g[1] >= 1 for g in x.generators())


def local_representative(x: DiffPoly, pair: BihamPair) -> DiffPoly | None:
    """A level-0 polynomial r with reduce(r) == x, or None if x is non-local."""
    x = pair.reduce(x)
    return x if is_local(x) else None


# shift operators ---------------------------------------------------------------

def _check_level0(X: DiffPoly, degree: int) -> None:
    for key in X.terms:
        if len(key[2]) != degree:
            raise NotHomogeneous(f"expected super degree {degree}")
        if any(o[0] != 0 or o[1] != 0 for o in key[2]):
            raise MixedOddLevels("shift operators act on level-0 odd variables only")


def _target_ctx(X: DiffPoly, pair: BihamPair | None, level: int) -> JetContext:
    if pair is not None:
        return pair.ctx
    if X.ctx.max_odd_level >= level:
        return X.ctx
    return X.ctx.extend(max_odd_level=level)


def shift_T(k: int, X: DiffPoly, pair: BihamPair | None = None) -> DiffPoly:
    """T_k(f sigma_{a,0}^s) = f sigma_{a,k}^s, followed by the recursion normal form."""
    _check_level0(X, 1)
    ctx = _target_ctx(X, pair, k)
    out: dict = {}
    for (grades, ev, od), c in X.terms.items():
        o = od[0]
        out[(grades, ev, ((0, k, o[2], o[3]),))] = c
    res = DiffPoly(ctx, out)
    return pair.reduce(res) if pair is not None else res


def shift_Tkl(k: int, l: int, X: DiffPoly, pair: BihamPair | None = None) -> DiffPoly:
    """T_{k,l}(f s^t s^s) = f sum_{i<l-k} sigma_{k+i}^t sigma_{l-i-1}^s, antisymmetric in (k, l)."""
    _check_level0(X, 2)
    ctx = _target_ctx(X, pair, max(k, l))
    if k == l:
        return ctx.zero_poly()
    if k > l:
        return -shift_Tkl(l, k, X, pair)
    out = ctx.zero_poly()
    for (grades, ev, od), c in X.terms.items():
        o1, o2 = od
        f = DiffPoly(ctx, {(grades, ev, ()): c})
        acc = ctx.zero_poly()
        for i in range(l - k):
            acc = acc + ctx.sigma(o1[2], k + i, o1[3]) * ctx.sigma(o2[2], l - i - 1, o2[3])
        out = out + f * acc
    return pair.reduce(out) if pair is not None else out


# flows -------------------------------------------------------------------------------

def odd_flow(m: int, pair: BihamPair) -> EvolDerivation:
    """d v^a/d tau_m = T_m dP0/dsigma_a and d sigma_{a,k}/d tau_m = T_{k,m} dP1/dv^a."""
    if not 0 <= m <= pair.max_level:
        raise LevelOutOfRange(f"tau_{m} needs odd level {m} but the bound is {pair.max_level}")
    images = {}
    for a in range(1, pair.n + 1):
        images[even(a)] = shift_T(m, var_derivative(pair.P0, odd(a)), pair)
        d1 = var_derivative(pair.P1, even(a))
        for k in range(pair.max_level + 1):
            images[odd(a, k)] = shift_Tkl(k, m, d1, pair)
    return EvolDerivation(images, 1, pair.reduce, name=f"d/dtau_{m}")


def super_flow(X: LocalFunctional, pair: BihamPair) -> EvolDerivation:
    """Even flow v -> dX/dsigma, sigma_{a,m} -> T_m(-dX/dv^a) of a bihamiltonian vector field."""
    X = LocalFunctional(X.rep.with_context(pair.ctx))
    if not schouten(X, pair.P0).is_zero() or not schouten(X, pair.P1).is_zero():
        raise NotBihamiltonianVectorField("[X,P0] or [X,P1] does not vanish")
    images = {}
    for a in range(1, pair.n + 1):
        images[even(a)] = pair.reduce(var_derivative(X, odd(a)))
        d = -var_derivative(X, even(a))
        for k in range(pair.max_level + 1):
            images[odd(a, k)] = shift_T(k, d, pair)
    return EvolDerivation(images, 0, pair.reduce, name="super flow")


def verify_commute(D1: EvolDerivation, D2: EvolDerivation, pair: BihamPair | None = None) -> dict:
    """Nonzero entries of the graded commutator on the level-0 generators."""
    gens = set(D1.images) & set(D2.images)
    if pair is not None:
        gens &= set(level0_generators(pair.ctx, pair.max_level))
    C = commutator(D1, D2, on=sorted(gens))
    return {g: v for g, v in C.images.items() if not v.is_zero()}


# x-integration -----------------------------------------------------------------------

def invert_dx(f: DiffPoly, pair: BihamPair | None = None, grading: Grading | None = None) -> DiffPoly:
    """g with dx(g) equal to f in normal form; NotExact when f is not a total derivative."""
    if f.is_zero():
        return f
    if pair is not None:
        f = pair.reduce(f)
    if all(g[0] == 0 for g in f.generators()):
        g = integrate_exact(f)
        if g is not None:
            return g
    if pair is None or is_local(f) and not _needs_levels(f, pair):
        raise NotExact(f"not a total x-derivative: {f}")
    grading = grading or pair.grading
    if grading is None:
        raise NotExact("integration in the extended ring needs a grading for the ansatz")
    return _invert_by_ansatz(f, pair, grading)


def _needs_levels(f: DiffPoly, pair: BihamPair) -> bool:
    # a local f may still be dx of a level-bearing element; only the ansatz can tell
    return pair.max_level >= 1


def _invert_by_ansatz(f: DiffPoly, pair: BihamPair, grading: Grading) -> DiffPoly:
    ctx = pair.ctx
    sd, dd, w = slice_of(ctx, f, grading)
    keys = enumerate_monomials(ctx, grading, super_degree=sd, diff_degree=dd - 1, weight=w,
                               max_level=pair.max_level)
    degree = max((sum(e) for c in f.terms.values() for e in _param_exps(ctx, c)), default=0)
    space = build_space(ctx, keys, grading, degree)
    try:
        g, _ = solve_linear_ansatz(space, lambda x: pair.reduce(dx(x)), f)
    except NoSolution:
        raise NotExact(f"not a total x-derivative in the extended ring: {f}") from None
    return g


def _param_exps(ctx: JetContext, c):
    if not ctx.plain_params:
        return [()]
    return [e for e, _ in c.terms()]


def describe_rule(pair: BihamPair, a: int, m: int) -> str:
    return f"{gen_name(odd(a, m, 1))} -> {pair.normal_form_of(odd(a, m, 1))}"
