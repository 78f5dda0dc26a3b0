"""Frobenius manifolds: WDVV, calibrations, the Principal Hierarchy and Virasoro operators.

Functions on the manifold are differential polynomials that only involve the
jet-0 variables ``u1_0 .. un_0`` (the flat coordinates). The quadratic
Virasoro operators live in a normal-ordered Weyl algebra on the times
``t^{a,p}``; they carry no dispersion parameter.
"""

from __future__ import annotations

import configparser
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from math import comb, factorial
from pathlib import Path

from gmpy2 import mpq
from sympy import Matrix, Rational

from .diffpoly import DiffPoly, JetContext, dx, even, odd, partial
from .errors import (
    EtaNotConstant, EtaSingular, ExactnessFailed, InputError, NoSolution, ResonantCalibration,
    ResonantSpectrum, UnsupportedResonance,
)
from .linsolve import SparseSystem, solve
from .superext import BihamPair
from .textio import parse_poly
from .variational import EvolDerivation, LocalFunctional, schouten


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x.strip())
    x = mpq(x)
    return Fraction(int(x.numerator), int(x.denominator))


def _constant_value(f: DiffPoly, ctx: JetContext):
    """The rational value of a constant polynomial, or None."""
    if f.is_zero():
        return Fraction(0)
    if len(f.terms) != 1:
        return None
    (key, c), = f.terms.items()
    if key != (ctx.no_grade, (), ()):
        return None
    if hasattr(c, "is_ground"):
        if not c.is_ground:
            return None
        c = c.LC
    return _frac(c)


def _inverse(m: list) -> list:
    n = len(m)
    M = Matrix(n, n, lambda i, j: Rational(m[i][j].numerator, m[i][j].denominator))
    if M.det() == 0:
        raise EtaSingular("eta is singular")
    inv = M.inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(n)] for i in range(n)]


def frobenius_context(n: int) -> JetContext:
    return JetContext(n, parameters=(("eps", -1),))


# WDVV ----------------------------------------------------------------------------

def third_derivatives(F: DiffPoly) -> dict:
    n = F.ctx.n
    out = {}
    for a in range(1, n + 1):
        Fa = partial(F, even(a))
        for b in range(a, n + 1):
            Fab = partial(Fa, even(b))
            for c in range(b, n + 1):
                v = partial(Fab, even(c))
                for key in {(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)}:
                    out[key] = v
    return out


def metric_from_potential(F: DiffPoly) -> list:
    """eta_{ab} = d1 da db F, checked constant."""
    ctx = F.ctx
    c3 = third_derivatives(F)
    eta = []
    for a in range(1, ctx.n + 1):
        row = []
        for b in range(1, ctx.n + 1):
            v = _constant_value(c3[(1, a, b)], ctx)
            if v is None:
                raise EtaNotConstant(f"d1 d{a} d{b} F = {c3[(1, a, b)]} is not constant")
            row.append(v)
        eta.append(row)
    _inverse(eta)
    return eta


def wdvv_check(F: DiffPoly, eta: list | None = None):
    """(True, None) if every associativity equation holds, else (False, first failing (a,b,c,d))."""
    ctx = F.ctx
    if eta is None:
        eta = metric_from_potential(F)
    eta_inv = _inverse([[_frac(x) for x in row] for row in eta])
    c3 = third_derivatives(F)
    n = ctx.n
    idx = range(1, n + 1)
    for a in idx:
        for b in idx:
            for c in idx:
                for d in idx:
                    lhs = ctx.zero_poly()
                    for l in idx:
                        for m in idx:
                            w = eta_inv[l - 1][m - 1]
                            if w:
                                lhs = lhs + (c3[(a, b, l)] * c3[(m, c, d)] - c3[(d, b, l)] * c3[(m, c, a)]).scale(w)
                    if not lhs.is_zero():
                        return False, (a, b, c, d)
    return True, None


# data ----------------------------------------------------------------------------

@dataclass
class FrobeniusData:
    F: DiffPoly
    euler: list                     # E^a = q_a v^a + r_a
    d: Fraction
    r: list = field(default_factory=list)
    R: list = field(default_factory=list)   # R[k-1][g][a] = (R_k)^g_a
    eta: list = field(default_factory=list)
    eta_inv: list = field(default_factory=list)
    mu: list = field(default_factory=list)
    c3: dict = field(default_factory=dict)

    @property
    def ctx(self) -> JetContext:
        return self.F.ctx

    @property
    def n(self) -> int:
        return self.ctx.n

    def E(self) -> list:
        """Components of the Euler vector field as functions."""
        ctx = self.ctx
        return [ctx.u(a).scale(self.euler[a - 1]) + ctx.const(self.r[a - 1]) for a in range(1, self.n + 1)]

    def apply_E(self, f: DiffPoly) -> DiffPoly:
        out = f.ctx.zero_poly()
        for a, Ea in enumerate(self.E(), start=1):
            out = out + Ea * partial(f, even(a))
        return out

    def c_up(self, a: int, b: int, g: int) -> DiffPoly:
        """c^{ab}_g = eta^{al} eta^{bm} c_{lmg}."""
        ctx = self.ctx
        out = ctx.zero_poly()
        for l in range(1, self.n + 1):
            for m in range(1, self.n + 1):
                w = self.eta_inv[a - 1][l - 1] * self.eta_inv[b - 1][m - 1]
                if w:
                    out = out + self.c3[(l, m, g)].scale(w)
        return out

    def c_mixed(self, l: int, b: int, g: int) -> DiffPoly:
        """c^l_{bg} = eta^{lm} c_{mbg}."""
        ctx = self.ctx
        out = ctx.zero_poly()
        for m in range(1, self.n + 1):
            w = self.eta_inv[l - 1][m - 1]
            if w:
                out = out + self.c3[(m, b, g)].scale(w)
        return out

    def has_R(self) -> bool:
        return any(x for Rk in self.R for row in Rk for x in row)


def make_frobenius(F: DiffPoly, euler, d, r=None, R=None) -> FrobeniusData:
    n = F.ctx.n
    euler = [_frac(x) for x in euler]
    d = _frac(d)
    r = [_frac(x) for x in (r or [0] * n)]
    R = [[[_frac(x) for x in row] for row in Rk] for Rk in (R or [])]
    if len(euler) != n or len(r) != n:
        raise InputError("Euler data must have one entry per flat coordinate")
    eta = metric_from_potential(F)
    data = FrobeniusData(F, euler, d, r, R, eta, _inverse(eta), [Fraction(1) - d / 2 - q for q in euler],
                         third_derivatives(F))
    _validate(data)
    return data


def _validate(data: FrobeniusData) -> None:
    n = data.n
    if data.mu[0] != -data.d / 2 or data.r[0] != 0:
        raise InputError("the unity direction must have Euler weight 1 and no shift")
    for a in range(n):
        for b in range(n):
            if (data.mu[a] + data.mu[b]) * data.eta[a][b] != 0:
                raise InputError("eta is not compatible with the spectrum mu")
    for k, Rk in enumerate(data.R, start=1):
        for g in range(n):
            for a in range(n):
                if Rk[g][a] and data.mu[g] - data.mu[a] != k:
                    raise InputError(f"[mu, R_{k}] != {k} R_{k}")
    # E(F) = (3-d)F up to quadratic terms
    rest = data.apply_E(data.F) - data.F.scale(3 - data.d)
    for key in rest.terms:
        if sum(e for _, e in key[1]) > 2:
            raise InputError("potential is not quasi-homogeneous for the given Euler field")


def _parse_matrix(text: str, n: int) -> list:
    rows = [r for r in text.split(";") if r.strip()]
    m = [[_frac(x) for x in row.replace(",", " ").split()] for row in rows]
    if len(m) != n or any(len(row) != n for row in m):
        raise InputError(f"expected an {n}x{n} matrix, got {text!r}")
    return m


def load_frobenius(source: str | Path) -> FrobeniusData:
    """Read an INI-style Frobenius file; bundled names like ``b2`` are accepted."""
    text = _read_source(source)
    cp = configparser.ConfigParser()
    try:
        cp.read_string(text)
        sec = cp["frobenius"]
    except (configparser.Error, KeyError) as exc:
        raise InputError(f"cannot read Frobenius data: {exc}") from None
    for key in ("potential", "euler", "charge"):
        if key not in sec:
            raise InputError(f"missing key {key!r}")
    euler = [_frac(x) for x in sec["euler"].split(",")]
    n = len(euler)
    F = parse_poly(sec["potential"], frobenius_context(n))
    r = [_frac(x) for x in sec["shift"].split(",")] if "shift" in sec else None
    R = []
    k = 1
    while f"R{k}" in sec:
        R.append(_parse_matrix(sec[f"R{k}"], n))
        k += 1
    return make_frobenius(F, euler, sec["charge"], r, R)


def _read_source(source) -> str:
    p = Path(source)
    if p.exists():
        return p.read_text()
    name = str(source)
    if "/" not in name and "\\" not in name:
        res = resources.files("superjet") / "data" / f"{name}.frob"
        if res.is_file():
            return res.read_text()
    raise InputError(f"no such Frobenius file: {source}")


# calibration ---------------------------------------------------------------------

def _integrate_hessian(S: dict, ctx: JetContext) -> DiffPoly:
    """A polynomial h with d_b d_g h = S[(b,g)], through the radial homotopy formula."""
    h = ctx.zero_poly()
    n = ctx.n
    for b in range(1, n + 1):
        for g in range(1, n + 1):
            s = S[(b, g)]
            for key, c in s.terms.items():
                k = sum(e for _, e in key[1])
                term = DiffPoly(ctx, {key: c}) * ctx.u(b) * ctx.u(g)
                h = h + term.scale(Fraction(1, (k + 1) * (k + 2)))
    return h


@dataclass
class Calibration:
    data: FrobeniusData
    h: dict          # (a, p) -> DiffPoly

    @property
    def depth(self) -> int:
        return max(p for _, p in self.h)


def calibrate(data: FrobeniusData, depth: int) -> Calibration:
    """h_{a,p} for p <= depth fixed by recursion, quasi-homogeneity and normalization."""
    ctx = data.ctx
    n = data.n
    h: dict = {}
    for a in range(1, n + 1):
        h0 = ctx.zero_poly()
        for b in range(1, n + 1):
            if data.eta[a - 1][b - 1]:
                h0 = h0 + ctx.u(b).scale(data.eta[a - 1][b - 1])
        h[(a, 0)] = h0
    for p in range(depth):
        particular = {}
        for a in range(1, n + 1):
            grads = [partial(h[(a, p)], even(l)) for l in range(1, n + 1)]
            S = {}
            for b in range(1, n + 1):
                for g in range(1, n + 1):
                    s = ctx.zero_poly()
                    for l in range(1, n + 1):
                        s = s + data.c_mixed(l, b, g) * grads[l - 1]
                    S[(b, g)] = s
            part = _integrate_hessian(S, ctx)
            for b in range(1, n + 1):
                for g in range(1, n + 1):
                    if partial(partial(part, even(b)), even(g)) != S[(b, g)]:
                        raise NoSolution("calibration recursion is not integrable (check WDVV)")
            particular[a] = part
        h.update(_fix_linear_terms(data, h, particular, p + 1))
    return Calibration(data, h)


def _fix_linear_terms(data: FrobeniusData, h: dict, particular: dict, p: int) -> dict:
    """Add x_{a,b} v^b to each particular solution so the constraints hold."""
    ctx = data.ctx
    n = data.n
    col = {(a, b): i for i, (a, b) in enumerate((a, b) for a in range(1, n + 1) for b in range(1, n + 1))}
    system = SparseSystem(len(col))
    # quasi-homogeneity of d_b h_{a,p}
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            base = partial(particular[a], even(b))
            lhs = data.apply_E(base) - base.scale(p + data.mu[a - 1] + data.mu[b - 1])
            for k, Rk in enumerate(data.R, start=1):
                if k > p:
                    break
                for g in range(1, n + 1):
                    w = Rk[g - 1][a - 1]
                    if w:
                        prev = particular[g] if p - k == p else h[(g, p - k)]
                        lhs = lhs - partial(prev, even(b)).scale(w)
            # unknown x_{a,b} contributes -(p + mu_a + mu_b) x_{a,b}; R terms at level p-k are known
            coef = -(p + data.mu[a - 1] + data.mu[b - 1])
            _add_constant_rows(system, lhs, {col[(a, b)]: coef}, ctx)
    # normalization at order z^p: sum_{i+j=p} (-1)^j <grad h_{a,i}, grad h_{b,j}> = 0
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            known = ctx.zero_poly()
            for i in range(1, p):
                j = p - i
                known = known + _pairing(data, h[(a, i)], h[(b, j)]).scale((-1) ** j)
            known = known + _pairing(data, particular[a], h[(b, 0)])
            known = known + _pairing(data, h[(a, 0)], particular[b]).scale((-1) ** p)
            # x-contributions: <x_a, grad h_{b,0}> = x_{a,b'} eta^{b'l} eta_{bl} = x_{a,b}
            row = {col[(a, b)]: Fraction(1)}
            key = col[(b, a)]
            row[key] = row.get(key, 0) + Fraction((-1) ** p)
            _add_constant_rows(system, known, row, ctx)
    try:
        sol = solve(system)
    except NoSolution:
        raise ResonantCalibration(f"no calibration at level {p}", level=p, dimension=0) from None
    if sol.free:
        raise ResonantCalibration(f"calibration constants at level {p} are not determined",
                                  level=p, dimension=len(sol.free))
    out = {}
    for a in range(1, n + 1):
        f = particular[a]
        for b in range(1, n + 1):
            x = sol.values[col[(a, b)]]
            if x:
                f = f + ctx.u(b).scale(_frac(x))
        out[(a, p)] = f
    return out


def _add_constant_rows(system: SparseSystem, poly: DiffPoly, unknown_row: dict, ctx: JetContext) -> None:
    """poly + (unknown_row . x) * [constant] == 0, split by monomial."""
    const_key = (ctx.no_grade, (), ())
    keys = set(poly.terms) | {const_key}
    for key in keys:
        c = poly.terms.get(key)
        val = -_frac(c.LC if hasattr(c, "LC") else c) if c is not None else Fraction(0)
        if key == const_key:
            system.add({j: v for j, v in unknown_row.items()}, val)
        elif val:
            system.add({}, val)


def _pairing(data: FrobeniusData, f: DiffPoly, g: DiffPoly) -> DiffPoly:
    """<grad f, grad g> = d_l f eta^{lm} d_m g."""
    out = data.ctx.zero_poly()
    for l in range(1, data.n + 1):
        fl = partial(f, even(l))
        if fl.is_zero():
            continue
        for m in range(1, data.n + 1):
            w = data.eta_inv[l - 1][m - 1]
            if w:
                out = out + (fl * partial(g, even(m))).scale(w)
    return out


def normalization_residual(cal: Calibration, a: int, b: int, order: int) -> DiffPoly:
    """Coefficient of z^order in <grad h_a(z), grad h_b(-z)> - eta_{ab}."""
    data = cal.data
    out = data.ctx.zero_poly()
    for i in range(order + 1):
        out = out + _pairing(data, cal.h[(a, i)], cal.h[(b, order - i)]).scale((-1) ** (order - i))
    if order == 0:
        out = out - data.ctx.const(data.eta[a - 1][b - 1])
    return out


def quasi_homogeneity_residual(cal: Calibration, a: int, b: int, p: int) -> DiffPoly:
    data = cal.data
    base = partial(cal.h[(a, p)], even(b))
    out = data.apply_E(base) - base.scale(p + data.mu[a - 1] + data.mu[b - 1])
    for k, Rk in enumerate(data.R, start=1):
        if k > p:
            break
        for g in range(1, data.n + 1):
            if Rk[g - 1][a - 1]:
                out = out - partial(cal.h[(g, p - k)], even(b)).scale(Rk[g - 1][a - 1])
    return out


# hierarchy ------------------------------------------------------------------------

def principal_flows(cal: Calibration, depth: int | None = None) -> dict:
    """X_{a,p} = int eta^{lg} dx(d_g h_{a,p+1}) sigma_l for p < calibration depth."""
    data = cal.data
    ctx = data.ctx
    top = cal.depth - 1 if depth is None else depth
    out = {}
    for a in range(1, data.n + 1):
        for p in range(top + 1):
            dens = ctx.zero_poly()
            for l in range(1, data.n + 1):
                for g in range(1, data.n + 1):
                    w = data.eta_inv[l - 1][g - 1]
                    if w:
                        dens = dens + (dx(partial(cal.h[(a, p + 1)], even(g))) * ctx.sigma(l)).scale(w)
            out[(a, p)] = LocalFunctional(dens)
    return out


def hamiltonians(cal: Calibration) -> dict:
    """H_{a,p} = int h_{a,p+1}."""
    return {(a, p): LocalFunctional(cal.h[(a, p + 1)]) for (a, p) in cal.h if p + 1 <= cal.depth}


def hydro_pair_densities(data: FrobeniusData):
    """Densities of P0 and P1 with g^{ab} = E^e c^{ab}_e and Gamma^{ab}_g = (1/2 - mu_b) c^{ab}_g."""
    ctx = data.ctx
    n = data.n
    E = data.E()
    p0 = ctx.zero_poly()
    p1 = ctx.zero_poly()
    for a in range(1, n + 1):
        for b in range(1, n + 1):
            if data.eta_inv[a - 1][b - 1]:
                p0 = p0 + (ctx.sigma(a) * ctx.sigma(b, 0, 1)).scale(data.eta_inv[a - 1][b - 1] / 2)
            g = ctx.zero_poly()
            for e in range(1, n + 1):
                g = g + E[e - 1] * data.c_up(a, b, e)
            p1 = p1 + (g * ctx.sigma(a) * ctx.sigma(b, 0, 1)).scale(Fraction(1, 2))
            for c in range(1, n + 1):
                gam = data.c_up(a, b, c).scale(Fraction(1, 2) - data.mu[b - 1])
                p1 = p1 + (gam * ctx.u(c, 1) * ctx.sigma(a) * ctx.sigma(b)).scale(Fraction(1, 2))
    return p0, p1


def biham_from_frobenius(data: FrobeniusData, max_level: int | None = None) -> BihamPair:
    p0, p1 = hydro_pair_densities(data)
    P0, P1 = LocalFunctional(p0), LocalFunctional(p1)
    Z = LocalFunctional(data.ctx.sigma(1))
    if schouten(Z, P1) != P0:
        raise ExactnessFailed("[int sigma_1, P1] != P0")
    return BihamPair(P0, P1, max_level=max_level)


def omega(cal: Calibration, a: int, p: int, b: int, q: int) -> DiffPoly:
    """Two-point function from (z1 + z2) Omega(z1, z2) = <grad h_a(z1), grad h_b(z2)> - eta_ab."""
    if p + q + 1 > cal.depth:
        raise ValueError(f"calibration depth {cal.depth} is too small for Omega at ({p},{q})")
    data = cal.data
    memo: dict = {}

    def G(i, j):
        return _pairing(data, cal.h[(a, i)], cal.h[(b, j)])

    def om(i, j):
        if j < 0:
            return data.ctx.zero_poly()
        if (i, j) not in memo:
            memo[(i, j)] = G(i + 1, j) - om(i + 1, j - 1)
        return memo[(i, j)]

    return om(p, q)


# super extension ---------------------------------------------------------------------

def gamma_up(data: FrobeniusData, a: int, b: int, g: int) -> DiffPoly:
    return data.c_up(a, b, g).scale(Fraction(1, 2) - data.mu[b - 1])


def super_principal(cal: Calibration, pair: BihamPair, depth: int | None = None) -> dict:
    """Closed-form flows d/dt^{b,p} and d/dtau_m on the extended ring of the undeformed pair."""
    data = cal.data
    ctx = pair.ctx
    n = data.n
    L = pair.max_level
    top = cal.depth - 1 if depth is None else depth
    flows = {}
    for b in range(1, n + 1):
        for p in range(top + 1):
            hb = cal.h[(b, p + 1)].with_context(ctx)
            images = {}
            for a in range(1, n + 1):
                va = ctx.zero_poly()
                for g in range(1, n + 1):
                    w = data.eta_inv[a - 1][g - 1]
                    if not w:
                        continue
                    for l in range(1, n + 1):
                        va = va + (partial(partial(hb, even(l)), even(g)) * ctx.u(l, 1)).scale(w)
                images[even(a)] = va
                for k in range(L + 1):
                    s = ctx.zero_poly()
                    for g in range(1, n + 1):
                        for e in range(1, n + 1):
                            w = data.eta_inv[g - 1][e - 1]
                            if w:
                                s = s + (partial(partial(hb, even(a)), even(e)) * ctx.sigma(g, k, 1)).scale(w)
                    images[odd(a, k)] = pair.reduce(s)
            flows[("t", b, p)] = EvolDerivation(images, 0, pair.reduce, name=f"d/dt^{b},{p}")
    for m in range(L + 1):
        images = {}
        for a in range(1, n + 1):
            va = ctx.zero_poly()
            for b in range(1, n + 1):
                w = data.eta_inv[a - 1][b - 1]
                if w:
                    va = va + ctx.sigma(b, m, 1).scale(w)
            images[even(a)] = pair.reduce(va)
            for k in range(L + 1):
                images[odd(a, k)] = pair.reduce(_gamma_sum(data, ctx, a, k, m))
        flows[("tau", m)] = EvolDerivation(images, 1, pair.reduce, name=f"d/dtau_{m}")
    return flows


def _gamma_sum(data: FrobeniusData, ctx: JetContext, a: int, k: int, m: int) -> DiffPoly:
    if k == m:
        return ctx.zero_poly()
    if k > m:
        return -_gamma_sum(data, ctx, a, m, k)
    out = ctx.zero_poly()
    n = data.n
    for g in range(1, n + 1):
        for b in range(1, n + 1):
            gam = gamma_up(data, g, b, a).with_context(ctx)
            if gam.is_zero():
                continue
            for i in range(m - k):
                out = out + gam * ctx.sigma(b, k + i) * ctx.sigma(g, m - i - 1, 1)
    return out


def phi_undeformed(cal: Calibration, alpha: int, p: int, m: int, pair: BihamPair | None = None) -> DiffPoly:
    """Phi^m_{a,p} from -(p - 1/2 + mu_a) Phi^m_{a,p} = (1/2 + mu_l) eta^{le} d_l h_{a,p} sigma_{e,m}
    + sum_k (R_k)^x_a Phi^m_{x,p-k} - Phi^{m+1}_{a,p-1}."""
    data = cal.data
    ctx = pair.ctx if pair is not None else data.ctx.extend(max_odd_level=m + p)
    memo: dict = {}

    def phi(a, q, lvl):
        key = (a, q, lvl)
        if key in memo:
            return memo[key]
        if q == 0:
            res = ctx.sigma(a, lvl)
        else:
            lam = Fraction(2 * q - 1, 2) + data.mu[a - 1]
            if lam == 0:
                raise ResonantSpectrum(f"mu_{a} = {-Fraction(2 * q - 1, 2)} blocks the recursion at p = {q}")
            rhs = ctx.zero_poly()
            h = cal.h[(a, q)].with_context(ctx)
            for l in range(1, data.n + 1):
                dl = partial(h, even(l))
                for e in range(1, data.n + 1):
                    w = data.eta_inv[l - 1][e - 1] * (Fraction(1, 2) + data.mu[l - 1])
                    if w:
                        rhs = rhs + (dl * ctx.sigma(e, lvl)).scale(w)
            for k, Rk in enumerate(data.R, start=1):
                if k > q:
                    break
                for x in range(1, data.n + 1):
                    if Rk[x - 1][a - 1]:
                        rhs = rhs + phi(x, q - k, lvl).scale(Rk[x - 1][a - 1])
            rhs = rhs - phi(a, q - 1, lvl + 1)
            res = rhs.scale(-1 / lam)
        memo[key] = res
        return res

    return phi(alpha, p, m)


# Virasoro operators -------------------------------------------------------------------

Var = tuple  # (alpha, p)


def _weyl_mul(m1, m2) -> dict:
    """(t^A d^B)(t^C d^D) in normal order; monomials are (t multiset, d multiset) as sorted tuples."""
    A, B = m1
    C, D = m2
    Bc, Cc = Counter(B), Counter(C)
    common = sorted(set(Bc) & set(Cc))
    out: dict = {}

    def rec(i, Bleft, Cleft, coef):
        if i == len(common):
            key = (tuple(sorted(A + tuple(Cleft.elements()))), tuple(sorted(tuple(Bleft.elements()) + D)))
            out[key] = out.get(key, 0) + coef
            return
        v = common[i]
        b, c = Bc[v], Cc[v]
        for k in range(min(b, c) + 1):
            Bn, Cn = Bleft.copy(), Cleft.copy()
            Bn[v] -= k
            Cn[v] -= k
            rec(i + 1, Bn, Cn, coef * comb(b, k) * comb(c, k) * factorial(k))

    rec(0, Bc, Cc, 1)
    return out


class QuadraticTauOperator:
    """Polynomial differential operator in the times, stored in normal order (t left, d right)."""

    def __init__(self, terms: dict | None = None, cutoff: int = 8):
        self.terms = {k: Fraction(v) for k, v in (terms or {}).items() if v}
        self.cutoff = cutoff

    # construction helpers
    def add(self, ts=(), ds=(), coef=1) -> None:
        key = (tuple(sorted(ts)), tuple(sorted(ds)))
        v = self.terms.get(key, 0) + Fraction(coef)
        if v:
            self.terms[key] = v
        else:
            self.terms.pop(key, None)

    def __add__(self, other):
        out = QuadraticTauOperator(dict(self.terms), min(self.cutoff, other.cutoff))
        for k, v in other.terms.items():
            out.add(*k, v)
        return out

    def scale(self, c) -> "QuadraticTauOperator":
        return QuadraticTauOperator({k: v * Fraction(c) for k, v in self.terms.items()}, self.cutoff)

    def __sub__(self, other):
        return self + other.scale(-1)

    def __mul__(self, other) -> "QuadraticTauOperator":
        out = QuadraticTauOperator({}, min(self.cutoff, other.cutoff))
        for k1, v1 in self.terms.items():
            for k2, v2 in other.terms.items():
                for k, c in _weyl_mul(k1, k2).items():
                    out.add(*k, v1 * v2 * c)
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, QuadraticTauOperator) and self.terms == other.terms

    def is_zero(self) -> bool:
        return not self.terms

    # accessors
    def a(self, i: Var, j: Var) -> Fraction:
        return self.terms.get(((), tuple(sorted((i, j)))), Fraction(0))

    def b(self, i: Var, j: Var) -> Fraction:
        """Coefficient of t_i d/dt_j."""
        return self.terms.get(((i,), (j,)), Fraction(0))

    def c(self, i: Var, j: Var) -> Fraction:
        return self.terms.get((tuple(sorted((i, j))), ()), Fraction(0))

    @property
    def scalar(self) -> Fraction:
        return self.terms.get(((), ()), Fraction(0))

    def max_index(self, key) -> int:
        return max((v[1] for part in key for v in part), default=0)

    def window(self, limit: int) -> dict:
        return {k: v for k, v in self.terms.items() if self.max_index(k) <= limit}

    def __str__(self) -> str:
        parts = []
        for (ts, ds), v in sorted(self.terms.items()):
            fac = [f"t{a}_{p}" for a, p in ts] + [f"d/dt{a}_{p}" for a, p in ds]
            parts.append(f"{v}" + ("*" + "*".join(fac) if fac else ""))
        return " + ".join(parts) if parts else "0"

    def to_json(self) -> list:
        out = []
        for (ts, ds), v in sorted(self.terms.items()):
            out.append({"t": [f"t{a}_{p}" for a, p in ts], "d": [f"t{a}_{p}" for a, p in ds],
                        "coeff": f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)})
        return out


def tau_op_commutator(A: QuadraticTauOperator, B: QuadraticTauOperator) -> QuadraticTauOperator:
    return A * B - B * A


def virasoro_L(data: FrobeniusData, m: int, cutoff: int = 8) -> QuadraticTauOperator:
    n = data.n
    mu = data.mu
    op = QuadraticTauOperator({}, cutoff)
    if m == -1:
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                if data.eta[a - 1][b - 1]:
                    op.add(((a, 0), (b, 0)), (), data.eta[a - 1][b - 1] / 2)
            for p in range(1, cutoff + 1):
                op.add(((a, p),), ((a, p - 1),), 1)
        return op
    if m == 2:
        if data.has_R():
            raise UnsupportedResonance("L_2 with a nonzero R needs constants that are not available")
        half = Fraction(1, 2)
        for a in range(1, n + 1):
            for b in range(1, n + 1):
                w = data.eta_inv[a - 1][b - 1]
                if w:
                    coef = w * (half + mu[b - 1]) * (half + mu[a - 1]) * (Fraction(3, 2) + mu[a - 1])
                    op.add((), ((a, 1), (b, 0)), coef)
            for p in range(0, cutoff - 1):
                x = p + half + mu[a - 1]
                op.add(((a, p),), ((a, p + 2),), x * (x + 1) * (x + 2))
        return op
    raise ValueError("only L_{-1} and L_2 are given explicitly; use virasoro_family for L_0, L_1")


def virasoro_family(data: FrobeniusData, cutoff: int = 8) -> dict:
    """L_{-1}, L_2 explicitly; L_1 = -1/3 [L_{-1}, L_2] and L_0 = -1/2 [L_{-1}, L_1]."""
    Lm1 = virasoro_L(data, -1, cutoff)
    L2 = virasoro_L(data, 2, cutoff)
    L1 = tau_op_commutator(Lm1, L2).scale(Fraction(-1, 3))
    L0 = tau_op_commutator(Lm1, L1).scale(Fraction(-1, 2))
    return {-1: Lm1, 0: L0, 1: L1, 2: L2}


SAFE_MARGIN = 4


def virasoro_closure(family: dict, cutoff: int) -> dict:
    """Residuals of [L_i, L_j] - (i-j) L_{i+j} on the truncation-safe window, keyed by (i, j)."""
    limit = cutoff - SAFE_MARGIN
    out = {}
    keys = sorted(family)
    for i in keys:
        for j in keys:
            if i >= j or i + j not in family:
                continue
            lhs = tau_op_commutator(family[i], family[j])
            res = lhs - family[i + j].scale(i - j)
            out[(i, j)] = res.window(limit)
    return out


def expected_L0_scalar(data: FrobeniusData) -> Fraction:
    """1/4 tr(1/4 - mu^2)."""
    return sum((Fraction(1, 4) - x * x for x in data.mu), Fraction(0)) / 4
