"""Symbolic hyperlogarithms over rational-function alphabets.

A hyperlogarithm L_w(v) is the iterated integral from 0 to v of the
forms dt/(t - sigma_i) along the letters of the word w, left letter
outermost, normalized so that every pure power of log v is dropped at
the basepoint (Reg at v = 0 is zero).  Here the singularities sigma_i
are rational functions of deeper variables, so the coefficients of an
expression live in rational functions and exact multiple-zeta
combinations.

The module provides the rewriting toolkit for integrating such
expressions over (0, infinity) one variable at a time:

* shuffle products (a HyperlogExpr is a ring),
* derivatives in the active variable and in deeper parameters,
* primitives in the active variable by partial fractions,
* regularized limits at 0 and at infinity,
* alphabet projection and the restricted limit at infinity,
* the regularized integral over (0, infinity).

All arithmetic is exact; numerics appear only inside the optional
constant-fitting fallback, which is logged with its certificate.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .errors import (AlphabetError, NotLinearError, PolarPartError,
                     PolynomialGrowthError, UnresolvedConstantError)
from . import mzv
from .mzv import MZV_ONE, MZV_ZERO, MZVExpr
from .polyring import (MultiPoly, RationalFunction, as_ratfun, factorize,
                       limit_to_zero, linear_split, rat, INFINITY)

logger = logging.getLogger(__name__)

Word = tuple[int, ...]

RF_ZERO = as_ratfun(0)
RF_ONE = as_ratfun(1)

shuffle = mzv.shuffle


# ---------------------------------------------------------------------------
# alphabets


@dataclass(frozen=True)
class Alphabet:
    """Ordered singularities (sigma_0 = 0 first, pairwise distinct) for
    words in one integration variable.  The letters may depend on deeper
    variables but never on the alphabet's own variable."""

    var: str
    sigmas: tuple[RationalFunction, ...]

    def __post_init__(self):
        sig = tuple(as_ratfun(s) for s in self.sigmas)
        object.__setattr__(self, "sigmas", sig)
        if not sig or not sig[0].is_zero():
            raise AlphabetError("alphabet must start with sigma_0 = 0")
        if len(set(sig)) != len(sig):
            raise AlphabetError(f"alphabet letters must be pairwise distinct: {self}")
        for s in sig:
            if self.var in s.variables():
                raise AlphabetError(
                    f"letter {s} depends on the alphabet variable {self.var}")

    def index_of(self, sigma) -> int | None:
        sigma = as_ratfun(sigma)
        for i, s in enumerate(self.sigmas):
            if s == sigma:
                return i
        return None

    def extended(self, sigma) -> tuple["Alphabet", int]:
        """Alphabet containing sigma (appending if new) and its index."""
        i = self.index_of(sigma)
        if i is not None:
            return self, i
        return Alphabet(self.var, self.sigmas + (as_ratfun(sigma),)), len(self.sigmas)

    def is_constant(self) -> bool:
        return all(s.is_constant() for s in self.sigmas)

    def __str__(self):
        return f"{self.var}: (" + ", ".join(str(s) for s in self.sigmas) + ")"


def _union_alphabet(a: Alphabet, b: Alphabet) -> tuple[Alphabet, tuple[int, ...]]:
    """Union of two alphabets of the same variable, plus the index remap
    that carries b-words into the union."""
    if a.var != b.var:
        raise AlphabetError(f"cannot merge alphabets of {a.var} and {b.var}")
    out = a
    remap = []
    for s in b.sigmas:
        out, i = out.extended(s)
        remap.append(i)
    return out, tuple(remap)


# ---------------------------------------------------------------------------
# terms and expressions


@dataclass(frozen=True)
class HyperlogTerm:
    """coeff (exact MZV combination) * ratfun * product of word factors,
    factors sorted by variable name."""

    coeff: MZVExpr
    ratfun: RationalFunction
    factors: tuple[tuple[str, Word], ...]

    def word(self, var: str) -> Word:
        for v, w in self.factors:
            if v == var:
                return w
        return ()

    def factor_dict(self) -> dict[str, Word]:
        return dict(self.factors)

    def weight(self) -> int:
        return self.coeff.max_weight() + sum(len(w) for _, w in self.factors)

    def __str__(self):
        parts = [f"({self.coeff})", f"({self.ratfun})"]
        for v, w in self.factors:
            parts.append(f"L[{v}; {' '.join(str(i) for i in w)}]")
        return " * ".join(parts)


class HyperlogExpr:
    """Canonical sum of hyperlogarithm terms over an ordered variable
    tuple (outermost integration variable first).

    Only syntactically equal (factors, ratfun) pairs merge; linear
    independence of distinct words is never assumed by the rewriting."""

    __slots__ = ("order", "alphabets", "terms")

    def __init__(self, order: Sequence[str],
                 alphabets: Mapping[str, Alphabet],
                 items: Iterable[tuple[MZVExpr, RationalFunction, Mapping[str, Word]]]):
        order = tuple(order)
        # canonical form: one term per (factors, zeta-basis word), rational
        # functions added up -- so equal expressions compare equal without
        # any linear-independence assumption on the hyperlog words
        acc: dict[tuple, RationalFunction] = {}
        used: set[str] = set()
        for coeff, rf, fac in items:
            if coeff.is_zero() or rf.is_zero():
                continue
            fac_t = tuple(sorted((v, tuple(w)) for v, w in fac.items() if w))
            for v, w in fac_t:
                if v not in alphabets:
                    raise AlphabetError(f"no alphabet for words in {v}")
                if any(i >= len(alphabets[v].sigmas) for i in w):
                    raise AlphabetError(f"word {w} outside the {v} alphabet")
                used.add(v)
            for zword, q in coeff.coeffs.items():
                key = (fac_t, zword)
                cur = acc.get(key)
                part = q * rf
                acc[key] = part if cur is None else cur + part
        terms = []
        for (fac_t, zword), rf in sorted(acc.items()):
            if rf.is_zero():
                continue
            terms.append(HyperlogTerm(MZVExpr._from_normal({zword: mpq(1)}),
                                      rf, fac_t))
        self.order = order
        self.alphabets = {v: a for v, a in alphabets.items() if v in used}
        self.terms = tuple(terms)

    # -- constructors ---------------------------------------------------

    @staticmethod
    def zero(order: Sequence[str] = ()) -> "HyperlogExpr":
        return HyperlogExpr(order, {}, [])

    @staticmethod
    def constant(value, order: Sequence[str] = ()) -> "HyperlogExpr":
        coeff, rf = _split_scalar(value)
        return HyperlogExpr(order, {}, [(coeff, rf, {})])

    @staticmethod
    def word(alphabet: Alphabet, w: Iterable[int],
             order: Sequence[str] | None = None) -> "HyperlogExpr":
        w = tuple(int(i) for i in w)
        if order is None:
            order = (alphabet.var,)
        return HyperlogExpr(order, {alphabet.var: alphabet},
                            [(MZV_ONE, RF_ONE, {alphabet.var: w})])

    # -- queries ----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant_value(self) -> bool:
        return all(not t.factors and t.ratfun.is_constant() for t in self.terms)

    def constant_value(self) -> MZVExpr:
        """The expression as an exact MZV combination (error if it still
        depends on a variable)."""
        out = MZV_ZERO
        for t in self.terms:
            if t.factors or not t.ratfun.is_constant():
                raise ValueError(f"not a constant: {self}")
            out = out + t.coeff * t.ratfun.const_value()
        return out

    def max_weight(self) -> int:
        return max((t.weight() for t in self.terms), default=0)

    # -- arithmetic -------------------------------------------------------

    def _coerced(self, other) -> "HyperlogExpr | None":
        if isinstance(other, HyperlogExpr):
            return other
        try:
            return HyperlogExpr.constant(other, self.order)
        except TypeError:
            return None

    def __add__(self, other):
        other = self._coerced(other)
        if other is None:
            return NotImplemented
        a, b = _align_orders(self, other)
        alphabets, terms_a, terms_b = _unify_alphabets(a, b)
        items = [(t.coeff, t.ratfun, t.factor_dict()) for t in terms_a]
        items += [(t.coeff, t.ratfun, t.factor_dict()) for t in terms_b]
        return HyperlogExpr(a.order, alphabets, items)

    __radd__ = __add__

    def __neg__(self):
        return HyperlogExpr(self.order, self.alphabets,
                            [(-t.coeff, t.ratfun, t.factor_dict())
                             for t in self.terms])

    def __sub__(self, other):
        other = self._coerced(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerced(other)
        if other is None:
            return NotImplemented
        a, b = _align_orders(self, other)
        alphabets, terms_a, terms_b = _unify_alphabets(a, b)
        items = []
        for t1 in terms_a:
            f1 = t1.factor_dict()
            for t2 in terms_b:
                f2 = t2.factor_dict()
                coeff = t1.coeff * t2.coeff
                rf = t1.ratfun * t2.ratfun
                pieces: list[tuple[dict, int]] = [({}, 1)]
                for v in set(f1) | set(f2):
                    w1, w2 = f1.get(v, ()), f2.get(v, ())
                    if w1 and w2:
                        merged = mzv.shuffle(w1, w2)
                    else:
                        merged = {w1 or w2: 1}
                    pieces = [(dict(d, **{v: w}), m * c)
                              for d, m in pieces for w, c in merged.items()]
                for d, m in pieces:
                    items.append((coeff * m, rf, d))
        return HyperlogExpr(a.order, alphabets, items)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, (int, mpq)):
            return self * as_ratfun(mpq(1) / rat(other))
        if isinstance(other, (RationalFunction, MultiPoly)):
            return self * as_ratfun(other).inverse()
        return NotImplemented

    def __eq__(self, other):
        coerced = self._coerced(other)
        if coerced is None:
            return NotImplemented
        return (self - coerced).is_zero()

    def __hash__(self):
        return hash((self.order, self.terms))

    def __str__(self):
        if not self.terms:
            return "0"
        body = " + ".join(str(t) for t in self.terms)
        if self.alphabets:
            alph = "; ".join(str(self.alphabets[v]) for v in sorted(self.alphabets))
            return f"{body}  [{alph}]"
        return body

    def __repr__(self):
        return f"HyperlogExpr({self})"


def _split_scalar(value) -> tuple[MZVExpr, RationalFunction]:
    if isinstance(value, MZVExpr):
        return value, RF_ONE
    if isinstance(value, (RationalFunction, MultiPoly)):
        return MZV_ONE, as_ratfun(value)
    if isinstance(value, (int, mpq)):
        return MZVExpr.rational(value), RF_ONE
    raise TypeError(f"cannot build a hyperlog constant from {type(value)!r}")


def _align_orders(a: HyperlogExpr, b: HyperlogExpr) -> tuple[HyperlogExpr, HyperlogExpr]:
    """Common variable order: equal, or one order a suffix of the other
    (an expression over the deeper variables lifts outward)."""
    if a.order == b.order:
        return a, b
    if len(a.order) >= len(b.order) and a.order[len(a.order) - len(b.order):] == b.order:
        return a, _with_order(b, a.order)
    if len(b.order) > len(a.order) and b.order[len(b.order) - len(a.order):] == a.order:
        return _with_order(a, b.order), b
    raise ValueError(f"incompatible variable orders {a.order} and {b.order}")


def _with_order(e: HyperlogExpr, order: Sequence[str]) -> HyperlogExpr:
    order = tuple(order)
    for v in e.alphabets:
        if v not in order:
            raise ValueError(f"order {order} drops variable {v}")
    return HyperlogExpr(order, e.alphabets,
                        [(t.coeff, t.ratfun, t.factor_dict()) for t in e.terms])


def _unify_alphabets(a: HyperlogExpr, b: HyperlogExpr):
    """Shared alphabet dict plus both term lists with b's words reindexed
    into the union alphabets."""
    alphabets = dict(a.alphabets)
    remaps: dict[str, tuple[int, ...]] = {}
    for v, beta in b.alphabets.items():
        if v in alphabets:
            alphabets[v], remaps[v] = _union_alphabet(alphabets[v], beta)
        else:
            alphabets[v] = beta
    terms_b = []
    for t in b.terms:
        fac = {}
        for v, w in t.factors:
            remap = remaps.get(v)
            fac[v] = tuple(remap[i] for i in w) if remap else w
        terms_b.append(HyperlogTerm(t.coeff, t.ratfun, tuple(sorted(fac.items()))))
    return alphabets, a.terms, tuple(terms_b)


def _active(e: HyperlogExpr, v: str | None) -> str:
    if not e.order:
        raise ValueError("expression has no integration variables left")
    if v is None:
        return e.order[0]
    if v != e.order[0]:
        raise ValueError(f"active variable is {e.order[0]}, not {v}")
    return v


def _pole_rf(v: str, sigma: RationalFunction) -> RationalFunction:
    """1/(v - sigma) as a rational function."""
    num = sigma.den
    den = MultiPoly.var(v) * sigma.den - sigma.num
    return RationalFunction(num, den)


# ---------------------------------------------------------------------------
# derivatives


def diff_active(e: HyperlogExpr, v: str | None = None) -> HyperlogExpr:
    """d/dv with v the active (outermost) variable: the ratfun derivative
    plus peeling the outer letter of the v-word."""
    v = _active(e, v)
    items = []
    for t in e.terms:
        fac = t.factor_dict()
        df = t.ratfun.diff(v)
        if not df.is_zero():
            items.append((t.coeff, df, fac))
        w = fac.get(v, ())
        if w:
            sigma = e.alphabets[v].sigmas[w[0]]
            rest = dict(fac)
            rest[v] = w[1:]
            items.append((t.coeff, t.ratfun * _pole_rf(v, sigma), rest))
    return HyperlogExpr(e.order, e.alphabets, items)


_DLOG_MEMO: dict = {}


def _dlog_param(alphabet: Alphabet, w: Word, x: str,
                order: tuple[str, ...]) -> HyperlogExpr:
    """d/dx of the single hyperlogarithm L_w(u) whose letters depend on
    the deeper variable x; u = alphabet.var = order[0].  Zero at u = 0
    like the function itself."""
    key = (alphabet, w, x, order)
    hit = _DLOG_MEMO.get(key)
    if hit is not None:
        return hit
    u = alphabet.var
    sigma = alphabet.sigmas[w[0]]
    ds = sigma.diff(x)
    if len(w) == 1:
        if ds.is_zero():
            res = HyperlogExpr.zero(order)
        else:
            # d/dx [log(u - sigma) - log(-sigma)]
            rf = -ds * _pole_rf(u, sigma) - ds / sigma
            res = HyperlogExpr(order, {}, [(MZV_ONE, rf, {})])
    else:
        tail = w[1:]
        items = []
        if not ds.is_zero():
            # d/dx 1/(u - sigma) = sigma' / (u - sigma)^2
            items.append((MZV_ONE, ds * _pole_rf(u, sigma) ** 2, {u: tail}))
        inner = _dlog_param(alphabet, tail, x, order)
        pole = HyperlogExpr(order, {alphabet.var: alphabet},
                            [(MZV_ONE, _pole_rf(u, sigma), {})])
        combined = HyperlogExpr(order, {alphabet.var: alphabet}, items) \
            + pole * inner
        res = primitive(combined, u)
    _DLOG_MEMO[key] = res
    return res


def diff_param(e: HyperlogExpr, x: str) -> HyperlogExpr:
    """d/dx for any variable x of the order: full product rule over the
    rational part and every word factor (active letter peeling when the
    factor's own variable is x, parametric recursion when its alphabet
    depends on x)."""
    if x not in e.order:
        raise ValueError(f"{x} is not one of the variables {e.order}")
    out = HyperlogExpr.zero(e.order)
    items = []
    for t in e.terms:
        fac = t.factor_dict()
        df = t.ratfun.diff(x)
        if not df.is_zero():
            items.append((t.coeff, df, fac))
        for var, w in t.factors:
            if var == x:
                sigma = e.alphabets[var].sigmas[w[0]]
                rest = dict(fac)
                rest[var] = w[1:]
                items.append((t.coeff, t.ratfun * _pole_rf(var, sigma), rest))
                continue
            alpha = e.alphabets[var]
            if not any(x in s.variables() for s in alpha.sigmas):
                continue
            rest = dict(fac)
            del rest[var]
            base = HyperlogExpr(e.order, e.alphabets, [(t.coeff, t.ratfun, rest)])
            sub_order = e.order[e.order.index(var):]
            out = out + base * _dlog_param(alpha, w, x, sub_order)
    return out + HyperlogExpr(e.order, e.alphabets, items)


# ---------------------------------------------------------------------------
# primitives in the active variable


def _partial_fractions(f: RationalFunction, v: str):
    """f as polynomial part plus simple-pole pieces in v:
    ([(k, coeff)], [(sigma, k, coeff)]) with coefficients free of v.
    Raises NotLinearError when a v-denominator factor is not linear."""
    den = f.den
    if den.degree_in(v) == 0:
        num = f.num
        polys = []
        for k in range(num.degree_in(v) + 1):
            c = num.coeff_of_power(v, k)
            if not c.is_zero():
                polys.append((k, RationalFunction(c, den)))
        return polys, []
    poles = []
    rf_v = RationalFunction.var(v)
    remainder = f
    for p, m in factorize(den):
        if v not in p.variables:
            continue
        if not p.is_linear_in(v):
            raise NotLinearError(
                f"denominator factor {p} is not linear in {v}")
        g, h = linear_split(p, v)
        sigma = RationalFunction(-h, g)
        # r = f * (v - sigma)^m, regular at sigma
        r = f * RationalFunction(p, g) ** m
        fact = 1
        for j in range(m):
            # c_{m-j} = (d/dv)^j r at sigma / j!
            c = r.subs(v, sigma) / fact
            if not c.is_zero():
                poles.append((sigma, m - j, c))
                remainder = remainder - c * (rf_v - sigma) ** (j - m)
            if j + 1 < m:
                r = r.diff(v)
                fact *= (j + 1)
    if remainder.den.degree_in(v) != 0:
        raise NotLinearError(
            f"partial fractions left a v-dependent denominator: {remainder}")
    num = remainder.num
    polys = []
    for k in range(num.degree_in(v) + 1):
        c = num.coeff_of_power(v, k)
        if not c.is_zero():
            polys.append((k, RationalFunction(c, remainder.den)))
    return polys, poles


def _prim_power(alpha: Alphabet, k: int, w: Word, v: str):
    """A primitive of v^k * L_w(v): list of (ratfun-in-v, word) pieces
    (normalization handled by the caller)."""
    vp = RationalFunction.var(v)
    if not w:
        return [(vp ** (k + 1) / (k + 1), ())]
    out = [(vp ** (k + 1) / (k + 1), w)]
    sigma = alpha.sigmas[w[0]]
    tail = w[1:]
    scale = mpq(-1, k + 1)
    if sigma.is_zero():
        for rf, word in _prim_power(alpha, k, tail, v):
            out.append((scale * rf, word))
        return out
    # v^{k+1}/(v - sigma) = sum_j sigma^{k-j} v^j + sigma^{k+1}/(v - sigma)
    for j in range(k + 1):
        c = sigma ** (k - j)
        for rf, word in _prim_power(alpha, j, tail, v):
            out.append((scale * c * rf, word))
    c = sigma ** (k + 1)
    for rf, word in _prim_pole(alpha, w[0], 1, tail, v):
        out.append((scale * c * rf, word))
    return out


def _prim_pole(alpha: Alphabet, idx: int, k: int, w: Word, v: str):
    """A primitive of L_w(v) / (v - sigma_idx)^k, as pieces."""
    sigma = alpha.sigmas[idx]
    if k == 1:
        return [(RF_ONE, (idx,) + w)]
    vp = RationalFunction.var(v)
    out = [((vp - sigma) ** (1 - k) * mpq(-1, k - 1), w)]
    if not w:
        return out
    head, tail = w[0], w[1:]
    scale = mpq(1, k - 1)
    if head == idx:
        for rf, word in _prim_pole(alpha, idx, k, tail, v):
            out.append((scale * rf, word))
        return out
    delta = alpha.sigmas[head] - sigma
    # 1/((v-s)^{k-1}(v-s_h)) = B/(v-s_h) + sum_m A_m/(v-s)^m
    b = delta ** (1 - k)
    for rf, word in _prim_pole(alpha, head, 1, tail, v):
        out.append((scale * b * rf, word))
    for m in range(1, k):
        a = -(delta ** (m - k))
        for rf, word in _prim_pole(alpha, idx, m, tail, v):
            out.append((scale * a * rf, word))
    return out


def primitive(e: HyperlogExpr, v: str | None = None) -> HyperlogExpr:
    """Primitive in the active variable, normalized so the regularized
    value at v = 0 vanishes.  Partial fractions in v map 1/(v - sigma)
    onto new letters (the alphabet extends as needed); nonnegative
    powers integrate by parts.  Weight grows by at most one."""
    v = _active(e, v)
    alpha = e.alphabets.get(v, Alphabet(v, (RF_ZERO,)))
    items = []
    for t in e.terms:
        fac = t.factor_dict()
        w = fac.pop(v, ())
        polys, poles = _partial_fractions(t.ratfun, v)
        for k, c in polys:
            for rf, word in _prim_power(alpha, k, w, v):
                items.append((t.coeff, c * rf, dict(fac, **{v: word})))
        for sigma, k, c in poles:
            alpha, idx = alpha.extended(sigma)
            for rf, word in _prim_pole(alpha, idx, k, w, v):
                items.append((t.coeff, c * rf, dict(fac, **{v: word})))
    raw = HyperlogExpr(e.order, dict(e.alphabets, **{v: alpha}), items)
    const = reg_at_zero(raw, v)
    return raw - _with_order(const, e.order)


# ---------------------------------------------------------------------------
# expansion at v = 0 and the regularized value there


_SERIES_MEMO: dict = {}


def _word_series(alpha: Alphabet, w: Word, n: int) -> dict[tuple[int, int], RationalFunction]:
    """Expansion of L_w(v) about v = 0 through order v^n:
    {(k, j): coeff} for coeff * v^k * log(v)^j / 1."""
    key = (alpha, w, n)
    hit = _SERIES_MEMO.get(key)
    if hit is not None:
        return hit
    if not w:
        out = {(0, 0): RF_ONE}
        _SERIES_MEMO[key] = out
        return out
    child = _word_series(alpha, w[1:], n)
    out: dict[tuple[int, int], RationalFunction] = {}

    def integrate(k: int, j: int, c: RationalFunction):
        # primitive of c * v^{k-1} * log^j v  (no constant: Reg at 0 is 0)
        if k == 0:
            _acc(out, (0, j + 1), c / (j + 1))
            return
        fall = mpq(1)
        sign = mpq(1, k)
        for m in range(j + 1):
            _acc(out, (k, j - m), c * sign * fall)
            fall *= (j - m)
            sign = -sign / k
    i = w[0]
    if i == 0:
        for (k, j), c in child.items():
            if k <= n:
                integrate(k, j, c)
    else:
        sigma = alpha.sigmas[i]
        inv = sigma.inverse()
        for (k, j), c in child.items():
            power = -inv
            for m in range(0, n - k):
                integrate(k + m + 1, j, c * power)
                power = power * inv
    _SERIES_MEMO[key] = out
    return out


def _acc(d: dict, key, val):
    cur = d.get(key)
    d[key] = val if cur is None else cur + val


def _min_power(p: MultiPoly, v: str) -> int:
    if v not in p.variables:
        return 0
    i = p.variables.index(v)
    return min(e[i] for e in p.terms)


def _ratfun_series(f: RationalFunction, v: str, lo: int, hi: int):
    """Laurent coefficients {k: RF} of f in v for lo <= k <= hi."""
    p = _min_power(f.den, v)
    q = _min_power(f.num, v)
    if q - p > hi:
        return {}
    # f = v^(q-p) * (num/v^q) / (den/v^p); both series start at k = 0
    num_c = [f.num.coeff_of_power(v, q + k) for k in range(hi - (q - p) + 1)]
    den_c = [f.den.coeff_of_power(v, p + k) for k in range(hi - (q - p) + 1)]
    d0 = RationalFunction(den_c[0])
    series = []
    for k in range(len(num_c)):
        c = RationalFunction(num_c[k])
        for i in range(k):
            c = c - series[i] * den_c[k - i]
        series.append(c / d0)
    out = {}
    for k, c in enumerate(series):
        shift = k + q - p
        if lo <= shift <= hi and not c.is_zero():
            out[shift] = c
    return out


def _laurent_groups(e: HyperlogExpr, v: str):
    """Coefficients of v^t * log^j v for t <= 0, exactly, grouped by the
    non-v factors: {rest_factors: {(t, j): {mzv_word: RF}}}."""
    alpha = e.alphabets.get(v, Alphabet(v, (RF_ZERO,)))
    groups: dict[tuple, dict] = {}
    for t in e.terms:
        fac = t.factor_dict()
        w = fac.pop(v, ())
        rest = tuple(sorted(fac.items()))
        depth = max(0, _min_power(t.ratfun.den, v) - _min_power(t.ratfun.num, v))
        f_series = _ratfun_series(t.ratfun, v, -depth, 0)
        if not f_series:
            continue
        w_series = _word_series(alpha, w, depth)
        bucket = groups.setdefault(rest, {})
        for kf, cf in f_series.items():
            for (ks, j), cs in w_series.items():
                tt = kf + ks
                if tt > 0:
                    continue
                prod = cf * cs
                cell = bucket.setdefault((tt, j), {})
                for mzv_word, q in t.coeff.coeffs.items():
                    _acc(cell, mzv_word, q * prod)
    return groups


def reg_at_zero(e: HyperlogExpr, v: str | None = None) -> HyperlogExpr:
    """Regularized value at v = 0: expand in v and log v, require no
    polar part (PolarPartError otherwise), keep the (v^0, log^0)
    coefficient; pure log powers are regularized to zero."""
    v = _active(e, v)
    groups = _laurent_groups(e, v)
    items = []
    for rest, bucket in groups.items():
        for (tt, j), cell in sorted(bucket.items()):
            total = {wd: rf for wd, rf in cell.items() if not rf.is_zero()}
            if not total:
                continue
            if tt < 0:
                raise PolarPartError(
                    f"polar part v^{tt} log^{j} with coefficient "
                    f"{ {str(k): str(r) for k, r in total.items()} } at {v}=0")
            if tt == 0 and j == 0:
                for mzv_word, rf in total.items():
                    items.append((MZVExpr._from_normal({mzv_word: mpq(1)}),
                                  rf, dict(rest)))
    alphabets = {u: a for u, a in e.alphabets.items() if u != v}
    return HyperlogExpr(e.order[1:], alphabets, items)


# ---------------------------------------------------------------------------
# regularized limits at infinity


_RHO_MEMO: dict = {}


def _mzv_monomial_basis(weight: int) -> list[MZVExpr]:
    """Monomials in the zeta generators of total weight `weight`."""
    gens = [(2, mzv.zeta(2)), (3, mzv.zeta(3)), (5, mzv.zeta(5))]
    out = []

    def rec(i: int, left: int, acc: MZVExpr):
        if left == 0:
            out.append(acc)
            return
        if i == len(gens):
            return
        wt, z = gens[i]
        rec(i + 1, left, acc)
        if left >= wt:
            rec(i, left - wt, acc * z)
    rec(0, weight, MZV_ONE)
    return out


def _rho_constant(alpha: Alphabet, w: Word) -> MZVExpr:
    """Regularized value at infinity of L_w over a constant alphabet."""
    vals = {i: alpha.sigmas[i].const_value() for i in set(w)}
    if all(val in (0, -1) for val in vals.values()):
        mapped = tuple(0 if vals[i] == 0 else 1 for i in w)
        return mzv.reg_infinity_word(mapped)
    if any(val > 0 for val in vals.values()):
        raise UnresolvedConstantError(
            f"positive singularity {vals} blocks the limit at infinity")
    from . import numeric
    sig = [alpha.sigmas[i].const_value() if i in vals else mpq(0)
           for i in range(len(alpha.sigmas))]
    value = numeric.numeric_reg_infinity(w, sig, digits=60)
    fit = numeric.fit_constant(value, len(w), _mzv_monomial_basis(len(w)),
                               denom_bound=64, digits=60)
    logger.info("constant-alphabet limit fit: word=%s sigmas=%s -> %s (%s)",
                w, [str(s) for s in sig], fit.expr, fit.certificate)
    return fit.expr


def _rho(alpha: Alphabet, w: Word, rest_order: tuple[str, ...]) -> HyperlogExpr:
    """Regularized value at infinity of the single word L_w(v), as an
    expression over the remaining variables."""
    if not w:
        return HyperlogExpr.constant(1, rest_order)
    key = (alpha, w, rest_order)
    hit = _RHO_MEMO.get(key)
    if hit is not None:
        return hit
    used_const = all(alpha.sigmas[i].is_constant() for i in set(w))
    if used_const:
        res = HyperlogExpr.constant(_rho_constant(alpha, w), rest_order)
    else:
        if not rest_order:
            raise AlphabetError(
                f"letters {w} still depend on unknown variables at the last stage")
        x = rest_order[0]
        v = alpha.var
        word_e = HyperlogExpr.word(alpha, w, (v,) + rest_order)
        d = diff_param(word_e, x)
        rd = reg_at_infinity(d, v)
        p = primitive(rd, x)
        c = _corner(alpha, w, rest_order)
        res = p + _with_order(c, rest_order)
    _RHO_MEMO[key] = res
    return res


def _corner(alpha: Alphabet, w: Word, rest_order: tuple[str, ...]) -> HyperlogExpr:
    """Iterated corner: regularized x -> 0 limit of the regularized
    v -> infinity limit, by degenerating the alphabet one variable at a
    time.  A letter escaping to infinity kills the word.  A letter
    collapsing onto the basepoint (sigma -> 0 for a non-a0 letter) kills
    the word when it sits innermost — the collapsed lower-boundary factor
    carries regularized value zero — and otherwise merges into a0."""
    x = rest_order[0]
    lims: dict[int, RationalFunction] = {}
    for i in set(w):
        lv = limit_to_zero(alpha.sigmas[i], x)
        if lv is INFINITY:
            return HyperlogExpr.zero(rest_order[1:])
        lims[i] = lv
    last = w[-1]
    if last != 0 and lims[last].is_zero():
        return HyperlogExpr.zero(rest_order[1:])
    sigmas: list[RationalFunction] = [RF_ZERO]
    mapped = []
    for i in w:
        s = lims[i]
        if s not in sigmas:
            sigmas.append(s)
        mapped.append(sigmas.index(s))
    new_alpha = Alphabet(alpha.var, tuple(sigmas))
    return _rho(new_alpha, tuple(mapped), rest_order[1:])


def corner_constant(alphabet: Alphabet, w: Iterable[int],
                    order: Sequence[str]) -> MZVExpr:
    """The iterated regularized limit Reg_{x_n=0}...Reg_{x_1=0}
    Reg_{v=infinity} L_w(v) as an exact MZV combination."""
    e = _corner(alphabet, tuple(int(i) for i in w), tuple(order))
    return e.constant_value()


def reg_at_infinity(e: HyperlogExpr, v: str | None = None) -> HyperlogExpr:
    """Regularized limit at v = infinity (log-regularized constant term).

    Rational prefactors keep their leading ratio (polynomial growth is an
    error, decay drops the term); v-words reduce by the descent: constant
    alphabets read the closed-form table, parameter-dependent ones
    differentiate in the next variable, regularize the lower-weight
    result, take a primitive back, and fix the constant at the corner."""
    v = _active(e, v)
    rest_order = e.order[1:]
    out = HyperlogExpr.zero(rest_order)
    alpha = e.alphabets.get(v, Alphabet(v, (RF_ZERO,)))
    rest_alphabets = {u: a for u, a in e.alphabets.items() if u != v}
    for t in e.terms:
        dn = t.ratfun.num.degree_in(v)
        dd = t.ratfun.den.degree_in(v)
        if dn > dd:
            raise PolynomialGrowthError(
                f"term grows like {v}^{dn - dd} at infinity: {t}")
        if dn < dd:
            continue
        f_inf = RationalFunction(t.ratfun.num.coeff_of_power(v, dn),
                                 t.ratfun.den.coeff_of_power(v, dd))
        fac = t.factor_dict()
        w = fac.pop(v, ())
        base = HyperlogExpr(rest_order, rest_alphabets, [(t.coeff, f_inf, fac)])
        out = out + base * _rho(alpha, w, rest_order)
    return out


def project_alphabet(e: HyperlogExpr, target: Alphabet) -> HyperlogExpr:
    """Kill every term whose word in target.var uses a letter outside the
    target alphabet; reindex the survivors.  A shuffle homomorphism."""
    v = target.var
    source = e.alphabets.get(v)
    if source is None:
        return e
    remap: list[int | None] = [target.index_of(s) for s in source.sigmas]
    items = []
    for t in e.terms:
        fac = t.factor_dict()
        w = fac.get(v, ())
        if w:
            if any(remap[i] is None for i in w):
                continue
            fac[v] = tuple(remap[i] for i in w)
        items.append((t.coeff, t.ratfun, fac))
    alphabets = dict(e.alphabets)
    alphabets[v] = target
    return HyperlogExpr(e.order, alphabets, items)


def restricted_reg_infinity(e: HyperlogExpr, v: str | None = None,
                            alphabets: Iterable[Alphabet] = ()) -> HyperlogExpr:
    """reg_at_infinity followed by projection onto each remaining
    variable's declared singularity alphabet."""
    out = reg_at_infinity(e, v)
    by_var = {a.var: a for a in alphabets}
    for u in reversed(out.order):
        if u in by_var:
            out = project_alphabet(out, by_var[u])
    return out


def regularized_integral(e: HyperlogExpr, v: str | None = None,
                         alphabets: Iterable[Alphabet] = ()) -> HyperlogExpr:
    """Integral over v in (0, infinity): the restricted regularized limit
    at infinity of the zero-normalized primitive (whose regularized value
    at 0 vanishes by construction)."""
    v = _active(e, v)
    f = primitive(e, v)
    return restricted_reg_infinity(f, v, alphabets)


# ---------------------------------------------------------------------------
# logarithms of polynomials as weight-one expressions


def log_as_expr(p, order: Sequence[str]) -> HyperlogExpr:
    """log of a polynomial or rational function as a combination of
    weight-one hyperlogarithms along the variable order, using
    log(g*x + h) = L_sigma(x) + log(h) with sigma = -h/g (exact on the
    positive orthant for the positive coefficients this engine meets).
    The innermost constant must be 1, else the log is no MZV and an
    UnresolvedConstantError is raised."""
    order = tuple(order)
    rf = as_ratfun(p)
    return _log_poly(rf.num, order) - _log_poly(rf.den, order)


def _log_poly(p: MultiPoly, order: tuple[str, ...]) -> HyperlogExpr:
    if p.is_zero():
        raise ValueError("log of zero")
    if p.is_constant():
        c = p.const_value()
        if c == 1:
            return HyperlogExpr.zero(order)
        raise UnresolvedConstantError(f"log({c}) is not a multiple zeta value")
    for x in order:
        if x in p.variables:
            break
    else:
        raise ValueError(f"polynomial variables {p.variables} not in order {order}")
    if not p.is_linear_in(x):
        raise NotLinearError(f"{p} is not linear in {x}")
    g, h = linear_split(p, x)
    sub_order = order[order.index(x):]
    if h.is_zero():
        # log(g*x) = log(x) + log(g)
        alpha = Alphabet(x, (RF_ZERO,))
        le = HyperlogExpr.word(alpha, (0,), sub_order)
        rest = _log_poly(g, sub_order[1:])
    else:
        # log(g*x + h) = L_sigma(x) + log(h), sigma = -h/g
        sigma = RationalFunction(-h, g)
        alpha = Alphabet(x, (RF_ZERO, sigma))
        le = HyperlogExpr.word(alpha, (1,), sub_order)
        rest = _log_poly(h, sub_order[1:])
    return _with_order(le + rest, order)


# ---------------------------------------------------------------------------
# numeric evaluation (test support)


def expr_numeric(e: HyperlogExpr, point: Mapping[str, object], digits: int = 40):
    """Evaluate at positive rational coordinates via the numeric module."""
    from . import numeric
    import mpmath
    with mpmath.workdps(digits + 10):
        total = mpmath.mpf(0)
        rat_point = {v: rat(x) for v, x in point.items()}
        for t in e.terms:
            val = t.coeff.numeric(digits)
            r = t.ratfun.eval_rational(rat_point)
            val *= mpmath.mpf(int(r.numerator)) / mpmath.mpf(int(r.denominator))
            for var, w in t.factors:
                alpha = e.alphabets[var]
                sig = []
                for s in alpha.sigmas:
                    sv = s.eval_rational(rat_point) if s.variables() else s.const_value()
                    sig.append(sv)
                val *= numeric.eval_hyperlog(w, sig, rat_point[var], digits)
            total += val
        return +total
