"""High-precision numerical oracle.

Everything here exists to check the exact engine, never to feed it:
zeta values through a convolution identity at 1/2, hyperlogarithms by
power series plus analytic continuation along the positive axis,
regularized limits at infinity by series matching, quadrature over the
positive orthant, and a bounded-denominator constant fitter.

All routines work at an explicit decimal precision with guard digits;
results are accurate to the requested digits unless stated otherwise.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import mpmath
from gmpy2 import mpq

from .errors import PolynomialGrowthError, UnresolvedConstantError

DEFAULT_DIGITS = 60


def _to_mpf(x):
    if isinstance(x, mpq) or isinstance(x, Fraction):
        return mpmath.mpf(int(x.numerator)) / mpmath.mpf(int(x.denominator))
    return mpmath.mpf(x)


# ---------------------------------------------------------------------------
# multiple zeta values

def _comp_to_word(comp):
    out = []
    for n in reversed(comp):
        out.extend([0] * (n - 1))
        out.append(1)
    return tuple(out)


def _word_blocks(w):
    """Outer-first exponents of a word ending in 1."""
    blocks = []
    run = 0
    for letter in w:
        if letter == 0:
            run += 1
        else:
            blocks.append(run + 1)
            run = 0
    return blocks


def _poly_log_half(word, terms):
    """Sum_{m1 > ... > mr >= 1} 2^{-m1} / (m1^{s1} ... mr^{sr}) for the
    outer-first exponents of `word` (may lead with 1s, must end in 1)."""
    if not word:
        return mpmath.mpf(1)
    s = _word_blocks(word)
    inner = [mpmath.mpf(1)] * (terms + 1)
    for si in reversed(s[1:]):
        acc = mpmath.mpf(0)
        nxt = [mpmath.mpf(0)] * (terms + 1)
        for m in range(1, terms + 1):
            nxt[m] = acc
            acc += inner[m] / mpmath.mpf(m) ** si
        inner = nxt
    half = mpmath.mpf(1) / 2
    total = mpmath.mpf(0)
    power = mpmath.mpf(1)
    for m in range(1, terms + 1):
        power *= half
        total += power * inner[m] / mpmath.mpf(m) ** s[0]
    return total


def eval_mzv(comp, digits: int = DEFAULT_DIGITS):
    """zeta(n_1, ..., n_k), innermost index first, accurate to `digits`.

    Evaluated through the convolution at 1/2: splitting the iterated
    integral at the midpoint turns the slowly convergent sum at 1 into
    two geometrically convergent sums."""
    comp = tuple(int(n) for n in comp)
    if not comp or comp[-1] < 2 or min(comp) < 1:
        raise ValueError(f"divergent zeta composition {comp}")
    w = _comp_to_word(comp)
    n = len(w)
    with mpmath.workdps(digits + 15):
        terms = int(digits * 3.33) + n * 4 + 20
        total = mpmath.mpf(0)
        for j in range(n + 1):
            left = tuple(1 - a for a in reversed(w[:j]))
            right = w[j:]
            total += _poly_log_half(left, terms) * _poly_log_half(right, terms)
        return +total


# ---------------------------------------------------------------------------
# hyperlogarithms of one variable

class _LogSeries:
    """Truncated expansion sum_{k,j} c[j][k] z^k log(z)^j about 0 (or in
    the variable u = 1/z about infinity)."""

    __slots__ = ("c",)

    def __init__(self, c):
        self.c = c  # list over j of coefficient lists over k

    @staticmethod
    def one(terms):
        return _LogSeries([[mpmath.mpf(1)] + [mpmath.mpf(0)] * (terms - 1)])

    def eval(self, z):
        z = _to_mpf(z)
        lg = mpmath.log(z)
        total = mpmath.mpf(0)
        logpow = mpmath.mpf(1)
        for j, row in enumerate(self.c):
            if j:
                logpow *= lg
            total += logpow * mpmath.polyval(row[::-1], z)
        return total


def _integrate_with_pole(rows, terms):
    """Antiderivative of sum c[j][k] z^{k-1} log^j z with zero constant
    term (the k = 0, j = j piece integrating to log^{j+1}/(j+1))."""
    out = [[mpmath.mpf(0)] * terms for _ in range(len(rows) + 1)]
    for j in range(len(rows) - 1, -1, -1):
        row = rows[j]
        out[j + 1][0] += row[0] / (j + 1)
        for k in range(1, terms):
            # integral of z^{k-1} log^j: z^k/k log^j - (j/k) * (previous)
            val = row[k]
            jj = j
            sign_coeff = val
            while True:
                out[jj][k] += sign_coeff / k
                if jj == 0:
                    break
                sign_coeff = -sign_coeff * jj / k
                jj -= 1
    while len(out) > 1 and all(x == 0 for x in out[-1]):
        out.pop()
    return out


def _series_about_zero(word, sigmas, terms):
    """Expansion of L_w about z = 0 with the vanishing-regularized
    constant; valid for |z| below the smallest nonzero |sigma|."""
    series = _LogSeries.one(terms)
    for letter in reversed(word):
        sigma = _to_mpf(sigmas[letter])
        rows = series.c
        if sigma == 0:
            integrand = [row[:] for row in rows]  # multiply by z^{-1}
            series = _LogSeries(_integrate_with_pole(integrand, terms))
        else:
            # 1/(z - sigma) = -(1/sigma) sum (z/sigma)^m
            conv = [[mpmath.mpf(0)] * terms for _ in rows]
            inv = -1 / sigma
            for j, row in enumerate(rows):
                for k in range(terms):
                    if row[k] == 0:
                        continue
                    scale = row[k] * inv
                    for m in range(k, terms):
                        conv[j][m] += scale
                        scale /= sigma
            # integrand currently lacks the 1/z pole: shift in
            shifted = [[mpmath.mpf(0)] * terms for _ in rows]
            for j, row in enumerate(conv):
                for k in range(terms - 1):
                    shifted[j][k + 1] = row[k]
            series = _LogSeries(_integrate_with_pole(shifted, terms))
    return series


def _suffix_values_by_series(word, sigmas, z, terms):
    vals = {(): mpmath.mpf(1)}
    for start in range(len(word) - 1, -1, -1):
        suf = word[start:]
        vals[suf] = _series_about_zero(suf, sigmas, terms).eval(z)
    return vals


def _taylor_step(word, sigmas, vals, z0, z1, order):
    """Advance the values of every suffix of `word` from z0 to z1 by
    Taylor recursion in t = z - z0."""
    coeffs = {(): [mpmath.mpf(1)] + [mpmath.mpf(0)] * order}
    for start in range(len(word) - 1, -1, -1):
        suf = word[start:]
        child = coeffs[suf[1:]]
        sigma = _to_mpf(sigmas[suf[0]])
        base = z0 - sigma
        # 1/(z - sigma) = sum_m (-1)^m t^m / base^{m+1}
        pole = [mpmath.mpf(0)] * (order + 1)
        p = 1 / base
        for m in range(order + 1):
            pole[m] = p
            p = -p / base
        cur = [mpmath.mpf(0)] * (order + 1)
        cur[0] = vals[suf]
        for m in range(order):
            deriv = mpmath.mpf(0)
            for l in range(m + 1):
                deriv += pole[m - l] * child[l]
            cur[m + 1] = deriv / (m + 1)
        coeffs[suf] = cur
    t = z1 - z0
    out = {}
    for suf, cs in coeffs.items():
        out[suf] = mpmath.polyval(cs[::-1], t)
    return out


def eval_hyperlog(word, sigmas, z, digits: int = DEFAULT_DIGITS):
    """L_w(z) for constant singularities, along the positive real axis.

    The path (0, z] must avoid singularities: letters with sigma > 0 are
    allowed only while z stays below the smallest positive sigma.
    """
    word = tuple(int(a) for a in word)
    if not word:
        return mpmath.mpf(1)
    with mpmath.workdps(digits + 15):
        z = _to_mpf(z)
        if z <= 0:
            raise ValueError("evaluation point must be positive")
        used = {sigmas[a] for a in word}
        pos = [(_to_mpf(s)) for s in used if _to_mpf(s) > 0]
        if pos and z >= min(pos):
            raise ValueError(
                f"path (0, {z}] hits the singularity at {min(pos)}")
        nonzero = [abs(_to_mpf(s)) for s in used if _to_mpf(s) != 0]
        terms = int(digits * 3.5) + 8 * len(word) + 30
        if not nonzero:
            # pure log letters
            return mpmath.log(z) ** len(word) / mpmath.factorial(len(word))
        radius = min(nonzero)
        if z <= radius / 2:
            return _series_about_zero(word, sigmas, terms).eval(z)
        z0 = radius / 2
        vals = _suffix_values_by_series(word, sigmas, z0, terms)
        order = int(digits * 3.5) + 30
        while z0 < z:
            z1 = min(z0 * mpmath.mpf(3) / 2, z)
            vals = _taylor_step(word, sigmas, vals, z0, z1, order)
            z0 = z1
        return +vals[word]


# ---------------------------------------------------------------------------
# regularized value at infinity, numerically

def numeric_reg_infinity(word, sigmas, digits: int = DEFAULT_DIGITS):
    """Reg_{z=infinity} L_w(z) numerically: the constant term of the
    expansion in 1/z, matched against direct evaluation at a moderate
    point.  Requires all singularities <= 0.

    Expansions in u = 1/z are built suffix by suffix; each integration
    constant is fixed by comparing the series against a direct
    evaluation before the parent series integrates it, so the stored
    series are the true expansions.  The constant of the full word is
    exactly the regularized value."""
    word = tuple(int(a) for a in word)
    if not word:
        return mpmath.mpf(1)
    with mpmath.workdps(digits + 15):
        if any(_to_mpf(sigmas[a]) > 0 for a in word):
            raise PolynomialGrowthError(
                "regularization at infinity needs nonpositive singularities")
        terms = int(digits * 3.5) + 8 * len(word) + 30
        sigma_max = max([abs(_to_mpf(sigmas[a])) for a in word]
                        + [mpmath.mpf(1)])
        ystar = 4 * sigma_max
        ustar = 1 / ystar
        series = {(): _LogSeries.one(terms)}
        for start in range(len(word) - 1, -1, -1):
            suf = word[start:]
            child = series[suf[1:]]
            sigma = _to_mpf(sigmas[suf[0]])
            rows = child.c
            # dG/du = -(1/u) * (sum_m (sigma u)^m) * child
            conv = [[mpmath.mpf(0)] * terms for _ in rows]
            for j, row in enumerate(rows):
                for k in range(terms):
                    if row[k] == 0:
                        continue
                    scale = -row[k]
                    for m in range(k, terms):
                        conv[j][m] += scale
                        scale *= sigma
            cur = _LogSeries(_integrate_with_pole(conv, terms))
            direct = eval_hyperlog(suf, sigmas, ystar, digits)
            const = direct - cur.eval(ustar)
            if start == 0:
                return +const
            cur.c[0][0] += const
            series[suf] = cur


# ---------------------------------------------------------------------------
# quadrature on the positive orthant

def quad_integrate(f, dim: int = 1, digits: int = 30):
    """Integral of f over (0, infinity)^dim via x = t/(1-t) and tanh-sinh
    panels; returns (value, error_estimate)."""
    with mpmath.workdps(digits + 10):
        one = mpmath.mpf(1)

        def wrap1(g):
            def h(t):
                x = t / (one - t)
                return g(x) / (one - t) ** 2
            return h

        if dim == 1:
            val, err = mpmath.quad(wrap1(f), [0, 1], error=True)
        elif dim == 2:
            def outer(t1):
                x1 = t1 / (one - t1)
                inner, _ = mpmath.quad(
                    wrap1(lambda x2: f(x1, x2)), [0, 1], error=True)
                return inner / (one - t1) ** 2
            val, err = mpmath.quad(outer, [0, 1], error=True)
        else:
            raise ValueError(f"unsupported dimension {dim}")
        return +val, +mpmath.mpf(err)


# ---------------------------------------------------------------------------
# constant fitting over a zeta basis

@dataclass
class FitResult:
    expr: object          # MZVExpr
    residual: object      # mpf
    certificate: str


def _rationalize(x, denom_bound):
    frac = Fraction(float(x)).limit_denominator(denom_bound)
    return mpq(frac.numerator, frac.denominator)


def fit_constant(value, weight: int, basis, denom_bound: int = 64,
                 digits: int = DEFAULT_DIGITS, coeff_bound: int = 64):
    """Match `value` by a rational combination of the given basis
    MZVExprs with denominators <= denom_bound.  Refuses to guess: raises
    when nothing fits or when two candidates fit.

    `basis` is a list of MZVExpr monomials (at most two for the weights
    this engine handles)."""
    from .mzv import MZVExpr
    with mpmath.workdps(digits + 15):
        value = _to_mpf(value)
        tol = mpmath.mpf(10) ** (18 - digits)
        if not basis:
            if abs(value) < tol:
                return FitResult(MZVExpr.rational(0), abs(value), "zero fit")
            raise UnresolvedConstantError(
                f"no basis supplied for nonzero value {mpmath.nstr(value, 20)}")
        nums = [b.numeric(digits) for b in basis]
        candidates = []
        if len(basis) == 1:
            target = value / nums[0]
            seen = set()
            for q in range(1, denom_bound + 1):
                p = int(mpmath.nint(target * q))
                c = mpq(p, q)
                if c in seen:
                    continue
                seen.add(c)
                resid = abs(value - _to_mpf(c) * nums[0])
                if resid < tol:
                    candidates.append(((c,), resid))
        elif len(basis) == 2:
            seen = set()
            for q1 in range(1, denom_bound + 1):
                center = value / nums[0]
                span = coeff_bound
                p_mid = int(mpmath.nint(center * q1))
                for p1 in range(p_mid - span, p_mid + span + 1):
                    c1 = mpq(p1, q1)
                    rest = (value - _to_mpf(c1) * nums[0]) / nums[1]
                    c2 = _rationalize(rest, denom_bound)
                    key = (c1, c2)
                    if key in seen:
                        continue
                    seen.add(key)
                    resid = abs(value - _to_mpf(c1) * nums[0]
                                - _to_mpf(c2) * nums[1])
                    if resid < tol:
                        candidates.append(((c1, c2), resid))
        else:
            raise UnresolvedConstantError(
                f"basis of size {len(basis)} not supported")
        if not candidates:
            raise UnresolvedConstantError(
                f"no rational fit at weight {weight} within denominator "
                f"bound {denom_bound} for {mpmath.nstr(value, 25)}")
        distinct = {tuple(c) for c, _ in candidates}
        if len(distinct) > 1:
            raise UnresolvedConstantError(
                f"ambiguous fit at weight {weight}: {sorted(distinct)}")
        coeffs, resid = candidates[0]
        expr = MZVExpr.rational(0)
        for c, b in zip(coeffs, basis):
            expr = expr + b * c
        cert = (f"fit weight={weight} coeffs={list(map(str, coeffs))} "
                f"residual={mpmath.nstr(resid, 5)} digits={digits}")
        return FitResult(expr, resid, cert)
