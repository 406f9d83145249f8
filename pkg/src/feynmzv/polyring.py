"""Exact multivariate polynomial and rational-function arithmetic over Q.

Polynomials are stored sparsely as {exponent tuple: coefficient} over an
explicit, canonically ordered variable tuple; the canonical form keeps only
variables that actually occur, so two polynomials built in different
contexts compare equal iff they are the same polynomial.  Coefficients are
gmpy2.mpq throughout.  The monomial order everywhere (printing, leading
terms, determinism of iteration) is graded lexicographic with the leftmost
canonical variable most significant.

Factorization and gcd are delegated to sympy behind the same canonical
types; a perfect-square fast path avoids the factorizer for the common
Dodgson-square shapes.
"""

from __future__ import annotations

import re
from typing import Iterable, Iterator, Mapping, Union

from gmpy2 import gcd, mpq, mpz

from .errors import NotLinearError

RatLike = Union[int, str, "mpq"]

_NAME_SPLIT = re.compile(r"^([A-Za-z_]+)(\d*)$")


def _var_key(name: str) -> tuple:
    """Sort key giving natural order: a1 < a2 < ... < a10 < b1."""
    m = _NAME_SPLIT.match(name)
    if m and m.group(2):
        return (m.group(1), int(m.group(2)), name)
    return (name, -1, name)


def rat(x: RatLike) -> mpq:
    """Coerce ints, 'p/q' strings, Fractions and mpq to mpq."""
    if isinstance(x, mpq):
        return x
    return mpq(x)


def _grlex_key(expo: tuple) -> tuple:
    return (sum(expo), expo)


class MultiPoly:
    """Immutable sparse polynomial over Q in named variables.

    `variables` is the canonically sorted tuple of names that occur;
    `terms` maps exponent tuples (same length as `variables`) to nonzero
    mpq coefficients.
    """

    __slots__ = ("variables", "terms", "_hash", "_degs", "_tdeg")

    def __init__(self, variables: Iterable[str], terms: Mapping[tuple, RatLike]):
        vs = tuple(variables)
        cleaned: dict[tuple, mpq] = {}
        for expo, c in terms.items():
            c = rat(c)
            if c:
                expo = tuple(int(e) for e in expo)
                cleaned[expo] = cleaned.get(expo, mpq(0)) + c
        cleaned = {e: c for e, c in cleaned.items() if c}
        # Canonical form: drop unused variables, sort the rest.
        used = [i for i in range(len(vs)) if any(e[i] for e in cleaned)]
        order = sorted(used, key=lambda i: _var_key(vs[i]))
        self.variables = tuple(vs[i] for i in order)
        self.terms = {tuple(e[i] for i in order): c for e, c in cleaned.items()}
        self._hash = None
        self._degs = None
        self._tdeg = None

    # -- constructors -------------------------------------------------

    @staticmethod
    def const(c: RatLike) -> "MultiPoly":
        c = rat(c)
        return MultiPoly((), {(): c} if c else {})

    @staticmethod
    def var(name: str) -> "MultiPoly":
        return MultiPoly((name,), {(1,): mpq(1)})

    @staticmethod
    def zero() -> "MultiPoly":
        return MultiPoly((), {})

    # -- basic queries ------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.variables

    def const_value(self) -> mpq:
        if self.variables:
            raise ValueError(f"not a constant: {self}")
        return self.terms.get((), mpq(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def total_degree(self) -> int:
        t = self._tdeg
        if t is None:
            t = self._tdeg = max((sum(e) for e in self.terms), default=0)
        return t

    def _degrees(self) -> tuple[int, ...]:
        d = self._degs
        if d is None:
            degs = [0] * len(self.variables)
            for e in self.terms:
                for i, x in enumerate(e):
                    if x > degs[i]:
                        degs[i] = x
            d = self._degs = tuple(degs)
        return d

    def degree_in(self, v: str) -> int:
        if v not in self.variables:
            return 0
        return self._degrees()[self.variables.index(v)]

    def is_linear_in(self, v: str) -> bool:
        return self.degree_in(v) <= 1

    def leading(self) -> tuple[tuple, mpq]:
        """(exponent, coefficient) of the grlex-largest monomial."""
        e = max(self.terms, key=_grlex_key)
        return e, self.terms[e]

    def __len__(self) -> int:
        return len(self.terms)

    def __bool__(self) -> bool:
        return bool(self.terms)

    def sorted_terms(self) -> list[tuple[tuple, mpq]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    # -- alignment of variable contexts --------------------------------

    def _aligned(self, other: "MultiPoly") -> tuple[tuple, dict, dict]:
        if self.variables == other.variables:
            return self.variables, self.terms, other.terms
        vs = tuple(sorted(set(self.variables) | set(other.variables), key=_var_key))
        return vs, _remap(self, vs), _remap(other, vs)

    # -- arithmetic ----------------------------------------------------

    def __add__(self, other) -> "MultiPoly":
        other = _as_poly(other)
        vs, a, b = self._aligned(other)
        out = dict(a)
        for e, c in b.items():
            out[e] = out.get(e, mpq(0)) + c
        return MultiPoly(vs, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        p = MultiPoly.__new__(MultiPoly)
        p.variables = self.variables
        p.terms = {e: -c for e, c in self.terms.items()}
        p._hash = None
        p._degs = self._degs
        p._tdeg = self._tdeg
        return p

    def __sub__(self, other) -> "MultiPoly":
        return self + (-_as_poly(other))

    def __rsub__(self, other) -> "MultiPoly":
        return _as_poly(other) + (-self)

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, mpq)):
            c = rat(other)
            if not c:
                return MultiPoly.zero()
            p = MultiPoly.__new__(MultiPoly)
            p.variables = self.variables
            p.terms = {e: c * k for e, k in self.terms.items()}
            p._hash = None
            p._degs = self._degs
            p._tdeg = self._tdeg
            return p
        other = _as_poly(other)
        vs, a, b = self._aligned(other)
        if len(a) * len(b) >= 40_000:
            fast = _kronecker_terms(vs, a, b)
            if fast is not None:
                p = MultiPoly.__new__(MultiPoly)
                p.variables = vs
                p.terms = fast
                p._hash = None
                p._degs = None
                p._tdeg = None
                return p
        out: dict[tuple, mpq] = {}
        if len(a) > len(b):
            a, b = b, a
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                e = tuple(x + y for x, y in zip(e1, e2))
                if e in out:
                    out[e] += c1 * c2
                else:
                    out[e] = c1 * c2
        return MultiPoly(vs, out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "MultiPoly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        result = MultiPoly.const(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, mpq)):
            other = MultiPoly.const(other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.variables == other.variables and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.variables, frozenset(self.terms.items())))
        return self._hash

    # -- calculus / substitution ---------------------------------------

    def diff(self, v: str) -> "MultiPoly":
        if v not in self.variables:
            return MultiPoly.zero()
        i = self.variables.index(v)
        out = {}
        for e, c in self.terms.items():
            if e[i]:
                e2 = e[:i] + (e[i] - 1,) + e[i + 1:]
                out[e2] = out.get(e2, mpq(0)) + c * e[i]
        return MultiPoly(self.variables, out)

    def coeff_of_power(self, v: str, k: int) -> "MultiPoly":
        """Coefficient of v**k, a polynomial in the remaining variables."""
        if v not in self.variables:
            return self if k == 0 else MultiPoly.zero()
        i = self.variables.index(v)
        vs = self.variables[:i] + self.variables[i + 1:]
        out = {}
        for e, c in self.terms.items():
            if e[i] == k:
                out[e[:i] + e[i + 1:]] = c
        return MultiPoly(vs, out)

    def subs(self, v: str, value) -> "MultiPoly":
        """Substitute a rational constant or polynomial for a variable."""
        if v not in self.variables:
            return self
        deg = self.degree_in(v)
        if isinstance(value, (int, mpq)):
            value = MultiPoly.const(value)
        # Horner in v
        result = self.coeff_of_power(v, deg)
        for k in range(deg - 1, -1, -1):
            result = result * value + self.coeff_of_power(v, k)
        return result

    def eval_rational(self, point: Mapping[str, RatLike]) -> mpq:
        missing = [v for v in self.variables if v not in point]
        if missing:
            raise ValueError(f"no value for {missing}")
        total = mpq(0)
        vals = [rat(point[v]) for v in self.variables]
        for e, c in self.terms.items():
            m = c
            for x, k in zip(vals, e):
                if k:
                    m *= x ** k
            total += m
        return total

    # -- normal forms ---------------------------------------------------

    def content_and_primitive(self) -> tuple[mpq, "MultiPoly"]:
        """p = unit * prim with prim integer-coefficient, coprime content,
        positive leading (grlex) coefficient."""
        if not self.terms:
            return mpq(1), self
        num_gcd = mpz(0)
        den_lcm = mpz(1)
        for c in self.terms.values():
            num_gcd = gcd_int(num_gcd, c.numerator)
            den_lcm = den_lcm * c.denominator // gcd_int(den_lcm, c.denominator)
        unit = mpq(num_gcd, den_lcm)
        _, lead = self.leading()
        if lead < 0:
            unit = -unit
        prim = MultiPoly.__new__(MultiPoly)
        prim.variables = self.variables
        prim.terms = {e: c / unit for e, c in self.terms.items()}
        prim._hash = None
        prim._degs = self._degs
        prim._tdeg = self._tdeg
        return unit, prim

    def monic_key(self) -> tuple:
        """Deterministic total-order key (degree, size, text)."""
        return (self.total_degree(), len(self.terms), format_poly(self))

    def __repr__(self):
        return f"MultiPoly({format_poly(self)})"

    def __str__(self):
        return format_poly(self)


def _kronecker_terms(vs: tuple, a: Mapping[tuple, mpq],
                     b: Mapping[tuple, mpq]) -> dict[tuple, mpq] | None:
    """Product of two aligned term dicts via Kronecker substitution.

    Exponent tuples are flattened into digit positions of one big integer
    per operand (mixed radix sized to the product's degree box), the
    integers are multiplied by GMP, and signed fixed-width digits are read
    back.  Exact over Q: denominators are cleared up front.  Returns None
    when the dense degree box is too large for packing to pay off.
    """
    if not a or not b:
        return {}
    n = len(vs)
    if n == 0:
        return {(): a[()] * b[()]}
    da = [0] * n
    db = [0] * n
    for e in a:
        for i, x in enumerate(e):
            if x > da[i]:
                da[i] = x
    for e in b:
        for i, x in enumerate(e):
            if x > db[i]:
                db[i] = x
    size = 1
    for i in range(n):
        size *= da[i] + db[i] + 1
        if size > 12_000_000:
            return None
    if size > 50 * len(a) * len(b):
        return None
    strides = [0] * n
    s = 1
    for i in range(n - 1, -1, -1):
        strides[i] = s
        s *= da[i] + db[i] + 1

    def pack(terms: Mapping[tuple, mpq]) -> tuple[dict[int, int], int, int]:
        den = 1
        for c in terms.values():
            d = c.denominator
            den = den * d // gcd(den, d)
        ints = {}
        top = 0
        for e, c in terms.items():
            k = 0
            for x, st in zip(e, strides):
                k += x * st
            v = int(c * den)
            ints[k] = v
            if abs(v) > top:
                top = abs(v)
        return ints, den, top

    ia, dena, topa = pack(a)
    ib, denb, topb = pack(b)
    scale = dena * denb
    bits = (topa.bit_length() + topb.bit_length()
            + min(len(a), len(b)).bit_length())
    if bits <= 60:
        return _kron_product_u64(ia, ib, size, strides, scale)
    if size > 2_000_000:
        return None
    return _kron_product_wide(ia, ib, size, strides, scale, bits + 2)


def _kron_product_u64(ia: dict[int, int], ib: dict[int, int], size: int,
                      strides: list[int], scale) -> dict[tuple, mpq]:
    """Kronecker digits as one uint64 each, decoded with numpy.

    Digit magnitudes stay below 2^60, so the borrow at each position is
    determined by that position's raw digit alone and the whole signed
    decode vectorizes.
    """
    import numpy as np

    def to_int(ints: dict[int, int]) -> int:
        arr = np.zeros(size, dtype="<u8")
        neg = []
        for k, v in ints.items():
            if v > 0:
                arr[k] = v
            else:
                neg.append((k, v))
        total = int.from_bytes(arr.tobytes(), "little")
        if neg:
            arr[:] = 0
            for k, v in neg:
                arr[k] = -v
            total -= int.from_bytes(arr.tobytes(), "little")
        return total

    prod = int(mpz(to_int(ia)) * mpz(to_int(ib)))
    digits = size + 2
    if prod < 0:
        prod += 1 << (64 * digits)
    raw = np.frombuffer(prod.to_bytes(digits * 8, "little"), dtype="<u8")
    signed = raw.view("<i8").copy()
    signed[1:] += (raw[:-1] >= np.uint64(1 << 63)).astype(np.int64)
    nz = np.flatnonzero(signed)
    vals = signed[nz].tolist()
    cols = []
    rem = nz
    for st in strides:
        e, rem = np.divmod(rem, st)
        cols.append(e.tolist())
    return {e: mpq(v, scale)
            for e, v in zip(zip(*cols), vals)}


def _kron_product_wide(ia: dict[int, int], ib: dict[int, int], size: int,
                       strides: list[int], scale, bits: int) -> dict[tuple, mpq]:
    """Kronecker digits wider than a machine word, decoded bytewise."""
    w = (bits + 7) // 8
    width = 8 * w
    half = 1 << (width - 1)
    full = 1 << width

    def to_int(ints: dict[int, int]) -> int:
        pos = bytearray(size * w)
        neg = bytearray(size * w)
        for k, v in ints.items():
            off = k * w
            if v > 0:
                pos[off:off + (v.bit_length() + 7) // 8] = v.to_bytes(
                    (v.bit_length() + 7) // 8, "little")
            else:
                v = -v
                neg[off:off + (v.bit_length() + 7) // 8] = v.to_bytes(
                    (v.bit_length() + 7) // 8, "little")
        return int.from_bytes(pos, "little") - int.from_bytes(neg, "little")

    prod = int(mpz(to_int(ia)) * mpz(to_int(ib)))
    digits = size + 2
    if prod < 0:
        prod += 1 << (width * digits)
    buf = prod.to_bytes(digits * w, "little")
    n = len(strides)
    out: dict[tuple, mpq] = {}
    carry = 0
    for k in range(digits):
        r = int.from_bytes(buf[k * w:(k + 1) * w], "little") + carry
        if r >= half:
            r -= full
            carry = 1
        else:
            carry = 0
        if r:
            rem = k
            e = [0] * n
            for i in range(n):
                e[i], rem = divmod(rem, strides[i])
            out[tuple(e)] = mpq(r, scale)
    return out


def _remap(p: MultiPoly, vs: tuple) -> dict:
    pos = {v: i for i, v in enumerate(vs)}
    idx = [pos[v] for v in p.variables]
    out = {}
    for e, c in p.terms.items():
        e2 = [0] * len(vs)
        for i, k in zip(idx, e):
            e2[i] = k
        out[tuple(e2)] = c
    return out


def _as_poly(x) -> MultiPoly:
    if isinstance(x, MultiPoly):
        return x
    if isinstance(x, (int, mpq)):
        return MultiPoly.const(x)
    raise TypeError(f"cannot coerce {type(x)!r} to MultiPoly")


def rename_variables(p: MultiPoly, mapping: Mapping[str, str]) -> MultiPoly:
    """Simultaneous rename of variables; `mapping` must be injective on
    the variables of p (names not in the mapping stay put)."""
    return MultiPoly(tuple(mapping.get(v, v) for v in p.variables), p.terms)


def gcd_int(a, b):
    a, b = abs(mpz(a)), abs(mpz(b))
    while b:
        a, b = b, a % b
    return a


ZERO = MultiPoly.zero()
ONE = MultiPoly.const(1)


# ---------------------------------------------------------------------------
# linear structure


def linear_split(p: MultiPoly, v: str) -> tuple[MultiPoly, MultiPoly]:
    """Write p = g*v + h with g, h free of v; raises NotLinearError."""
    d = p.degree_in(v)
    if d > 1:
        raise NotLinearError(f"degree {d} in {v}: {p}")
    return p.coeff_of_power(v, 1), p.coeff_of_power(v, 0)


def exact_div(p: MultiPoly, q: MultiPoly) -> MultiPoly | None:
    """p / q when the division is exact, else None."""
    if q.is_zero():
        raise ZeroDivisionError("division by zero polynomial")
    if p.is_zero():
        return ZERO
    if q.is_constant():
        return p * (1 / q.const_value())
    vs = tuple(sorted(set(p.variables) | set(q.variables), key=_var_key))
    rem = dict(_remap(p, vs))
    qt = _remap(q, vs)
    qe = max(qt, key=_grlex_key)
    qc = qt[qe]
    quot: dict[tuple, mpq] = {}
    # worst case is len(quotient) iterations; bail out fast on failure
    while rem:
        re_ = max(rem, key=_grlex_key)
        e = tuple(a - b for a, b in zip(re_, qe))
        if any(x < 0 for x in e):
            return None
        c = rem[re_] / qc
        quot[e] = c
        for e2, c2 in qt.items():
            e3 = tuple(a + b for a, b in zip(e, e2))
            nv = rem.get(e3, mpq(0)) - c * c2
            if nv:
                rem[e3] = nv
            else:
                rem.pop(e3, None)
    return MultiPoly(vs, quot)


# ---------------------------------------------------------------------------
# parsing / printing (round-trip format: "3*a1^2*a3 - 1/2*a2 + 4")

_TOKEN = re.compile(r"\s*(\d+/\d+|\d+|[A-Za-z_][A-Za-z0-9_]*|\^|\*|\+|-|\(|\))")


def parse_poly(text: str) -> MultiPoly:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            if text[pos:].strip():
                raise ValueError(f"bad character in polynomial at {text[pos:]!r}")
            break
        tokens.append(m.group(1))
        pos = m.end()
    result = ZERO
    i = 0
    n = len(tokens)
    if n == 0:
        raise ValueError("empty polynomial text")
    while i < n:
        sign = 1
        while i < n and tokens[i] in "+-":
            if tokens[i] == "-":
                sign = -sign
            i += 1
        if i >= n:
            raise ValueError("dangling sign in polynomial text")
        coeff = mpq(sign)
        mono: dict[str, int] = {}
        while True:
            t = tokens[i]
            if re.fullmatch(r"\d+/\d+|\d+", t):
                coeff *= mpq(t)
                i += 1
            elif re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", t):
                name = t
                i += 1
                k = 1
                if i < n and tokens[i] == "^":
                    k = int(tokens[i + 1])
                    i += 2
                mono[name] = mono.get(name, 0) + k
            else:
                raise ValueError(f"unexpected token {t!r}")
            if i < n and tokens[i] == "*":
                i += 1
                continue
            break
        vs = tuple(sorted(mono, key=_var_key))
        result = result + MultiPoly(vs, {tuple(mono[v] for v in vs): coeff})
    return result


def format_poly(p: MultiPoly) -> str:
    if p.is_zero():
        return "0"
    parts = []
    for e, c in p.sorted_terms():
        factors = []
        for v, k in zip(p.variables, e):
            if k == 1:
                factors.append(v)
            elif k > 1:
                factors.append(f"{v}^{k}")
        ac = abs(c)
        if not factors or ac != 1:
            factors.insert(0, str(ac))
        body = "*".join(factors)
        if not parts:
            parts.append(body if c > 0 else f"-{body}")
        else:
            parts.append(f"+ {body}" if c > 0 else f"- {body}")
    return " ".join(parts)


# ---------------------------------------------------------------------------
# rational functions

INFINITY = object()  # sentinel for limits


class RationalFunction:
    """num/den in lowest terms; den is primitive with positive leading
    coefficient, so the representation is unique."""

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=ONE):
        num = _as_poly(num)
        den = _as_poly(den)
        if den.is_zero():
            raise ZeroDivisionError("rational function with zero denominator")
        if num.is_zero():
            den = ONE
        else:
            g = poly_gcd(num, den)
            if not g.is_constant():
                num = exact_div(num, g)
                den = exact_div(den, g)
            unit, prim = den.content_and_primitive()
            den = prim
            num = num * (1 / unit)
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def const(c: RatLike) -> "RationalFunction":
        return RationalFunction(MultiPoly.const(c))

    @staticmethod
    def var(name: str) -> "RationalFunction":
        return RationalFunction(MultiPoly.var(name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_constant(self) -> bool:
        return self.num.is_constant() and self.den.is_constant()

    def const_value(self) -> mpq:
        return self.num.const_value() / self.den.const_value()

    def variables(self) -> tuple:
        return tuple(sorted(set(self.num.variables) | set(self.den.variables), key=_var_key))

    def __add__(self, other) -> "RationalFunction":
        other = as_ratfun(other)
        return RationalFunction(self.num * other.den + other.num * self.den,
                                self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        r = RationalFunction.__new__(RationalFunction)
        r.num = -self.num
        r.den = self.den
        r._hash = None
        return r

    def __sub__(self, other):
        return self + (-as_ratfun(other))

    def __rsub__(self, other):
        return as_ratfun(other) + (-self)

    def __mul__(self, other):
        other = as_ratfun(other)
        return RationalFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = as_ratfun(other)
        if other.is_zero():
            raise ZeroDivisionError("division by zero rational function")
        return RationalFunction(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other):
        return as_ratfun(other) / self

    def inverse(self) -> "RationalFunction":
        return RationalFunction(self.den, self.num)

    def __pow__(self, n: int) -> "RationalFunction":
        if n < 0:
            return self.inverse() ** (-n)
        return RationalFunction(self.num ** n, self.den ** n)

    def __eq__(self, other):
        if isinstance(other, (int, mpq, MultiPoly)):
            other = as_ratfun(other)
        if not isinstance(other, RationalFunction):
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def diff(self, v: str) -> "RationalFunction":
        return RationalFunction(self.num.diff(v) * self.den - self.num * self.den.diff(v),
                                self.den * self.den)

    def subs(self, v: str, value) -> "RationalFunction":
        if isinstance(value, RationalFunction):
            # clear value.den out of num and den separately
            d = max(self.num.degree_in(v), self.den.degree_in(v))
            scale = value.den ** d
            num = _subs_cleared(self.num, v, value, d)
            den = _subs_cleared(self.den, v, value, d)
            if den.is_zero():
                raise ZeroDivisionError(f"substitution made denominator vanish: {self}")
            return RationalFunction(num, den)
        num = self.num.subs(v, value)
        den = self.den.subs(v, value)
        if den.is_zero():
            raise ZeroDivisionError(f"substitution made denominator vanish: {self}")
        return RationalFunction(num, den)

    def eval_rational(self, point: Mapping[str, RatLike]) -> mpq:
        d = self.den.eval_rational(point)
        if d == 0:
            raise ZeroDivisionError(f"denominator vanishes at {point}")
        return self.num.eval_rational(point) / d

    def __repr__(self):
        return f"RationalFunction({self})"

    def __str__(self):
        if self.den == ONE:
            return format_poly(self.num)
        return f"({format_poly(self.num)})/({format_poly(self.den)})"


def _subs_cleared(p: MultiPoly, v: str, value: "RationalFunction", d: int) -> MultiPoly:
    """p(v -> num/den) * den**d, polynomial again."""
    result = ZERO
    for k in range(d + 1):
        ck = p.coeff_of_power(v, k)
        if ck.is_zero():
            continue
        result = result + ck * value.num ** k * value.den ** (d - k)
    return result


def as_ratfun(x) -> RationalFunction:
    if isinstance(x, RationalFunction):
        return x
    if isinstance(x, (int, mpq, MultiPoly)):
        return RationalFunction(_as_poly(x))
    raise TypeError(f"cannot coerce {type(x)!r} to RationalFunction")


def limit_to_zero(rf: RationalFunction, v: str):
    """Regularized limit of rf as v -> 0: cancel the common power of v,
    then substitute.  Returns RationalFunction or INFINITY."""
    num, den = rf.num, rf.den
    mn = _min_vdeg(num, v)
    md = _min_vdeg(den, v)
    m = min(mn, md)
    if m:
        num = _shift_down(num, v, m)
        den = _shift_down(den, v, m)
    num0 = num.subs(v, 0)
    den0 = den.subs(v, 0)
    if den0.is_zero():
        return INFINITY
    return RationalFunction(num0, den0)


def _min_vdeg(p: MultiPoly, v: str) -> int:
    if p.is_zero() or v not in p.variables:
        return 0
    i = p.variables.index(v)
    return min(e[i] for e in p.terms)


def _shift_down(p: MultiPoly, v: str, m: int) -> MultiPoly:
    if m == 0 or v not in p.variables:
        return p
    i = p.variables.index(v)
    return MultiPoly(p.variables,
                     {e[:i] + (e[i] - m,) + e[i + 1:]: c for e, c in p.terms.items()})


# ---------------------------------------------------------------------------
# gcd / factorization (sympy-backed)

_SYMPY_CACHE: dict = {}


def _to_sympy(p: MultiPoly, vs: tuple):
    from sympy import Poly, QQ, Symbol
    syms = [Symbol(v) for v in vs]
    if not vs:
        from sympy import Rational
        return Poly(Rational(str(p.const_value() if not p.is_zero() else 0)),
                    Symbol("_dummy"), domain=QQ)
    terms = _remap(p, vs)
    from fractions import Fraction
    d = {e: Fraction(int(c.numerator), int(c.denominator)) for e, c in terms.items()}
    return Poly.from_dict(d, *syms, domain=QQ)


def _from_sympy(sp, vs: tuple) -> MultiPoly:
    out = {}
    for e, c in sp.as_dict().items():
        out[tuple(int(k) for k in e)] = mpq(int(c.numerator), int(c.denominator))
    return MultiPoly(vs, out)


def poly_gcd(p: MultiPoly, q: MultiPoly) -> MultiPoly:
    """gcd, primitive with positive leading coefficient (gcd(0,0)=0)."""
    if p.is_zero():
        return q.content_and_primitive()[1] if not q.is_zero() else ZERO
    if q.is_zero():
        return p.content_and_primitive()[1]
    if p.is_constant() or q.is_constant():
        return ONE
    if not (set(p.variables) & set(q.variables)):
        return ONE
    key = ("gcd", p, q) if hash(p) <= hash(q) else ("gcd", q, p)
    hit = _SYMPY_CACHE.get(key)
    if hit is not None:
        return hit
    vs = tuple(sorted(set(p.variables) | set(q.variables), key=_var_key))
    g = _to_sympy(p, vs).gcd(_to_sympy(q, vs))
    out = _from_sympy(g, vs).content_and_primitive()[1]
    _SYMPY_CACHE[key] = out
    return out


class Factorization:
    """unit * prod(base**mult); bases are irreducible over Q, primitive,
    positive leading coefficient, listed in a deterministic order."""

    __slots__ = ("unit", "factors")

    def __init__(self, unit: mpq, factors: list[tuple[MultiPoly, int]]):
        self.unit = rat(unit)
        self.factors = sorted(factors, key=lambda fm: fm[0].monic_key())

    def expand(self) -> MultiPoly:
        p = MultiPoly.const(self.unit)
        for f, m in self.factors:
            p = p * f ** m
        return p

    def __iter__(self) -> Iterator[tuple[MultiPoly, int]]:
        return iter(self.factors)

    def __repr__(self):
        parts = [str(self.unit)]
        parts += [f"({f})^{m}" if m > 1 else f"({f})" for f, m in self.factors]
        return " * ".join(parts)


_SAMPLE_PRIMES = (3, 5, 7, 11, 17, 23, 29, 37, 43, 53, 61, 71, 79, 89)


def _square_values_at_samples(p: MultiPoly, rounds: int = 2) -> bool:
    """Sound negative test for perfect squares.

    A square polynomial takes a rational-square value at every rational
    point, so one non-square sample value proves p is not a square.
    Returns False only on such a proof; True is inconclusive.
    """
    vs = p.variables
    for k in range(rounds):
        pt = {v: _SAMPLE_PRIMES[(i * (k + 2) + k) % len(_SAMPLE_PRIMES)]
              for i, v in enumerate(vs)}
        val = p.eval_rational(pt)
        if val < 0 or _rat_sqrt(val) is None:
            return False
    return True


def sqrt_perfect_square(p: MultiPoly) -> MultiPoly | None:
    """Exact square root if p is a perfect square, else None.

    Greedy leading-term extraction in grlex order; cheap failure on
    non-squares.  The result has positive leading coefficient.
    """
    if p.is_zero():
        return ZERO
    if p.total_degree() % 2:
        return None
    le, lc = p.leading()
    if any(k % 2 for k in le) or lc <= 0:
        return None
    if any(p.degree_in(v) % 2 for v in p.variables):
        return None
    if not _square_values_at_samples(p):
        return None
    csq = _rat_sqrt(lc)
    if csq is None:
        return None
    half = tuple(k // 2 for k in le)
    q = MultiPoly(p.variables, {half: csq})
    r = p - q * q
    lead_den = 2 * csq
    guard = 4 * len(p.terms) + 8
    while not r.is_zero():
        guard -= 1
        if guard < 0:
            return None
        re_, rc = r.leading()
        e = tuple(a - b for a, b in zip(_pad_align(re_, r.variables, p.variables),
                                        half))
        if any(x < 0 for x in e):
            return None
        t = MultiPoly(p.variables, {e: rc / lead_den})
        r = r - (2 * q * t + t * t)
        q = q + t
    return q


def _pad_align(e: tuple, vs_from: tuple, vs_to: tuple) -> tuple:
    pos = {v: i for i, v in enumerate(vs_from)}
    return tuple(e[pos[v]] if v in pos else 0 for v in vs_to)


def _rat_sqrt(c: mpq) -> mpq | None:
    from gmpy2 import isqrt
    n, d = c.numerator, c.denominator
    if n < 0:
        return None
    rn, rd = isqrt(n), isqrt(d)
    if rn * rn == n and rd * rd == d:
        return mpq(rn, rd)
    return None


def _disc_square_candidate(a: MultiPoly, b1: MultiPoly, c: MultiPoly) -> bool:
    """Sound sample filter for b1^2 - 4ac being a perfect square."""
    vs = sorted(set(a.variables) | set(b1.variables) | set(c.variables))
    for k in range(3):
        pt = {v: _SAMPLE_PRIMES[(i * (k + 2) + k) % len(_SAMPLE_PRIMES)]
              for i, v in enumerate(vs)}
        d = b1.eval_rational(pt) ** 2 - 4 * a.eval_rational(pt) * c.eval_rational(pt)
        if _rat_sqrt(rat(d)) is None:
            return False
    return True


def factorize(p: MultiPoly, hints: Iterable[MultiPoly] = ()) -> Factorization:
    """Full factorization over Q.

    `hints` are known irreducible polynomials tried by exact division
    before falling back to the square-root fast path and sympy; reduction
    chains resubmit the same factors constantly, so this is the hot path.
    """
    if p.is_zero():
        raise ValueError("cannot factorize the zero polynomial")
    unit, prim = p.content_and_primitive()
    factors: dict[MultiPoly, int] = {}
    # split off single-variable monomial content first: cheap and common
    prim = _strip_monomial(prim, factors)
    work = [prim]
    hint_list = [h for h in hints if not h.is_constant()]
    out: dict[MultiPoly, int] = dict(factors)
    while work:
        q = work.pop()
        if q.is_constant():
            unit *= q.const_value()
            continue
        if q.total_degree() == 1:
            u2, q2 = q.content_and_primitive()
            unit *= u2
            out[q2] = out.get(q2, 0) + 1
            continue
        progressed = False
        for h in hint_list:
            quot = exact_div(q, h)
            if quot is not None:
                out[h] = out.get(h, 0) + 1
                work.append(quot)
                progressed = True
                break
        if progressed:
            continue
        v1 = next((v for v in q.variables if q.degree_in(v) == 1), None)
        if v1 is not None:
            # q = g*v1 + h: a factor free of v1 divides both g and h, and
            # the quotient by gcd(g, h) carries v1 linearly with coprime
            # split parts, so it cannot factor any further
            g, h = linear_split(q, v1)
            b = poly_gcd(g, h)
            if b.is_constant():
                u2, q2 = q.content_and_primitive()
                unit *= u2
                out[q2] = out.get(q2, 0) + 1
            else:
                a = exact_div(q, b)
                u2, a2 = a.content_and_primitive()
                unit *= u2
                out[a2] = out.get(a2, 0) + 1
                work.append(b)
            continue
        v2 = next((v for v in q.variables if q.degree_in(v) == 2), None)
        if v2 is not None:
            # quadratic in v2: after removing the v2-free content, q splits
            # over Q[vars] iff the discriminant is a perfect square, with
            # factors the primitive parts of 2a*v2 + b -+ sqrt(disc)
            a = q.coeff_of_power(v2, 2)
            b1 = q.coeff_of_power(v2, 1)
            c = q.coeff_of_power(v2, 0)
            # a common divisor needs a variable present in all three
            parts = [t for t in (a, b1, c) if not t.is_zero()]
            shared = set(parts[0].variables)
            for t in parts[1:]:
                shared &= set(t.variables)
            e = poly_gcd(poly_gcd(a, b1), c) if shared else ONE
            if not e.is_constant():
                work.append(e)
                work.append(exact_div(q, e))
                continue
            # sample before building the discriminant: a non-square value
            # at any rational point refutes the split at O(terms) cost
            s = None
            if _disc_square_candidate(a, b1, c):
                s = sqrt_perfect_square(b1 * b1 - 4 * a * c)
            if s is None:
                u2, q2 = q.content_and_primitive()
                unit *= u2
                out[q2] = out.get(q2, 0) + 1
            else:
                # 2a*v2 + b1 - s is one true factor scaled by the leading
                # coefficient of its cofactor; strip that v2-free content
                g1, h1 = 2 * a, b1 - s
                f1 = exact_div(g1 * MultiPoly.var(v2) + h1, poly_gcd(g1, h1))
                rest = exact_div(q, f1)
                assert f1 is not None and rest is not None
                work.append(f1)
                work.append(rest)
            continue
        rt = sqrt_perfect_square(q)
        if rt is not None and not rt.is_constant() and rt.total_degree() >= 1 \
                and rt.total_degree() < q.total_degree():
            u2, rt = rt.content_and_primitive()
            unit *= u2 * u2
            for base, mult in factorize(rt, hints=hint_list):
                out[base] = out.get(base, 0) + 2 * mult
            continue
        cached = _SYMPY_CACHE.get(("fac", q))
        if cached is None:
            vs = q.variables
            coeff, fl = _to_sympy(q, vs).factor_list()
            cached = (mpq(int(coeff.numerator), int(coeff.denominator)),
                      [(_from_sympy(f, tuple(str(s) for s in f.gens)), int(m))
                       for f, m in fl])
            _SYMPY_CACHE[("fac", q)] = cached
        c0, fl = cached
        unit *= c0
        for base, mult in fl:
            u2, base = base.content_and_primitive()
            unit *= u2 ** mult
            out[base] = out.get(base, 0) + mult
    return Factorization(unit, list(out.items()))


def _strip_monomial(p: MultiPoly, factors: dict) -> MultiPoly:
    for v in p.variables:
        m = _min_vdeg(p, v)
        if m:
            factors[MultiPoly.var(v)] = factors.get(MultiPoly.var(v), 0) + m
            p = _shift_down(p, v, m)
    return p


def normalize(p: MultiPoly) -> MultiPoly:
    """Canonical form (constructor already canonicalizes; exposed for the
    parser pipeline and round-trip checks)."""
    return MultiPoly(p.variables, p.terms)


RF_ZERO = RationalFunction(ZERO)
RF_ONE = RationalFunction(ONE)
