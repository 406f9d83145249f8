"""Multiple zeta values as an exact coefficient field.

Words over the two-letter alphabet {0, 1} stand for iterated-integral
forms dz/z and dz/(1+z); the convergent ones (leading 0, trailing 1)
are classical zeta values and everything else regularizes to them.  A
relation table built from the double-shuffle family reduces every
convergent word to a small set of free words per weight, which makes
equality of zeta expressions decidable (up to the table's weight cap).

Conventions.  A word w = 0^{n_k-1} 1 ... 0^{n_1-1} 1 carries the value
zeta(n_1, ..., n_k) with n_1 the innermost summation index; convergence
requires n_k >= 2.  Products obey the shuffle on words and the stuffle
on compositions, and the single divergent letter regularizes to zero on
both sides, which yields Euler's zeta(1,2) = zeta(3) as the first
extended relation.
"""

from __future__ import annotations

import itertools
import json
from functools import lru_cache
from importlib import resources
from typing import Iterable, Mapping

from gmpy2 import mpq

from .errors import UnresolvedConstantError
from .polyring import rat

Word = tuple  # of 0/1 letters

MAX_WEIGHT = 6

X0, X1 = 0, 1


# ---------------------------------------------------------------------------
# words and compositions

def is_convergent(w: Word) -> bool:
    return bool(w) and w[0] == X0 and w[-1] == X1


def word_to_composition(w: Word) -> tuple:
    """Inner-first exponents (n_1, ..., n_k); requires trailing letter 1."""
    if not w or w[-1] != X1:
        raise ValueError(f"word does not end in 1: {w}")
    outer = []
    run = 0
    for letter in w:
        if letter == X0:
            run += 1
        else:
            outer.append(run + 1)
            run = 0
    return tuple(reversed(outer))


def composition_to_word(comp: Iterable[int]) -> Word:
    comp = tuple(comp)
    if not all(n >= 1 for n in comp):
        raise ValueError(f"exponents must be positive: {comp}")
    out = []
    for n in reversed(comp):
        out.extend([X0] * (n - 1))
        out.append(X1)
    return tuple(out)


def weight(w: Word) -> int:
    return len(w)


def all_words(n: int, letters=(X0, X1)) -> list:
    if n == 0:
        return [()]
    return [w + (a,) for w in all_words(n - 1, letters) for a in letters]


def convergent_words(n: int) -> list:
    return [w for w in all_words(n) if is_convergent(w)]


# ---------------------------------------------------------------------------
# shuffle and stuffle

@lru_cache(maxsize=None)
def shuffle(u: Word, v: Word) -> Mapping[Word, int]:
    if not u:
        return {v: 1}
    if not v:
        return {u: 1}
    out: dict = {}
    for w, c in shuffle(u[1:], v).items():
        key = (u[0],) + w
        out[key] = out.get(key, 0) + c
    for w, c in shuffle(u, v[1:]).items():
        key = (v[0],) + w
        out[key] = out.get(key, 0) + c
    return out


def shuffle_many(words: Iterable[Word]) -> Mapping[Word, int]:
    acc = {(): 1}
    for w in words:
        nxt: dict = {}
        for u, c in acc.items():
            for v, d in shuffle(u, w).items():
                nxt[v] = nxt.get(v, 0) + c * d
        acc = nxt
    return acc


@lru_cache(maxsize=None)
def stuffle(a: tuple, b: tuple) -> Mapping[tuple, int]:
    """Quasi-shuffle of outer-first compositions: interleave or collide."""
    if not a:
        return {b: 1}
    if not b:
        return {a: 1}
    out: dict = {}
    for tail, c in stuffle(a[1:], b).items():
        key = (a[0],) + tail
        out[key] = out.get(key, 0) + c
    for tail, c in stuffle(a, b[1:]).items():
        key = (b[0],) + tail
        out[key] = out.get(key, 0) + c
    for tail, c in stuffle(a[1:], b[1:]).items():
        key = (a[0] + b[0],) + tail
        out[key] = out.get(key, 0) + c
    return out


# ---------------------------------------------------------------------------
# regularization: divergent words -> convergent linear combinations

def _add_scaled(acc: dict, piece: Mapping, scale) -> None:
    for k, c in piece.items():
        acc[k] = acc.get(k, mpq(0)) + scale * c
    for k in [k for k, c in acc.items() if not c]:
        del acc[k]


@lru_cache(maxsize=None)
def shuffle_regularize(w: Word) -> Mapping[Word, mpq]:
    """Express the shuffle-regularized value of any word (both boundary
    letters sent to zero) over convergent words."""
    if not w:
        return {(): mpq(1)}
    if is_convergent(w):
        return {w: mpq(1)}
    out: dict = {}
    if w[-1] == X0:
        b = 0
        while b < len(w) and w[-1 - b] == X0:
            b += 1
        prod = shuffle(w[:-1], (X0,))
    else:
        prod = shuffle((X1,), w[1:])
        b = prod[w]
    for v, c in prod.items():
        if v == w:
            continue
        _add_scaled(out, shuffle_regularize(v), mpq(-c, b))
    return out


@lru_cache(maxsize=None)
def stuffle_regularize(comp: tuple) -> Mapping[tuple, mpq]:
    """Same for outer-first compositions under the stuffle, with the
    single divergent exponent 1 sent to zero."""
    if not comp:
        return {(): mpq(1)}
    if comp[0] >= 2:
        return {comp: mpq(1)}
    prod = stuffle((1,), comp[1:])
    b = prod[comp]
    out: dict = {}
    for v, c in prod.items():
        if v == comp:
            continue
        _add_scaled(out, stuffle_regularize(v), mpq(-c, b))
    return out


def _comp_to_words(piece: Mapping[tuple, mpq]) -> dict:
    out: dict = {}
    for comp, c in piece.items():
        w = composition_to_word(tuple(reversed(comp))) if comp else ()
        out[w] = out.get(w, mpq(0)) + c
    return out


# ---------------------------------------------------------------------------
# the relation table

def double_shuffle_relations(n: int) -> list:
    """All weight-n relations used to build the table, as mappings
    convergent-word -> rational that vanish.

    Two families: shuffle minus stuffle on pairs of convergent words, and
    the comparison of the two regularizations of a single leading
    divergence (both are degree-one in the regularization parameter, so
    their constant terms agree)."""
    rels = []
    for k in range(2, n - 1):
        for u in convergent_words(k):
            cu = tuple(reversed(word_to_composition(u)))
            for v in convergent_words(n - k):
                cv = tuple(reversed(word_to_composition(v)))
                rel: dict = {}
                _add_scaled(rel, shuffle(u, v), mpq(1))
                _add_scaled(rel, _comp_to_words(stuffle(cu, cv)), mpq(-1))
                if rel:
                    rels.append(rel)
    for u in convergent_words(n - 1):
        cu = tuple(reversed(word_to_composition(u)))
        rel = {}
        _add_scaled(rel, shuffle_regularize((X1,) + u), mpq(1))
        _add_scaled(rel, _comp_to_words(stuffle_regularize((1,) + cu)), mpq(-1))
        if rel:
            rels.append(rel)
    return rels


def _solve_relations(n: int) -> tuple[dict, list]:
    """Row-reduce the weight-n relations.  Returns (rewrites, free) where
    rewrites maps each eliminated word to its expansion over free words.
    Pivots are chosen on lexicographically larger words, so the plain
    zeta word 0^{n-1} 1 always stays free."""
    cols = sorted(convergent_words(n), reverse=True)
    col_index = {w: i for i, w in enumerate(cols)}
    rows = []
    for rel in double_shuffle_relations(n):
        vec = [mpq(0)] * len(cols)
        for w, c in rel.items():
            vec[col_index[w]] += c
        rows.append(vec)
    pivots: dict = {}
    for row in rows:
        row = row[:]
        lead = None
        i = 0
        while i < len(cols):
            if not row[i]:
                i += 1
            elif i in pivots:
                f = row[i]
                row = [a - f * b for a, b in zip(row, pivots[i])]
                i += 1
            else:
                lead = i
                break
        if lead is not None:
            inv = 1 / row[lead]
            pivots[lead] = [a * inv for a in row]
    # back-substitute to reduced form
    for lead in sorted(pivots, reverse=True):
        piv = pivots[lead]
        for other, row in pivots.items():
            if other == lead:
                continue
            f = row[lead]
            if f:
                pivots[other] = [a - f * b for a, b in zip(row, piv)]
    free = [cols[i] for i in range(len(cols)) if i not in pivots]
    rewrites = {}
    for lead, row in pivots.items():
        expansion = {cols[i]: -row[i] for i in range(len(cols))
                     if i != lead and row[i]}
        rewrites[cols[lead]] = expansion
    return rewrites, free


EXPECTED_DIMS = {2: 1, 3: 1, 4: 1, 5: 2, 6: 2}


@lru_cache(maxsize=None)
def normal_table(max_weight: int = MAX_WEIGHT) -> dict:
    """word -> expansion over free words, for all convergent words of
    weight 2..max_weight.  Free words map to themselves."""
    table: dict = {}
    for n in range(2, max_weight + 1):
        rewrites, free = _solve_relations(n)
        if n in EXPECTED_DIMS:
            assert len(free) == EXPECTED_DIMS[n], \
                f"weight {n}: got {len(free)} free words, expected {EXPECTED_DIMS[n]}"
        for w in free:
            table[w] = {w: mpq(1)}
        table.update(rewrites)
    return table


def free_words(max_weight: int = MAX_WEIGHT) -> list:
    t = normal_table(max_weight)
    return sorted((w for w, exp in t.items() if exp == {w: mpq(1)}),
                  key=lambda w: (len(w), w))


def normal_form(piece: Mapping[Word, mpq],
                max_weight: int = MAX_WEIGHT) -> dict:
    """Rewrite a convergent-word combination over the free words."""
    table = normal_table(max_weight)
    out: dict = {}
    for w, c in piece.items():
        if not w:
            out[()] = out.get((), mpq(0)) + c
            continue
        if len(w) > max_weight:
            raise UnresolvedConstantError(
                f"word {w} exceeds the weight cap {max_weight}")
        _add_scaled(out, table[w], c)
    return out


# ---------------------------------------------------------------------------
# exact zeta expressions

class MZVExpr:
    """Exact rational combination of multiple zeta values, stored over
    the free words of the relation table.  Hashable and comparable, so
    it can serve as a coefficient domain."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Mapping[Word, object] | None = None):
        clean: dict = {}
        if coeffs:
            raw = {w: rat(c) for w, c in coeffs.items() if c}
            clean = normal_form(raw)
        self.coeffs = clean
        self._hash = None

    @staticmethod
    def _from_normal(coeffs: dict) -> "MZVExpr":
        e = MZVExpr.__new__(MZVExpr)
        e.coeffs = {w: c for w, c in coeffs.items() if c}
        e._hash = None
        return e

    @staticmethod
    def rational(c) -> "MZVExpr":
        c = rat(c)
        return MZVExpr._from_normal({(): c} if c else {})

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_rational(self) -> bool:
        return set(self.coeffs) <= {()}

    def rational_part(self) -> mpq:
        return self.coeffs.get((), mpq(0))

    def max_weight(self) -> int:
        return max((len(w) for w in self.coeffs), default=0)

    def __add__(self, other):
        other = _as_mzv(other)
        out = dict(self.coeffs)
        _add_scaled(out, other.coeffs, mpq(1))
        return MZVExpr._from_normal(out)

    __radd__ = __add__

    def __neg__(self):
        return MZVExpr._from_normal({w: -c for w, c in self.coeffs.items()})

    def __sub__(self, other):
        return self + (-_as_mzv(other))

    def __rsub__(self, other):
        return _as_mzv(other) + (-self)

    def __mul__(self, other):
        if isinstance(other, (int, mpq)):
            c = rat(other)
            if not c:
                return MZV_ZERO
            return MZVExpr._from_normal(
                {w: c * x for w, x in self.coeffs.items()})
        other = _as_mzv(other)
        out: dict = {}
        for u, cu in self.coeffs.items():
            for v, cv in other.coeffs.items():
                piece = normal_form({w: mpq(d) for w, d in shuffle(u, v).items()})
                _add_scaled(out, piece, cu * cv)
        return MZVExpr._from_normal(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, MZVExpr):
            if not other.is_rational():
                raise TypeError("can only divide by a rational MZVExpr")
            other = other.rational_part()
        return self * (1 / rat(other))

    def __eq__(self, other):
        try:
            other = _as_mzv(other)
        except TypeError:
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.coeffs.items()))
        return self._hash

    def numeric(self, digits: int = 60):
        from . import numeric
        import mpmath
        with mpmath.workdps(digits + 10):
            total = mpmath.mpf(0)
            for w, c in self.coeffs.items():
                term = mpmath.mpf(int(c.numerator)) / mpmath.mpf(int(c.denominator))
                if w:
                    term *= numeric.eval_mzv(word_to_composition(w), digits)
                total += term
            return +total

    def __str__(self):
        return format_mzv(self)

    def __repr__(self):
        return f"MZVExpr({format_mzv(self)})"


def _as_mzv(x) -> MZVExpr:
    if isinstance(x, MZVExpr):
        return x
    if isinstance(x, (int, mpq)):
        return MZVExpr.rational(x)
    raise TypeError(f"cannot coerce {type(x)!r} to MZVExpr")


MZV_ZERO = MZVExpr.rational(0)
MZV_ONE = MZVExpr.rational(1)


def zeta(*exponents: int) -> MZVExpr:
    """zeta(n_1, ..., n_k), innermost index first; n_k >= 2."""
    w = composition_to_word(exponents)
    if not is_convergent(w):
        raise ValueError(f"divergent zeta argument {exponents}")
    return MZVExpr({w: 1})


def zeta_word(w: Word) -> MZVExpr:
    """Shuffle-regularized value of an arbitrary word."""
    return MZVExpr(dict(shuffle_regularize(tuple(w))))


# ---------------------------------------------------------------------------
# pretty printing over the conventional basis

@lru_cache(maxsize=None)
def _basis_change(n: int):
    """Invertible map between free words of weight n and the display
    monomials (zeta(n) plus zeta-products), as (monomials, matrix)."""
    frees = [w for w in free_words() if len(w) == n]
    if n == 5:
        monos = [((5,), zeta(5)), ((2, 3), zeta(2) * zeta(3))]
    elif n == 6:
        monos = [((6,), zeta(6)), ((3, 3), zeta(3) * zeta(3))]
    else:
        monos = [((n,), zeta(n))]
    matrix = [[m.coeffs.get(w, mpq(0)) for w in frees] for _, m in monos]
    return frees, [label for label, _ in monos], matrix


def _invert(matrix):
    n = len(matrix)
    aug = [row[:] + [mpq(1) if i == j else mpq(0) for j in range(n)]
           for i, row in enumerate(matrix)]
    for i in range(n):
        piv = next(r for r in range(i, n) if aug[r][i])
        aug[i], aug[piv] = aug[piv], aug[i]
        inv = 1 / aug[i][i]
        aug[i] = [a * inv for a in aug[i]]
        for r in range(n):
            if r != i and aug[r][i]:
                f = aug[r][i]
                aug[r] = [a - f * b for a, b in zip(aug[r], aug[i])]
    return [row[n:] for row in aug]


def to_basis_monomials(expr: MZVExpr) -> dict:
    """Decompose over 1, zeta(2..6), zeta(2)zeta(3), zeta(3)^2."""
    out: dict = {}
    if expr.rational_part():
        out[()] = expr.rational_part()
    by_weight: dict = {}
    for w, c in expr.coeffs.items():
        if w:
            by_weight.setdefault(len(w), {})[w] = c
    for n, piece in sorted(by_weight.items()):
        frees, labels, matrix = _basis_change(n)
        inv = _invert(matrix)
        vec = [piece.get(w, mpq(0)) for w in frees]
        for j, label in enumerate(labels):
            coef = sum((inv[i][j] * vec[i] for i in range(len(frees))), mpq(0))
            if coef:
                out[label] = out.get(label, mpq(0)) + coef
    return out


def format_mzv(expr: MZVExpr) -> str:
    monos = to_basis_monomials(expr)
    if not monos:
        return "0"
    parts = []
    for label in sorted(monos, key=lambda t: (sum(t), t)):
        c = monos[label]
        body = "*".join(f"z{k}" for k in label)
        if not body:
            text = str(c)
        elif c == 1:
            text = body
        elif c == -1:
            text = f"-{body}"
        else:
            text = f"{c}*{body}"
        if parts and not text.startswith("-"):
            parts.append(f"+ {text}")
        elif parts:
            parts.append(f"- {text[1:]}")
        else:
            parts.append(text)
    return " ".join(parts)


# ---------------------------------------------------------------------------
# regularized values at infinity

@lru_cache(maxsize=None)
@lru_cache(maxsize=None)
def zeta_infinity_table(max_weight: int = 5) -> dict:
    """Regularized limits at infinity of the two-letter hyperlogarithms
    with singularities {0, -1}, indexed in the generating-series
    orientation: the series lists words with the innermost letter first,
    so the table entry for a word is reg_infinity_word of its reverse."""
    out = {(): MZV_ONE}
    for n in range(1, max_weight + 1):
        for w in all_words(n):
            val = reg_infinity_word(tuple(reversed(w)))
            if not val.is_zero():
                out[w] = val
    return out


def zeta_infinity(w: Word, max_weight: int = 5) -> MZVExpr:
    if len(w) > max_weight:
        raise UnresolvedConstantError(
            f"regularized value at infinity beyond weight {max_weight}: {w}")
    return zeta_infinity_table(max_weight).get(tuple(w), MZV_ZERO)


@lru_cache(maxsize=None)
def reg_infinity_word(w: Word) -> MZVExpr:
    """Regularized limit at infinity of the hyperlogarithm L_w(z) with
    singularities (0, -1), left letter outermost.

    Moving the ODE to t = z/(1+z) turns the limit z -> infinity into the
    shuffle-regularized limit t -> 1 in the substituted letters
    x0 -> x0, x1 -> x0 + x1, so the value is the sum of zeta_sh over all
    words obtained from w by flipping any subset of 0-letters to 1."""
    w = tuple(w)
    zeros = [i for i, a in enumerate(w) if a == X0]
    total = MZV_ZERO
    for r in range(len(zeros) + 1):
        for flips in itertools.combinations(zeros, r):
            v = list(w)
            for i in flips:
                v[i] = X1
            total = total + zeta_word(tuple(v))
    return total


# ---------------------------------------------------------------------------
# frozen table and certification

_DATA_FILE = "mzv_normal_w6.json"


def _table_blob() -> dict:
    table = normal_table()
    return {
        "version": 1,
        "max_weight": MAX_WEIGHT,
        "free": ["".join(map(str, w)) for w in free_words()],
        "table": {
            "".join(map(str, w)): {"".join(map(str, v)): str(c)
                                   for v, c in sorted(exp.items())}
            for w, exp in sorted(normal_table().items())
        },
    }


def write_table_file(path=None) -> str:
    """Regenerate the shipped relation-table artifact."""
    if path is None:
        path = resources.files("feynmzv").joinpath("data", _DATA_FILE)
    text = json.dumps(_table_blob(), indent=1, sort_keys=True)
    with open(str(path), "w") as fh:
        fh.write(text + "\n")
    return str(path)


def load_table_file() -> dict:
    blob = json.loads(
        resources.files("feynmzv").joinpath("data", _DATA_FILE).read_text())
    return blob


def certify_relations(digits: int = 60) -> float:
    """Numerically confirm every rewrite of the table; returns the worst
    absolute deviation (which the tests pin below 1e-40)."""
    from . import numeric
    import mpmath
    worst = 0.0
    with mpmath.workdps(digits + 10):
        values = {w: numeric.eval_mzv(word_to_composition(w), digits)
                  for w in normal_table()}
        for w, exp in normal_table().items():
            rhs = mpmath.mpf(0)
            for v, c in exp.items():
                rhs += mpmath.mpf(int(c.numerator)) / int(c.denominator) * values[v]
            dev = abs(values[w] - rhs)
            worst = max(worst, float(dev))
    return worst
