"""Polynomial reduction of spanning-tree polynomial families.

Starting from S = {U(closed graph)}, one variable is eliminated at a time:
splitting every member f = g*a_r + h and collecting irreducible factors of
all g, h and the cross differences h_i g_j - g_i h_j bounds the singular
locus of the next partial integral.  The order-insensitive ("Fubini")
refinement intersects these sets over all elimination routes, which keeps
them small enough to certify interesting graphs.

The singularity sets Sigma carry, for each integration variable, the roots
-h/g of the family just before that variable is integrated; their iterated
limits at the origin decide whether the integral's coefficients stay inside
multiple zeta values, or land in roots of unity, or escape the method.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from gmpy2 import mpq

from .errors import NotLinearError, NotReducibleError
from . import graphs as graphs_mod
from .polyring import (INFINITY, MultiPoly, RationalFunction, factorize,
                       limit_to_zero, linear_split, format_poly, parse_poly,
                       rename_variables)


def edge_var(k: int) -> str:
    return f"a{k}"


class PolySet:
    """Canonical finite set of primitive polynomials (constants and
    single-variable monomials are conventionally dropped)."""

    __slots__ = ("polys",)

    def __init__(self, polys: Iterable[MultiPoly]):
        keep = set()
        for p in polys:
            if p.is_zero() or p.is_constant():
                continue
            p = p.content_and_primitive()[1]
            if p.is_monomial():
                continue
            keep.add(p)
        self.polys = frozenset(keep)

    def __iter__(self):
        return iter(sorted(self.polys, key=lambda p: p.monic_key()))

    def __len__(self):
        return len(self.polys)

    def __contains__(self, p: MultiPoly) -> bool:
        return p in self.polys

    def __eq__(self, other):
        return isinstance(other, PolySet) and self.polys == other.polys

    def __hash__(self):
        return hash(self.polys)

    def intersect(self, other: "PolySet") -> "PolySet":
        out = PolySet.__new__(PolySet)
        out.polys = self.polys & other.polys
        return out

    def all_linear_in(self, v: str) -> bool:
        return all(p.is_linear_in(v) for p in self.polys)

    def variables(self) -> tuple[str, ...]:
        vs: set[str] = set()
        for p in self.polys:
            vs.update(p.variables)
        from .polyring import _var_key
        return tuple(sorted(vs, key=_var_key))

    def restrict(self, var: str, value=1) -> "PolySet":
        return PolySet(p.subs(var, value) for p in self.polys)

    def rename(self, mapping: Mapping[str, str]) -> "PolySet":
        # the constructor re-normalizes: renaming can change the grlex
        # leading monomial, hence the sign convention
        return PolySet(rename_variables(p, mapping) for p in self.polys)

    def __repr__(self):
        return "{" + ", ".join(format_poly(p) for p in self) + "}"


def simple_step(s: PolySet | Iterable[MultiPoly], var: str,
                hints: "FactorRegistry | None" = None) -> PolySet:
    """One elimination: factors of g_i, h_i and h_i g_j - g_i h_j for the
    splits f_i = g_i * var + h_i.  Raises NotLinearError when any member
    is nonlinear in `var`."""
    if not isinstance(s, PolySet):
        s = PolySet(s)
    registry = hints if hints is not None else FactorRegistry()
    candidates: set[MultiPoly] = set()
    splits = []
    for f in s:
        g, h = linear_split(f, var)
        gu, gp = g.content_and_primitive()
        hu, hp = h.content_and_primitive()
        splits.append((g, h, gu, gp, hu, hp))
        if g:
            candidates.add(gp)
        if h:
            candidates.add(hp)
    for (g1, h1, gu1, gp1, hu1, hp1), (g2, h2, gu2, gp2, hu2, hp2) \
            in itertools.combinations(splits, 2):
        # when either split is one-sided the cross term factors into
        # pieces already collected above
        if g1.is_zero() or g2.is_zero() or h1.is_zero() or h2.is_zero():
            continue
        # shared primitive parts split off without forming the products
        if gp1 == gp2:
            d = gu2 * h1 - gu1 * h2
        elif hp1 == hp2:
            d = hu1 * g2 - hu2 * g1
        else:
            d = h1 * g2 - g1 * h2
        if d:
            candidates.add(d.content_and_primitive()[1])
    out: set[MultiPoly] = set()
    for c in sorted(candidates, key=lambda p: (p.total_degree(), len(p))):
        for base, _mult in registry.factorize(c):
            out.add(base)
    return PolySet(out)


class FactorRegistry:
    """Remembers every irreducible factor seen, so that later candidates
    are first trial-divided by old factors; full factorization of large
    reduction polynomials is the dominant cost otherwise.  Trial division
    is pre-screened by divisibility of integer values at a fixed random
    point."""

    def __init__(self):
        self.known: list[tuple[MultiPoly, int | None]] = []
        self._seen: set[MultiPoly] = set()
        self._cache: dict[MultiPoly, tuple] = {}
        self._point: dict[str, int] = {}
        self._rng = random.Random(0x5EED)

    def _value_at_point(self, p: MultiPoly) -> int | None:
        """p at a fixed random integer point: a factor divides a candidate
        only when its value divides the candidate's value, which screens
        out almost every futile trial division.  None (no screening) when
        a coefficient is not an integer."""
        vals = []
        for v in p.variables:
            w = self._point.get(v)
            if w is None:
                w = self._rng.randrange(64, 1 << 14)
                self._point[v] = w
            vals.append(w)
        total = mpq(0)
        for e, c in p.terms.items():
            m = c
            for w, k in zip(vals, e):
                if k:
                    m = m * w ** k
            total += m
        if total.denominator != 1:
            return None
        return int(total)

    def factorize(self, p: MultiPoly):
        hit = self._cache.get(p)
        if hit is not None:
            return hit
        if p in self._seen:
            bases = ((p, 1),)
            self._cache[p] = bases
            return bases
        pval = self._value_at_point(p)
        hints = []
        for h, hval in self.known:
            if h.total_degree() > p.total_degree() or len(h) > len(p) \
                    or not set(h.variables) <= set(p.variables):
                continue
            if pval is not None and hval is not None and hval != 0 \
                    and pval % hval != 0:
                continue
            hints.append(h)
        hints.sort(key=lambda h: (-h.total_degree(), -len(h)))
        fac = factorize(p, hints=hints)
        bases = tuple((b, m) for b, m in fac)
        for b, _ in bases:
            if b not in self._seen and not b.is_monomial():
                self._seen.add(b)
                self.known.append((b, self._value_at_point(b)))
        self._cache[p] = bases
        return bases


class FubiniTable:
    """Memoized order-intersected reduction sets over subsets of the
    elimination variables.  table[X] is the set after eliminating the
    (unordered) subset X, or None when every elimination route into X is
    blocked by nonlinearity.

    `symmetries` are variable permutations fixing the start set (graph
    automorphisms, say).  Every reduction operation commutes with
    relabeling, so table[pi(X)] = pi(table[X]); subsets are looked up
    through a canonical representative of their symmetry class and the
    result is transported by renaming, which divides the explored part
    of the subset lattice by the group order."""

    def __init__(self, start: PolySet, variables: Sequence[str],
                 symmetries: Iterable[Mapping[str, str]] = ()):
        self.start = start
        self.variables = tuple(variables)
        self.table: dict[frozenset, PolySet | None] = {frozenset(): start}
        self.registry = FactorRegistry()
        self.perms: list[dict[str, str]] = []
        varset = set(self.variables)
        for m in symmetries:
            pm = {v: m.get(v, v) for v in self.variables}
            if set(pm.values()) != varset:
                raise ValueError(f"symmetry does not permute the variables: {m}")
            if any(pm[v] != v for v in self.variables):
                self.perms.append(pm)

    def _canonical(self, x: frozenset):
        """(representative, permutation mapping it back onto x)."""
        best, best_key, back = x, tuple(sorted(x)), None
        for pm in self.perms:
            y = frozenset(pm[v] for v in x)
            key = tuple(sorted(y))
            if key < best_key:
                best, best_key, back = y, key, {pm[v]: v for v in pm}
        return best, back

    def get(self, subset: Iterable[str]) -> PolySet | None:
        x = frozenset(subset)
        if x in self.table:
            return self.table[x]
        if self.perms:
            rep, back = self._canonical(x)
            if rep != x:
                base = self.get(rep)
                result = None if base is None else base.rename(back)
                self.table[x] = result
                return result
        result: PolySet | None = None
        for r in sorted(x):
            child = self.get(x - {r})
            if child is None or not child.all_linear_in(r):
                continue
            branch = simple_step(child, r, hints=self.registry)
            result = branch if result is None else result.intersect(branch)
        self.table[x] = result
        return result

    def simple_chain(self, order: Sequence[str]) -> PolySet:
        """Plain ordered reduction S_(r1,...,rk), no intersection."""
        s = self.start
        for r in order:
            s = simple_step(s, r, hints=self.registry)
        return s


def search_order(start: PolySet, variables: Sequence[str],
                 final_pair: tuple[str, str] | None = None,
                 all_orders: bool = False,
                 table: FubiniTable | None = None) -> list[tuple[str, ...]]:
    """Depth-first search for elimination orders where every intermediate
    Fubini set is linear in the next variable.  Returns full orders (all of
    them when all_orders, else at most one).  `final_pair` pins the last
    two positions (either order)."""
    table = table or FubiniTable(start, variables)
    variables = tuple(variables)
    m = len(variables)
    pair = frozenset(final_pair) if final_pair else None
    found: list[tuple[str, ...]] = []

    def rec(prefix: tuple[str, ...], x: frozenset) -> bool:
        if len(prefix) == m:
            found.append(prefix)
            return not all_orders
        current = table.get(x)
        if current is None:
            return False
        rest = [v for v in variables if v not in x]
        if pair:
            slots_left = m - len(prefix)
            if slots_left > 2:
                rest = [v for v in rest if v not in pair]
            else:
                rest = [v for v in rest if v in pair]
                if len(rest) != slots_left:
                    return False
        cands = []
        for v in rest:
            if not current.all_linear_in(v):
                continue
            nxt = table.get(x | {v})
            if nxt is None:
                continue
            cands.append((len(nxt), v))
        for _, v in sorted(cands):
            if rec(prefix + (v,), x | {v}):
                return True
        return False

    rec((), frozenset())
    return found


# ---------------------------------------------------------------------------
# singularity sets and ramification


@dataclass(frozen=True)
class SigmaEntry:
    """One singularity: a rational-function root -h/g of a set member
    linear in the variable, or (final stage only) an irreducible
    univariate polynomial of degree >= 2 whose roots are the
    singularities."""
    root: RationalFunction | None = None
    poly: MultiPoly | None = None

    def __str__(self):
        return str(self.root) if self.root is not None else f"roots of {self.poly}"


@dataclass
class SigmaSet:
    variable: str
    entries: tuple[SigmaEntry, ...]

    def rational_roots(self) -> list[RationalFunction]:
        return [e.root for e in self.entries if e.root is not None]

    def alphabet_roots(self) -> list[RationalFunction]:
        """The singularities together with 0: integrands carry log powers
        of each variable, so the origin is always a letter."""
        zero = RationalFunction(MultiPoly.zero())
        return [zero] + [r for r in self.rational_roots() if r != zero]


def sigma_sets(table: FubiniTable, order: Sequence[str]) -> list[SigmaSet]:
    """Singularities Sigma_v for each variable v of the order: the roots
    -h/g of the set members just before v is eliminated (members free of v
    contribute nothing; alphabet_roots() adds the ever-present origin).
    Nonlinear members are only tolerated at the last position, as
    irreducible-polynomial entries."""
    out = []
    seen: frozenset = frozenset()
    for pos, v in enumerate(order):
        s = table.get(seen)
        if s is None:
            raise NotReducibleError(f"blocked before {v}: no defined set")
        entries: list[SigmaEntry] = []
        roots: set[RationalFunction] = set()
        for f in s:
            d = f.degree_in(v)
            if d == 0:
                continue
            if d == 1:
                g, h = linear_split(f, v)
                r = RationalFunction(-h, g)
                if r not in roots:
                    roots.add(r)
                    entries.append(SigmaEntry(root=r))
            elif pos == len(order) - 1:
                for base, _m in factorize(f):
                    if base.degree_in(v) == 0:
                        continue
                    if base.degree_in(v) == 1:
                        g, h = linear_split(base, v)
                        r = RationalFunction(-h, g)
                        if r not in roots:
                            roots.add(r)
                            entries.append(SigmaEntry(root=r))
                    else:
                        entries.append(SigmaEntry(poly=base))
            else:
                raise NotLinearError(
                    f"{format_poly(f)} has degree {d} in {v} at position {pos}")
        out.append(SigmaSet(v, tuple(entries)))
        seen = seen | {v}
    return out


@dataclass
class LimitValue:
    """Iterated limit of one sigma entry: a rational number, infinity, or
    an irreducible univariate polynomial capturing algebraic roots."""
    value: mpq | None = None
    infinite: bool = False
    poly: MultiPoly | None = None

    def __str__(self):
        if self.infinite:
            return "oo"
        if self.poly is not None:
            return f"roots of {self.poly}"
        return str(self.value)


def iterated_limit(root: RationalFunction, later: Sequence[str]) -> LimitValue:
    cur: RationalFunction | object = root
    for v in later:
        cur = limit_to_zero(cur, v)
        if cur is INFINITY:
            return LimitValue(infinite=True)
    leftover = cur.variables()
    if leftover:
        raise ValueError(f"limit left variables {leftover}: {cur}")
    return LimitValue(value=cur.const_value())


def root_of_unity_order(lv: LimitValue, p_max: int) -> int | None:
    """Smallest p <= p_max with the limit a singularity of the form -w,
    w^p = 1 (0 and infinity always pass and report p = 1)."""
    if lv.infinite:
        return 1
    if lv.poly is None:
        if lv.value == 0:
            return 1
        w = -lv.value
        for p in range(1, p_max + 1):
            if w ** p == 1:
                return p
        return None
    # polynomial entry: all roots must be -w with w^p = 1, i.e. the
    # polynomial must divide x^p - (-1)^p
    from .polyring import exact_div
    x = lv.poly.variables[0] if lv.poly.variables else None
    if x is None:
        return None
    for p in range(1, p_max + 1):
        target = MultiPoly((x,), {(p,): 1, (0,): -((-1) ** p)})
        if exact_div(target, lv.poly) is not None:
            return p
    return None


@dataclass
class RamificationReport:
    order: tuple[str, ...]
    sigma: list[SigmaSet]
    limits: dict[str, list[LimitValue]]
    verdict: str                       # "mzv" | "ramified" | "method-fails"
    root_order: int = 1                # p, when verdict != "method-fails"
    witnesses: list[str] = field(default_factory=list)


def classify_ramification(table_or_sigma, order: Sequence[str],
                          p_max: int = 6) -> RamificationReport:
    """Apply the iterated-limit criterion to the Sigma sets of an
    admissible order.  Verdicts: every limit in {0, -1, oo} -> "mzv";
    every limit of the form -(p-th root of unity) (or oo) with p <= p_max
    -> "ramified" with the lcm of the orders; anything else ->
    "method-fails" with witnesses."""
    if isinstance(table_or_sigma, FubiniTable):
        sig = sigma_sets(table_or_sigma, order)
    else:
        sig = list(table_or_sigma)
    limits: dict[str, list[LimitValue]] = {}
    verdict = "mzv"
    p_all = 1
    witnesses: list[str] = []
    order = tuple(order)
    for pos, ss in enumerate(sig):
        later = order[pos + 1:]
        lvs: list[LimitValue] = []
        for entry in ss.entries:
            if entry.root is not None:
                lv = iterated_limit(entry.root, later)
            else:
                lv = LimitValue(poly=entry.poly)
            lvs.append(lv)
            p = root_of_unity_order(lv, p_max)
            if p is None:
                verdict = "method-fails"
                witnesses.append(f"{ss.variable}: {entry} -> {lv}")
            else:
                p_all = _lcm(p_all, p)
                if p > 1:
                    witnesses.append(f"{ss.variable}: {entry} -> {lv} (p={p})")
        limits[ss.variable] = lvs
    if verdict != "method-fails" and p_all > 1:
        verdict = "ramified"
    return RamificationReport(order, sig, limits, verdict, p_all, witnesses)


def _lcm(a: int, b: int) -> int:
    from math import gcd
    return a * b // gcd(a, b)


# ---------------------------------------------------------------------------
# graph-level driver


@dataclass
class ReductionReport:
    graph: dict
    bpd: graphs_mod.DivergenceReport
    reducible: bool
    lam: int | None = None
    order: tuple[int, ...] = ()
    ramification: RamificationReport | None = None
    lambdas_tried: tuple[int, ...] = ()
    set_sizes: tuple[int, ...] = ()

    @property
    def verdict(self) -> str:
        if not self.reducible:
            return "method-fails"
        return self.ramification.verdict

    @property
    def root_order(self) -> int:
        return self.ramification.root_order if self.ramification else 1

    def to_json(self) -> dict:
        ram = self.ramification
        return {
            "graph": self.graph,
            "bpd": {
                "is_bpd": self.bpd.is_bpd,
                "two_point": self.bpd.two_point,
                "edge_count_ok": self.bpd.edge_count_ok,
                "loop_number": self.bpd.loop_number,
                "subdivergence_free": self.bpd.subdivergence_free,
                "divergent_subgraph": list(self.bpd.divergent_subgraph or ()),
            },
            "reducible": self.reducible,
            "lambda": self.lam,
            "order": list(self.order),
            "lambdas_tried": list(self.lambdas_tried),
            "set_sizes": list(self.set_sizes),
            "verdict": self.verdict,
            "root_order": self.root_order,
            "sigma": None if ram is None else {
                ss.variable: [str(e) for e in ss.entries] for ss in ram.sigma},
            "limits": None if ram is None else {
                v: [str(x) for x in lvs] for v, lvs in ram.limits.items()},
            "witnesses": [] if ram is None else list(ram.witnesses),
        }


def analyze_graph(g: graphs_mod.FeynGraph, lam: int | None = None,
                  p_max: int = 6, scan_all: bool = False) -> ReductionReport:
    """Full verdict for a two-point graph: close the legs, set one of the
    two final variables to 1, search for an admissible elimination order of
    the rest, then classify the singularity limits.

    lam: fix the hyperplane variable; otherwise edge ids are scanned in
    increasing order (all of them when scan_all, else until a reducible
    choice is found).
    """
    closed = g.close_legs()
    u = graphs_mod.symanzik_u(closed)
    bpd = graphs_mod.check_bpd(g)
    all_ids = sorted(e.id for e in closed.edges)
    autos = graphs_mod.automorphisms(closed)
    if lam is not None:
        lam_candidates = [lam]
    else:
        # edges related by a graph symmetry give relabeled copies of the
        # same reduction, so one representative per orbit suffices
        lam_candidates = [orbit[0] for orbit in graphs_mod.edge_orbits(closed)]
    tried = []
    best = None
    for cand in lam_candidates:
        tried.append(cand)
        rest = [edge_var(i) for i in all_ids if i != cand]
        start = PolySet([u.subs(edge_var(cand), 1)])
        # symmetries fixing the hyperplane edge act on the remaining
        # variables and leave the start set invariant
        syms = [{edge_var(a): edge_var(b) for a, b in emap.items() if a != cand}
                for emap in autos if emap.get(cand) == cand]
        table = FubiniTable(start, rest, symmetries=syms)
        orders = search_order(start, rest, table=table)
        if not orders:
            continue
        order = orders[0]
        ram = classify_ramification(table, order, p_max=p_max)
        sizes = []
        seen: frozenset = frozenset()
        for v in order:
            sizes.append(len(table.get(seen)))
            seen = seen | {v}
        report = ReductionReport(g.to_json(), bpd, True,
                                 lam=cand,
                                 order=tuple(int(v[1:]) for v in order),
                                 ramification=ram,
                                 lambdas_tried=tuple(tried),
                                 set_sizes=tuple(sizes))
        if ram.verdict == "mzv":
            return report
        if best is None or (best.verdict == "method-fails" != ram.verdict):
            best = report
        if not scan_all and best is not None and lam is not None:
            break
    if best is not None:
        best.lambdas_tried = tuple(tried)
        return best
    return ReductionReport(g.to_json(), bpd, False, lambdas_tried=tuple(tried))
