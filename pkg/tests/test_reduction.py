import pytest
from gmpy2 import mpq

from feynmzv.errors import NotLinearError
from feynmzv.graphs import sample_graph, symanzik_u
from feynmzv.polyring import MultiPoly, RationalFunction, format_poly, parse_poly
from feynmzv.reduction import (FubiniTable, LimitValue, PolySet, SigmaEntry,
                               SigmaSet, analyze_graph, classify_ramification,
                               iterated_limit, root_of_unity_order,
                               search_order, sigma_sets, simple_step)

P = parse_poly


def polyset(*texts):
    return PolySet([P(t) for t in texts])


def as_text(s):
    return {format_poly(p) for p in s}


@pytest.fixture(scope="module")
def two_loop_table():
    u = symanzik_u(sample_graph("twoloop").close_legs())
    return FubiniTable(PolySet([u]), [f"a{i}" for i in range(1, 7)])


@pytest.fixture(scope="module")
def ws3_table():
    # hyperplane a5 = 1, variables a1, a2, a3, a4, a6
    u = symanzik_u(sample_graph("ws3-closed"))
    start = PolySet([u.subs("a5", 1)])
    return FubiniTable(start, ["a1", "a2", "a3", "a4", "a6"])


# -- polynomial set hygiene ---------------------------------------------------

def test_polyset_drops_constants_and_monomials():
    s = polyset("3", "a1", "2*a1*a2", "a1 + a2", "0")
    assert as_text(s) == {"a1 + a2"}


def test_polyset_primitive_normalization():
    s = polyset("2*a1 + 2*a2", "-a1 - a2")
    assert as_text(s) == {"a1 + a2"}


def test_polyset_intersection_and_restrict():
    s = polyset("a1 + a2", "a1*a2 + a3")
    t = polyset("a1 + a2", "a3 + 1")
    assert as_text(s.intersect(t)) == {"a1 + a2"}
    assert as_text(s.restrict("a2")) == {"a1 + 1", "a1 + a3"}


# -- one elimination ----------------------------------------------------------

def test_simple_step_splits_and_cross_terms():
    # f1 = a1*a2 + a3, f2 = a1 + a2: cross = a3 - a2^2 up to sign
    s = polyset("a1*a2 + a3", "a1 + a2")
    out = simple_step(s, "a1")
    assert as_text(out) == {"a2^2 - a3"}


def test_simple_step_nonlinear_raises():
    with pytest.raises(NotLinearError):
        simple_step(polyset("a1^2 + a2"), "a1")


def test_simple_step_factors_cross_difference():
    # the two-loop Dodgson square appears and is replaced by its root
    u = symanzik_u(sample_graph("twoloop").close_legs())
    s61 = simple_step(simple_step(PolySet([u]), "a6"), "a1")
    assert "a2*a5 + a3*a4 + a3*a5 + a4*a5" in as_text(s61)
    assert len(s61) == 5


# -- the two-loop chain (plain, ordered) --------------------------------------

def test_two_loop_simple_chain(two_loop_table):
    t = two_loop_table
    s6 = t.simple_chain(["a6"])
    u = symanzik_u(sample_graph("twoloop"))
    assert u in s6 and len(s6) == 2

    s612 = t.simple_chain(["a6", "a1", "a2"])
    assert as_text(s612) == {"a4 + a5", "a3*a4 + a3*a5 + a4*a5",
                             "a3 + a4", "a3 + a5", "a3 - a4"}

    s6125 = t.simple_chain(["a6", "a1", "a2", "a5"])
    assert as_text(s6125) == {"a3 + a4", "a3 - a4"}

    assert len(t.simple_chain(["a6", "a1", "a2", "a5", "a3"])) == 0


def test_two_loop_fubini_intersections(two_loop_table):
    t = two_loop_table
    s256 = t.get(frozenset({"a2", "a5", "a6"}))
    assert as_text(s256) == {"a3 + a4", "a1 + a3 + a4",
                             "a1*a3 + a1*a4 + a3*a4", "a1 + a3"}

    s256_1 = simple_step(s256, "a1", t.registry)
    assert as_text(s256_1) == {"a3 + a4", "a3^2 + a3*a4 + a4^2"}

    s6125 = t.get(frozenset({"a1", "a2", "a5", "a6"}))
    assert as_text(s6125) == {"a3 + a4"}


def test_fubini_branches_differ_but_intersect(two_loop_table):
    # the three branch sets into {2,5,6} have 6 elements each and differ;
    # only their common part survives
    t = two_loop_table
    b5 = simple_step(t.get(frozenset({"a2", "a6"})), "a5", t.registry)
    b2 = simple_step(t.get(frozenset({"a5", "a6"})), "a2", t.registry)
    b6 = simple_step(t.get(frozenset({"a2", "a5"})), "a6", t.registry)
    assert len(b5) == len(b2) == len(b6) == 6
    assert b5 != b2
    common = b5.intersect(b2).intersect(b6)
    assert common == t.get(frozenset({"a2", "a5", "a6"}))


def test_fubini_subset_invariance(two_loop_table):
    # every defined subset table entry is contained in each of its
    # one-variable simple refinements
    t = two_loop_table
    x = frozenset({"a1", "a2", "a6"})
    s = t.get(x)
    for r in x:
        child = t.get(x - {r})
        if child is None or not child.all_linear_in(r):
            continue
        branch = simple_step(child, r, t.registry)
        assert s.polys <= branch.polys


def test_blocked_subsets_are_none():
    table = FubiniTable(polyset("a1^2 + a2"), ["a1", "a2"])
    assert table.get(frozenset({"a1"})) is None
    # via a2 the quadratic member survives to block a1 again
    assert table.get(frozenset({"a2"})) is not None


# -- the restricted wheel chain ------------------------------------------------

def test_ws3_restricted_chain(ws3_table):
    t = ws3_table
    assert as_text(t.get(frozenset({"a1", "a6"}))) == {
        "a2*a3 + a3*a4 + a2 + a3 + a4",
        "a2 + a3 + a4",
        "a3*a4 + a3 + a4",
        "a2*a4 + a3*a4 + a2 + a3 + a4",
        "a3*a4 + a2 + a3 + a4"}
    assert as_text(t.get(frozenset({"a1", "a2", "a6"}))) == {
        "a4 + 1", "a3 + 1", "a3*a4 + a3 + a4", "a3 + a4"}
    assert as_text(t.get(frozenset({"a1", "a2", "a3", "a6"}))) == {"a4 + 1"}


def test_ws3_sigma_sets(ws3_table):
    sig = sigma_sets(ws3_table, ("a6", "a1", "a2", "a3", "a4"))
    by_var = {s.variable: s for s in sig}

    def alphabet(v):
        return {str(r) for r in by_var[v].alphabet_roots()}

    assert alphabet("a1") == {
        "0",
        "(-a2*a3 - a3*a4 - a2 - a3 - a4)/(a2 + a3 + a4)",
        "(-a2*a3*a4 - a2*a3 - a2*a4)/(a2*a4 + a3*a4 + a2 + a3 + a4)"}
    assert alphabet("a2") == {
        "0", "-a3 - a4", "-a3*a4 - a3 - a4",
        "(-a3*a4 - a3 - a4)/(a3 + 1)", "(-a3*a4 - a3 - a4)/(a4 + 1)"}
    assert alphabet("a3") == {"0", "-1", "-a4", "(-a4)/(a4 + 1)"}
    assert alphabet("a4") == {"0", "-1"}
    # alphabet sizes drive the hyperlogarithm algebras downstream
    assert [len(by_var[v].alphabet_roots()) for v in ("a1", "a2", "a3", "a4")] \
        == [3, 5, 4, 2]


def test_ws3_classification(ws3_table):
    rep = classify_ramification(ws3_table, ("a6", "a1", "a2", "a3", "a4"))
    assert rep.verdict == "mzv"
    assert rep.root_order == 1
    flat = [str(x) for lvs in rep.limits.values() for x in lvs]
    assert set(flat) <= {"0", "-1"}


# -- the two-loop ramification example ------------------------------------------

def test_two_loop_restricted_sigma():
    # hyperplane a4 = 1, order (6, 2, 5, 1, 3)
    u = symanzik_u(sample_graph("twoloop").close_legs())
    t = FubiniTable(PolySet([u.subs("a4", 1)]), ["a1", "a2", "a3", "a5", "a6"])
    assert as_text(t.get(frozenset({"a2", "a5", "a6"}))) == {
        "a3 + 1", "a1 + a3 + 1", "a1*a3 + a1 + a3", "a1 + a3"}
    sig = sigma_sets(t, ("a6", "a2", "a5", "a1", "a3"))
    by_var = {s.variable: s for s in sig}
    assert {str(r) for r in by_var["a1"].rational_roots()} == {
        "-a3 - 1", "(-a3)/(a3 + 1)", "-a3"}
    assert {str(r) for r in by_var["a3"].rational_roots()} == {"-1"}
    rep = classify_ramification(t, ("a6", "a2", "a5", "a1", "a3"))
    assert rep.verdict == "mzv"
    a1_limits = {str(x) for x in rep.limits["a1"]}
    assert a1_limits == {"0", "-1"}


# -- order search ----------------------------------------------------------------

def test_search_order_finds_admissible(ws3_table):
    orders = search_order(ws3_table.start, ws3_table.variables,
                          table=ws3_table)
    assert len(orders) == 1
    order = orders[0]
    assert set(order) == set(ws3_table.variables)
    # the found order must itself classify cleanly
    rep = classify_ramification(ws3_table, order)
    assert rep.verdict == "mzv"


def test_search_order_final_pair(two_loop_table):
    t = two_loop_table
    orders = search_order(t.start, t.variables, final_pair=("a3", "a4"),
                          table=t, all_orders=False)
    assert orders and set(orders[0][-2:]) == {"a3", "a4"}


def test_search_order_blocked():
    s = polyset("a1^2*a2 + a2^2*a1 + a1^2*a2^2")
    assert search_order(s, ["a1", "a2"]) == []


# -- limits and root classification ----------------------------------------------

def test_iterated_limit_values():
    r = RationalFunction(P("-a3 - 1"), P("1"))
    lv = iterated_limit(r, ["a3"])
    assert lv.value == -1
    r2 = RationalFunction(P("-a3"), P("a3 + 1"))
    assert iterated_limit(r2, ["a3"]).value == 0
    r3 = RationalFunction(P("a3 + 1"), P("a3"))
    assert iterated_limit(r3, ["a3"]).infinite


def test_iterated_limit_respects_order():
    # a2/(a2 + a3): limit a2 first gives 0, a3 first gives 1
    r = RationalFunction(P("a2"), P("a2 + a3"))
    assert iterated_limit(r, ["a2", "a3"]).value == 0
    assert iterated_limit(r, ["a3", "a2"]).value == 1


def test_root_of_unity_orders():
    assert root_of_unity_order(LimitValue(value=mpq(0)), 6) == 1
    assert root_of_unity_order(LimitValue(value=mpq(-1)), 6) == 1
    assert root_of_unity_order(LimitValue(infinite=True), 6) == 1
    assert root_of_unity_order(LimitValue(value=mpq(1)), 6) == 2
    assert root_of_unity_order(LimitValue(value=mpq(2)), 6) is None
    # x^2 - x + 1 divides x^3 + 1: third roots
    assert root_of_unity_order(LimitValue(poly=P("a1^2 - a1 + 1")), 6) == 3
    # x^2 + x + 1 divides x^6 - 1 and nothing smaller: sixth roots
    assert root_of_unity_order(LimitValue(poly=P("a1^2 + a1 + 1")), 6) == 6
    assert root_of_unity_order(LimitValue(poly=P("a1^2 + a1 + 1")), 5) is None
    assert root_of_unity_order(LimitValue(poly=P("a1^2 - 2")), 6) is None


def test_classify_synthetic_ramified():
    # a family whose only singularity limit is +1: second roots of unity
    table = FubiniTable(polyset("a1 - 1"), ["a1"])
    rep = classify_ramification(table, ("a1",))
    assert rep.verdict == "ramified"
    assert rep.root_order == 2
    assert rep.witnesses


def test_classify_synthetic_failure():
    table = FubiniTable(polyset("a1 - 2"), ["a1"])
    rep = classify_ramification(table, ("a1",))
    assert rep.verdict == "method-fails"
    assert "a1" in rep.witnesses[0]


def test_classify_final_stage_quadratic():
    # an irreducible quadratic at the last stage carries its roots whole
    table = FubiniTable(polyset("a1^2 + a1 + 1"), ["a1"])
    rep = classify_ramification(table, ("a1",))
    assert rep.verdict == "ramified"
    assert rep.root_order == 6


# -- graph-level driver ------------------------------------------------------------

def test_analyze_two_loop():
    rep = analyze_graph(sample_graph("twoloop"))
    assert rep.verdict == "mzv"
    assert rep.reducible
    assert rep.bpd.is_bpd
    assert len(rep.order) == 5
    assert rep.lam not in rep.order
    blob = rep.to_json()
    assert blob["verdict"] == "mzv"
    assert blob["root_order"] == 1
    assert blob["sigma"] and blob["limits"]


def test_analyze_bubble():
    rep = analyze_graph(sample_graph("bubble"))
    assert not rep.bpd.is_bpd          # one-loop bubble is not bpd
    assert rep.verdict == "mzv"        # but its closure still reduces


@pytest.mark.slow
def test_analyze_ws4():
    rep = analyze_graph(sample_graph("ws4"), lam=5)
    assert rep.verdict == "mzv"
    assert rep.reducible and len(rep.order) == 7
