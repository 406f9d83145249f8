import itertools
import json
import random

import pytest

from feynmzv.graphs import (Edge, FeynGraph, check_bpd, closure_parts,
                            find_divergent_subgraph, is_primitive_divergent,
                            sample_graph, symanzik_u, symanzik_v)
from feynmzv.polyring import MultiPoly, parse_poly

P = parse_poly


# -- brute-force oracles ----------------------------------------------------

def _components(vertices, edges):
    parent = {v: v for v in vertices}

    def find(v):
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in edges:
        parent[find(e.u)] = find(e.v)
    return len({find(v) for v in vertices})


def spanning_tree_u(g):
    """First graph polynomial by direct enumeration of spanning trees."""
    n = len(g.vertices)
    total = MultiPoly.zero()
    for tree in itertools.combinations(g.edges, n - 1):
        if _components(g.vertices, tree) != 1:
            continue
        rest = [e for e in g.edges if e not in tree]
        term = MultiPoly.const(1)
        for e in rest:
            term = term * MultiPoly.var(e.var())
        total = total + term
    return total


def two_forest_v(g):
    """Second graph polynomial by enumerating spanning 2-forests that
    separate the two external vertices."""
    n = len(g.vertices)
    s, t = g.externals
    total = MultiPoly.zero()
    for forest in itertools.combinations(g.edges, n - 2):
        if _components(g.vertices, forest) != 2:
            continue
        parent = {v: v for v in g.vertices}

        def find(v):
            while parent[v] != v:
                parent[v] = parent[parent[v]]
                v = parent[v]
            return v

        for e in forest:
            parent[find(e.u)] = find(e.v)
        if find(s) == find(t):
            continue
        rest = [e for e in g.edges if e not in forest]
        term = MultiPoly.const(1)
        for e in rest:
            term = term * MultiPoly.var(e.var())
        total = total + term
    return total


def random_two_point_graph(rng, max_edges=10):
    n = rng.randint(3, 6)
    vertices = tuple(f"v{i}" for i in range(n))
    edges = []
    # random spanning tree first, then extra edges
    for i in range(1, n):
        j = rng.randrange(i)
        edges.append((f"v{j}", f"v{i}"))
    extra = rng.randint(1, max_edges - len(edges))
    for _ in range(extra):
        u, v = rng.sample(vertices, 2)
        edges.append((u, v))
    ext = tuple(rng.sample(vertices, 2))
    return FeynGraph(
        vertices=vertices,
        edges=tuple(Edge(i + 1, u, v) for i, (u, v) in enumerate(edges)),
        externals=ext,
    )


# -- literal references -----------------------------------------------------

U_2LOOP = P("a1*a2 + a1*a4 + a2*a5 + a4*a5 + a1*a3 + a2*a3 + a3*a4 + a3*a5")
V_2LOOP = P("a1*a3*a4 + a1*a3*a5 + a2*a3*a4 + a2*a3*a5 + a2*a4*a5 + a1*a4*a5 "
            "+ a1*a2*a5 + a1*a2*a4")
U_2LOOP_CLOSED = P(
    "a1*a2*a6 + a1*a4*a6 + a2*a5*a6 + a4*a5*a6 + a1*a3*a6 + a2*a3*a6 "
    "+ a3*a4*a6 + a3*a5*a6 + a1*a3*a4 + a1*a3*a5 + a2*a3*a4 + a2*a3*a5 "
    "+ a2*a4*a5 + a1*a4*a5 + a1*a2*a5 + a1*a2*a4")


def test_two_loop_u_and_v_exact():
    g = sample_graph("twoloop")
    assert symanzik_u(g) == U_2LOOP
    assert symanzik_v(g) == V_2LOOP
    assert len(symanzik_u(g)) == 8
    assert len(symanzik_v(g)) == 8


def test_two_loop_closure_sixteen_terms():
    g = sample_graph("twoloop")
    closed = g.close_legs()
    u = symanzik_u(closed)
    assert u == U_2LOOP_CLOSED
    assert len(u) == 16


def test_ws3_closed_is_two_loop_closure():
    # the wheel with three spokes is the closure of the two-loop graph
    ws3 = sample_graph("ws3-closed")
    assert symanzik_u(ws3) == U_2LOOP_CLOSED


def test_closure_identity_on_samples():
    for name in ("bubble", "twoloop", "ws4", "k34"):
        g = sample_graph(name)
        u, v, closing = closure_parts(g)
        closed_u = symanzik_u(g.close_legs())
        assert closed_u == v + MultiPoly.var(closing) * u, name


def test_closure_identity_random_graphs():
    rng = random.Random(20240817)
    checked = 0
    while checked < 50:
        g = random_two_point_graph(rng)
        if not g.is_connected() or g.loop_number() < 1:
            continue
        u, v, closing = closure_parts(g)
        assert symanzik_u(g.close_legs()) == v + MultiPoly.var(closing) * u
        checked += 1


def test_u_matches_tree_enumeration_random():
    rng = random.Random(7)
    for _ in range(25):
        g = random_two_point_graph(rng, max_edges=8)
        assert symanzik_u(g) == spanning_tree_u(g)


def test_v_matches_forest_enumeration_random():
    rng = random.Random(8)
    checked = 0
    while checked < 25:
        g = random_two_point_graph(rng, max_edges=8)
        if g.externals[0] == g.externals[1]:
            continue
        assert symanzik_v(g) == two_forest_v(g)
        checked += 1


def test_term_counts():
    assert len(symanzik_u(sample_graph("ws4-closed"))) == 45
    assert len(symanzik_u(sample_graph("k34-closed"))) == 432


def test_u_homogeneous_of_loop_degree():
    for name in ("twoloop", "ws3-closed", "ws4-closed", "k34-closed"):
        g = sample_graph(name)
        u = symanzik_u(g)
        h = g.loop_number()
        assert all(sum(e) == h for e in u.terms)
        # multilinear: each variable appears to the first power at most
        assert all(x <= 1 for e in u.terms for x in e)


def test_disconnected_u_is_zero():
    g = FeynGraph(vertices=("v1", "v2", "v3", "v4"),
                  edges=(Edge(1, "v1", "v2"), Edge(2, "v3", "v4")),
                  externals=("v1", "v3"))
    assert symanzik_u(g).is_zero()


# -- divergence bookkeeping -------------------------------------------------

def test_bpd_verdicts():
    assert check_bpd(sample_graph("twoloop")).is_bpd
    assert check_bpd(sample_graph("ws4")).is_bpd
    assert check_bpd(sample_graph("k34")).is_bpd
    assert not check_bpd(sample_graph("bubble")).is_bpd


def test_bpd_edge_loop_count():
    rep = check_bpd(sample_graph("k34"))
    assert rep.loop_number == 5
    assert rep.edge_count_ok
    assert rep.subdivergence_free


def test_primitive_divergent_closure():
    assert is_primitive_divergent(sample_graph("ws3-closed"))
    assert is_primitive_divergent(sample_graph("ws4-closed"))


def test_subdivergence_detection():
    # doubling an edge creates a one-loop two-edge subgraph: h=1, |e|=2
    g = sample_graph("twoloop")
    extra = Edge(7, "v1", "v3")
    bad = FeynGraph(vertices=g.vertices, edges=g.edges + (extra,),
                    externals=g.externals)
    witness = find_divergent_subgraph(bad.close_legs())
    assert witness is not None
    assert len(witness) == 2


# -- surgery ----------------------------------------------------------------

def test_contract_and_delete():
    g = sample_graph("bubble")
    d = g.delete_edge(1)
    assert d.loop_number() == g.loop_number() - 1
    c = g.contract_edge(1)
    assert len(c.vertices) == len(g.vertices) - 1
    assert c.loop_number() == g.loop_number()


def test_contract_self_loop_rejected():
    g = FeynGraph(vertices=("v1", "v2"),
                  edges=(Edge(1, "v1", "v1"), Edge(2, "v1", "v2")),
                  externals=("v1", "v2"))
    with pytest.raises(ValueError):
        g.contract_edge(1)


def test_close_legs_new_edge_id():
    g = sample_graph("twoloop")
    closed = g.close_legs()
    assert {e.id for e in closed.edges} == {1, 2, 3, 4, 5, 6}
    assert closed.externals == ()


def test_json_round_trip(tmp_path):
    g = sample_graph("ws4")
    blob = json.dumps(g.to_json())
    back = FeynGraph.from_json(json.loads(blob))
    assert back == g
    assert symanzik_u(back) == symanzik_u(g)
