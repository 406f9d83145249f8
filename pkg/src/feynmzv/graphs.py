"""Feynman graphs and their spanning-tree polynomials.

A two-point graph carries exactly two marked external vertices; closing it
joins them by one extra edge.  The first graph polynomial U is computed by
memoized deletion-contraction; the second polynomial V (the 2-forest sum
separating the externals) falls out of the closure identity

    U(closed G) = V(G) + alpha_{L+1} * U(G)

as U of the graph with the two externals identified, which is how we
compute it.  Edge k owns the variable "a<k>".
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from pathlib import Path

from .polyring import ONE, ZERO, MultiPoly

_DATA = Path(__file__).parent / "data" / "graphs"


@dataclass(frozen=True)
class Edge:
    id: int
    u: str
    v: str

    def var(self) -> str:
        return f"a{self.id}"


@dataclass(frozen=True)
class FeynGraph:
    vertices: tuple[str, ...]
    edges: tuple[Edge, ...]
    externals: tuple[str, ...] = ()

    def __post_init__(self):
        names = set(self.vertices)
        if len(names) != len(self.vertices):
            raise ValueError("duplicate vertex names")
        for e in self.edges:
            if e.u not in names or e.v not in names:
                raise ValueError(f"edge {e.id} touches unknown vertex")
        ids = [e.id for e in self.edges]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate edge ids")
        for x in self.externals:
            if x not in names:
                raise ValueError(f"external {x!r} is not a vertex")

    # -- elementary invariants -----------------------------------------

    def num_components(self) -> int:
        parent = {v: v for v in self.vertices}

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for e in self.edges:
            ra, rb = find(e.u), find(e.v)
            if ra != rb:
                parent[ra] = rb
        return len({find(v) for v in self.vertices})

    def is_connected(self) -> bool:
        return self.num_components() == 1

    def loop_number(self) -> int:
        """First Betti number h = E - V + (number of components)."""
        return len(self.edges) - len(self.vertices) + self.num_components()

    def edge_by_id(self, eid: int) -> Edge:
        for e in self.edges:
            if e.id == eid:
                return e
        raise KeyError(f"no edge {eid}")

    def edge_vars(self) -> tuple[str, ...]:
        return tuple(e.var() for e in sorted(self.edges, key=lambda e: e.id))

    # -- surgery ---------------------------------------------------------

    def delete_edge(self, eid: int) -> "FeynGraph":
        return FeynGraph(self.vertices,
                         tuple(e for e in self.edges if e.id != eid),
                         self.externals)

    def contract_edge(self, eid: int) -> "FeynGraph":
        e = self.edge_by_id(eid)
        if e.u == e.v:
            raise ValueError(f"cannot contract self-loop {eid}")
        # keep e.u, retire e.v (externals follow the merge)
        keep, gone = e.u, e.v
        verts = tuple(v for v in self.vertices if v != gone)
        edges = tuple(Edge(x.id,
                           keep if x.u == gone else x.u,
                           keep if x.v == gone else x.v)
                      for x in self.edges if x.id != eid)
        ext = tuple(dict.fromkeys(keep if v == gone else v for v in self.externals))
        return FeynGraph(verts, edges, ext)

    def close_legs(self) -> "FeynGraph":
        """Join the two externals by a new edge numbered max id + 1."""
        if len(self.externals) != 2:
            raise ValueError("need exactly two external vertices to close")
        new_id = max((e.id for e in self.edges), default=0) + 1
        return FeynGraph(self.vertices,
                         self.edges + (Edge(new_id, *self.externals),),
                         ())

    def merge_externals(self) -> "FeynGraph":
        if len(self.externals) != 2:
            raise ValueError("need exactly two external vertices to merge")
        a, b = self.externals
        verts = tuple(v for v in self.vertices if v != b)
        edges = tuple(Edge(e.id,
                           a if e.u == b else e.u,
                           a if e.v == b else e.v)
                      for e in self.edges)
        return FeynGraph(verts, edges, ())

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        return {
            "vertices": list(self.vertices),
            "edges": [{"id": e.id, "u": e.u, "v": e.v} for e in self.edges],
            "externals": list(self.externals),
        }

    @staticmethod
    def from_json(data: dict) -> "FeynGraph":
        return FeynGraph(tuple(data["vertices"]),
                         tuple(Edge(int(e["id"]), e["u"], e["v"])
                               for e in data["edges"]),
                         tuple(data.get("externals", ())))


# ---------------------------------------------------------------------------
# Symanzik polynomials

_U_MEMO: dict = {}


def _canon(g: FeynGraph):
    """Isomorphism-insensitive-enough memo key: relabel vertices by first
    appearance in the sorted edge list.  Edge ids (the variables) stay."""
    label: dict[str, int] = {}
    rows = []
    for e in sorted(g.edges, key=lambda e: e.id):
        for x in (e.u, e.v):
            if x not in label:
                label[x] = len(label)
        a, b = label[e.u], label[e.v]
        rows.append((e.id, min(a, b), max(a, b)))
    isolated = len(g.vertices) - len(label)
    return (tuple(rows), isolated)


def symanzik_u(g: FeynGraph) -> MultiPoly:
    """First graph polynomial: sum over spanning trees T of the product of
    alpha_e over edges NOT in T.  Zero when the graph is disconnected."""
    if not g.is_connected():
        return ZERO
    return _u_rec(g)


def _u_rec(g: FeynGraph) -> MultiPoly:
    if not g.edges:
        return ONE
    key = _canon(g)
    hit = _U_MEMO.get(key)
    if hit is not None:
        return hit
    e = max(g.edges, key=lambda e: e.id)
    if e.u == e.v:
        # self-loop: never in a tree
        out = MultiPoly.var(e.var()) * _u_rec(g.delete_edge(e.id))
    else:
        contracted = _u_rec(g.contract_edge(e.id))
        deleted = g.delete_edge(e.id)
        if deleted.num_components() == g.num_components():
            out = contracted + MultiPoly.var(e.var()) * _u_rec(deleted)
        else:
            out = contracted  # bridge: every spanning tree uses it
    _U_MEMO[key] = out
    return out


def symanzik_v(g: FeynGraph) -> MultiPoly:
    """Second polynomial at unit external momentum: the 2-forest sum over
    {T1, T2} separating the two externals, product of the complementary
    alphas.  Computed as U of the graph with externals identified."""
    return symanzik_u(g.merge_externals())


def closure_parts(g: FeynGraph) -> tuple[MultiPoly, MultiPoly, str]:
    """(U_G, V_G, closing variable) with U(closed) = V + a_new * U."""
    closed = g.close_legs()
    new_var = closed.edges[-1].var()
    return symanzik_u(g), symanzik_v(g), new_var


# ---------------------------------------------------------------------------
# power counting

@dataclass
class DivergenceReport:
    two_point: bool
    edge_count_ok: bool          # L = 2h + 1, i.e. closure is log-divergent
    loop_number: int
    closed_loop_number: int
    subdivergence_free: bool
    divergent_subgraph: tuple[int, ...] | None = None

    @property
    def is_bpd(self) -> bool:
        return self.two_point and self.edge_count_ok and self.subdivergence_free


def check_bpd(g: FeynGraph) -> DivergenceReport:
    """Broken primitive divergent test for a two-point graph.

    Conditions: two marked externals, L = 2h+1 (equivalently the closure
    has exactly twice as many edges as loops), and the closure has no
    strict subgraph gamma with h(gamma) >= 1 and |gamma| <= 2 h(gamma).
    """
    two_point = len(g.externals) == 2
    h = g.loop_number()
    L = len(g.edges)
    edge_ok = two_point and g.is_connected() and L == 2 * h + 1
    closed_h = h + 1 if two_point else h
    sub_ok = True
    witness = None
    if edge_ok:
        closed = g.close_legs()
        closed_h = closed.loop_number()
        bad = find_divergent_subgraph(closed)
        if bad is not None:
            sub_ok = False
            witness = bad
    return DivergenceReport(two_point, edge_ok, h, closed_h, sub_ok, witness)


def find_divergent_subgraph(g: FeynGraph) -> tuple[int, ...] | None:
    """Smallest strict edge-subset gamma with h(gamma) >= 1 and
    |gamma| <= 2 h(gamma); None if there is none.  Plain scan — shipped
    graphs stay at <= 2^12 subsets."""
    edges = sorted(g.edges, key=lambda e: e.id)
    m = len(edges)
    for size in range(1, m):
        for combo in itertools.combinations(edges, size):
            verts = set()
            for e in combo:
                verts.add(e.u)
                verts.add(e.v)
            sub = FeynGraph(tuple(verts), tuple(combo))
            hs = sub.loop_number()
            if hs >= 1 and size <= 2 * hs:
                return tuple(e.id for e in combo)
    return None


def is_primitive_divergent(closed: FeynGraph) -> bool:
    """For a closed (vacuum) graph: log-divergent overall and no strict
    divergent subgraph."""
    if closed.externals:
        raise ValueError("expected a closed graph")
    if len(closed.edges) != 2 * closed.loop_number():
        return False
    return find_divergent_subgraph(closed) is None


# ---------------------------------------------------------------------------
# symmetries

def automorphisms(g: FeynGraph, max_vertices: int = 9) -> list[dict[int, int]]:
    """Edge-id permutations induced by vertex symmetries (preserving the
    edge multiset and the external set), identity included.  Brute force
    over vertex permutations; beyond max_vertices only the identity is
    returned, which is always sound.  Parallel edges are matched in
    id-sorted order, a choice of representatives inside the full
    (edge-swapping) automorphism group."""
    ids = sorted(e.id for e in g.edges)
    if len(g.vertices) > max_vertices:
        return [{i: i for i in ids}]
    pair_ids: dict[frozenset, list[int]] = {}
    for e in g.edges:
        pair_ids.setdefault(frozenset((e.u, e.v)), []).append(e.id)
    for same in pair_ids.values():
        same.sort()
    ext = set(g.externals)
    out: list[dict[int, int]] = []
    seen: set[tuple] = set()
    for perm in itertools.permutations(g.vertices):
        m = dict(zip(g.vertices, perm))
        if {m[x] for x in ext} != ext:
            continue
        emap: dict[int, int] = {}
        for p, same in pair_ids.items():
            target = pair_ids.get(frozenset(m[v] for v in p))
            if target is None or len(target) != len(same):
                emap = {}
                break
            emap.update(zip(same, target))
        if not emap:
            continue
        key = tuple(emap[i] for i in ids)
        if key not in seen:
            seen.add(key)
            out.append(emap)
    return out


def edge_orbits(g: FeynGraph, max_vertices: int = 9) -> list[tuple[int, ...]]:
    """Partition the edge ids into orbits of the automorphism group.

    Edges in one orbit give variable relabelings of the same reduction
    problem, so a scan over one edge per orbit is exhaustive."""
    ids = [e.id for e in g.edges]
    parent = {i: i for i in ids}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    pair_ids: dict[frozenset, list[int]] = {}
    for e in g.edges:
        pair_ids.setdefault(frozenset((e.u, e.v)), []).append(e.id)
    for same in pair_ids.values():
        for i in same[1:]:
            union(same[0], i)
    for emap in automorphisms(g, max_vertices=max_vertices):
        for a, b in emap.items():
            union(a, b)
    groups: dict[int, list[int]] = {}
    for i in ids:
        groups.setdefault(find(i), []).append(i)
    return sorted((tuple(sorted(v)) for v in groups.values()), key=min)


# ---------------------------------------------------------------------------
# shipped samples

def _bubble() -> FeynGraph:
    return FeynGraph(("v1", "v2"),
                     (Edge(1, "v1", "v2"), Edge(2, "v1", "v2")),
                     ("v1", "v2"))


def _twoloop() -> FeynGraph:
    # K4 minus one edge; the missing edge's endpoints are the externals.
    # Labeled so that U and V come out in the reference shape:
    #   U = (a1+a5)(a2+a4) + a3(a1+a2+a4+a5)
    return FeynGraph(
        ("v1", "v2", "v3", "v4"),
        (Edge(1, "v1", "v3"), Edge(2, "v2", "v3"), Edge(3, "v3", "v4"),
         Edge(4, "v2", "v4"), Edge(5, "v1", "v4")),
        ("v1", "v2"))


def _ws3_closed() -> FeynGraph:
    return _twoloop().close_legs()


def _ws4() -> FeynGraph:
    # wheel with four spokes, broken at one rim edge (externals there)
    verts = ("hub", "r1", "r2", "r3", "r4")
    edges = (Edge(1, "hub", "r1"), Edge(2, "hub", "r2"),
             Edge(3, "hub", "r3"), Edge(4, "hub", "r4"),
             Edge(5, "r1", "r2"), Edge(6, "r2", "r3"),
             Edge(7, "r3", "r4"))
    return FeynGraph(verts, edges, ("r4", "r1"))


def _ws4_closed() -> FeynGraph:
    return _ws4().close_legs()


def _k34_broken() -> FeynGraph:
    verts = tuple(f"p{i}" for i in range(1, 4)) + tuple(f"q{j}" for j in range(1, 5))
    edges = []
    eid = 0
    for i in range(1, 4):
        for j in range(1, 5):
            eid += 1
            edges.append(Edge(eid, f"p{i}", f"q{j}"))
    # drop edge 1 = (p1, q1); its endpoints become the externals
    return FeynGraph(verts, tuple(edges[1:]), ("p1", "q1"))


def _k34_closed() -> FeynGraph:
    return _k34_broken().close_legs()


_SAMPLES = {
    "bubble": _bubble,
    "twoloop": _twoloop,
    "ws3-closed": _ws3_closed,
    "ws4": _ws4,
    "ws4-closed": _ws4_closed,
    "k34": _k34_broken,
    "k34-closed": _k34_closed,
}


def sample_graph(name: str) -> FeynGraph:
    """Load a shipped sample; prefers the JSON artifact, falls back to the
    builder (and is what regenerates the artifacts)."""
    if name not in _SAMPLES:
        raise KeyError(f"unknown sample {name!r}; have {sorted(_SAMPLES)}")
    path = _DATA / f"{name}.json"
    if path.exists():
        return FeynGraph.from_json(json.loads(path.read_text()))
    return _SAMPLES[name]()


def write_sample_files(directory: Path | None = None) -> list[Path]:
    directory = directory or _DATA
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, build in _SAMPLES.items():
        p = directory / f"{name}.json"
        p.write_text(json.dumps(build().to_json(), indent=2) + "\n")
        written.append(p)
    return written
