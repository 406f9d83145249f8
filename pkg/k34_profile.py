import cProfile
import io
import pstats
import time

from feynmzv import graphs
from feynmzv.reduction import FubiniTable, PolySet, edge_var

g = graphs.sample_graph("k34")
closed = g.close_legs()
u = graphs.symanzik_u(closed)
autos = graphs.automorphisms(closed)
cand = [orbit[0] for orbit in graphs.edge_orbits(closed)][0]
all_ids = sorted(e.id for e in closed.edges)
rest = [edge_var(i) for i in all_ids if i != cand]
start = PolySet([u.subs(edge_var(cand), 1)])
syms = [{edge_var(a): edge_var(b) for a, b in emap.items() if a != cand}
        for emap in autos if emap.get(cand) == cand]
table = FubiniTable(start, rest, symmetries=syms)

pr = cProfile.Profile()
t0 = time.time()
pr.enable()
# walk the first three levels of the lattice breadth-first, time-capped
level = [frozenset()]
for depth in range(3):
    nxt = []
    for x in level:
        cur = table.get(x)
        if cur is None:
            continue
        for v in rest:
            if v in x:
                continue
            if not cur.all_linear_in(v):
                continue
            y = x | {v}
            got = table.get(y)
            if got is not None:
                nxt.append(y)
        if time.time() - t0 > 240:
            break
    level = nxt
    print(f"depth {depth+1}: {len(level)} live subsets, "
          f"{time.time()-t0:.1f}s, table={len(table.table)}", flush=True)
    if time.time() - t0 > 240:
        break
pr.disable()
buf = io.StringIO()
pstats.Stats(pr, stream=buf).sort_stats("cumulative").print_stats(28)
print(buf.getvalue())
buf = io.StringIO()
pstats.Stats(pr, stream=buf).sort_stats("tottime").print_stats(24)
print(buf.getvalue())
