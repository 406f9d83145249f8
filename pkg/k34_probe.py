import threading
import time

from feynmzv import graphs
from feynmzv.polyring import MultiPoly
from feynmzv.reduction import FubiniTable, PolySet, edge_var, search_order

g = graphs.sample_graph("k34")
closed = g.close_legs()
u = graphs.symanzik_u(closed)
autos = graphs.automorphisms(closed)
cands = [orbit[0] for orbit in graphs.edge_orbits(closed)]
print("lambda orbit representatives:", cands, flush=True)
cand = cands[0]
all_ids = sorted(e.id for e in closed.edges)
rest = [edge_var(i) for i in all_ids if i != cand]
start = PolySet([u.subs(edge_var(cand), 1)])
syms = [{edge_var(a): edge_var(b) for a, b in emap.items() if a != cand}
        for emap in autos if emap.get(cand) == cand]
print("symmetries fixing lambda:", len(syms), flush=True)
table = FubiniTable(start, rest, symmetries=syms)

t0 = time.time()


def beat():
    while True:
        time.sleep(30)
        print(f"... {time.time()-t0:.0f}s  table={len(table.table)}", flush=True)


threading.Thread(target=beat, daemon=True).start()
orders = search_order(start, rest, table=table)
dt = time.time() - t0
print(f"search_order: {dt:.1f}s  reducible={bool(orders)}  "
      f"table size={len(table.table)}", flush=True)
