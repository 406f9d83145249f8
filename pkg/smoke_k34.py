import time
from feynmzv.graphs import sample_graph
from feynmzv.reduction import analyze_graph

g = sample_graph("k34")
t0 = time.time()
rep = analyze_graph(g)
print("k34 verdict:", rep.verdict, "reducible:", rep.reducible)
print("lambdas tried:", rep.lambdas_tried)
print("elapsed: %.1fs" % (time.time() - t0))
