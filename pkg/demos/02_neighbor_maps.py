"""Finite type verification: the neighbor-map closure.

Same-level cylinders either miss each other or differ by a relative map
from a finite set.  The closure enumerates candidate relative maps with
a certified ball test and prunes those without an infinite refinement
chain; survivors are exactly the maps whose copy of the attractor meets
the attractor.
"""

from selfsim import Pipeline, load_bundled

for name in ("cantor-1-3", "lebesgue-1-2", "golden-bernoulli",
             "complex-pisot-demo"):
    pipe = Pipeline(load_bundled(name))
    graph = pipe.decider.graph
    gamma = graph.gamma_maps()
    print(f"\n{name}: finite type verified with {len(gamma)} neighbor maps "
          f"({len(graph.nodes)} candidates examined)")
    for m in gamma:
        print("   ", m)

print("""
Reading the golden list: translations by 0, +-rho^2, +-rho and +-1 (in
field coordinates r = rho, so 1-r is rho^2).  Two golden cylinders at
any level can only overlap in one of these seven relative positions.
""")

pipe = Pipeline(load_bundled("golden-bernoulli"))
ifs = pipe.ifs
S1, S2 = ifs.maps
d = pipe.decider
print("level-1 overlap S1(K) and S2(K):", d.intersects(S1, S2))
print("level-2: S1S1 vs S2S2:", d.intersects(S1.compose(S1), S2.compose(S2)))
print("triple intersection S1S2, S2S1, S2S2:",
      d.tuple_intersects([S1.compose(S2), S2.compose(S1), S2.compose(S2)]))
