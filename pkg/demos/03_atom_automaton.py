"""The refinement automaton over partition atoms.

Atoms of the n-th Borel partition are classified by a normalized triple
(covering cylinders, touching cylinders, step map); finitely many
triples occur and children are computable from the triple alone.  Every
atom is addressed by its unique state path from the root.
"""

from selfsim import Pipeline, load_bundled, witness

for name in ("cantor-1-3", "lebesgue-1-2", "golden-bernoulli"):
    pipe = Pipeline(load_bundled(name))
    auto = pipe.automaton
    print(f"\n{name}: {len(auto.states)} states")
    for sid, st in enumerate(auto.states[:8]):
        kids = [e.child for e in auto.edges[sid]]
        print(f"  state {sid}: {st.label():40s} children {kids}")
    if len(auto.states) > 8:
        print(f"  ... and {len(auto.states) - 8} more")
    counts = [len(auto.addresses(d)) for d in range(1, 6)]
    print("  candidate atoms by depth:", counts)

pipe = Pipeline(load_bundled("lebesgue-1-2"))
auto = pipe.automaton
print("\nwitness points (certified to lie in every covering cylinder):")
for sid, st in enumerate(auto.states):
    w = witness(auto, sid)
    if w is not None:
        print(f"  state {sid} {st.label():44s} -> x = {w.point[0]} "
              f"~ {float(w.point[0]):.4f}")

# the doubling map's midpoint atom {1/2} shows up with two covering
# cylinders and recurs forever under refinement
overlap = [sid for sid, st in enumerate(auto.states) if st.v_size == 2]
print("\noverlap states (two covering cylinders):", overlap)
