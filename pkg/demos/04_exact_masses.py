"""Exact atom masses from transition-matrix products.

Each edge of the automaton carries a nonnegative rational matrix; the
mass of an atom is the product of the matrices along its address times
the terminal mass vector.  Equivalently, one block matrix per state
reproduces every mass as e1 . M_{i1} ... M_{in} . w_{in}^T.
"""

from fractions import Fraction as F

from selfsim import GlobalSystem, Pipeline, load_bundled

pipe = Pipeline(load_bundled("golden-bernoulli"))
model = pipe.measure

print("golden Bernoulli convolution, uniform weights")
print("mass-positive states:", model.kept, "of", len(pipe.automaton.states))
print("\nlevel-1 atoms (left cylinder, overlap, right cylinder):")
for addr in model.addresses(1):
    m = model.mass(addr)
    print(f"  atom {addr}: mu = {m} = {float(m):.6f}")

print("\npartition of unity, exact rational sums:")
for d in range(2, 9):
    total = model.total_mass(d)
    count = len(model.addresses(d)) if d <= 6 else "-"
    print(f"  depth {d}: sum of masses = {total} over {count} atoms")

print("\nsmallest and largest atom at depth 6:")
masses = sorted((model.mass(a), a) for a in model.addresses(6))
print(f"  min {masses[0][0]} at {masses[0][1]}")
print(f"  max {masses[-1][0]} at {masses[-1][1]}")

gs = GlobalSystem(model)
addr = masses[-1][1]
print("\nblock-matrix route gives the same rational exactly:",
      gs.mass_global(addr) == model.mass(addr))

print("\nmass vectors v(state) = pulled-back masses through each covering map:")
for sid in model.kept[:6]:
    vec = ", ".join(str(x) for x in model.v_star(sid))
    print(f"  state {sid}: ({vec})")
