"""Exact arithmetic in Q(rho) and certified enclosures.

The golden contraction rho = (sqrt(5)-1)/2 is the root of x^2 + x - 1
inside (0,1).  Everything below is computed on rational coefficient
vectors; floating point appears only in the certified enclosures.
"""

from fractions import Fraction as F

from selfsim import NumberField, RootBox, RatInterval, check_pisot

K = NumberField([-1, 1, 1], RootBox(RatInterval(0, 1)))
rho = K.gen

print("rho             =", rho, "~", float(rho))
print("rho^2           =", rho * rho, "          (reduced: rho^2 = 1 - rho)")
print("rho^3           =", rho ** 3)
print("1/rho           =", rho.inverse(), "       (the golden mean is rho + 1)")
print("rho * (1/rho)   =", rho * rho.inverse())

enc = rho.enclosure(96)
print("\ncertified enclosure at 96 bits:")
print("  lower =", float(enc.lo))
print("  upper =", float(enc.hi))
print("  width <", float(enc.width))

print("\nexact comparisons: rho^2 < 1/2 < rho :",
      (rho * rho) < K.from_rational(F(1, 2)) < rho)

print("\nPisot classification of 1/rho for a few polynomials of rho:")
for coeffs, box, label in [
    ([-1, 1, 1], RootBox(RatInterval(0, 1)), "x^2+x-1 (golden)"),
    ([F(-1, 2), 1], RootBox(RatInterval(0, 1)), "x-1/2 (dyadic)"),
    ([F(-1, 2), F(-1, 2), 1], RootBox(RatInterval(F(-3, 4), F(-1, 4))),
     "x^2-x/2-1/2, root -1/2"),
    ([F(1, 2), -1, 1], RootBox(RatInterval(0, 1), RatInterval(F(1, 4), 1)),
     "x^2-x+1/2 (rho=(1+i)/2)"),
]:
    print(f"  {label:28s} ->", check_pisot(coeffs, box).kind)
