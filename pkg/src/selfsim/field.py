"""Exact arithmetic in Q(rho) for an algebraic contraction ratio rho.

Elements are rational coefficient vectors in the power basis
1, rho, ..., rho^(D-1) reduced modulo a monic minimal polynomial, so
equality is literal coefficient equality and all ring/field operations
are exact.  The selected root is pinned down by a rational isolating
box which can be refined on demand; every element then gets a certified
interval (real backend) or rectangle (complex backend) enclosure of its
embedding.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import sympy

from .intervals import RatInterval, RectInterval, sqrt_interval

Rat = Fraction


def _rat(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def parse_rational(s) -> Fraction:
    """Parse a 'num/den' string (or int) into an exact Fraction."""
    return _rat(s)


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class FieldError(ValueError):
    pass


# ----------------------------------------------------------------------
# polynomial helpers (coefficients ascending, rational)
# ----------------------------------------------------------------------

def poly_eval(coeffs: Sequence[Fraction], x):
    """Horner evaluation; works for Fraction, RatInterval and RectInterval."""
    acc = None
    for c in reversed(coeffs):
        acc = c if acc is None else acc * x + c
    return acc


def poly_derivative(coeffs: Sequence[Fraction]):
    return [c * i for i, c in enumerate(coeffs)][1:]


def _is_irreducible(coeffs: Sequence[Fraction]) -> bool:
    x = sympy.Symbol("x")
    poly = sympy.Poly(sum(sympy.Rational(c) * x**i for i, c in enumerate(coeffs)), x)
    if poly.degree() == 1:
        return True
    _, factors = poly.factor_list()
    return len(factors) == 1 and factors[0][1] == 1


# ----------------------------------------------------------------------
# certified root isolation
# ----------------------------------------------------------------------

class RootBox:
    """Rational isolating region for one root: an interval or a rectangle."""

    def __init__(self, real: RatInterval, imag: RatInterval | None = None):
        self.real = real
        self.imag = imag  # None => real root

    @property
    def is_real(self) -> bool:
        return self.imag is None or (self.imag.lo == 0 == self.imag.hi)

    def as_rect(self) -> RectInterval:
        return RectInterval(self.real, self.imag or RatInterval.point(0))

    @property
    def width(self) -> Fraction:
        if self.imag is None:
            return self.real.width
        return max(self.real.width, self.imag.width)

    def __repr__(self):
        if self.imag is None:
            return f"RootBox({self.real!r})"
        return f"RootBox({self.real!r}, {self.imag!r})"


def _bisect_real_root(coeffs, lo: Fraction, hi: Fraction, target: Fraction):
    """Shrink [lo,hi] around a sign-change root until width <= target."""
    flo = poly_eval(coeffs, lo)
    fhi = poly_eval(coeffs, hi)
    if flo == 0:
        return lo, lo
    if fhi == 0:
        return hi, hi
    if (flo > 0) == (fhi > 0):
        raise FieldError(f"no sign change on [{lo}, {hi}]")
    while hi - lo > target:
        mid = (lo + hi) / 2
        fm = poly_eval(coeffs, mid)
        if fm == 0:
            return mid, mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return lo, hi


def _newton_step(coeffs, dcoeffs, box: RectInterval):
    mid = RectInterval.point(*box.mid)
    dp = poly_eval(dcoeffs, box)
    if dp.contains_zero():
        return None
    return mid - poly_eval(coeffs, mid) / dp


def _refine_complex_root(coeffs, box: RectInterval, target: Fraction,
                         certified: bool) -> tuple[RectInterval, bool]:
    """Shrink a rectangle around a simple complex root.

    Returns (box, certified): certified means an interval-Newton
    contraction N(box) within box was observed, which proves existence
    and uniqueness of a root in the box.
    """
    dcoeffs = poly_derivative(coeffs)
    for _ in range(256):
        if certified and box.width <= target:
            return box, True
        n = _newton_step(coeffs, dcoeffs, box)
        if n is not None:
            inter = n.intersect(box)
            if inter is None:
                raise FieldError("isolating box excludes the root")
            if n.contained_in(box):
                certified = True
            if inter.width < box.width:
                box = inter
                continue
            if certified:
                return box, True
        # Newton not yet contracting: quadrisect and keep sub-boxes where
        # the polynomial may vanish.
        keep = [b for b in box.split4() if poly_eval(coeffs, b).contains_zero()]
        if not keep:
            raise FieldError("no root in the isolating box")
        if len(keep) == 1:
            box = keep[0]
        else:
            # root may sit on a split line; merge the survivors back
            re_lo = min(b.re.lo for b in keep)
            re_hi = max(b.re.hi for b in keep)
            im_lo = min(b.im.lo for b in keep)
            im_hi = max(b.im.hi for b in keep)
            merged = RectInterval(RatInterval(re_lo, re_hi), RatInterval(im_lo, im_hi))
            if merged.width >= box.width:
                # nudge: shrink towards the numeric root
                box = _numeric_shrink(coeffs, box)
            else:
                box = merged
    if not certified:
        raise FieldError("could not certify the isolating box; supply a tighter one")
    return box, certified


def _numeric_shrink(coeffs, box: RectInterval) -> RectInterval:
    import numpy as np

    roots = np.roots([float(c) for c in reversed(coeffs)])
    cx = complex(box)
    z = min(roots, key=lambda r: abs(r - cx))
    w = box.width / 4
    cand = RectInterval(RatInterval(_rat(z.real) - w, _rat(z.real) + w),
                        RatInterval(_rat(z.imag) - w, _rat(z.imag) + w))
    inter = cand.intersect(box)
    return inter if inter is not None else cand


def isolate_all_roots(coeffs, bits: int = 80) -> list[RootBox]:
    """Certified enclosures of all roots of a squarefree rational polynomial.

    Numeric roots seed small boxes which are then certified one by one
    with interval Newton; the boxes are verified pairwise disjoint, so
    counting guarantees completeness.
    """
    import numpy as np

    deg = len(coeffs) - 1
    target = Fraction(1, 1 << bits)
    roots = np.roots([float(c) for c in reversed(coeffs)])
    boxes: list[RootBox] = []
    for z in sorted(roots, key=lambda r: (round(r.real, 12), round(r.imag, 12))):
        if abs(z.imag) < 1e-9:
            # try as a real root: bracket around the numeric value
            x = _rat(z.real)
            for pad_exp in range(6, 60, 6):
                pad = Fraction(1, 10**pad_exp)
                lo, hi = x - pad, x + pad
                try:
                    lo2, hi2 = _bisect_real_root(coeffs, lo, hi, target)
                    boxes.append(RootBox(RatInterval(lo2, hi2)))
                    break
                except FieldError:
                    continue
            else:
                # fall through to the complex certifier with a flat box
                z = complex(z.real, 0.0)
                boxes.append(_certify_near(coeffs, z, target))
        else:
            boxes.append(_certify_near(coeffs, z, target))
    if len(boxes) != deg:
        raise FieldError("failed to isolate all roots")
    for i in range(deg):
        for j in range(i + 1, deg):
            if boxes[i].as_rect().intersect(boxes[j].as_rect()) is not None:
                raise FieldError("root enclosures overlap; polynomial may not be squarefree")
    return boxes


def _certify_near(coeffs, z: complex, target: Fraction) -> RootBox:
    for pad_exp in (6, 4, 3, 2):
        pad = Fraction(1, 10**pad_exp)
        box = RectInterval(RatInterval(_rat(z.real) - pad, _rat(z.real) + pad),
                           RatInterval(_rat(z.imag) - pad, _rat(z.imag) + pad))
        try:
            box, _ = _refine_complex_root(coeffs, box, target, certified=False)
            return RootBox(box.re, box.im)
        except FieldError:
            continue
    raise FieldError(f"could not certify a root near {z}")


# ----------------------------------------------------------------------
# the field
# ----------------------------------------------------------------------

class NumberField:
    """Q(rho), rho the root of a monic rational polynomial inside a given box."""

    def __init__(self, min_poly: Sequence, root_box: RootBox, complex_embedding: bool = False):
        coeffs = [_rat(c) for c in min_poly]
        if len(coeffs) < 2:
            raise FieldError("minimal polynomial must have degree >= 1")
        if coeffs[-1] != 1:
            raise FieldError("minimal polynomial must be monic")
        if not _is_irreducible(coeffs):
            raise FieldError("minimal polynomial is reducible over Q")
        self.min_poly = coeffs
        self.degree = len(coeffs) - 1
        self.complex_embedding = complex_embedding
        if complex_embedding and root_box.is_real:
            raise FieldError("complex backend requires a genuinely complex root box")
        if not complex_embedding and not root_box.is_real:
            raise FieldError("real backend requires a real root box")
        self._box = self._certify_box(root_box)
        # reduction table: rho^D .. rho^(2D-2) expressed in the power basis
        self._powers = self._build_powers()
        self._enclosure_cache: dict = {}

        self.zero = self.element([0] * self.degree)
        self.one = self.element([1] + [0] * (self.degree - 1))
        self.gen = (self.element([0, 1] + [0] * (self.degree - 2))
                    if self.degree >= 2 else self.element([-coeffs[0]]))

    # -- setup ----------------------------------------------------------
    def _certify_box(self, box: RootBox) -> RootBox:
        if self.degree == 1:
            root = -self.min_poly[0]
            if box.is_real and not box.real.contains(root):
                raise FieldError("isolating box does not contain the rational root")
            return RootBox(RatInterval.point(root))
        target = Fraction(1, 1 << 64)
        if box.is_real:
            lo, hi = _bisect_real_root(self.min_poly, box.real.lo, box.real.hi, target)
            return RootBox(RatInterval(lo, hi))
        rect, _ = _refine_complex_root(self.min_poly, box.as_rect(), target, certified=False)
        return RootBox(rect.re, rect.im)

    def _build_powers(self):
        d = self.degree
        # rho^d = -(c_0 + c_1 rho + ... + c_{d-1} rho^{d-1})
        powers = [[-c for c in self.min_poly[:d]]]
        for _ in range(d - 2):
            prev = powers[-1]
            shifted = [Fraction(0)] + prev[:-1]
            lead = prev[-1]
            powers.append([s + lead * p for s, p in zip(shifted, powers[0])])
        return powers

    # -- element constructors --------------------------------------------
    def element(self, coeffs) -> "FieldElement":
        cs = [_rat(c) for c in coeffs]
        if len(cs) > self.degree:
            raise FieldError(f"expected at most {self.degree} coefficients")
        cs += [Fraction(0)] * (self.degree - len(cs))
        return FieldElement(self, tuple(cs))

    def from_rational(self, q) -> "FieldElement":
        return self.element([_rat(q)])

    # -- arithmetic backend ----------------------------------------------
    def _mul(self, a, b):
        d = self.degree
        conv = [Fraction(0)] * (2 * d - 1)
        for i, ai in enumerate(a):
            if ai:
                for j, bj in enumerate(b):
                    if bj:
                        conv[i + j] += ai * bj
        out = list(conv[:d])
        for k in range(d, 2 * d - 1):
            ck = conv[k]
            if ck:
                table = self._powers[k - d]
                for i in range(d):
                    out[i] += ck * table[i]
        return tuple(out)

    def _inverse(self, a):
        # extended Euclid in Q[x] against the minimal polynomial
        if not any(a):
            raise ZeroDivisionError("inverse of zero field element")
        r0, r1 = list(self.min_poly), list(a)
        t0, t1 = [Fraction(0)], [Fraction(1)]
        while any(r1):
            q, r = _poly_divmod(r0, r1)
            r0, r1 = r1, r
            t0, t1 = t1, _poly_sub(t0, _poly_mul(q, t1))
        # r0 is a nonzero constant gcd (minimal polynomial irreducible)
        c = r0[0]
        inv = [t / c for t in t0]
        inv += [Fraction(0)] * (self.degree - len(inv))
        return tuple(inv[:self.degree])

    # -- embedding ---------------------------------------------------------
    def refine_root(self, target_width: Fraction):
        if self._box.width <= target_width:
            return
        self._enclosure_cache.clear()
        if self._box.is_real:
            lo, hi = _bisect_real_root(self.min_poly, self._box.real.lo,
                                       self._box.real.hi, target_width)
            self._box = RootBox(RatInterval(lo, hi))
        else:
            rect, _ = _refine_complex_root(self.min_poly, self._box.as_rect(),
                                           target_width, certified=True)
            self._box = RootBox(rect.re, rect.im)

    def root_box(self) -> RootBox:
        return self._box

    def enclose(self, el: "FieldElement", bits: int = 64):
        """Certified enclosure of el's embedding: RatInterval or RectInterval."""
        key = (el.coeffs, bits)
        hit = self._enclosure_cache.get(key)
        if hit is not None:
            return hit
        target = Fraction(1, 1 << bits)
        size = sum(abs(c) for c in el.coeffs) + 1
        # linear error propagation: output width <~ size * D * box width
        self.refine_root(target / (size * self.degree * 4))
        out = self._eval_at_root(el)
        while out.width > target and self._box.width > 0:
            self.refine_root(self._box.width / 16)
            out = self._eval_at_root(el)
        if len(self._enclosure_cache) > 100_000:
            self._enclosure_cache.clear()
        self._enclosure_cache[key] = out
        return out

    def _eval_at_root(self, el: "FieldElement"):
        if self.complex_embedding:
            out = poly_eval(el.coeffs, self._box.as_rect())
            if not isinstance(out, RectInterval):
                out = RectInterval(out if isinstance(out, RatInterval)
                                   else RatInterval.point(out), RatInterval.point(0))
        else:
            out = poly_eval(el.coeffs, self._box.real)
            if not isinstance(out, RatInterval):
                out = RatInterval.point(out)
        return out

    def multiplication_matrix(self, el: "FieldElement"):
        """Rational matrix of y -> el*y on the power basis (column j: el*rho^j)."""
        cols = [el.coeffs]
        for _ in range(self.degree - 1):
            cols.append(self._mul(cols[-1], self.gen.coeffs))
        return tuple(tuple(cols[j][i] for j in range(self.degree))
                     for i in range(self.degree))

    def basis_embeddings(self, bits: int = 64):
        """Float (or complex) values of 1, rho, ..., rho^(D-1)."""
        out = []
        p = self.one
        for _ in range(self.degree):
            enc = p.enclosure(bits)
            out.append(complex(enc) if self.complex_embedding else float(enc.mid))
            p = p * self.gen
        return out

    # -- conjugation (complex quadratic fields) ------------------------------
    def has_conjugation(self) -> bool:
        return self.complex_embedding and self.degree == 2

    def conjugate(self, el: "FieldElement") -> "FieldElement":
        """Complex conjugation as the automorphism rho -> -c1 - rho (degree 2)."""
        if not self.has_conjugation():
            raise FieldError("conjugation automorphism only available for quadratic fields")
        a, b = el.coeffs
        c1 = self.min_poly[1]
        return self.element([a - b * c1, -b])

    def __eq__(self, other):
        return self is other

    def __hash__(self):
        return id(self)

    def __repr__(self):
        kind = "complex" if self.complex_embedding else "real"
        return f"NumberField(deg={self.degree}, {kind}, minpoly={[str(c) for c in self.min_poly]})"


def _poly_divmod(a, b):
    a = list(a)
    while a and a[-1] == 0:
        a.pop()
    b = list(b)
    while b and b[-1] == 0:
        b.pop()
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    while len(a) >= len(b):
        f = a[-1] / b[-1]
        k = len(a) - len(b)
        q[k] = f
        for i, bi in enumerate(b):
            a[i + k] -= f * bi
        while a and a[-1] == 0:
            a.pop()
    return q, (a or [Fraction(0)])


def _poly_mul(a, b):
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def _poly_sub(a, b):
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [x - y for x, y in zip(a, b)]


class FieldElement:
    """c0 + c1*rho + ... + c_{D-1}*rho^{D-1} with exact rational coefficients."""

    __slots__ = ("field", "coeffs")

    def __init__(self, field: NumberField, coeffs: tuple):
        self.field = field
        self.coeffs = coeffs

    # -- ring operations -----------------------------------------------
    def _check(self, other) -> "FieldElement":
        if isinstance(other, FieldElement):
            if other.field is not self.field:
                raise FieldError("elements from different fields")
            return other
        return self.field.from_rational(other)

    def __add__(self, other):
        other = self._check(other)
        return FieldElement(self.field, tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    __radd__ = __add__

    def __neg__(self):
        return FieldElement(self.field, tuple(-a for a in self.coeffs))

    def __sub__(self, other):
        return self + (-self._check(other))

    def __rsub__(self, other):
        return self._check(other) + (-self)

    def __mul__(self, other):
        other = self._check(other)
        return FieldElement(self.field, self.field._mul(self.coeffs, other.coeffs))

    __rmul__ = __mul__

    def inverse(self) -> "FieldElement":
        return FieldElement(self.field, self.field._inverse(self.coeffs))

    def __truediv__(self, other):
        return self * self._check(other).inverse()

    def __rtruediv__(self, other):
        return self._check(other) * self.inverse()

    def __pow__(self, e: int):
        if e < 0:
            return self.inverse() ** (-e)
        out = self.field.one
        base = self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    # -- predicates -------------------------------------------------------
    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def as_rational(self) -> Fraction:
        if not self.is_rational():
            raise FieldError("element is not rational")
        return self.coeffs[0]

    def __eq__(self, other):
        if isinstance(other, FieldElement):
            return self.field is other.field and self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self.is_rational() and self.coeffs[0] == other
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def compare(self, other) -> int:
        """-1/0/+1 against another element, exact (real embedding only)."""
        if self.field.complex_embedding:
            raise FieldError("complex embeddings are not ordered")
        diff = self - self._check(other)
        if diff.is_zero():
            return 0
        bits = 64
        while True:
            enc = diff.enclosure(bits)
            s = enc.sign()
            if s is not None:
                return s
            bits *= 2

    def __lt__(self, other):
        return self.compare(other) < 0

    def __le__(self, other):
        return self.compare(other) <= 0

    def __gt__(self, other):
        return self.compare(other) > 0

    def __ge__(self, other):
        return self.compare(other) >= 0

    # -- embedding helpers --------------------------------------------------
    def enclosure(self, bits: int = 64):
        return self.field.enclose(self, bits)

    def conjugate(self) -> "FieldElement":
        return self.field.conjugate(self)

    def modulus_sq(self):
        """|x|^2: exact FieldElement when conjugation exists, else RatInterval."""
        if not self.field.complex_embedding:
            return self * self
        if self.field.has_conjugation():
            return self * self.conjugate()
        return self.enclosure().modulus_sq()

    def __float__(self):
        enc = self.enclosure(64)
        if isinstance(enc, RectInterval):
            raise FieldError("complex element has no float value; use complex()")
        return float(enc.mid)

    def __complex__(self):
        enc = self.enclosure(64)
        if isinstance(enc, RectInterval):
            return complex(enc)
        return complex(float(enc.mid), 0.0)

    def __str__(self):
        terms = []
        for i, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if i == 0:
                terms.append(str(c))
            else:
                var = "r" if i == 1 else f"r^{i}"
                if c == 1:
                    terms.append(var)
                elif c == -1:
                    terms.append(f"-{var}")
                else:
                    terms.append(f"{c}*{var}")
        if not terms:
            return "0"
        out = terms[0]
        for t in terms[1:]:
            out += t if t.startswith("-") else "+" + t
        return out

    def __repr__(self):
        return f"<{self}>"


# ----------------------------------------------------------------------
# Pisot classification (advisory)
# ----------------------------------------------------------------------

class PisotReport:
    def __init__(self, kind: str, is_algebraic_integer: bool, moduli: list, selected_modulus: float):
        self.kind = kind  # 'pisot' | 'complex-pisot' | 'neither'
        self.is_algebraic_integer = is_algebraic_integer
        self.conjugate_moduli = moduli
        self.selected_modulus = selected_modulus

    def __repr__(self):
        return (f"PisotReport({self.kind}, alg_int={self.is_algebraic_integer}, "
                f"|1/rho|={self.selected_modulus:.6f}, conj moduli={self.conjugate_moduli})")


def check_pisot(min_poly: Sequence, root_box: RootBox) -> PisotReport:
    """Classify 1/rho as Pisot, complex Pisot, or neither.

    Works from the reversed polynomial whose roots are the reciprocals
    of the input's roots; every modulus comparison is certified by root
    enclosures.  Advisory only: reducible inputs are still classified by
    the selected root and its cofactors.
    """
    coeffs = [_rat(c) for c in min_poly]
    if coeffs[0] == 0:
        raise FieldError("zero is a root; reciprocal undefined")
    # reversed polynomial, made monic: roots are reciprocals
    rev = list(reversed(coeffs))
    lead = rev[-1]
    rev = [c / lead for c in rev]
    is_alg_int = all(c.denominator == 1 for c in rev)
    boxes = isolate_all_roots(rev, bits=80)

    # pin down rho tightly inside the user's box, then take reciprocals
    orig_boxes = isolate_all_roots(coeffs, bits=80)
    inside = [b for b in orig_boxes if b.as_rect().intersect(root_box.as_rect()) is not None]
    if len(inside) != 1:
        raise FieldError("isolating box does not isolate a single root")
    sel_rect = inside[0].as_rect().inverse()
    selected = [i for i, b in enumerate(boxes) if b.as_rect().intersect(sel_rect) is not None]
    if len(selected) != 1:
        raise FieldError("could not match the selected root among reciprocal roots")
    sel = selected[0]
    sel_box = boxes[sel]
    sel_mod = sqrt_interval(sel_box.as_rect().modulus_sq())
    selected_is_real = sel_box.is_real or sel_box.as_rect().im.contains(0)

    others = [b for i, b in enumerate(boxes) if i != sel]
    if not selected_is_real:
        # drop the complex conjugate partner of the selected root
        conj_rect = sel_box.as_rect().conj()
        others = [b for b in others if b.as_rect().intersect(conj_rect) is None]

    moduli = []
    all_inside = True
    for b in others:
        m = sqrt_interval(b.as_rect().modulus_sq())
        moduli.append(float(m.mid))
        if not m.strictly_less(RatInterval.point(1)):
            all_inside = False

    big = sel_mod.strictly_greater(RatInterval.point(1))
    if big and all_inside and is_alg_int:
        kind = "pisot" if selected_is_real else "complex-pisot"
    else:
        kind = "neither"
    return PisotReport(kind, is_alg_int, moduli, float(sel_mod.mid))
