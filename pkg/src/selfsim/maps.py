"""Contracting similitudes with exact algebra, and iterated function systems.

A similitude is x -> L x + t where L is r^k times an exact orthogonal
matrix over the number field (real backend) or a single field scalar of
modulus r^k (complex backend).  Composition, inversion and equality are
all exact; the integer scale exponent k is carried explicitly so that
stopping-set bookkeeping never touches floating point.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .field import FieldElement, NumberField
from .intervals import RatInterval, sqrt_interval


class MapError(ValueError):
    pass


# ----------------------------------------------------------------------
# small exact linear algebra over the field
# ----------------------------------------------------------------------

def mat_mul(a, b):
    n, m, p = len(a), len(b), len(b[0])
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(m)),
                           start=a[0][0].field.zero) for j in range(p))
                 for i in range(n))


def mat_vec(a, v):
    return tuple(sum((a[i][j] * v[j] for j in range(len(v))),
                     start=a[0][0].field.zero) for i in range(len(a)))


def mat_det(a) -> FieldElement:
    d = len(a)
    if d == 1:
        return a[0][0]
    if d == 2:
        return a[0][0] * a[1][1] - a[0][1] * a[1][0]
    det = a[0][0].field.zero
    for j in range(d):
        minor = [row[:j] + row[j + 1:] for row in a[1:]]
        term = a[0][j] * mat_det(minor)
        det = det + term if j % 2 == 0 else det - term
    return det


def mat_inv(a):
    """Inverse of a small matrix over the field, by Gaussian elimination."""
    d = len(a)
    field = a[0][0].field
    aug = [list(row) + [field.one if i == j else field.zero for j in range(d)]
           for i, row in enumerate(a)]
    for col in range(d):
        piv = next((r for r in range(col, d) if not aug[r][col].is_zero()), None)
        if piv is None:
            raise MapError("singular linear part")
        aug[col], aug[piv] = aug[piv], aug[col]
        invp = aug[col][col].inverse()
        aug[col] = [x * invp for x in aug[col]]
        for r in range(d):
            if r != col and not aug[r][col].is_zero():
                f = aug[r][col]
                aug[r] = [x - f * y for x, y in zip(aug[r], aug[col])]
    return tuple(tuple(row[d:]) for row in aug)


def identity_matrix(field: NumberField, d: int):
    return tuple(tuple(field.one if i == j else field.zero for j in range(d))
                 for i in range(d))


def _int_coeffs(coeffs):
    out = []
    for c in coeffs:
        out.append(c.numerator)
        out.append(c.denominator)
    return tuple(out)


# ----------------------------------------------------------------------
# similitudes
# ----------------------------------------------------------------------

class Similitude:
    """x -> L x + t with similarity ratio r^exponent.

    Real backend: L is a dxd tuple-of-tuples of FieldElement, t a
    d-tuple.  Complex backend: L and t are single FieldElements and the
    map is z -> L z + t on C.
    """

    __slots__ = ("field", "linear", "translation", "exponent", "_key",
                 "_lin_ident", "_inv", "_hash")

    def __init__(self, field: NumberField, linear, translation, exponent: int,
                 lin_ident: bool | None = None):
        self.field = field
        self.linear = linear
        self.translation = translation
        self.exponent = exponent
        self._inv = None
        self._hash = None
        # keys are flat int tuples: cheap to hash, compare and sort
        if field.complex_embedding:
            k = (_int_coeffs(linear.coeffs), _int_coeffs(translation.coeffs))
            if lin_ident is None:
                lin_ident = linear == field.one
        else:
            k = (tuple(_int_coeffs(c.coeffs) for row in linear for c in row),
                 tuple(_int_coeffs(c.coeffs) for c in translation))
            if lin_ident is None:
                lin_ident = all(
                    linear[i][j] == (field.one if i == j else field.zero)
                    for i in range(len(linear)) for j in range(len(linear)))
        self._lin_ident = lin_ident
        self._key = (exponent,) + k

    @property
    def is_complex(self) -> bool:
        return self.field.complex_embedding

    @property
    def dim(self) -> int:
        return 1 if self.is_complex else len(self.translation)

    @staticmethod
    def identity(field: NumberField, d: int = 1) -> "Similitude":
        if field.complex_embedding:
            return Similitude(field, field.one, field.zero, 0)
        return Similitude(field, identity_matrix(field, d),
                          tuple(field.zero for _ in range(d)), 0)

    def is_identity(self) -> bool:
        return self == Similitude.identity(self.field, self.dim)

    # -- algebra -----------------------------------------------------------
    def compose(self, other: "Similitude") -> "Similitude":
        """self after other: x -> self(other(x))."""
        if self.field is not other.field:
            raise MapError("similitudes over different fields")
        k = self.exponent + other.exponent
        if self.is_complex:
            if self._lin_ident:
                return Similitude(self.field, other.linear,
                                  other.translation + self.translation, k,
                                  lin_ident=other._lin_ident)
            lin = self.linear * other.linear
            tr = self.linear * other.translation + self.translation
        elif self._lin_ident:
            return Similitude(self.field, other.linear,
                              tuple(a + b for a, b in zip(other.translation,
                                                          self.translation)), k,
                              lin_ident=other._lin_ident)
        else:
            lin = mat_mul(self.linear, other.linear)
            tr = tuple(a + b for a, b in
                       zip(mat_vec(self.linear, other.translation), self.translation))
        return Similitude(self.field, lin, tr, k)

    def __matmul__(self, other):
        return self.compose(other)

    def inverse(self) -> "Similitude":
        if self._inv is not None:
            return self._inv
        ident = None
        if self.is_complex:
            if self._lin_ident:
                lin, tr, ident = self.linear, -self.translation, True
            else:
                lin = self.linear.inverse()
                tr = -(lin * self.translation)
        elif self._lin_ident:
            lin, tr, ident = self.linear, tuple(-x for x in self.translation), True
        else:
            lin = mat_inv(self.linear)
            tr = tuple(-x for x in mat_vec(lin, self.translation))
        out = Similitude(self.field, lin, tr, -self.exponent, lin_ident=ident)
        out._inv = self
        self._inv = out
        return out

    def apply(self, point):
        if self.is_complex:
            if self._lin_ident:
                return point + self.translation
            return self.linear * point + self.translation
        if self._lin_ident:
            return tuple(a + b for a, b in zip(point, self.translation))
        return tuple(a + b for a, b in zip(mat_vec(self.linear, point), self.translation))

    __call__ = apply

    def fixed_point(self):
        """The unique fixed point of a contracting similitude."""
        if self.is_complex:
            return self.translation / (self.field.one - self.linear)
        d = self.dim
        field = self.field
        m = tuple(tuple((field.one if i == j else field.zero) - self.linear[i][j]
                        for j in range(d)) for i in range(d))
        return mat_vec(mat_inv(m), self.translation)

    # -- identity/ordering helpers -------------------------------------------
    def key(self):
        return self._key

    def __eq__(self, other):
        return isinstance(other, Similitude) and self._key == other._key

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key)
        return self._hash

    def __str__(self):
        if self.is_complex:
            return f"z->({self.linear})*z+({self.translation})"
        rows = ";".join(",".join(str(c) for c in row) for row in self.linear)
        tr = ",".join(str(c) for c in self.translation)
        return f"x->[{rows}]x+({tr})"

    def __repr__(self):
        return f"Similitude({self}, k={self.exponent})"


def point_dist_sq(p, q):
    """Squared distance between two field points, as a field element."""
    if isinstance(p, FieldElement):
        return (p - q).modulus_sq()
    field = p[0].field
    return sum(((a - b) * (a - b) for a, b in zip(p, q)), start=field.zero)


# ----------------------------------------------------------------------
# scale bookkeeping
# ----------------------------------------------------------------------

class ScaleBase:
    """The base contraction r, with certified access to powers r^e.

    Real backend stores r itself; the complex backend stores r^2 = c*cbar
    (the modulus generally lies outside the field).
    """

    def __init__(self, field: NumberField, ratio: FieldElement | None = None,
                 ratio_sq: FieldElement | None = None):
        self.field = field
        if field.complex_embedding:
            if ratio_sq is None:
                raise MapError("complex backend needs the squared base ratio")
            self.ratio = None
            self.ratio_sq = ratio_sq
        else:
            if ratio is None:
                raise MapError("real backend needs the base ratio")
            self.ratio = ratio
            self.ratio_sq = ratio * ratio
        iv = self.ratio_sq_interval(1)
        if not (iv.lo > 0 and iv.hi < 1):
            raise MapError("base ratio must lie strictly inside (0,1)")

    def ratio_sq_interval(self, e: int, bits: int = 64) -> RatInterval:
        enc = (self.ratio_sq ** e).enclosure(bits)
        if isinstance(enc, RatInterval):
            return enc
        lo = max(Fraction(0), enc.re.lo)
        return RatInterval(lo, enc.re.hi)

    def ratio_interval(self, e: int, bits: int = 64) -> RatInterval:
        """Certified enclosure of r^e for any integer e."""
        if self.ratio is not None:
            enc = (self.ratio ** e).enclosure(bits)
            return enc
        return sqrt_interval(self.ratio_sq_interval(e, bits), bits)

    def log_ratio(self) -> float:
        import math
        if self.ratio is not None:
            return math.log(float(self.ratio))
        return 0.5 * math.log(float(self.ratio_sq_interval(1).mid))


# ----------------------------------------------------------------------
# words and the IFS
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class Word:
    """A finite composition address with its exact weight and scale."""
    letters: tuple
    probability: Fraction
    exponent: int


@dataclass(frozen=True)
class Bridge:
    """One refinement step from a cylinder at one stopping level to the next."""
    letters: tuple
    probability: Fraction
    map: Similitude
    new_tag: int


class IFS:
    """An ordered list of contracting similitudes with a probability vector."""

    def __init__(self, field: NumberField, maps, probabilities, base: ScaleBase,
                 mode: str = "equicontractive", validate: bool = True):
        self.field = field
        self.maps = list(maps)
        self.probabilities = [Fraction(p) for p in probabilities]
        self.base = base
        self.mode = mode
        self.m = len(self.maps)
        self.exponents = [s.exponent for s in self.maps]
        self.k_max = max(self.exponents)
        self.dim = self.maps[0].dim
        self._bridge_cache: dict[int, tuple] = {}
        if validate:
            self._validate()

    # -- validation (exact) --------------------------------------------------
    def _validate(self):
        if self.m < 1:
            raise MapError("need at least one map")
        if len(self.probabilities) != self.m:
            raise MapError("probability vector length mismatch")
        if any(p <= 0 for p in self.probabilities):
            raise MapError("probabilities must be positive")
        if sum(self.probabilities) != 1:
            raise MapError("probabilities must sum to exactly 1")
        if len({s.key() for s in self.maps}) != self.m:
            raise MapError("maps must be distinct")
        if any(s.exponent < 1 for s in self.maps):
            raise MapError("generator scale exponents must be >= 1")
        if self.mode == "equicontractive" and any(k != 1 for k in self.exponents):
            raise MapError("equicontractive mode requires every exponent equal to 1")
        for s in self.maps:
            self._check_orthogonal(s)

    def _check_orthogonal(self, s: Similitude):
        rk = self.base.ratio_sq ** s.exponent
        if s.is_complex:
            m2 = s.linear.modulus_sq()
            if isinstance(m2, FieldElement):
                if m2 != rk:
                    raise MapError(f"linear part of {s} has |c|^2 != r^(2k)")
            else:
                target = rk.enclosure(96)
                tiv = target.re if hasattr(target, "re") else target
                if not m2.overlaps(tiv):
                    raise MapError(f"linear part of {s} fails the modulus check")
            return
        d = s.dim
        lt = tuple(tuple(s.linear[j][i] for j in range(d)) for i in range(d))
        prod = mat_mul(lt, s.linear)
        for i in range(d):
            for j in range(d):
                want = rk if i == j else self.field.zero
                if prod[i][j] != want:
                    raise MapError(f"linear part of {s} is not r^k-orthogonal")
        det = mat_det(s.linear)
        if det * det != rk ** d:
            raise MapError(f"linear part of {s} has |det| != r^(kd)")

    # -- stopping sets ---------------------------------------------------------
    def stopping_words(self, n: int) -> list[Word]:
        """All words whose scale exponent first reaches n.

        Exponent-threshold semantics in the base r: a word i1..ik stops
        at level n when k_{i1}+...+k_{ik} >= n while every proper prefix
        stays below n.  Equicontractive systems give exactly the length-n
        words.  Decided purely on integers.
        """
        if n < 0:
            raise MapError("level must be >= 0")
        if n == 0:
            return [Word((), Fraction(1), 0)]
        out: list[Word] = []
        stack = [((), Fraction(1), 0)]
        while stack:
            letters, prob, expo = stack.pop()
            for i in range(self.m - 1, -1, -1):
                e2 = expo + self.exponents[i]
                w = (letters + (i,), prob * self.probabilities[i], e2)
                if e2 >= n:
                    out.append(Word(*w))
                else:
                    stack.append(w)
        out.sort(key=lambda w: w.letters)
        return out

    def bridges(self, tag: int) -> tuple:
        """Refinement steps for a cylinder carrying scale tag r^tag.

        The budget to the next stopping level is k_max - tag; returned
        bridges are exactly the stopping words of that budget together
        with their composed maps and the tag at the next level.
        """
        hit = self._bridge_cache.get(tag)
        if hit is not None:
            return hit
        if not 0 <= tag < self.k_max:
            raise MapError(f"scale tag {tag} outside [0, {self.k_max})")
        budget = self.k_max - tag
        words = self.stopping_words(budget)
        out = []
        for w in words:
            smap = self.map_of_word(w.letters)
            out.append(Bridge(w.letters, w.probability, smap, tag + w.exponent - self.k_max))
        out = tuple(out)
        self._bridge_cache[tag] = out
        return out

    def map_of_word(self, letters) -> Similitude:
        s = Similitude.identity(self.field, self.dim)
        for i in letters:
            s = s.compose(self.maps[i])
        return s

    def word(self, letters) -> Word:
        p = Fraction(1)
        e = 0
        for i in letters:
            p *= self.probabilities[i]
            e += self.exponents[i]
        return Word(tuple(letters), p, e)

    # -- geometry ----------------------------------------------------------------
    def identity_map(self) -> Similitude:
        return Similitude.identity(self.field, self.dim)

    def log_stopping_ratio(self) -> float:
        """log of the per-level contraction rho = r^k_max."""
        return self.k_max * self.base.log_ratio()
