"""Naive reference implementations used to validate the main pipeline.

Everything here works by brute force: discrete approximations of the
invariant measure, Monte-Carlo sampling, dyadic-cell moment sums, ball
subdivision for intersection tests, and exhaustive word enumeration.
None of it imports the neighbor/automaton/measure machinery, so
agreement between the two sides is evidence rather than tautology.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .field import FieldElement
from .intervals import RatInterval, sqrt_interval
from .maps import IFS, Similitude, point_dist_sq


class OracleError(RuntimeError):
    pass


def _as_interval(x, bits: int = 96) -> RatInterval:
    if isinstance(x, RatInterval):
        return x
    enc = x.enclosure(bits)
    return enc.re if hasattr(enc, "re") else enc


# ----------------------------------------------------------------------
# coefficient-lattice form of the generators
# ----------------------------------------------------------------------

def _flatten_point(point):
    if isinstance(point, FieldElement):
        return tuple(point.coeffs)
    return tuple(c for coord in point for c in coord.coeffs)


def _coeff_affine(ifs: IFS, smap: Similitude):
    """The generator as an affine map on flattened coefficient vectors."""
    field = ifs.field
    deg = field.degree
    if field.complex_embedding:
        a = field.multiplication_matrix(smap.linear)
        return [list(r) for r in a], list(smap.translation.coeffs)
    d = smap.dim
    n = d * deg
    a = [[Fraction(0)] * n for _ in range(n)]
    for i in range(d):
        for j in range(d):
            block = field.multiplication_matrix(smap.linear[i][j])
            for u in range(deg):
                for v in range(deg):
                    a[i * deg + u][j * deg + v] = block[u][v]
    b = [c for coord in smap.translation for c in coord.coeffs]
    return a, b


def _lcm(a, b):
    return a * b // math.gcd(a, b)


class DiscreteMeasure:
    """Level-n discrete approximation: point masses p_I at S_I(x0).

    x0 is the fixed point of the first generator.  Points are kept as
    integer coefficient vectors over a common power-of-M denominator, so
    words reaching the same point merge exactly and the weight sum stays
    exactly one at every level.
    """

    def __init__(self, ifs: IFS, level: int):
        self.ifs = ifs
        self.level = level
        field = ifs.field
        affines = [_coeff_affine(ifs, s) for s in ifs.maps]
        denoms = [c.denominator for a, b in affines for row in a for c in row]
        denoms += [c.denominator for _a, b in affines for c in b]
        m = reduce(_lcm, denoms, 1)
        int_affines = []
        for a, b in affines:
            int_affines.append((tuple(tuple(int(c * m) for c in row) for row in a),
                                tuple(int(c * m) for c in b)))
        x0 = _flatten_point(ifs.maps[0].fixed_point())
        den0 = reduce(_lcm, (c.denominator for c in x0), 1)
        start = tuple(int(c * den0) for c in x0)

        threshold = level * ifs.k_max
        exps = ifs.exponents
        probs = ifs.probabilities
        # frontier: (point ints, exponent) -> weight, all at scale den0*m^depth
        frontier = {(start, 0): Fraction(1)}
        finished: dict = {}
        depth = 0
        max_len = 0
        if threshold == 0:
            finished[(start, 0)] = Fraction(1)
            frontier = {}
        while frontier:
            nxt: dict = {}
            scale = den0 * m**depth
            for (pt, expo), w in frontier.items():
                n = len(pt)
                for i, (ai, bi) in enumerate(int_affines):
                    p2 = tuple(sum(ai[r][c] * pt[c] for c in range(n)) + bi[r] * scale
                               for r in range(n))
                    w2 = w * probs[i]
                    e2 = expo + exps[i]
                    if e2 >= threshold:
                        max_len = max(max_len, depth + 1)
                        key = (p2, depth + 1)
                        finished[key] = finished.get(key, Fraction(0)) + w2
                    else:
                        key = (p2, e2)
                        nxt[key] = nxt.get(key, Fraction(0)) + w2
            frontier = nxt
            depth += 1
        merged: dict = {}
        for (pt, ln), w in finished.items():
            f = m ** (max_len - ln)
            key = tuple(c * f for c in pt)
            merged[key] = merged.get(key, Fraction(0)) + w
        self.scale = den0 * m**max_len
        self.points = list(merged.keys())
        self.weights = list(merged.values())
        if sum(self.weights) != 1:
            raise OracleError("discrete measure weights do not sum to 1")

    # -- embeddings ---------------------------------------------------------
    def positions(self):
        """Float positions: (N,) for 1-D, (N, d) for d-D, complex for C."""
        field = self.ifs.field
        deg = field.degree
        basis = field.basis_embeddings()
        pts = np.array(self.points, dtype=float) / float(self.scale)
        if field.complex_embedding:
            return pts @ np.array(basis, dtype=complex)
        d = self.ifs.dim
        bvec = np.array(basis, dtype=float)
        if d == 1:
            return pts @ bvec
        out = np.empty((len(self.points), d))
        for i in range(d):
            out[:, i] = pts[:, i * deg:(i + 1) * deg] @ bvec
        return out

    def weight_array(self):
        return np.array([float(w) for w in self.weights])


# ----------------------------------------------------------------------
# regions and mass estimation
# ----------------------------------------------------------------------

@dataclass
class MassEstimate:
    lower: float
    upper: float
    stderr: float
    count: int
    mode: str

    @property
    def value(self):
        return (self.lower + self.upper) / 2


class IntervalUnion:
    """Union of disjoint open 1-D intervals with rational endpoints."""

    def __init__(self, pieces, boundary_tol: float = 1e-12):
        self.pieces = [(Fraction(a), Fraction(b)) for a, b in pieces if Fraction(b) > Fraction(a)]
        self.boundary_tol = boundary_tol

    def classify_floats(self, xs):
        xs = np.asarray(xs)
        inside = np.zeros(len(xs), dtype=bool)
        maybe = np.zeros(len(xs), dtype=bool)
        tol = self.boundary_tol
        for a, b in self.pieces:
            fa, fb = float(a), float(b)
            inside |= (xs > fa + tol) & (xs < fb - tol)
            maybe |= (np.abs(xs - fa) <= tol) | (np.abs(xs - fb) <= tol)
        maybe &= ~inside
        return inside, maybe

    def classify_exact(self, x: Fraction):
        for a, b in self.pieces:
            if a < x < b:
                return True
            if x == a or x == b:
                return None
        return False


class PredicateRegion:
    """Wrap a vectorized float predicate; no exact decisions."""

    def __init__(self, fn):
        self.fn = fn

    def classify_floats(self, xs):
        inside = np.asarray(self.fn(xs), dtype=bool)
        return inside, np.zeros(len(inside), dtype=bool)


def estimate_mass(ifs: IFS, region, *, depth: int | None = None,
                  samples: int | None = None, seed: int = 0) -> MassEstimate:
    """Reference mass of a region: exact discrete sum or Monte-Carlo.

    depth mode sums the level-`depth` discrete measure, exactly where the
    region decides points exactly; undecided points widen the interval
    instead of being guessed.  samples mode draws i.i.d. points of the
    invariant measure and reports a binomial standard error.
    """
    if (depth is None) == (samples is None):
        raise OracleError("choose exactly one of depth= or samples=")
    if depth is not None:
        dm = DiscreteMeasure(ifs, depth)
        if (hasattr(region, "classify_exact") and ifs.dim == 1
                and not ifs.field.complex_embedding):
            lo = Fraction(0)
            und = Fraction(0)
            for pt, w in zip(dm.points, dm.weights):
                if all(c == 0 for c in pt[1:]):
                    r = region.classify_exact(Fraction(pt[0], dm.scale))
                else:
                    r = _classify_enclosure(ifs, pt, dm.scale, region)
                if r is True:
                    lo += w
                elif r is None:
                    und += w
            return MassEstimate(float(lo), float(lo + und), 0.0,
                                len(dm.points), "discrete-exact")
        inside, maybe = region.classify_floats(dm.positions())
        w = dm.weight_array()
        lo = float(w[inside].sum())
        return MassEstimate(lo, lo + float(w[maybe].sum()), 0.0,
                            len(dm.points), "discrete-float")

    pts = sample_points(ifs, samples, seed=seed)
    inside, maybe = region.classify_floats(pts)
    n_in = int(inside.sum())
    n_maybe = int(maybe.sum())
    p_lo = n_in / samples
    p_hi = (n_in + n_maybe) / samples
    phat = (p_lo + p_hi) / 2
    stderr = math.sqrt(max(phat * (1 - phat), 1.0 / samples) / samples)
    return MassEstimate(p_lo, p_hi, stderr, samples, "monte-carlo")


def _classify_enclosure(ifs, pt, scale, region, bits: int = 128):
    field = ifs.field
    el = field.element([Fraction(c, scale) for c in pt])
    enc = el.enclosure(bits)
    outside_all = True
    for a, b in region.pieces:
        pa, pb = RatInterval.point(a), RatInterval.point(b)
        if pa.strictly_less(enc) and enc.strictly_less(pb):
            return True
        if not (enc.strictly_less(pa) or pb.strictly_less(enc)):
            outside_all = False
    return False if outside_all else None


def sample_points(ifs: IFS, n: int, seed: int = 0, word_len: int | None = None):
    """n i.i.d. samples of the invariant measure (float precision).

    Letters are drawn one refinement step at a time (inverse-CDF on a
    uniform draw), so memory stays O(n) regardless of the word length.
    """
    rng = np.random.default_rng(np.random.PCG64(seed))
    probs = np.array([float(p) for p in ifs.probabilities])
    cdf = np.cumsum(probs / probs.sum())[:-1]
    if word_len is None:
        rmax = float(ifs.base.ratio_interval(min(ifs.exponents)).mid)
        word_len = max(8, int(math.ceil(math.log(1e-12) / math.log(rmax))))

    def draw():
        return np.searchsorted(cdf, rng.random(n), side="right")

    field = ifs.field
    if field.complex_embedding:
        lin = np.array([complex(s.linear) for s in ifs.maps])
        tr = np.array([complex(s.translation) for s in ifs.maps])
        x = np.zeros(n, dtype=complex)
        for _ in range(word_len):
            row = draw()
            x = lin[row] * x + tr[row]
        return x
    d = ifs.dim
    lin = np.array([[[float(c) for c in r] for r in s.linear] for s in ifs.maps])
    tr = np.array([[float(c) for c in s.translation] for s in ifs.maps])
    if d == 1:
        a = lin[:, 0, 0]
        b = tr[:, 0]
        x = np.zeros(n)
        for _ in range(word_len):
            row = draw()
            x = a[row] * x + b[row]
        return x
    x = np.zeros((n, d))
    for _ in range(word_len):
        row = draw()
        x = np.einsum("nij,nj->ni", lin[row], x) + tr[row]
    return x


# ----------------------------------------------------------------------
# dyadic moment sums
# ----------------------------------------------------------------------

def matched_level(ifs: IFS, n: int) -> int:
    """Smallest level k with the per-level contraction rho^k <= 2^-n."""
    target = Fraction(1, 2**n)
    k = 1
    while True:
        iv = ifs.base.ratio_interval(k * ifs.k_max, 96)
        if iv.hi <= target:
            return k
        k += 1


def dyadic_lq_sum(ifs: IFS, q: float, n: int, level: int | None = None,
                  measure: DiscreteMeasure | None = None) -> float:
    """Sum over dyadic cells of side 2^-n of (discrete measure mass)^q."""
    if q <= 0:
        raise OracleError("dyadic sums are defined for q > 0 here")
    if measure is None:
        measure = DiscreteMeasure(ifs, matched_level(ifs, n) if level is None else level)
    pos = measure.positions()
    w = measure.weight_array()
    if np.iscomplexobj(pos):
        coords = np.column_stack([pos.real, pos.imag])
    elif pos.ndim == 1:
        coords = pos[:, None]
    else:
        coords = pos
    cells = np.floor(coords * (2**n)).astype(np.int64)
    _, inv = np.unique(cells, axis=0, return_inverse=True)
    sums = np.bincount(inv, weights=w)
    return float(np.sum(sums**q))


@dataclass
class DyadicTau:
    estimate: float
    residual: float
    n_range: tuple
    log_sums: list


def tau_dyadic(ifs: IFS, q: float, n_range, level_cap: int | None = None) -> DyadicTau:
    """Slope fit of log moment sums against -n log 2 over a range of n.

    One discrete measure at the level matched to the finest n serves all
    coarser n (it is at least as fine as each requires).
    """
    ns = list(n_range)
    lvl = matched_level(ifs, max(ns))
    if level_cap is not None:
        lvl = min(lvl, level_cap)
    dm = DiscreteMeasure(ifs, lvl)
    ys = [math.log(dyadic_lq_sum(ifs, q, n, measure=dm)) for n in ns]
    xs = np.array([-n * math.log(2) for n in ns])
    ya = np.array(ys)
    coef = np.polyfit(xs, ya, 1)
    fit = np.polyval(coef, xs)
    residual = float(np.sqrt(np.mean((fit - ya) ** 2)))
    return DyadicTau(float(coef[0]), residual, (ns[0], ns[-1]), ys)


# ----------------------------------------------------------------------
# one-dimensional net pieces
# ----------------------------------------------------------------------

def interval_hull(ifs: IFS):
    """Exact endpoints of the convex hull of the attractor (1-D real)."""
    if ifs.dim != 1 or ifs.field.complex_embedding:
        raise OracleError("interval hull is for 1-D real systems")
    fps = [s.fixed_point()[0] for s in ifs.maps]
    return min(fps), max(fps)


def attractor_is_full_interval(ifs: IFS) -> bool:
    """Exact check that the level-1 cylinders cover the hull gap-free."""
    lo, hi = interval_hull(ifs)
    pieces = []
    for s in ifs.maps:
        a, b = s.apply((lo,))[0], s.apply((hi,))[0]
        if b < a:
            a, b = b, a
        pieces.append((a, b))
    pieces.sort(key=lambda p: _OrderKey(p[0]))
    reach = lo
    for a, b in pieces:
        if a > reach:
            return False
        if b > reach:
            reach = b
    return reach == hi


class NetCensus:
    """Exact 1-D net pieces at one stopping level.

    Breakpoints are the cylinder endpoints; each open piece between
    consecutive breakpoints carries a constant covering set, so grouping
    pieces by covering set reproduces the partition atoms geometrically,
    independent of the automaton machinery.
    """

    def __init__(self, ifs: IFS, level: int):
        if not attractor_is_full_interval(ifs):
            raise OracleError("net census requires a connected attractor")
        self.ifs = ifs
        self.level = level
        lo, hi = interval_hull(ifs)
        cyl = level_map_weights(ifs, level)
        self.cylinders = []
        for key, (smap, _w) in cyl.items():
            a = smap.apply((lo,))[0]
            b = smap.apply((hi,))[0]
            if b < a:
                a, b = b, a
            self.cylinders.append((key, a, b))
        points = {}
        for _key, a, b in self.cylinders:
            points[a.coeffs] = a
            points[b.coeffs] = b
        brk = list(points.values())
        brk.sort(key=lambda el: _OrderKey(el))
        self.breakpoints = brk
        self.piece_cover = []
        for i in range(len(brk) - 1):
            mid = (brk[i] + brk[i + 1]) * ifs.field.from_rational(Fraction(1, 2))
            cover = frozenset(key for key, a, b in self.cylinders if a < mid < b)
            self.piece_cover.append(cover)

    def atoms(self) -> dict:
        """Covering set -> list of piece indices (same set = same atom)."""
        out: dict = {}
        for i, cover in enumerate(self.piece_cover):
            if cover:
                out.setdefault(cover, []).append(i)
        return out

    def breakpoint_floats(self):
        return np.array([float(b) for b in self.breakpoints])


class _OrderKey:
    __slots__ = ("el",)

    def __init__(self, el):
        self.el = el

    def __lt__(self, other):
        return self.el < other.el


# ----------------------------------------------------------------------
# subdivision intersection test
# ----------------------------------------------------------------------

def _local_ball(ifs: IFS):
    field = ifs.field
    fps = [s.fixed_point() for s in ifs.maps]
    minv = field.from_rational(Fraction(1, ifs.m))
    if field.complex_embedding:
        center = sum(fps[1:], start=fps[0]) * minv
    else:
        center = tuple(sum((fp[i] for fp in fps[1:]), start=fps[0][i]) * minv
                       for i in range(ifs.dim))
    k_min = min(ifs.exponents)
    rmax = ifs.base.ratio_interval(k_min, 96)
    worst = RatInterval.point(0)
    for s in ifs.maps:
        d2 = _as_interval(point_dist_sq(s.apply(center), center), 96)
        if d2.hi > worst.hi:
            worst = d2
    r_up = (sqrt_interval(RatInterval(max(Fraction(0), worst.lo), worst.hi), 80)
            / (RatInterval.point(1) - rmax)).hi
    return center, r_up


def subdivision_intersects(ifs: IFS, f: Similitude, g: Similitude,
                           depth: int = 12) -> str:
    """'yes' / 'no' / 'unknown' for f(K) meeting g(K), by ball subdivision.

    'no' needs certified ball separation along every branch; 'yes' needs
    an exact common-point certificate: a relative map recurring as
    u = S_A^{-1} u S_B whose fixed-point identity u(fix(S_B)) = fix(S_A)
    holds in exact arithmetic, which exhibits a point shared by the two
    cylinder systems.  Anything else stays 'unknown'.
    """
    center, radius = _local_ball(ifs)
    r2 = RatInterval.point(radius * radius)
    kmax = ifs.k_max
    if f.exponent // kmax != g.exponent // kmax:
        raise OracleError("maps must come from a common stopping level")

    def feasible(u: Similitude) -> bool:
        lhs = _as_interval(point_dist_sq(u.apply(center), center), 96)
        ratio = ifs.base.ratio_interval(u.exponent, 96)
        rhs = (RatInterval.point(1) + ratio).square() * r2
        return not lhs.strictly_greater(rhs)

    no_memo: set = set()
    unknown_memo: dict = {}

    def explore(u, ta, tb, d, path):
        key = (u.key(), ta, tb)
        if key in no_memo:
            return "no"
        if not feasible(u):
            no_memo.add(key)
            return "no"
        # the current node is path[-1]; a repeat among the proper ancestors
        # closes a cycle u = S_A^{-1} u S_B
        for i in range(len(path) - 1):
            if path[i][0] == key:
                a_letters = tuple(l for _, fl, _ in path[i + 1:] for l in fl)
                b_letters = tuple(l for _, _, gl in path[i + 1:] for l in gl)
                if _cycle_certificate(ifs, u, a_letters, b_letters):
                    return "yes"
                return "unknown"
        if d <= 0:
            return "unknown"
        if unknown_memo.get(key, -1) >= d:
            return "unknown"
        all_no = True
        for bf in ifs.bridges(ta):
            left = bf.map.inverse().compose(u)
            for bg in ifs.bridges(tb):
                child = left.compose(bg.map)
                ck = (child.key(), bf.new_tag, bg.new_tag)
                res = explore(child, bf.new_tag, bg.new_tag, d - 1,
                              path + [(ck, bf.letters, bg.letters)])
                if res == "yes":
                    return "yes"
                if res != "no":
                    all_no = False
        if all_no:
            no_memo.add(key)
            return "no"
        unknown_memo[key] = d
        return "unknown"

    u0 = f.inverse().compose(g)
    return explore(u0, f.exponent % kmax, g.exponent % kmax, depth,
                   [((u0.key(), f.exponent % kmax, g.exponent % kmax), (), ())])


def _cycle_certificate(ifs: IFS, u: Similitude, a_letters, b_letters) -> bool:
    if not a_letters or not b_letters:
        return not a_letters and not b_letters and u.is_identity()
    za = ifs.map_of_word(a_letters).fixed_point()
    zb = ifs.map_of_word(b_letters).fixed_point()
    image = u.apply(zb)
    if isinstance(image, FieldElement):
        return image == za
    return all(x == y for x, y in zip(image, za))


# ----------------------------------------------------------------------
# word enumeration
# ----------------------------------------------------------------------

def level_map_weights(ifs: IFS, level: int, budget: int = 2_000_000) -> dict:
    """Map key -> (map, sum of p_I) over stopping words at the level."""
    threshold = level * ifs.k_max
    ident = ifs.identity_map()
    if threshold == 0:
        return {ident.key(): (ident, Fraction(1))}
    frontier = {ident.key(): (ident, Fraction(1), 0)}
    done: dict = {}
    while frontier:
        nxt: dict = {}
        for _key, (smap, w, expo) in frontier.items():
            for i, gen in enumerate(ifs.maps):
                child = smap.compose(gen)
                e2 = expo + ifs.exponents[i]
                w2 = w * ifs.probabilities[i]
                if e2 >= threshold:
                    k2 = child.key()
                    prev = done.get(k2)
                    done[k2] = (child, w2 if prev is None else prev[1] + w2)
                else:
                    k2 = (child.key(), e2)
                    prev = nxt.get(k2)
                    nxt[k2] = (child, w2 if prev is None else prev[1] + w2, e2)
            if len(nxt) + len(done) > budget:
                raise OracleError("word enumeration budget exceeded")
        frontier = nxt
    return done


def word_sum_entry(ifs: IFS, target: Similitude, level: int) -> Fraction:
    """Exact sum of p_I over stopping words at the level with S_I = target."""
    hit = level_map_weights(ifs, level).get(target.key())
    return hit[1] if hit is not None else Fraction(0)


def canonical_words(ifs: IFS, level: int, budget: int = 2_000_000) -> dict:
    """Map key -> lexicographically minimal stopping word realizing the map."""
    threshold = level * ifs.k_max
    ident = ifs.identity_map()
    if threshold == 0:
        return {ident.key(): ()}
    frontier = {ident.key(): (ident, (), 0)}
    done: dict = {}
    while frontier:
        nxt: dict = {}
        for _key, (smap, letters, expo) in frontier.items():
            for i, gen in enumerate(ifs.maps):
                child = smap.compose(gen)
                e2 = expo + ifs.exponents[i]
                w2 = letters + (i,)
                if e2 >= threshold:
                    k2 = child.key()
                    if k2 not in done or w2 < done[k2]:
                        done[k2] = w2
                else:
                    k2 = (child.key(), e2)
                    if k2 not in nxt or w2 < nxt[k2][1]:
                        nxt[k2] = (child, w2, e2)
            if len(nxt) + len(done) > budget:
                raise OracleError("word enumeration budget exceeded")
        frontier = nxt
    return done
