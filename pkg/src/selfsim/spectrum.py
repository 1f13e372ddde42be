"""Pressure of the transition-matrix cocycle and the L^q spectrum.

tau(q) = P(q) / log rho, where rho is the per-level contraction and
P(q) the exponential growth rate of the q-th moment sums of matrix
products over admissible words of the essential class.  Three routes:

* scalar: every essential state has a one-entry mass vector, so word
  norms multiply and P(q) is the log spectral radius of the elementwise
  q-th power of the transfer matrix, for any q > 0;
* integer q: the entry-sum norm satisfies ||A||^q = ||A kron^q||, so
  P(q) is the log spectral radius of the sum of Kronecker powers;
* finite n: exact dynamic programming over words, giving rigorous
  upper/lower bounds a_n/n and a_n/n - C/n plus a difference-quotient
  point estimate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .measure import MeasureModel, GlobalSystem, _tarjan_scc


class SpectrumError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# essential class
# ----------------------------------------------------------------------

class EssentialClass:
    """A terminal, internally communicating set of mass-positive states."""

    def __init__(self, model: MeasureModel, ids, diagnostics):
        self.model = model
        self.ids = list(ids)
        self.idset = set(ids)
        self.diagnostics = diagnostics
        self.system = GlobalSystem(model, alphabet=self.ids)
        self.size = self.system.size  # L

    def transfer_dense(self):
        """H = sum_i M_i as a dense Fraction matrix."""
        n = self.system.size
        rows = [[Fraction(0)] * n for _ in range(n)]
        for i in range(len(self.ids)):
            for k, t in self.system.blocks_into[i]:
                ro, co = self.system.offsets[k], self.system.offsets[i]
                for a in range(len(t)):
                    for b in range(len(t[0])):
                        rows[ro + a][co + b] += t[a][b]
        return rows

    def mass_eigenvector(self):
        out = []
        for sid in self.ids:
            out.extend(self.model.v_star(sid))
        return out


def essential_class(model: MeasureModel) -> EssentialClass:
    """Terminal strongly connected component of the pruned automaton.

    Ties between several terminal components are broken by the smallest
    member state id; extra terminal components are reported in the
    diagnostics.  Closure and communication are verified explicitly.
    """
    ids = list(model.kept)
    pos = {sid: k for k, sid in enumerate(ids)}
    succ = [[pos[e.child] for e in model.successors(sid)] for sid in ids]
    comp_of, ncomp = _tarjan_scc(len(ids), succ)
    members = [[] for _ in range(ncomp)]
    for k, c in enumerate(comp_of):
        members[c].append(k)
    terminal = []
    for c in range(ncomp):
        if all(comp_of[t] == c for k in members[c] for t in succ[k]):
            terminal.append(c)
    if not terminal:
        raise SpectrumError("no terminal component (empty pruned automaton?)")
    terminal.sort(key=lambda c: min(ids[k] for k in members[c]))
    chosen = sorted(ids[k] for k in members[terminal[0]])
    diagnostics = {"terminal_components": len(terminal)}

    chosen_set = set(chosen)
    for sid in chosen:
        for e in model.successors(sid):
            if e.child not in chosen_set:
                raise SpectrumError("essential class is not closed")
    _verify_communication(model, chosen)
    return EssentialClass(model, chosen, diagnostics)


def _verify_communication(model, ids):
    idx = {sid: k for k, sid in enumerate(ids)}
    n = len(ids)
    adj = np.zeros((n, n), dtype=bool)
    for sid in ids:
        for e in model.successors(sid):
            adj[idx[sid], idx[e.child]] = True
    reach = adj.copy()
    for _ in range(n):
        new = reach | (reach @ adj)
        if (new == reach).all():
            break
        reach = new
    if not reach.all():
        raise SpectrumError("essential class members do not all communicate")


def irreducibility_check(ess: EssentialClass):
    """Minimal r with sum_{i<=r} H^i entrywise positive; raises on failure."""
    h = ess.transfer_dense()
    n = len(h)
    b = np.array([[1 if x > 0 else 0 for x in row] for row in h], dtype=bool)
    acc = b.copy()
    power = b.copy()
    r = 1
    while not acc.all():
        if r >= n:
            missing = [(i, j) for i in range(n) for j in range(n) if not acc[i, j]]
            raise SpectrumError(
                f"transfer matrix is reducible; zero pattern at {missing[:10]}"
                f"{'...' if len(missing) > 10 else ''}")
        power = power @ b
        acc |= power
        r += 1
    return r


def min_positive_entry_sum_powers(ess: EssentialClass, r: int) -> float:
    """delta: the smallest positive entry of sum_{i<=r} H^i (float)."""
    h = np.array([[float(x) for x in row] for row in ess.transfer_dense()])
    acc = h.copy()
    power = h.copy()
    for _ in range(r - 1):
        power = power @ h
        acc += power
    vals = acc[acc > 0]
    return float(vals.min())


# ----------------------------------------------------------------------
# spectral radius with Collatz-Wielandt certificates
# ----------------------------------------------------------------------

def spectral_radius_bounds(matvec, dim, tol=1e-13, max_iter=100000):
    """Certified [lo, hi] around the Perron root of a nonnegative operator.

    For x > 0, min_i (Ax)_i/x_i <= rho(A) <= max_i (Ax)_i/x_i; power
    iteration shrinks the gap when the matrix is primitive.  Bounds stay
    valid either way; the width is reported, not hidden.
    """
    x = np.ones(dim)
    lo_best, hi_best = 0.0, math.inf
    for _ in range(max_iter):
        y = matvec(x)
        ny = float(np.linalg.norm(y, 1))
        if ny == 0:
            return 0.0, 0.0
        mask = x > 0
        ratios = y[mask] / x[mask]
        lo, hi = float(ratios.min()), float(ratios.max())
        lo_best = max(lo_best, lo)
        hi_best = min(hi_best, hi)
        if hi_best - lo_best <= tol * max(1.0, hi_best):
            break
        x = y / ny
    return lo_best, hi_best


# ----------------------------------------------------------------------
# pressure estimates
# ----------------------------------------------------------------------

@dataclass
class PressureEstimate:
    q: float
    lower: float
    upper: float
    point: float
    method: str
    n: int

    @property
    def width(self) -> float:
        return self.upper - self.lower


@dataclass
class SpectrumCurve:
    q: list
    tau: list
    tau_lower: list
    tau_upper: list
    method: list
    n: list
    diagnostics: dict = field(default_factory=dict)


class PressureEngine:
    """Pressure and tau for one measure model's essential class."""

    def __init__(self, model: MeasureModel, kron_dim_budget: int = 200000,
                 default_n: int = 14):
        self.model = model
        self.ess = essential_class(model)
        self.kron_dim_budget = kron_dim_budget
        self.default_n = default_n
        self.log_rho = model.automaton.ifs.log_stopping_ratio()
        self._scalar = all(d == 1 for d in self.ess.system.dims)
        self._r = None
        self._delta = None
        self._word_dp: dict[int, list] = {}

    # -- shared structure ----------------------------------------------------
    def irreducibility(self):
        if self._r is None:
            self._r = irreducibility_check(self.ess)
            self._delta = min_positive_entry_sum_powers(self.ess, self._r)
        return self._r, self._delta

    def _edge_matrices_float(self):
        sys = self.ess.system
        t = len(self.ess.ids)
        mats = []
        for i in range(t):
            blocks = [(k, np.array([[float(x) for x in row] for row in tm]))
                      for k, tm in sys.blocks_into[i]]
            mats.append(blocks)
        return mats

    # -- scalar route -----------------------------------------------------------
    def pressure_scalar(self, q: float) -> PressureEstimate:
        if not self._scalar:
            raise SpectrumError("scalar route requires one-dimensional blocks")
        sys = self.ess.system
        t = len(self.ess.ids)
        b = np.zeros((t, t))
        for i in range(t):
            for k, tm in sys.blocks_into[i]:
                b[k, i] += float(tm[0][0]) ** q
        lo, hi = spectral_radius_bounds(lambda x: b.T @ x, t)
        if lo <= 0:
            raise SpectrumError("scalar route found a zero spectral radius")
        return PressureEstimate(q, math.log(lo), math.log(hi),
                                (math.log(lo) + math.log(hi)) / 2, "scalar", t)

    # -- integer route --------------------------------------------------------
    def pressure_integer_q(self, q: int) -> PressureEstimate:
        """Exact-norm route via Kronecker powers; falls back on budget."""
        if q < 1 or q != int(q):
            raise SpectrumError("integer route needs a positive integer q")
        q = int(q)
        if q == 1:
            return self._pressure_one()
        ldim = self.ess.size
        if ldim ** q > self.kron_dim_budget:
            return self.pressure_finite_n(q, self.default_n)
        from scipy import sparse

        total = None
        t = len(self.ess.ids)
        sys = self.ess.system
        for i in range(t):
            dense = np.zeros((ldim, ldim))
            for k, tm in sys.blocks_into[i]:
                ro, co = sys.offsets[k], sys.offsets[i]
                for a in range(len(tm)):
                    for bcol in range(len(tm[0])):
                        dense[ro + a, co + bcol] += float(tm[a][bcol])
            m = sparse.csr_matrix(dense)
            kr = m
            for _ in range(q - 1):
                kr = sparse.kron(kr, m, format="csr")
            total = kr if total is None else total + kr
        lo, hi = spectral_radius_bounds(lambda x: total.T @ x, ldim ** q)
        if lo <= 0:
            raise SpectrumError("Kronecker route found a zero spectral radius")
        return PressureEstimate(q, math.log(lo), math.log(hi),
                                (math.log(lo) + math.log(hi)) / 2, "kronecker", q)

    def _pressure_one(self) -> PressureEstimate:
        # H w = w exactly for the concatenated mass vector, so P(1) = 0
        h = self.ess.transfer_dense()
        w = self.ess.mass_eigenvector()
        for i, row in enumerate(h):
            if sum((a * b for a, b in zip(row, w)), Fraction(0)) != w[i]:
                raise SpectrumError("mass vector is not an exact eigenvector of H")
        return PressureEstimate(1.0, 0.0, 0.0, 0.0, "eigenvector-exact", 0)

    # -- finite-n route -----------------------------------------------------------
    def _word_norms(self, n: int):
        """Aggregated (norm, count) pairs of all admissible length-n words.

        The DP tracks, per end state, the multiset of exact accumulated
        row vectors ||r(i1) T(...)...||; sharing collapses words with
        equal vectors, which keeps the multisets polynomial in practice.
        Oversized multisets are coarsened to float keys (documented in
        the diagnostics; irrelevant at the tolerances used downstream).
        """
        hit = self._word_dp.get(n)
        if hit is not None:
            return hit
        sys = self.ess.system
        t = len(self.ess.ids)
        # initial vectors r(i) = sum_k e(eta_k) T(eta_k, eta_i)
        start = {}
        for i in range(t):
            acc = None
            for k, tm in sys.blocks_into[i]:
                col = tuple(sum((row[j] for row in tm), Fraction(0))
                            for j in range(len(tm[0])))
                acc = col if acc is None else tuple(a + b for a, b in zip(acc, col))
            if acc is not None:
                start[(i, acc)] = 1
        succ = [[] for _ in range(t)]
        for i in range(t):
            for k, tm in sys.blocks_into[i]:
                succ[k].append((i, tm))
        snapshots = [None, _aggregate(start)]
        cur = start
        coarsened = False
        for step in range(2, n + 1):
            nxt: dict = {}
            for (i, vec), cnt in cur.items():
                for j, tm in succ[i]:
                    out = tuple(sum((vec[a] * tm[a][b] for a in range(len(vec))),
                                    Fraction(0)) for b in range(len(tm[0])))
                    key = (j, out)
                    nxt[key] = nxt.get(key, 0) + cnt
            if len(nxt) > 400000 and not coarsened:
                coarsened = True
                nxt = {(i, tuple(float(x) for x in vec)): c
                       for (i, vec), c in nxt.items()}
            cur = nxt
            snapshots.append(_aggregate(cur))
        self._word_dp[n] = snapshots
        if coarsened:
            snapshots[0] = {"coarsened": True}
        return snapshots

    def word_moment_log(self, q: float, n: int) -> float:
        """a_n(q) = log sum over admissible words of ||M-product||^q."""
        snap = self._word_norms(n)[n]
        return _log_moment(snap, q)

    def pressure_finite_n(self, q: float, n: int | None = None) -> PressureEstimate:
        if n is None:
            n = self.default_n
        if n < 2:
            raise SpectrumError("finite-n route needs n >= 2")
        snaps = self._word_norms(n)
        a_n = _log_moment(snaps[n], q)
        a_prev2 = _log_moment(snaps[n - 2], q) if n >= 3 else _log_moment(snaps[1], q) * (n - 2)
        r, delta = self.irreducibility()
        c = q * abs(math.log(delta)) + math.log(len(self.ess.ids))
        upper = a_n / n
        lower = a_n / n - c / n
        # two-step difference quotient: sharp point estimate inside the bounds
        point = min(max((a_n - a_prev2) / 2, lower), upper)
        return PressureEstimate(q, lower, upper, point, "finite-n", n)

    # -- tau ---------------------------------------------------------------------
    def pressure(self, q: float, n: int | None = None,
                 prefer: str | None = None) -> PressureEstimate:
        if q <= 0:
            raise SpectrumError("pressure is computed for q > 0 only")
        if prefer == "finite-n":
            return self.pressure_finite_n(q, n)
        if float(q).is_integer() and prefer != "scalar":
            est = self.pressure_integer_q(int(q))
            if est.method != "finite-n":
                return est
        if self._scalar:
            return self.pressure_scalar(q)
        return self.pressure_finite_n(q, n)

    def tau(self, q: float, n: int | None = None, prefer: str | None = None):
        """tau(q) and rigorous bounds; log rho is negative, so bounds swap."""
        est = self.pressure(q, n=n, prefer=prefer)
        lr = self.log_rho
        vals = sorted((est.lower / lr, est.upper / lr))
        return est.point / lr, vals[0], vals[1], est

    def lq_curve(self, qs, n: int | None = None) -> SpectrumCurve:
        """Sample tau on a grid with one consistent method across the grid.

        The curve value follows the subadditive estimate a_n(q)/n, which
        is a log-sum-exp and hence exactly convex in q, so the sampled
        tau is concave up to float evaluation noise; the sharper point
        estimates stay available through tau().
        """
        method = "scalar" if self._scalar else "finite-n"
        curve = SpectrumCurve([], [], [], [], [], [])
        widths = []
        for q in qs:
            if method == "scalar":
                est = self.pressure_scalar(q)
                value = est.point / self.log_rho
            else:
                est = self.pressure_finite_n(q, n)
                value = est.upper / self.log_rho
            lr = self.log_rho
            lo, hi = sorted((est.lower / lr, est.upper / lr))
            curve.q.append(float(q))
            curve.tau.append(value)
            curve.tau_lower.append(lo)
            curve.tau_upper.append(hi)
            curve.method.append(est.method)
            curve.n.append(est.n)
            widths.append(hi - lo)
        curve.diagnostics = {
            "max_bound_width": max(widths) if widths else 0.0,
            "smoothness_max_jump": _max_second_difference(curve.q, curve.tau),
        }
        return curve


def _aggregate(dist: dict) -> dict:
    """Collapse (state, vector) multiplicities to (float norm -> count)."""
    out: dict = {}
    for (_i, vec), cnt in dist.items():
        s = 0.0
        for x in vec:
            s += float(x)
        out[s] = out.get(s, 0) + cnt
    return out


def _log_moment(norms: dict, q: float) -> float:
    terms = [cnt * v**q for v, cnt in norms.items() if v > 0]
    return math.log(math.fsum(terms))


def _max_second_difference(qs, taus) -> float:
    worst = 0.0
    for i in range(1, len(qs) - 1):
        h1, h2 = qs[i] - qs[i - 1], qs[i + 1] - qs[i]
        if h1 <= 0 or h2 <= 0:
            continue
        d2 = (taus[i + 1] - taus[i]) / h2 - (taus[i] - taus[i - 1]) / h1
        worst = max(worst, d2)
    return worst
