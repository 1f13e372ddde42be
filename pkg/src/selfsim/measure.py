"""Exact atom masses through transition matrices.

Each state carries a vector v with one entry per covering cylinder, the
mass of the atom pulled back through that cylinder.  The vectors solve
the linear self-consistency system given by the edge matrices (a parent
atom decomposes into its children), together with mass 1 at the root.
Null components are first guessed by a float iteration and then removed;
the remaining system is solved exactly over the rationals, ordered by
strongly connected components, and verified entry by entry.  The float
pass is only a filter: every reported mass is an exact rational that
satisfies the full system.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .automaton import Automaton, NotAdmissible


class MeasureError(RuntimeError):
    pass


# ----------------------------------------------------------------------
# component graph helpers
# ----------------------------------------------------------------------

def _component_edges(auto: Automaton):
    """Sparse rows of the self-consistency operator over (state, V-index)."""
    comp_index = {}
    comps = []
    for sid, st in enumerate(auto.states):
        for i in range(st.v_size):
            comp_index[(sid, i)] = len(comps)
            comps.append((sid, i))
    rows = [[] for _ in comps]
    for sid, st in enumerate(auto.states):
        for e in auto.edges[sid]:
            for i in range(st.v_size):
                row = e.tmatrix[i]
                for j, t in enumerate(row):
                    if t:
                        rows[comp_index[(sid, i)]].append((comp_index[(e.child, j)], t))
    return comps, comp_index, rows


def _tarjan_scc(n, succ):
    """Strongly connected components, iterative Tarjan; returns (comp_of, order).

    Components are numbered in reverse topological order (a component's
    successors have smaller numbers).
    """
    index = [None] * n
    low = [0] * n
    on_stack = [False] * n
    stack = []
    comp_of = [None] * n
    counter = [0]
    comps = [0]
    for root in range(n):
        if index[root] is not None:
            continue
        work = [(root, 0)]
        while work:
            v, pi = work[-1]
            if pi == 0:
                index[v] = low[v] = counter[0]
                counter[0] += 1
                stack.append(v)
                on_stack[v] = True
            recurse = False
            edges = succ[v]
            for k in range(pi, len(edges)):
                w = edges[k]
                if index[w] is None:
                    work[-1] = (v, k + 1)
                    work.append((w, 0))
                    recurse = True
                    break
                if on_stack[w]:
                    low[v] = min(low[v], index[w])
            if recurse:
                continue
            work.pop()
            if work:
                u = work[-1][0]
                low[u] = min(low[u], low[v])
            if low[v] == index[v]:
                cid = comps[0]
                comps[0] += 1
                while True:
                    w = stack.pop()
                    on_stack[w] = False
                    comp_of[w] = cid
                    if w == v:
                        break
    return comp_of, comps[0]


def _nullspace_dim1(rows, n):
    """One positive nullspace vector of a sparse rational matrix, or None.

    rows: list of dicts {col: Fraction}.  Sparse elimination with
    Markowitz-style pivoting to limit fill-in.  Returns None when the
    nullspace is trivial; raises when its dimension exceeds one.
    """
    rows = [dict(r) for r in rows]
    col_rows: dict = {}
    for i, r in enumerate(rows):
        for c in r:
            col_rows.setdefault(c, set()).add(i)
    alive = {i for i, r in enumerate(rows) if r}
    pivot_order = []  # (col, row dict) in elimination order

    while True:
        best = None
        for i in alive:
            row = rows[i]
            if not row:
                continue
            rlen = len(row)
            for c in row:
                cost = (rlen - 1) * (len(col_rows[c]) - 1)
                if best is None or cost < best[0]:
                    best = (cost, i, c)
            if best and best[0] == 0:
                break
        if best is None:
            break
        _, pr, pc = best
        prow = rows[pr]
        pv = prow[pc]
        prow = {c: x / pv for c, x in prow.items()}
        rows[pr] = {}
        for c in prow:
            col_rows[c].discard(pr)
        alive.discard(pr)
        for i in list(col_rows.get(pc, ())):
            if i not in alive:
                continue
            row = rows[i]
            f = row.get(pc)
            if f is None:
                continue
            for c, x in prow.items():
                nv = row.get(c, Fraction(0)) - f * x
                if nv:
                    if c not in row:
                        col_rows.setdefault(c, set()).add(i)
                    row[c] = nv
                else:
                    if c in row:
                        del row[c]
                        col_rows[c].discard(i)
        pivot_order.append((pc, prow))

    if any(rows[i] for i in alive):
        raise MeasureError("inconsistent sparse linear system in the mass solve")
    pivot_cols = {c for c, _ in pivot_order}
    free = [c for c in range(n) if c not in pivot_cols]
    if not free:
        return None
    if len(free) > 1:
        raise MeasureError("mass system nullspace has dimension > 1")
    vec = [Fraction(0)] * n
    vec[free[0]] = Fraction(1)
    for pc, prow in reversed(pivot_order):
        s = Fraction(0)
        for c, x in prow.items():
            if c != pc:
                s += x * vec[c]
        vec[pc] = -s
    if any(x < 0 for x in vec):
        vec = [-x for x in vec]
    return vec


# ----------------------------------------------------------------------
# the solve
# ----------------------------------------------------------------------

@dataclass
class RestrictedEdge:
    child: int
    tmatrix: tuple  # rows: parent star entries, cols: child star entries


class MeasureModel:
    """Mass vectors and the pruned, mass-positive automaton."""

    def __init__(self, auto: Automaton, v, star, kept, edges, diagnostics):
        self.automaton = auto
        self.v = v                    # per state: tuple of Fractions over V positions
        self.star = star              # per state: tuple of V-indices with positive mass
        self.kept = kept              # sorted state ids with nonzero mass
        self.kept_set = set(kept)
        self.edges = edges            # per state id: list[RestrictedEdge] (kept only)
        self.diagnostics = diagnostics

    # -- basic accessors ----------------------------------------------------
    def v_star(self, sid: int):
        return tuple(self.v[sid][i] for i in self.star[sid])

    def star_dim(self, sid: int) -> int:
        return len(self.star[sid])

    def transition_matrix(self, a: int, b: int):
        for e in self.edges[a]:
            if e.child == b:
                return e.tmatrix
        raise NotAdmissible(f"no mass-positive edge {a} -> {b}")

    def successors(self, sid: int):
        return self.edges[sid]

    # -- measures -------------------------------------------------------------
    def mass(self, address) -> Fraction:
        """Exact mass of the atom addressed by a root-based state path."""
        address = list(address)
        if not address or address[0] != 0:
            raise NotAdmissible("address must start at the root state 0")
        if address[0] not in self.kept_set:
            raise NotAdmissible("root pruned (inconsistent model)")
        vec = [Fraction(1)] * self.star_dim(0)
        cur = 0
        for nxt in address[1:]:
            t = self.transition_matrix(cur, nxt)
            vec = [sum((vec[i] * t[i][j] for i in range(len(vec))), Fraction(0))
                   for j in range(len(t[0]) if t else 0)]
            cur = nxt
        return sum((a * b for a, b in zip(vec, self.v_star(cur))), Fraction(0))

    def u_vector(self, address):
        """The exact row vector of word-weight sums along an address."""
        address = list(address)
        vec = [Fraction(1)] * self.star_dim(0)
        cur = 0
        for nxt in address[1:]:
            t = self.transition_matrix(cur, nxt)
            vec = [sum((vec[i] * t[i][j] for i in range(len(vec))), Fraction(0))
                   for j in range(len(t[0]) if t else 0)]
            cur = nxt
        return tuple(vec)

    def addresses(self, depth: int):
        out = []

        def rec(prefix):
            if len(prefix) == depth + 1:
                out.append(tuple(prefix))
                return
            for e in self.edges[prefix[-1]]:
                prefix.append(e.child)
                rec(prefix)
                prefix.pop()

        rec([0])
        return out

    def total_mass(self, depth: int) -> Fraction:
        """Sum of mass over all depth-n admissible addresses, exactly.

        Computed by distributing the sum over the path tree, which gives
        the same rational as adding the individual masses.
        """
        memo = {}

        def g(sid, d):
            if d == 0:
                return list(self.v_star(sid))
            key = (sid, d)
            hit = memo.get(key)
            if hit is not None:
                return hit
            dim = self.star_dim(sid)
            acc = [Fraction(0)] * dim
            for e in self.edges[sid]:
                sub = g(e.child, d - 1)
                for i in range(dim):
                    row = e.tmatrix[i]
                    acc[i] += sum((row[j] * sub[j] for j in range(len(sub))), Fraction(0))
            memo[key] = acc
            return acc

        return g(0, depth)[0]

    def product_matrix(self, address):
        """Product of the restricted edge matrices along an address."""
        address = list(address)
        mat = None
        cur = address[0]
        for nxt in address[1:]:
            t = self.transition_matrix(cur, nxt)
            mat = t if mat is None else _mat_mul_frac(mat, t)
            cur = nxt
        if mat is None:
            d = self.star_dim(cur)
            mat = tuple(tuple(Fraction(1 if i == j else 0) for j in range(d))
                        for i in range(d))
        return mat

    def star_maps_absolute(self, address):
        """Absolute covering maps (star entries) at the end of an address."""
        auto = self.automaton
        frame = None
        for sid in address[1:]:
            r = auto.states[sid].rmap
            frame = r if frame is None else frame.compose(r)
        st = auto.states[address[-1]]
        out = []
        for i in self.star[address[-1]]:
            phi = st.umaps[st.vpos[i]]
            out.append(phi if frame is None else frame.compose(phi))
        return out


def _mat_mul_frac(a, b):
    rows = len(a)
    inner = len(b)
    cols = len(b[0]) if inner else 0
    return tuple(tuple(sum((a[i][k] * b[k][j] for k in range(inner)), Fraction(0))
                       for j in range(cols)) for i in range(rows))


def compute_mass_vectors(auto: Automaton, *, null_eps: float = 1e-12,
                         tol: float = 1e-10, max_iter: int = 10000,
                         stable_window: int = 60) -> MeasureModel:
    """Solve the mass self-consistency system exactly.

    Float iteration of the covering sums flags the components that decay
    to zero; the exact rational solve on the remaining support (terminal
    class first, then back-substitution in reverse SCC order, then root
    normalization) is the authority and is verified entry by entry.
    """
    comps, comp_index, rows = _component_edges(auto)
    n = len(comps)
    frows = [[(j, float(t)) for j, t in r] for r in rows]

    x = [1.0] * n
    null_mask = [False] * n
    stable = 0
    iters = 0
    for iters in range(1, max_iter + 1):
        x = [sum(t * x[j] for j, t in fr) for fr in frows]
        new_mask = [xi < null_eps for xi in x]
        if new_mask == null_mask:
            stable += 1
            if stable >= stable_window:
                break
        else:
            null_mask = new_mask
            stable = 0
    else:
        raise MeasureError(
            f"mass iteration did not stabilize within {max_iter} iterations; "
            f"residual null-set churn at {sum(null_mask)} components")

    null = {i for i in range(n) if null_mask[i]}
    for attempt in range(n + 2):
        # forced: a component with any positive edge into the support
        # cannot be null
        changed = True
        while changed:
            changed = False
            for i in list(null):
                if any(j not in null for j, _t in rows[i]):
                    null.discard(i)
                    changed = True
        try:
            v = _exact_solve(comps, rows, null, n)
            break
        except _Reclassify as rc:
            null |= rc.to_null
    else:
        raise MeasureError("mass solve failed to reach a consistent support")

    root_val = v[comp_index[(0, 0)]]
    if root_val <= 0:
        raise MeasureError("root received non-positive mass")
    v = [x / root_val for x in v]

    # exact verification of the full system
    for i in range(n):
        rhs = sum((t * v[j] for j, t in rows[i]), Fraction(0))
        if rhs != v[i]:
            raise MeasureError(f"mass self-consistency violated at component {comps[i]}")

    return _assemble(auto, comps, comp_index, v, diagnostics={
        "iterations": iters, "null_components": sum(1 for y in v if y == 0)})


class _Reclassify(Exception):
    def __init__(self, to_null):
        self.to_null = to_null


def _exact_solve(comps, rows, null, n):
    support = [i for i in range(n) if i not in null]
    pos = {c: k for k, c in enumerate(support)}
    succ = [[pos[j] for j, _t in rows[c] if j in pos] for c in support]
    comp_of, ncomp = _tarjan_scc(len(support), succ)
    groups = [[] for _ in range(ncomp)]
    for k, c in enumerate(comp_of):
        groups[c].append(k)

    v = [Fraction(0)] * n
    solved = [False] * len(support)
    terminal_done = False
    for cid in range(ncomp):  # reverse topological: successors first
        group = groups[cid]
        gidx = {k: i for i, k in enumerate(group)}
        g = len(group)
        # sparse rows of (I - F) restricted to the group, inflow in column g
        srows = []
        is_terminal = True
        for gi, k in enumerate(group):
            c = support[k]
            row = {gi: Fraction(1)}
            inflow = Fraction(0)
            for j, t in rows[c]:
                kj = pos.get(j)
                if kj is None:
                    continue  # null target contributes nothing
                gj = gidx.get(kj)
                if gj is not None:
                    row[gj] = row.get(gj, Fraction(0)) - t
                    if row[gj] == 0:
                        del row[gj]
                else:
                    if not solved[kj]:
                        raise MeasureError("SCC order violated")
                    inflow += t * v[support[kj]]
                    is_terminal = False
            if inflow:
                row[g] = -inflow
            srows.append(row)
        if is_terminal:
            vec = _nullspace_dim1(srows, g)
            if vec is None:
                # no mass can live here after all
                raise _Reclassify({support[k] for k in group})
            if terminal_done and any(x > 0 for x in vec):
                states = sorted({comps[support[k]][0] for k in group})
                raise MeasureError(
                    "mass system underdetermined: a second mass-carrying "
                    f"terminal class exists (states {states}); the "
                    "self-consistency equations plus the root normalization "
                    "cannot fix the relative scale of independent classes")
            if any(x <= 0 for x in vec):
                raise MeasureError("terminal class eigenvector not positive")
            sol = vec
            terminal_done = True
        else:
            # augmented nullspace: (x, 1) spans it iff (I-F)x = inflow uniquely
            vec = _nullspace_dim1(srows, g + 1)
            if vec is None:
                sol = [Fraction(0)] * g
            else:
                if vec[g] == 0:
                    raise MeasureError("singular transient block in the mass solve")
                sol = [x / vec[g] for x in vec[:g]]
            if any(x < 0 for x in sol):
                raise MeasureError("negative mass in back-substitution")
            zero = {support[group[i]] for i, x in enumerate(sol) if x == 0}
            if zero:
                raise _Reclassify(zero)
        for i, k in enumerate(group):
            v[support[k]] = sol[i]
            solved[k] = True
    if not terminal_done:
        raise MeasureError("no terminal class found")
    return v


def _assemble(auto: Automaton, comps, comp_index, v, diagnostics) -> MeasureModel:
    nstates = len(auto.states)
    vvecs = []
    star = []
    for sid in range(nstates):
        st = auto.states[sid]
        vec = tuple(v[comp_index[(sid, i)]] for i in range(st.v_size))
        vvecs.append(vec)
        star.append(tuple(i for i, x in enumerate(vec) if x > 0))
    kept = [sid for sid in range(nstates) if star[sid]]
    kept_set = set(kept)
    edges = [[] for _ in range(nstates)]
    for sid in kept:
        for e in auto.edges[sid]:
            if e.child not in kept_set:
                continue
            rs = star[sid]
            cs = star[e.child]
            tm = tuple(tuple(e.tmatrix[i][j] for j in cs) for i in rs)
            for col in range(len(cs)):
                if all(tm[r][col] == 0 for r in range(len(rs))):
                    raise MeasureError(
                        f"edge {sid}->{e.child}: column {col} of the restricted "
                        "matrix is zero")
            edges[sid].append(RestrictedEdge(e.child, tm))
    if 0 not in kept_set:
        raise MeasureError("root state pruned")
    diagnostics["kept_states"] = len(kept)
    diagnostics["total_states"] = nstates
    return MeasureModel(auto, vvecs, star, kept, edges, diagnostics)


# ----------------------------------------------------------------------
# global block matrices
# ----------------------------------------------------------------------

class GlobalSystem:
    """Block matrices M_i and weight vectors w_i over a state alphabet.

    M_i carries the transition matrices T(.,eta_i) in block column i;
    w_i holds the mass vector of eta_i in block i and ones elsewhere.
    Products against the first unit vector evaluate atom masses exactly.
    """

    def __init__(self, model: MeasureModel, alphabet=None):
        if alphabet is None:
            alphabet = list(model.kept)
        self.model = model
        self.alphabet = list(alphabet)
        self.position = {sid: k for k, sid in enumerate(self.alphabet)}
        self.dims = [model.star_dim(sid) for sid in self.alphabet]
        self.offsets = []
        off = 0
        for d in self.dims:
            self.offsets.append(off)
            off += d
        self.size = off
        # admissible block pairs: position k -> list of (position j, T)
        self.blocks_into: list[list] = [[] for _ in self.alphabet]
        for k, sid in enumerate(self.alphabet):
            for e in model.successors(sid):
                j = self.position.get(e.child)
                if j is not None:
                    self.blocks_into[j].append((k, e.tmatrix))

    def matrix_dense(self, i: int):
        """M_i as a dense tuple-of-tuples of Fractions (for export/tests)."""
        rows = [[Fraction(0)] * self.size for _ in range(self.size)]
        for k, t in self.blocks_into[i]:
            ro, co = self.offsets[k], self.offsets[i]
            for a in range(len(t)):
                for b in range(len(t[0])):
                    rows[ro + a][co + b] = t[a][b]
        return tuple(tuple(r) for r in rows)

    def weight_vector(self, i: int):
        out = []
        for j, sid in enumerate(self.alphabet):
            if j == i:
                out.extend(self.model.v_star(sid))
            else:
                out.extend([Fraction(1)] * self.dims[j])
        return tuple(out)

    def to_json_dict(self) -> dict:
        """Alphabet, star dimensions, block structure and weights, exact."""
        def frac(x):
            return f"{x.numerator}/{x.denominator}"

        blocks = []
        for i, sid in enumerate(self.alphabet):
            into = [{"from_position": k,
                     "T": [[frac(t) for t in row] for row in tm]}
                    for k, tm in self.blocks_into[i]]
            blocks.append({"state": sid, "dim": self.dims[i], "column_blocks": into,
                           "mass_vector": [frac(x) for x in self.model.v_star(sid)]})
        return {
            "alphabet": list(self.alphabet),
            "total_dimension": self.size,
            "blocks": blocks,
            "weight_vectors": "block i of w_i is the state's mass vector; "
                              "all other blocks are ones",
        }

    def mass_global(self, address) -> Fraction:
        """e1 . M_{i1} ... M_{in} . w_{in}^T for a root-based address."""
        address = list(address)
        if not address or address[0] != self.alphabet[0]:
            raise NotAdmissible("address must start at the first alphabet state")
        vec = {0: [Fraction(1)] + [Fraction(0)] * (self.dims[0] - 1)}
        last = 0
        for sid in address[1:]:
            i = self.position.get(sid)
            if i is None:
                raise NotAdmissible(f"state {sid} not in the alphabet")
            acc = [Fraction(0)] * self.dims[i]
            for k, t in self.blocks_into[i]:
                seg = vec.get(k)
                if seg is None:
                    continue
                for a, va in enumerate(seg):
                    if va:
                        row = t[a]
                        for b in range(len(acc)):
                            acc[b] += va * row[b]
            vec = {i: acc}
            last = i
        w = self.weight_vector(last)
        total = Fraction(0)
        for k, seg in vec.items():
            off = self.offsets[k]
            for a, va in enumerate(seg):
                total += va * w[off + a]
        return total
