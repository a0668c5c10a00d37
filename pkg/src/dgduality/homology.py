"""Ext tables and colimit invariants: local cohomology, sections, Ext in D_Qgr.

Certification of Hom(F, N) when F is only resolved through internal degree P:

* If N is bounded above internally (top t), generators beyond P contribute
  nothing in internal degrees i >= t - P.
* If H(N) vanishes above internal degree h, the part of Hom(F, N) coming from
  generators beyond P is acyclic in internal degrees i >= h - P.
* Otherwise the resolution must be complete.  This is decided by a quiet
  margin: no new generator for ``margin`` consecutive internal degrees.  This
  last rule is a heuristic and is flagged in the result.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .bigraded import Bidegree, DimTable, Window
from .dgmodule import (ChainMap, HomComplex, PresentedDgModule, Slice, WindowedComplex, cohomology,
                       free_module, truncate_ge, truncate_lt)
from .errors import WindowTooSmall
from .resolve import hom_map, lift_map, semifree_resolution

MAX_THROUGH_SPAN = 80


def quiet_margin(M):
    A = M.A
    return 2 * max(A.max_generator_degree, A.max_relation_degree) + 1


def h_top(N, scan=None):
    """Upper bound for the internal support of H(N), or None if none was found.

    Exact when N is bounded above; otherwise the first run of ``margin``
    internal degrees with zero cohomology is taken as the end (heuristic).
    """
    if N.hi is not None:
        return N.hi
    if N.lo is None:
        return None
    margin = 2 * quiet_margin(N) + N.span_hint() + 1
    scan = scan or (6 * margin + 12)
    last = None
    run = 0
    for i in range(N.lo, N.lo + scan):
        if any(N.h((i, j)) for j in N.cohom_degrees(i)):
            last = i
            run = 0
        else:
            run += 1
            if run >= margin:
                return N.lo - 1 if last is None else last
    return None


@dataclass
class ThroughPlan:
    through: int
    method: str  # "bounded", "cohomology-bounded" or "complete"


def columns_complete(M, R, q, margin):
    """Heuristic: all generators of cohomological degree >= q have appeared."""
    lo = M.lo if M.lo is not None else 0
    top = M.hi if M.hi is not None else lo + M.span_hint()
    last = max((g.internal for g in R.generators if g.cohom >= q), default=lo)
    return R.through - max(top, last) >= margin


def resolve_for(M, N, w, minimum=None):
    """Resolution of M sufficient for Hom(F, N) on the window ``w``.

    Routes, in order of preference: N bounded above ("bounded"), H(N) bounded
    above ("cohomology-bounded"), and otherwise completeness of the generator
    columns that can reach cohomological degrees of ``w`` ("columns", heuristic).
    """
    lo = M.lo if M.lo is not None else 0
    floor = lo if minimum is None else max(lo, minimum)
    if N.hi is not None:
        P = max(N.hi - w.i_min, floor)
        return semifree_resolution(M, P), ThroughPlan(P, "bounded")
    h = h_top(N)
    if h is not None:
        P = max(h - w.i_min, floor)
        return semifree_resolution(M, P), ThroughPlan(P, "cohomology-bounded")
    nlo, _ = N.coh_bounds()
    if nlo is None:
        raise WindowTooSmall(f"cannot certify Hom into {N.name}: unbounded in both gradings")
    q = nlo - w.j_max - 1
    margin = quiet_margin(M)
    P = max(lo + M.span_hint() + margin, floor)
    R = None
    while True:
        R = semifree_resolution(M, P, start=R)
        if columns_complete(M, R, q, margin):
            return R, ThroughPlan(P, "columns")
        if P - lo > MAX_THROUGH_SPAN:
            raise WindowTooSmall(f"resolution of {M.name} not column-complete by internal degree {P}")
        P += margin


@dataclass(frozen=True)
class ExtTable(DimTable):
    source: object = None
    target: object = None
    resolution: object = None
    method: str = ""


def ext_table(M, N, w: Window, R=None):
    """dim Ext^j_A(M, N)_i on ``w``."""
    plan = None
    if R is None:
        R, plan = resolve_for(M, N, w)
    H = HomComplex(R.module, N)
    t = cohomology(H, w)
    return ExtTable(t.dims, w, frozenset(), M, N, R, plan.method if plan else "given")


# ---------------------------------------------------------------------------
# colimits


@dataclass
class StabilizedColimit:
    table: DimTable
    stabilized_at: dict
    unstable: list
    notes: list = dc_field(default_factory=list)

    def __getitem__(self, b):
        return self.table[b]

    def stabilized_csv(self):
        lines = [f"# valid {self.table.valid}", "internal,cohomological,stabilized_at"]
        for b in sorted(self.stabilized_at):
            lines.append(f"{b.internal},{b.cohom},{self.stabilized_at[b]}")
        return "\n".join(lines) + "\n"

    def warnings_text(self):
        lines = [f"unstable {b.internal},{b.cohom}" for b in sorted(self.unstable)]
        lines += [f"note {n}" for n in self.notes]
        return "\n".join(lines) + ("\n" if lines else "")


def _stabilize(levels, transition, w, indices, initial=None):
    """levels[d] is a complex; transition(d, b) maps level d to d+1 at b.

    An entry is stable when the last three levels agree in dimension and the two
    transitions between them are isomorphisms; ``stabilized_at`` is the start of
    the longest such run ending at the last level.  Runs of zeros at small d are
    not trusted because colimits of this kind typically start out as zero.

    Levels are consumed up to ``initial`` first and extended one at a time while
    some entry is unstable, up to the last index.
    """
    ranks = {}

    def rank(d, b):
        if (d, b) not in ranks:
            ranks[d, b] = _rank(levels, transition, d, b)
        return ranks[d, b]

    n = len(indices)
    if initial is not None:
        n = min(n, max(3, sum(1 for d in indices if d <= initial)))
    while True:
        out = _tail(levels, rank, w, indices[:n])
        if not out.unstable or n == len(indices):
            return out
        n += 1


def _tail(levels, rank, w, indices):
    stab = {}
    unstable = []
    vals = {}
    for b in w:
        seq = [levels[d].h(b) for d in indices]
        k = len(indices) - 1
        while k > 0 and seq[k - 1] == seq[-1] and (
                seq[-1] == 0 or rank(indices[k - 1], b) == seq[-1]):
            k -= 1
        if len(indices) - k >= 3:
            stab[b] = indices[k]
            vals[b] = seq[-1]
        else:
            unstable.append(b)
    dims = {b: v for b, v in vals.items() if v}
    return StabilizedColimit(DimTable(dims, w, frozenset(unstable)), stab, unstable)


def _rank(levels, transition, d, b):
    src = levels[d]
    h, Z, _ = src.cohomology_data(b)
    if not h:
        return 0
    m = transition(d, b)
    # a transition may land in a smaller model of level d+1 with the same cohomology at b
    m, tgt = m if isinstance(m, tuple) else (m, levels[d + 1])
    _, _, Bt = tgt.cohomology_data(b)
    Bt = Bt if Bt.size else src.field.zeros(0, tgt.dim(b))
    return linalg.induced_rank(src.field, m, Z, Bt)


def view_map(src, tgt):
    """Identity on the slices two views of the same module share, zero elsewhere."""
    fld = src.field

    def m(b):
        a, c = src.dim(b), tgt.dim(b)
        if a and c:
            if a != c:
                raise ValueError("views of different modules")
            return fld.eye(a)
        return fld.zeros(c, a)

    return ChainMap(src, tgt, m)


class _Lazy(dict):
    def __init__(self, make):
        super().__init__()
        self.make = make

    def __missing__(self, key):
        self[key] = value = self.make(key)
        return value


# levels before the last index that are tried before extending one at a time
EXTENSION = 5


def _ext_colimit(objects, N, w, indices, forward):
    """Colimit of Ext(X_d, N) where ``forward`` gives the map X_{d+1} -> X_d."""
    plans = _Lazy(lambda d: resolve_for(objects[d], N, w))
    last = indices[-1]

    def resolved(d):
        # level d must reach as far as the plan of level d+1 for the lift between them
        reach = max(plans[e][0].through for e in (d, d + 1) if e <= last)
        return semifree_resolution(objects[d], reach, start=plans[d][0])

    res = _Lazy(resolved)
    homs = _Lazy(lambda d: HomComplex(res[d].module, N))
    # both Hom(plan_d, N) and Hom(res_d, N) are certified on w, so they share cohomology there
    small = _Lazy(lambda d: HomComplex(plans[d][0].module, N))
    lifts = {}

    def transition(d, b):
        if d not in lifts:
            lifts[d] = lift_map(forward(d), plans[d + 1][0], res[d])
        return hom_map(lifts[d], homs[d], small[d + 1], b), small[d + 1]

    out = _stabilize(homs, transition, w, indices, indices[-1] - EXTENSION)
    methods = sorted({p[1].method for p in plans.values()})
    out.notes.append("certification: " + ",".join(methods))
    return out


def default_levels(M, w, extra=4):
    lo = M.lo if M.lo is not None else 0
    A = M.A
    return max(3, lo - w.i_min + extra + 2 * A.max_generator_degree)


def local_cohomology_colim(M, w: Window, d_max=None):
    """H^j_m(M)_i as colim_d Ext^j(A/A_{>=d}, M)."""
    A = M.A
    d_max = d_max or default_levels(M, w)
    free = free_module(A)
    idx = list(range(1, d_max + 3))
    objs = {d: truncate_lt(free, d) for d in idx}
    return _ext_colimit(objs, M, w, idx, lambda d: view_map(objs[d + 1], objs[d]))


def derived_global_sections(M, w: Window, d_max=None):
    """H^j RGamma_*(M~)_i as colim_d Ext^j(A_{>=d}, M)."""
    A = M.A
    d_max = d_max or default_levels(M, w)
    free = free_module(A)
    idx = list(range(0, d_max + 3))
    objs = {d: truncate_ge(free, d) if d else free for d in idx}
    return _ext_colimit(objs, M, w, idx, lambda d: view_map(objs[d + 1], objs[d]))


def ext_qgr(M, N, w: Window, d_max=None):
    """colim_d Ext^j(M_{>=d}, N)."""
    lo = M.lo if M.lo is not None else 0
    d_max = d_max or (default_levels(N, w) + max(lo, 0))
    idx = list(range(lo, lo + d_max + 3))
    objs = {d: truncate_ge(M, d) for d in idx}
    return _ext_colimit(objs, N, w, idx, lambda d: view_map(objs[d + 1], objs[d]))


# ---------------------------------------------------------------------------
# Cech pipeline


class CechLevel(WindowedComplex):
    """Koszul cochain complex K(y_1^n, ..., y_r^n; M), total bidegrees."""

    def __init__(self, M, ys, n):
        super().__init__(M.A, f"K({M.name};n={n})")
        self.M, self.ys, self.n = M, list(ys), n
        self.subsets = []
        r = len(self.ys)
        for mask in range(1 << r):
            S = tuple(l for l in range(r) if mask >> l & 1)
            self.subsets.append(S)
        self.subsets.sort(key=lambda S: (len(S), S))
        self.degs = [M.A.generators[y].internal for y in self.ys]
        self.lo = None
        self.hi = M.hi
        self._pow = {}

    def _shift(self, S, n=None):
        n = self.n if n is None else n
        return n * sum(self.degs[l] for l in S)

    def _layout(self, i):
        lay = {}
        for S in self.subsets:
            ii = i + self._shift(S)
            for jm in self.M.cohom_degrees(ii):
                lay.setdefault(jm + len(S), []).append(S)
        out, dims = {}, {}
        for j, Ss in lay.items():
            off = 0
            blocks = []
            for S in self.subsets:
                if S in Ss:
                    n = self.M.dim((i + self._shift(S), j - len(S)))
                    blocks.append((S, n, off))
                    off += n
            out[j], dims[j] = blocks, off
        return out, dims

    def ypow(self, l, e, b):
        """Action of y_l^e on M at b."""
        k = self.ys[l]
        m = [0] * len(self.A.generators)
        m[k] = e
        return self.M.act_monomial(tuple(m), b)

    def _slice(self, i):
        F = self.field
        lay, dims = self._layout(i)
        d = {}
        for j, src in lay.items():
            tgt = lay.get(j + 1)
            if not tgt:
                continue
            tpos = {S: (n, off) for S, n, off in tgt}
            D = F.zeros(dims[j + 1], dims[j])
            for S, n, off in src:
                b = (i + self._shift(S), j - len(S))
                if S in tpos:
                    tn, toff = tpos[S]
                    sgn = -1 if len(S) % 2 else 1
                    D[toff:toff + tn, off:off + n] = F.scale(self.M.diff(b), sgn)
                for l in range(len(self.ys)):
                    if l in S:
                        continue
                    T = tuple(sorted(S + (l,)))
                    if T not in tpos:
                        continue
                    tn, toff = tpos[T]
                    sgn = -1 if sum(1 for m in S if m < l) % 2 else 1
                    D[toff:toff + tn, off:off + n] = F.add(D[toff:toff + tn, off:off + n],
                                                           F.scale(self.ypow(l, self.n, b), sgn))
            d[j] = D
        return Slice(dims, d)

    def _action(self, k, i):
        raise NotImplementedError("Cech levels are only used for cohomology")


def cech_transition(K0, K1, b):
    """K_n -> K_{n+1}: component S multiplied by the product of y_l, l in S."""
    F = K0.field
    i, j = b
    lay0, d0 = K0._layout(i)
    lay1, d1 = K1._layout(i)
    out = F.zeros(d1.get(j, 0), d0.get(j, 0))
    if out.size == 0:
        return out
    tpos = {S: (n, off) for S, n, off in lay1.get(j, [])}
    for S, n, off in lay0.get(j, []):
        if S not in tpos:
            continue
        tn, toff = tpos[S]
        m = [0] * len(K0.A.generators)
        for l in S:
            m[K0.ys[l]] += 1
        b0 = (i + K0._shift(S), j - len(S))
        out[toff:toff + tn, off:off + n] = K0.M.act_monomial(tuple(m), b0)
    return out


def cech_sequence(A, names=None):
    if names is None:
        return A.even_degree0_generators()
    out = []
    for nm in names:
        k = A.names.index(nm)
        if A.generators[k].cohom != 0:
            raise ValueError(f"{nm} is not in A^0")
        out.append(k)
    return out


def local_cohomology_cech(M, w: Window, seq=None, n_max=None):
    """H^j_m(M)_i from the stable Cech complex on a sequence in A^0 (default: all coh-0 generators)."""
    A = M.A
    ys = cech_sequence(A, seq)
    n_max = n_max or default_levels(M, w)
    idx = list(range(1, n_max + 3))
    levels = {n: CechLevel(M, ys, n) for n in idx}
    out = _stabilize(levels, lambda n, b: cech_transition(levels[n], levels[n + 1], b), w, idx,
                     idx[-1] - EXTENSION)
    if seq is not None:
        q = PresentedDgModule(A, free_module(A).generators, relations=[f"{A.names[y]}*g0" for y in ys])
        top = w.i_max
        if any(q.dim((i, 0)) for i in range(max(top - A.max_generator_degree, 1), top + 1)):
            out.notes.append("sequence may not generate the maximal ideal of A^0 up to radical")
    return out


# ---------------------------------------------------------------------------
# triangle consistency


def triangle_check(loc, coh, gam, w):
    """Violations of exactness constraints of H_m(M) -> H(M) -> H(RGamma_*) -> H_m(M)[1].

    ``loc`` and ``gam`` are tables, ``coh`` the cohomology of M; per internal degree
    the alternating sum over a fully certified column whose nonzero terms sit strictly
    inside the cohomological range must vanish, and each term is bounded by its neighbours.
    """
    bad = []
    for i in w.internal_range():
        col = [Bidegree(i, j) for j in w.cohom_range()]
        if any(b in loc.unknown or b in gam.unknown for b in col):
            continue
        lm = {b.cohom: loc.dims.get(b, 0) for b in col}
        hm = {b.cohom: coh.dims.get(b, 0) for b in col}
        gm = {b.cohom: gam.dims.get(b, 0) for b in col}
        for j in w.cohom_range():
            if hm[j] > lm[j] + gm[j]:
                bad.append((Bidegree(i, j), "H(M) larger than its neighbours allow"))
            if j + 1 <= w.j_max and gm[j] > hm[j] + lm[j + 1]:
                bad.append((Bidegree(i, j), "sections larger than their neighbours allow"))
            if j - 1 >= w.j_min and lm[j] > gm[j - 1] + hm[j]:
                bad.append((Bidegree(i, j), "local cohomology larger than its neighbours allow"))
        edge = (lm[w.j_min], hm[w.j_min], gm[w.j_min], lm[w.j_max], hm[w.j_max], gm[w.j_max])
        if not any(edge):
            s = sum((-1) ** (j % 2) * (lm[j] - hm[j] + gm[j]) for j in w.cohom_range())
            if s:
                bad.append((Bidegree(i, w.j_min), f"alternating sum {s} != 0"))
    return bad
