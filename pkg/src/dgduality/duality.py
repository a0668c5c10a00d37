"""Duality statements checked as per-bidegree dimension identities.

Every check returns a ``DualityReport``: the window it looked at, the
bidegrees where the two sides disagree, and the bidegrees that could not be
certified (unstable colimits).  Graded commutativity means the conditions
over A^op coincide with those over A, so only one side is computed.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

from .bigraded import Bidegree, DimTable, Window
from .dgmodule import (HomComplex, cohomology, free_module, k_dual, residue_field, shift_twist,
                       truncate_ge)
from .errors import NotGorenstein
from .homology import (derived_global_sections, ext_qgr, ext_table, local_cohomology_cech,
                       local_cohomology_colim, quiet_margin, resolve_for, triangle_check)

OP_NOTE = "A graded-commutative: the A^op condition coincides with the A condition"


@dataclass
class DualityReport:
    theorem: str
    window: Window
    mismatches: list  # (bidegree, lhs, rhs)
    unstable: list = dc_field(default_factory=list)
    notes: list = dc_field(default_factory=list)
    tables: dict = dc_field(default_factory=dict, repr=False)

    @property
    def passed(self):
        return not self.mismatches

    @property
    def certified(self):
        return not self.unstable

    def status(self):
        if self.mismatches:
            return "FAIL"
        return "PASS" if not self.unstable else "UNCERTIFIED"

    def summary(self):
        return (f"{self.status()} {self.theorem} window={self.window} "
                f"mismatches={len(self.mismatches)} unstable={len(self.unstable)}")

    def mismatches_csv(self):
        lines = [f"# valid {self.window}", "internal,cohomological,lhs,rhs"]
        for b, l, r in sorted(self.mismatches):
            lines.append(f"{b[0]},{b[1]},{l},{r}")
        return "\n".join(lines) + "\n"


def _compare(theorem, lhs, rhs, w, unstable=(), lhs_key=None, notes=()):
    """Compare two tables on w; ``lhs_key`` maps a bidegree of w to the rhs bidegree."""
    lhs_key = lhs_key or (lambda b: b)
    bad = []
    skip = set(unstable)
    for b in w:
        if b in skip:
            continue
        l = lhs.dims.get(b, 0)
        rb = lhs_key(b)
        if rb in rhs.unknown:
            skip.add(b)
            continue
        r = rhs.dims.get(rb, 0)
        if l != r:
            bad.append((b, l, r))
    return DualityReport(theorem, w, bad, sorted(skip), list(notes))


# ---------------------------------------------------------------------------
# Gorenstein property


@dataclass
class GorensteinCertificate:
    gorenstein_in_window: bool
    a: int | None
    n: int | None
    evidence: DimTable

    def __str__(self):
        if not self.gorenstein_in_window:
            return f"not Gorenstein in window {self.evidence.valid}: Ext(k,A) = {self.evidence.nonzero()}"
        return f"(a,n)=({self.a},{self.n})"


def default_gorenstein_window(A, scale=1):
    s = sum(g.internal for g in A.generators) + A.max_relation_degree
    c = len(A.even_degree0_generators())
    return Window(-scale * (s + 2), scale * (s + 2), -2 * scale, c + 2 * scale)


def gorenstein_detect(A, w=None):
    """Read (a, n) off Ext_A(k, A) ~ k(a)[-n]: a single entry of dim 1 at (-a, n)."""
    w = w or default_gorenstein_window(A)
    ext = ext_table(residue_field(A), free_module(A), w)
    nz = ext.nonzero()
    if len(nz) == 1 and next(iter(nz.values())) == 1:
        (b, _), = nz.items()
        return GorensteinCertificate(True, -b.internal, b.cohom, ext)
    return GorensteinCertificate(False, None, None, ext)


def dualizing_module(A, cert):
    """R = A(-a)[n]."""
    if not cert.gorenstein_in_window:
        raise NotGorenstein(str(cert))
    return free_module(A, -cert.a, cert.n, name=f"A({-cert.a})[{cert.n}]")


# ---------------------------------------------------------------------------
# checks


def balanced_check(A, R, w, pipelines=("colim", "cech")):
    """H_m(R) against Hom_k(A, k), using both local cohomology pipelines."""
    dual = cohomology(k_dual(free_module(A)), w)
    mism, unstable, notes = [], set(), [OP_NOTE]
    tables = {"dual": dual}
    for name in pipelines:
        loc = (local_cohomology_colim if name == "colim" else local_cohomology_cech)(R, w)
        tables[name] = loc.table
        rep = _compare("balanced", loc.table, dual, w, loc.unstable)
        mism += [(b, l, r) for b, l, r in rep.mismatches if (b, l, r) not in mism]
        unstable |= set(loc.unstable)
    out = DualityReport("balanced", w, sorted(mism), sorted(unstable), notes)
    out.tables = tables
    return out


def local_duality_check(M, R, w):
    """dim H^j_m(M)_i = dim Ext^{-j}(M, R)_{-i}."""
    loc = local_cohomology_colim(M, w)
    ext = ext_table(M, R, w.dual())
    rep = _compare("local", loc.table, ext, w, loc.unstable, lambda b: Bidegree(-b[0], -b[1]),
                   [OP_NOTE])
    rep.tables = {"local_cohomology": loc.table, "ext": ext}
    return rep


def serre_duality_check(M, R, w, twists=None, finite_form=True):
    """dim R^jGamma(M(l)~) = dim Ext^{-j-1}(M~, R~)_{-l}, plus the finite form.

    ``w`` supplies the cohomological range; ``twists`` (lo, hi) the range of l
    (default: the internal range of ``w``).
    """
    t_lo, t_hi = twists if twists is not None else (w.i_min, w.i_max)
    W = Window(t_lo, t_hi, w.j_min, w.j_max)
    gam = derived_global_sections(M, W)
    Wq = Window(-t_hi, -t_lo, -w.j_max - 1, -w.j_min - 1)
    q = ext_qgr(M, R, Wq)
    key = lambda b: Bidegree(-b[0], -b[1] - 1)
    rep = _compare("serre", gam.table, q.table, W, gam.unstable, key, [OP_NOTE])
    tables = {"sections": gam.table, "ext_qgr": q.table}
    if finite_form:
        for l in range(t_lo, t_hi + 1):
            col = Window(-l, -l, Wq.j_min, Wq.j_max)
            fin = ext_table(truncate_ge(M, l + 1), R, col)
            for j in W.cohom_range():
                b = Bidegree(l, j)
                if b in rep.unstable:
                    continue
                lhs = gam.table.dims.get(b, 0)
                rhs = fin.dims.get(Bidegree(-l, -j - 1), 0)
                if lhs != rhs:
                    rep.mismatches.append((b, lhs, rhs))
                    rep.notes.append(f"finite form fails at {b}")
    rep.tables = tables
    return rep


def condition_chi_check(A, M, w):
    """Ext^j_A(k, M) vanishes on the top internal row of the window for every j."""
    ext = ext_table(residue_field(A), M, w)
    bad = []
    notes = []
    for j in w.cohom_range():
        occ = [b.internal for b in ext.nonzero() if b.cohom == j]
        if occ:
            top = max(occ)
            notes.append(f"j={j} top={top}")
            if top >= w.i_max:
                bad.append((Bidegree(top, j), ext[(top, j)], 0))
    rep = DualityReport("chi", w, bad, [], notes)
    rep.tables = {"ext": ext}
    return rep


def cohomological_range(M, scan=None):
    """(sup, inf) of the cohomological support of H(M), scanned over internal degrees."""
    lo = M.lo if M.lo is not None else 0
    scan = scan or (M.span_hint() + 3 * quiet_margin(M) + 2)
    occ = set()
    for i in range(lo, lo + scan + 1):
        for j in M.cohom_degrees(i):
            if M.h((i, j)):
                occ.add(j)
    if not occ:
        return None, None
    return max(occ), min(occ)


def vanishing_range_check(M, R, w, twists=None):
    """R^jGamma(M(l)~) = 0 unless inf(M) <= j <= sup(M) - inf(R) - 1."""
    t_lo, t_hi = twists if twists is not None else (w.i_min, w.i_max)
    W = Window(t_lo, t_hi, w.j_min, w.j_max)
    sup_m, inf_m = cohomological_range(M)
    _, inf_r = cohomological_range(R)
    gam = derived_global_sections(M, W)
    bad = []
    notes = []
    if sup_m is None:
        notes.append("H(M) = 0: every R^jGamma vanishes")
        lo_j, hi_j = 1, 0
    else:
        lo_j, hi_j = inf_m, sup_m - inf_r - 1
        notes.append(f"allowed j in [{lo_j},{hi_j}]")
    for b, v in gam.table.nonzero().items():
        if not lo_j <= b.cohom <= hi_j:
            bad.append((b, v, 0))
    occupied = sorted({b.cohom for b in gam.table.nonzero()})
    if occupied:
        notes.append(f"occupied j: {occupied}")
    rep = DualityReport("vanishing", W, bad, list(gam.unstable), notes)
    rep.tables = {"sections": gam.table}
    rep.allowed = (lo_j, hi_j)
    rep.occupied = occupied
    return rep


def reflexivity_check(M, R, w):
    """Ext(Ext(M, R), R) against H(M) (dimension shadow of R-reflexivity)."""
    wd = w.dual()
    F, _ = resolve_for(M, R, wd)
    D = HomComplex(F.module, R, name=f"D({M.name})")
    again = ext_table(D, R, w)
    coh = cohomology(M, w)
    rep = _compare("reflexive", again, coh, w)
    rep.notes.append("double dual computed from the truncated first dual")
    rep.tables = {"double_dual": again, "cohomology": coh}
    return rep


def finiteness_check(M, i0, w):
    """Sections stabilize for l >= i0 and agree with H(M) where H_m(M) vanishes."""
    W = Window(max(i0, w.i_min), w.i_max, w.j_min, w.j_max)
    gam = derived_global_sections(M, W)
    loc = local_cohomology_colim(M, Window(W.i_min, W.i_max, W.j_min, W.j_max + 1))
    coh = cohomology(M, W)
    bad = []
    for b in W:
        if b in gam.unstable:
            continue
        if loc.table.get(b, 1) == 0 and loc.table.get((b[0], b[1] + 1), 1) == 0:
            g, h = gam.table.dims.get(b, 0), coh.dims.get(b, 0)
            if g != h:
                bad.append((b, g, h))
    bad += [(b, -1, -1) for b, _ in triangle_check(loc.table, coh, gam.table, W)]
    rep = DualityReport("finiteness", W, bad, list(gam.unstable),
                        ["finite generation over H^0(A) is only checked through stabilization"])
    rep.tables = {"sections": gam.table}
    return rep


def shifted_pair(M, R, s):
    """(M(t)[s], R) for shift-equivariance tests."""
    return shift_twist(M, s), R
