"""Minimal semifree resolutions by cone killing, one internal degree at a time.

At internal degree p the cone of the current comparison map F -> M is a
finite complex.  Every cohomology class of it, in every cohomological degree
c, is killed by a new free generator at (p, c).  Because A_0 = k, the new
generator's differential only involves generators of lower internal degree
with coefficients in A_{>=1}, so the result is minimal, and the cone becomes
acyclic in internal degree p.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from collections import Counter
from dataclasses import dataclass, field as dc_field
from fractions import Fraction

import numpy as np

from . import linalg
from .algebra import GeneratorSpec
from .bigraded import Bidegree, Window
from .dgmodule import ChainMap, Cone, FreeData, PresentedDgModule, cohomology, parse_module
from .errors import InputError, WindowTooSmall

_CACHE_DIR = None


def set_cache_dir(path):
    """Enable (path) or disable (None) the on-disk resolution cache."""
    global _CACHE_DIR
    _CACHE_DIR = path
    if path:
        os.makedirs(path, exist_ok=True)


def get_cache_dir():
    return _CACHE_DIR


def _prefix(A):
    p = "F"
    while any(n.startswith(p) for n in A.names):
        p += "_"
    return p


def _free_elem(Fmod, v, b):
    """Free-module vector at b as a dict generator -> {monomial: coef}."""
    blocks, _ = Fmod._blocks(b)
    out = {}
    for t, B, off in blocks:
        comp = {m: v[off + r] for r, m in enumerate(B.monomials) if v[off + r] != 0}
        if comp:
            out[t] = comp
    return out


def pi_matrix(Fmod, M, pis, b):
    """Matrix of the A-linear map F_b -> M_b sending generator t to pis[t]."""
    fld = M.field
    b = Bidegree(*b)
    blocks, n = Fmod._blocks(b)
    out = fld.zeros(M.dim(b), n)
    if out.size == 0:
        return out
    for t, B, off in blocks:
        g = Fmod.generators[t]
        if not np.any(pis[t] != 0):
            continue
        for r, m in enumerate(B.monomials):
            out[:, off + r] = fld.matmul(M.act_monomial(m, g.bidegree), pis[t].reshape(-1, 1)).ravel()
    return out


@dataclass
class ResolutionData:
    target: object
    module: PresentedDgModule  # free, no relations
    pis: list  # vector in target at the bidegree of each generator
    through: int  # cone acyclic in internal degrees <= through
    valid: Window = None
    free: FreeData = dc_field(default=None, repr=False)

    def __post_init__(self):
        if self.free is None:
            self.free = FreeData(self.module)

    @property
    def A(self):
        return self.module.A

    @property
    def generators(self):
        return self.module.generators

    def betti(self):
        return Counter(g.bidegree for g in self.generators)

    def last_generator_degree(self):
        return max((g.internal for g in self.generators), default=None)

    def quiet_for(self):
        """Internal degrees at the top of the resolved range without new generators."""
        last = self.last_generator_degree()
        start = self.target.lo if last is None else last
        return self.through - start

    def pi(self, b):
        return pi_matrix(self.module, self.target, self.pis, b)

    def comparison(self):
        return ChainMap(self.module, self.target, self.pi)

    def to_text(self, key=""):
        F = self.module
        lines = [f"# dgduality resolution sha256={key} through={self.through}", F.to_text().rstrip("\n")]
        for t, g in enumerate(F.generators):
            lines.append(f"pi {g.name} = " + ",".join(str(x) for x in self.pis[t]))
        return "\n".join(lines) + "\n"


def _load(text, M, through):
    A = M.A
    fld = M.field
    if not any(line.startswith("modgen") for line in text.splitlines()):
        F = PresentedDgModule(A, [], {}, name="F", check=False)
        return ResolutionData(M, F, [], through, _valid(M, F, through))
    _, F = parse_module(text, A=A, source="cache")
    F = PresentedDgModule(A, F.generators, F.differential, name=F.name, check=False)
    pis = {}
    for line in text.splitlines():
        if line.startswith("pi "):
            name, _, vals = line[3:].partition(" = ")
            vals = [fld.elem(Fraction(x)) for x in vals.split(",") if x]
            pis[name.strip()] = np.array(vals, dtype=fld.dtype) if vals else fld.zeros(0)
    plist = [pis[g.name] for g in F.generators]
    return ResolutionData(M, F, plist, through, _valid(M, F, through))


def _valid(M, F, through):
    js = [g.cohom for g in F.generators] or [0]
    lo = M.lo if M.lo is not None else 0
    return Window(lo, max(lo, through), min(js), max(max(js), 0))


def cache_key(M, through):
    key = M.key() if hasattr(M, "key") else None
    if key is None:
        return None
    return hashlib.sha256(f"{key}\nthrough={through}\n".encode()).hexdigest()


def semifree_resolution(M, through, start=None, use_cache=True):
    """Minimal semifree resolution of M, exact in internal degrees <= ``through``."""
    if M.lo is None:
        raise InputError(f"{M.name}: resolution needs a module bounded below in internal degree")
    A = M.A
    fld = M.field
    key = cache_key(M, through) if use_cache and _CACHE_DIR else None
    if key:
        path = os.path.join(_CACHE_DIR, key + ".res")
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                return _load(fh.read(), M, through)
    prefix = _prefix(A)
    if start is not None and start.target is M:
        gens = list(start.generators)
        diff = dict(start.module.differential)
        pis = list(start.pis)
        p0 = start.through + 1
    else:
        gens, diff, pis = [], {}, []
        p0 = M.lo
    for p in range(p0, through + 1):
        F = PresentedDgModule(A, gens, diff, name="F", check=False)
        pmap = ChainMap(F, M, lambda b, F=F: pi_matrix(F, M, pis, b))
        C = Cone(pmap)
        s = C.slice(p)
        nM_of = {}
        new = []
        for c in sorted(s.dims):
            h, Z, Bd = C.cohomology_data((p, c))
            if not h:
                continue
            reps = linalg.complement_basis(fld, Bd, Z)
            nM = M.dim((p, c))
            nM_of[c] = nM
            for z in reps:
                new.append((c, z[:nM], z[nM:]))
        for c, zM, zF in new:
            t = len(gens)
            gens.append(GeneratorSpec(f"{prefix}{t}", p, c))
            img = _free_elem(F, fld.reduce(-zF), (p, c + 1))
            if img:
                diff[t] = img
            pis.append(np.array(zM, dtype=fld.dtype))
    F = PresentedDgModule(A, gens, diff, name=f"F({M.name})", check=False)
    R = ResolutionData(M, F, pis, through, _valid(M, F, through))
    if key:
        tmp = tempfile.NamedTemporaryFile("w", dir=_CACHE_DIR, delete=False, suffix=".tmp",
                                          encoding="utf-8")
        with tmp:
            tmp.write(R.to_text(key))
        os.replace(tmp.name, os.path.join(_CACHE_DIR, key + ".res"))
    return R


def build_resolution(M, generators, differential, pis, through):
    """A hand-made resolution (for tests and verification)."""
    F = PresentedDgModule(M.A, generators, differential, name="F", check=False)
    fld = M.field
    plist = []
    for t, g in enumerate(F.generators):
        v = pis[t] if t in pis or isinstance(pis, list) else None
        plist.append(fld.array(v) if v is not None else fld.zeros(M.dim(g.bidegree)))
    return ResolutionData(M, F, plist, through, _valid(M, F, through))


@dataclass
class VerifyReport:
    ok: bool
    minimal: bool
    failures: list  # (bidegree or generator, message)

    def __bool__(self):
        return self.ok


def verify_resolution(R: ResolutionData):
    """Recheck d^2 = 0, chain map, A-linearity, quasi-isomorphism and minimality."""
    F = R.module
    M = R.target
    fld = M.field
    fails = []
    nonminimal = []
    for t, lst in R.free.coeffs.items():
        for s, cb, v in lst:
            if cb.internal == 0 and np.any(v != 0):
                nonminimal.append((F.generators[t].name, f"unit coefficient on {F.generators[s].name}"))
    lo = M.lo
    pm = R.comparison()
    C = Cone(pm)
    for i in range(lo, R.through + 1):
        s = F.slice(i)
        for j in s.dims:
            b = Bidegree(i, j)
            if not fld.is_zero(fld.matmul(F.diff(b + (0, 1)), F.diff(b))):
                fails.append((b, "d^2 != 0"))
            lhs = fld.matmul(M.diff(b), R.pi(b))
            rhs = fld.matmul(R.pi(b + (0, 1)), F.diff(b))
            if not fld.is_zero(fld.sub(lhs, rhs)):
                fails.append((b, "comparison map is not a chain map"))
            for k, g in enumerate(M.A.generators):
                tb = b + g.bidegree
                if tb.internal > R.through:
                    continue
                l2 = fld.matmul(M.act(k, b), R.pi(b))
                r2 = fld.matmul(R.pi(tb), F.act(k, b))
                if not fld.is_zero(fld.sub(l2, r2)):
                    fails.append((b, f"comparison map not linear for {g.name}"))
        for j in C.slice(i).dims:
            if C.h((i, j)):
                fails.append((Bidegree(i, j), "comparison map not a quasi-isomorphism"))
    return VerifyReport(not fails, not nonminimal, fails + nonminimal)


# ---------------------------------------------------------------------------
# lifting chain maps to resolutions


@dataclass
class LiftedMap:
    """phi: F -> F' over f: X -> X', with homotopy h: pi' phi - f pi = d h + h d."""

    source: ResolutionData
    target: ResolutionData
    phi: list  # vector in F' at deg e_t
    htpy: list


def lift_map(f: ChainMap, R: ResolutionData, R2: ResolutionData, through=None):
    """Lift a chain map f: R.target -> R2.target along the two resolutions."""
    fld = R.target.field
    through = R.through if through is None else through
    if through > R2.through:
        raise WindowTooSmall("target resolution too short for lifting")
    F, F2 = R.module, R2.module
    X2 = R2.target
    C = Cone(R2.comparison())
    phi, htpy = [], []
    for t, g in enumerate(F.generators):
        if g.internal > through:
            break
        b = g.bidegree
        db = b + (0, 1)
        first = fld.matmul(f(b), R.pis[t].reshape(-1, 1)).ravel() if R.pis[t].size else fld.zeros(X2.dim(b))
        first = first if first.size else fld.zeros(X2.dim(b))
        second = fld.zeros(F2.dim(db))
        for s, cb, cvec in R.free.coeffs.get(t, ()):
            gs = F.generators[s]
            hs = htpy[s]
            if hs.size:
                first = fld.add(first, fld.matmul(X2.act_element(cvec, cb, gs.bidegree - (0, 1)),
                                                  hs.reshape(-1, 1)).ravel())
            ps = phi[s]
            if ps.size:
                second = fld.sub(second, fld.matmul(F2.act_element(cvec, cb, gs.bidegree),
                                                    ps.reshape(-1, 1)).ravel())
        target = np.concatenate([first, second]).astype(fld.dtype) if fld.dtype is not object \
            else np.concatenate([first, second])
        D = C.diff(b - (0, 1))
        if D.shape[0] != target.shape[0]:
            raise ArithmeticError("cone layout mismatch while lifting")
        w = linalg.solve(fld, D, target)
        if w is None:
            raise WindowTooSmall(f"cannot lift generator {g.name}: cone not acyclic at {b}")
        nX = X2.dim(b - (0, 1))
        htpy.append(fld.reduce(-w[:nX]))
        phi.append(w[nX:])
    return LiftedMap(R, R2, phi, htpy)


def hom_map(L: LiftedMap, H_src, H_tgt, b):
    """Matrix of precomposition Hom(F', N)_b -> Hom(F, N)_b.

    ``H_src`` is HomComplex(F', N) and ``H_tgt`` is HomComplex(F, N).
    """
    fld = H_src.field
    N = H_src.N
    i, j = b
    lay_s, dims_s = H_src._layout(i)
    lay_t, dims_t = H_tgt._layout(i)
    out = fld.zeros(dims_t.get(j, 0), dims_s.get(j, 0))
    if out.size == 0:
        return out
    spos = {u: (n, off) for u, n, off in lay_s.get(j, [])}
    F2 = L.target.module
    for t, n, off in lay_t.get(j, []):
        if t >= len(L.phi):
            continue
        g = L.source.generators[t]
        v = L.phi[t]
        blocks, _ = F2._blocks(g.bidegree)
        for u, B, boff in blocks:
            if u not in spos:
                continue
            c = v[boff:boff + B.dim]
            if not np.any(c != 0):
                continue
            un, uoff = spos[u]
            gu = F2.generators[u]
            blk = N.act_element(c, B.bidegree, (gu.internal + i, gu.cohom + j))
            out[off:off + n, uoff:uoff + un] = fld.add(out[off:off + n, uoff:uoff + un], blk)
    return out


def betti_table(R, w=None):
    cnt = R.betti()
    return dict(sorted(cnt.items()))


__all__ = ["ResolutionData", "semifree_resolution", "verify_resolution", "lift_map", "hom_map",
           "build_resolution", "set_cache_dir", "cohomology"]
