"""Right dg-modules as lazily computed per-internal-degree complexes.

Internal degree is preserved by differentials and the ground field sits in
internal degree 0, so every object here is a direct sum over internal
degrees ``i`` of finite complexes of vector spaces.  A ``WindowedComplex``
computes the slice at ``i`` (all cohomological degrees at once) on demand
and caches it.  Generator actions of A move between slices.

Sign conventions (right modules):
  d(m a) = d(m) a + (-1)^{|m|} m d(a)
  M[s]: differential multiplied by (-1)^s, action unchanged
  Hom differential: (d f) = d_N f - (-1)^{|f|} f d_M
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field as dc_field

import numpy as np

from . import linalg
from .algebra import DgAlgebra, GeneratorSpec, free_add, free_mul, parse_algebra, parse_terms
from .bigraded import Bidegree, DimTable, ShiftSpec, Window
from .errors import InputError


@dataclass
class Slice:
    """One internal degree: dims[j] and differentials d[j]: V^j -> V^{j+1}."""

    dims: dict
    d: dict = dc_field(default_factory=dict)

    def degrees(self):
        return sorted(j for j, n in self.dims.items() if n)


class WindowedComplex:
    """Base class; subclasses implement ``_slice(i)`` and ``_action(k, i)``.

    ``lo``/``hi`` bound the internal support (None means unbounded).
    """

    lo = None
    hi = None

    def __init__(self, A: DgAlgebra, name="M"):
        self.A = A
        self.field = A.field
        self.name = name
        self._lock = threading.RLock()
        self._slices = {}
        self._actions = {}
        self._mono_actions = {}
        self._coh = {}
        self._ranks = {}

    # -- subclass interface ----------------------------------------------------

    def _slice(self, i):
        raise NotImplementedError

    def _action(self, k, i):
        """dict j -> matrix of right multiplication by generator k from (i, j)."""
        raise NotImplementedError

    # -- cached accessors --------------------------------------------------------

    def in_support(self, i):
        return (self.lo is None or i >= self.lo) and (self.hi is None or i <= self.hi)

    def slice(self, i):
        with self._lock:
            s = self._slices.get(i)
            if s is None:
                s = self._slice(i) if self.in_support(i) else Slice({})
                s.dims = {j: n for j, n in s.dims.items() if n}
                self._slices[i] = s
            return s

    def dim(self, b):
        return self.slice(b[0]).dims.get(b[1], 0)

    def diff(self, b):
        i, j = b
        s = self.slice(i)
        m = s.d.get(j)
        if m is None:
            return self.field.zeros(s.dims.get(j + 1, 0), s.dims.get(j, 0))
        return m

    def act(self, k, b):
        """Right multiplication by generator k from M_b to M_{b + deg x_k}."""
        i, j = b
        g = self.A.generators[k]
        src = self.dim(b)
        tgt = self.dim((i + g.internal, j + g.cohom))
        if not src or not tgt:
            return self.field.zeros(tgt, src)
        with self._lock:
            key = (k, i)
            acts = self._actions.get(key)
            if acts is None:
                acts = self._action(k, i)
                self._actions[key] = acts
        m = acts.get(j)
        if m is None:
            return self.field.zeros(tgt, src)
        return m

    def act_monomial(self, m, b):
        """Right multiplication by a free monomial m (generators applied in order)."""
        key = (m, Bidegree(*b))
        with self._lock:
            hit = self._mono_actions.get(key)
        if hit is not None:
            return hit
        F = self.field
        b = Bidegree(*b)
        last = max((k for k, e in enumerate(m) if e), default=None)
        if last is None:
            out = F.eye(self.dim(b))
        else:
            # peel off the last factor so powers reuse the cached prefix
            prefix = tuple(e - (k == last) for k, e in enumerate(m))
            mid = b
            for k, e in enumerate(prefix):
                g = self.A.generators[k]
                mid = mid + (e * g.internal, e * g.cohom)
            out = F.matmul(self.act(last, mid), self.act_monomial(prefix, b))
        with self._lock:
            self._mono_actions[key] = out
        return out

    def act_element(self, vec, eb, b):
        """Right multiplication by the element of A_eb with basis coordinates ``vec``."""
        F = self.field
        tb = Bidegree(*b) + eb
        out = F.zeros(self.dim(tb), self.dim(b))
        if out.size == 0:
            return out
        for c, m in zip(vec, self.A.basis(eb).monomials):
            if c != 0:
                out = F.add(out, F.scale(self.act_monomial(m, b), c))
        return out

    def act_free(self, elem, b):
        """Right multiplication by an unreduced free element (dict monomial -> coef)."""
        F = self.field
        out = None
        for m, c in elem.items():
            term = F.scale(self.act_monomial(m, b), c)
            out = term if out is None else F.add(out, term)
        return out

    # -- cohomology ----------------------------------------------------------------

    def cohomology_data(self, b):
        """(dim H, cycles rref rows, boundaries rref rows) at bidegree b."""
        b = Bidegree(*b)
        with self._lock:
            hit = self._coh.get(b)
        if hit is not None:
            return hit
        F = self.field
        n = self.dim(b)
        if n == 0:
            res = (0, F.zeros(0, 0), F.zeros(0, 0))
        else:
            Z = linalg.kernel(F, self.diff(b), canonical=False).basis
            Bm = linalg.image(F, self.diff(b - (0, 1))).basis
            res = (Z.shape[0] - Bm.shape[0], Z, Bm)
        with self._lock:
            self._coh[b] = res
        return res

    def diff_rank(self, b):
        b = Bidegree(*b)
        with self._lock:
            hit = self._ranks.get(b)
        if hit is None:
            hit = linalg.rank(self.field, self.diff(b)) if self.dim(b) and self.dim(b + (0, 1)) else 0
            with self._lock:
                self._ranks[b] = hit
        return hit

    def h(self, b):
        b = Bidegree(*b)
        with self._lock:
            hit = self._coh.get(b)
        if hit is not None:
            return hit[0]
        n = self.dim(b)
        if not n:
            return 0
        return n - self.diff_rank(b) - self.diff_rank(b - (0, 1))

    def cohom_degrees(self, i):
        return self.slice(i).degrees()

    def key(self):
        """Canonical text identifying this object (None if not cacheable)."""
        return None

    def coh_bounds(self):
        """(lowest, highest) cohomological degree of the spaces; None when unknown."""
        return None, None

    def span_hint(self):
        """Rough internal-degree spread of the generators, for heuristic margins."""
        if self.lo is not None and self.hi is not None:
            return max(self.hi - self.lo, 0)
        return 0

    def space_table(self, w):
        return DimTable({b: self.dim(b) for b in w}, w)

    def __repr__(self):
        return f"{type(self).__name__}({self.name!r})"


@dataclass(frozen=True)
class CohomologyTable(DimTable):
    sup: object = None
    inf: object = None


def cohomology(M: WindowedComplex, w: Window):
    """Cohomology dims H^j(M)_i on ``w``; sup/inf are over the window."""
    dims = {}
    for i in w.internal_range():
        for j in M.cohom_degrees(i):
            if w.j_min <= j <= w.j_max:
                dims[Bidegree(i, j)] = M.h((i, j))
    occupied = sorted({b.cohom for b, v in dims.items() if v})
    return CohomologyTable(dims, w, frozenset(), occupied[-1] if occupied else None,
                           occupied[0] if occupied else None)


def euler_characteristic(M, i, table=False):
    s = M.slice(i)
    if table:
        return sum((-1) ** (j % 2) * M.h((i, j)) for j in s.degrees())
    return sum((-1) ** (j % 2) * n for j, n in s.dims.items())


def check_module(M: WindowedComplex, w: Window):
    """Violations of d^2 = 0, Leibniz, graded commutativity and relations of A on ``w``."""
    F = M.field
    A = M.A
    bad = []
    odd = A.odd
    for b in w:
        if not M.dim(b):
            continue
        d2 = F.matmul(M.diff(b + (0, 1)), M.diff(b))
        if not F.is_zero(d2):
            bad.append((b, "d^2 != 0"))
        sign = -1 if b.cohom % 2 else 1
        for k, g in enumerate(A.generators):
            gb = g.bidegree
            lhs = F.matmul(M.diff(b + gb), M.act(k, b))
            rhs = F.matmul(M.act(k, b + (0, 1)), M.diff(b))
            dg = A.differential.get(k)
            if dg:
                rhs = F.add(rhs, F.scale(M.act_free(dg, b), sign))
            if not F.is_zero(F.sub(lhs, rhs)):
                bad.append((b, f"Leibniz fails for {g.name}"))
            for l in range(k, len(A.generators)):
                h = A.generators[l].bidegree
                xy = F.matmul(M.act(l, b + gb), M.act(k, b))
                if l == k:
                    if odd[k] and not F.is_zero(xy):
                        bad.append((b, f"{g.name}^2 acts nonzero"))
                    continue
                yx = F.matmul(M.act(k, b + h), M.act(l, b))
                s = -1 if odd[k] and odd[l] else 1
                if not F.is_zero(F.sub(xy, F.scale(yx, s))):
                    bad.append((b, f"{g.name},{A.generators[l].name} do not graded-commute"))
        for _, r in A.relations:
            act = M.act_free(r, b)
            if act is not None and not F.is_zero(act):
                bad.append((b, "relation of A acts nonzero"))
    return bad


# ---------------------------------------------------------------------------
# views


class Shifted(WindowedComplex):
    """M(twist)[shift]: the space at (i, j) is M_{(i + twist, j + shift)}."""

    def __init__(self, M, s: ShiftSpec):
        s = ShiftSpec(*s)
        super().__init__(M.A, f"{M.name}({s.twist})[{s.shift}]")
        self.M, self.s = M, s
        self.lo = None if M.lo is None else M.lo - s.twist
        self.hi = None if M.hi is None else M.hi - s.twist

    def _slice(self, i):
        src = self.M.slice(i + self.s.twist)
        t = self.s.shift
        sign = -1 if t % 2 else 1
        return Slice({j - t: n for j, n in src.dims.items()},
                     {j - t: self.field.scale(m, sign) for j, m in src.d.items()})

    def key(self):
        inner = self.M.key()
        return None if inner is None else f"shift {self.s.twist} {self.s.shift}\n{inner}"

    def span_hint(self):
        return self.M.span_hint()

    def coh_bounds(self):
        lo, hi = self.M.coh_bounds()
        t = self.s.shift
        return (None if lo is None else lo - t), (None if hi is None else hi - t)

    def _action(self, k, i):
        t = self.s.shift
        out = {}
        for j in self.M.cohom_degrees(i + self.s.twist):
            out[j - t] = self.M.act(k, (i + self.s.twist, j))
        return out


def shift_twist(M, s):
    s = ShiftSpec(*s)
    if s == (0, 0):
        return M
    if isinstance(M, Shifted):
        return shift_twist(M.M, M.s + s)
    return Shifted(M, s)


class TruncatedGe(WindowedComplex):
    """M_{>=d}: internal degrees below d zeroed."""

    def key(self):
        inner = self.M.key()
        return None if inner is None else f"ge {self.d}\n{inner}"

    def span_hint(self):
        return self.M.span_hint() + self.A.max_generator_degree

    def coh_bounds(self):
        return self.M.coh_bounds()

    def __init__(self, M, d):
        super().__init__(M.A, f"{M.name}_>={d}")
        self.M, self.d = M, d
        self.lo = d if M.lo is None else max(d, M.lo)
        self.hi = M.hi

    def _slice(self, i):
        return self.M.slice(i)

    def _action(self, k, i):
        return {j: self.M.act(k, (i, j)) for j in self.M.cohom_degrees(i)}


def truncate_ge(M, d):
    if M.lo is not None and d <= M.lo:
        return M
    return TruncatedGe(M, d)


class TruncatedLt(WindowedComplex):
    """M / M_{>=d}: internal degrees d and above zeroed."""

    def key(self):
        inner = self.M.key()
        return None if inner is None else f"lt {self.d}\n{inner}"

    def coh_bounds(self):
        return self.M.coh_bounds()

    def __init__(self, M, d):
        super().__init__(M.A, f"{M.name}/{M.name}_>={d}")
        self.M, self.d = M, d
        self.lo = M.lo
        self.hi = d - 1 if M.hi is None else min(d - 1, M.hi)

    def _slice(self, i):
        return self.M.slice(i)

    def _action(self, k, i):
        return {j: self.M.act(k, (i, j)) for j in self.M.cohom_degrees(i)}


def truncate_lt(M, d):
    return TruncatedLt(M, d)


class SmartTruncLe(WindowedComplex):
    """sigma^{<=n} M: M^j for j < n, the cycles Z^n at n, zero above.

    A sub-dg-module because A^1 = 0: cycles times A^0 stay cycles.
    """

    def __init__(self, M, n):
        super().__init__(M.A, f"sigma<={n}({M.name})")
        self.M, self.n = M, n
        self.lo, self.hi = M.lo, M.hi
        self._cyc = {}

    def coh_bounds(self):
        lo, hi = self.M.coh_bounds()
        return lo, self.n if hi is None else min(hi, self.n)

    def cycles(self, i):
        """(basis rows in rref, pivot columns) of Z^n in internal degree i."""
        if i not in self._cyc:
            F = self.field
            Z = linalg.kernel(F, self.M.diff((i, self.n))).basis
            piv = [int(np.flatnonzero(r)[0]) for r in Z]
            self._cyc[i] = (Z, piv)
        return self._cyc[i]

    def _slice(self, i):
        F = self.field
        dims, d = {}, {}
        for j in self.M.cohom_degrees(i):
            if j < self.n:
                dims[j] = self.M.dim((i, j))
        Z, piv = self.cycles(i) if self.M.dim((i, self.n)) else (F.zeros(0, 0), [])
        if Z.shape[0]:
            dims[self.n] = Z.shape[0]
        for j in dims:
            if j + 1 < self.n and dims.get(j + 1):
                d[j] = self.M.diff((i, j))
            elif j + 1 == self.n and dims.get(self.n):
                d[j] = self.M.diff((i, j))[piv]
        return Slice(dims, d)

    def _action(self, k, i):
        F = self.field
        g = self.A.generators[k]
        out = {}
        for j, n in self.slice(i).dims.items():
            tj = j + g.cohom
            m = self.M.act(k, (i, j))
            if j == self.n:
                m = F.matmul(m, self.cycles(i)[0].T)
            if tj == self.n:
                m = m[self.cycles(i + g.internal)[1]]
            out[j] = m
        return out


class SmartTruncGe(WindowedComplex):
    """sigma^{>=n} M: zero below n, M^n / B^n at n, M^j above.

    The quotient of M by the sub-dg-module M^{<n} + B^n.
    """

    def __init__(self, M, n):
        super().__init__(M.A, f"sigma>={n}({M.name})")
        self.M, self.n = M, n
        self.lo, self.hi = M.lo, M.hi
        self._quo = {}

    def coh_bounds(self):
        lo, hi = self.M.coh_bounds()
        return self.n if lo is None else max(lo, self.n), hi

    def quotient(self, i):
        """(projection P onto M^n/B^n, section S with P S = 1) in internal degree i."""
        if i not in self._quo:
            F = self.field
            q, P = linalg.cokernel_basis(F, self.M.diff((i, self.n - 1)))
            # a section: unit vectors at the pivot columns of P in rref
            piv = [int(np.flatnonzero(r)[0]) for r in P]
            S = F.zeros(P.shape[1], q)
            for c, pc in enumerate(piv):
                S[pc, c] = F.elem(1)
            S = F.matmul(S, linalg_inverse(F, F.matmul(P, S)))
            self._quo[i] = (P, S)
        return self._quo[i]

    def _slice(self, i):
        F = self.field
        dims, d = {}, {}
        for j in self.M.cohom_degrees(i):
            if j > self.n:
                dims[j] = self.M.dim((i, j))
        if self.M.dim((i, self.n)):
            P, S = self.quotient(i)
            if P.shape[0]:
                dims[self.n] = P.shape[0]
        for j in dims:
            if not dims.get(j + 1):
                continue
            m = self.M.diff((i, j))
            d[j] = F.matmul(m, self.quotient(i)[1]) if j == self.n else m
        return Slice(dims, d)

    def _action(self, k, i):
        F = self.field
        g = self.A.generators[k]
        out = {}
        for j in self.slice(i).dims:
            tj = j + g.cohom
            if tj < self.n:
                continue
            m = self.M.act(k, (i, j))
            if j == self.n:
                m = F.matmul(m, self.quotient(i)[1])
            if tj == self.n:
                m = F.matmul(self.quotient(i + g.internal)[0], m)
            out[j] = m
        return out


def linalg_inverse(F, m):
    n = m.shape[0]
    cols = [linalg.solve(F, m, F.eye(n)[:, c]) for c in range(n)]
    return np.stack(cols, axis=1) if cols else F.zeros(0, 0)


def smart_truncate_le(M, n):
    return SmartTruncLe(M, n)


def smart_truncate_ge(M, n):
    return SmartTruncGe(M, n)


class KDual(WindowedComplex):
    """Hom_k(M, k) with (M*)_i^j = (M_{-i}^{-j})*."""

    def coh_bounds(self):
        lo, hi = self.M.coh_bounds()
        return (None if hi is None else -hi), (None if lo is None else -lo)

    def __init__(self, M):
        super().__init__(M.A, f"{M.name}*")
        self.M = M
        self.lo = None if M.hi is None else -M.hi
        self.hi = None if M.lo is None else -M.lo

    def _slice(self, i):
        src = self.M.slice(-i)
        dims = {-j: n for j, n in src.dims.items()}
        d = {}
        for j in dims:
            # (d a)(m) = -(-1)^{|a|} a(d m) for a in degree j, m in degree -j-1
            m = self.M.diff((-i, -j - 1))
            if m.size:
                d[j] = self.field.scale(m.T, -1 if j % 2 == 0 else 1)
        return Slice(dims, d)

    def _action(self, k, i):
        # (a . x)(m) = (-1)^{|x| (|a| + 1)} a(m x), forced by Leibniz for the dual differential
        g = self.A.generators[k]
        out = {}
        for j in self.slice(i).dims:
            src = (-i - g.internal, -j - g.cohom)
            m = self.M.act(k, src)
            sign = -1 if (g.cohom * (j + 1)) % 2 else 1
            out[j] = self.field.scale(m.T, sign)
        return out


def k_dual(M):
    return KDual(M)


class ChainMap:
    """Degree-zero A-linear chain map given per bidegree by ``matrix(b)``."""

    def __init__(self, source, target, matrix):
        self.source, self.target = source, target
        self._matrix = matrix

    def __call__(self, b):
        return self._matrix(Bidegree(*b))


class Cone(WindowedComplex):
    """cone(f) = N + M[1] with d(n, m) = (d n + f m, -d m)."""

    def __init__(self, f: ChainMap, name=None):
        M, N = f.source, f.target
        super().__init__(M.A, name or f"cone({M.name}->{N.name})")
        self.f, self.M, self.N = f, M, N
        los = [x.lo for x in (M, N)]
        his = [x.hi for x in (M, N)]
        self.lo = None if None in los else min(los)
        self.hi = None if None in his else max(his)

    def _slice(self, i):
        F = self.field
        M, N = self.M, self.N
        js = set(N.cohom_degrees(i)) | {j - 1 for j in M.cohom_degrees(i)}
        dims = {j: N.dim((i, j)) + M.dim((i, j + 1)) for j in js}
        d = {}
        for j in js:
            if not dims.get(j + 1):
                continue
            n0, n1 = N.dim((i, j)), N.dim((i, j + 1))
            m1, m2 = M.dim((i, j + 1)), M.dim((i, j + 2))
            D = F.zeros(n1 + m2, n0 + m1)
            D[:n1, :n0] = N.diff((i, j))
            if n1 and m1:
                D[:n1, n0:] = self.f((i, j + 1))
            if m2 and m1:
                D[n1:, n0:] = F.scale(M.diff((i, j + 1)), -1)
            d[j] = D
        return Slice(dims, d)

    def _action(self, k, i):
        F = self.field
        g = self.A.generators[k]
        out = {}
        for j, n in self.slice(i).dims.items():
            t = (i + g.internal, j + g.cohom)
            n0, m0 = self.N.dim((i, j)), self.M.dim((i, j + 1))
            n1, m1 = self.N.dim(t), self.M.dim((t[0], t[1] + 1))
            X = F.zeros(n1 + m1, n0 + m0)
            if n0 and n1:
                X[:n1, :n0] = self.N.act(k, (i, j))
            if m0 and m1:
                X[n1:, n0:] = self.M.act(k, (i, j + 1))
            out[j] = X
        return out


def cone(f):
    return Cone(f)


# ---------------------------------------------------------------------------
# presented modules


class PresentedDgModule(WindowedComplex):
    """Right dg-module given by generators, differential and optional relations.

    Elements of the free module are dicts ``generator index -> free A element``
    meaning sum of g * a.  Spaces per bidegree are the free span modulo the span
    of relation * monomial.
    """

    def __init__(self, A, generators, differential=None, relations=(), name="M", source=None,
                 check=True):
        super().__init__(A, name)
        self.generators = tuple(generators)
        self.names = [g.name for g in self.generators]
        if len(set(self.names)) != len(self.names) or set(self.names) & set(A.names):
            raise InputError("module generator names must be distinct from each other and from "
                             "algebra generators", source=source)
        self.source = source
        self.check = check
        self.differential = {}
        for key, img in (differential or {}).items():
            t = self.names.index(key) if isinstance(key, str) else key
            img = self._coerce(img)
            g = self.generators[t]
            if img:
                deg = self.elem_bidegree(img)
                if deg != (g.internal, g.cohom + 1):
                    raise InputError(f"d({g.name}) has bidegree {deg}, expected "
                                     f"{Bidegree(g.internal, g.cohom + 1)}", source=source)
            self.differential[t] = img
        self.relations = []
        for r in relations:
            r = self._coerce(r)
            if r:
                self.relations.append((self.elem_bidegree(r), r))
        if self.generators:
            self.lo = min(g.internal for g in self.generators)
            top = A.top()
            self.hi = None if top is None else max(g.internal for g in self.generators) + top
        else:
            self.lo, self.hi = 0, -1
        self._space_cache = {}
        self._blocks_cache = {}

    # -- elements ----------------------------------------------------------------

    def _coerce(self, elem):
        if isinstance(elem, str):
            return self.parse_element(elem)
        out = {}
        for key, comp in dict(elem).items():
            t = self.names.index(key) if isinstance(key, str) else key
            comp = self.A._coerce(comp)
            if comp:
                out[t] = comp
        return out

    def elem_bidegree(self, elem):
        degs = set()
        for t, comp in elem.items():
            g = self.generators[t]
            for m in comp:
                degs.add(self.A.mono_bidegree(m) + g.bidegree)
        if len(degs) != 1:
            raise InputError(f"module element is not homogeneous (bidegrees {sorted(degs)})",
                             source=self.source)
        return degs.pop()

    def parse_element(self, text, line=None):
        A = self.A
        F = self.field
        n = len(A.generators)
        out = {}
        for coef, factors in parse_terms(text, A.names + self.names, line, self.source):
            mods = [f for f in factors if f[0] in self.names]
            if len(mods) != 1 or mods[0][1] != 1:
                raise InputError("each term needs exactly one module generator", line, self.source)
            gname = mods[0][0]
            t = self.names.index(gname)
            g_odd = self.generators[t].odd
            cur = {tuple([0] * n): F.elem(coef)}
            passed = False
            for name, power in factors:
                if name == gname:
                    passed = True
                    continue
                k = A.names.index(name)
                for _ in range(power):
                    cur = free_mul(cur, {A.generator_monomial(k): F.elem(1)}, A.odd, F)
                    if not passed and g_odd and A.odd[k]:
                        cur = {m: F.elem(-c) for m, c in cur.items()}
            if cur:
                out[t] = free_add(out.get(t, {}), cur, F)
        return {t: c for t, c in out.items() if c}

    # -- linearization -----------------------------------------------------------

    def _blocks(self, b):
        """[(t, A-basis at b - deg g_t, offset)], total free dim."""
        b = Bidegree(*b)
        hit = self._blocks_cache.get(b)
        if hit is not None:
            return hit
        blocks = []
        off = 0
        for t, g in enumerate(self.generators):
            sub = Bidegree(*b) - g.bidegree
            if sub.internal < 0:
                continue
            B = self.A.basis(sub)
            if B.dim:
                blocks.append((t, B, off))
                off += B.dim
        self._blocks_cache[b] = (blocks, off)
        return blocks, off

    def free_vector(self, elem, b):
        blocks, n = self._blocks(b)
        v = self.field.zeros(n)
        pos = {t: (B, off) for t, B, off in blocks}
        for t, comp in elem.items():
            if t not in pos:
                if comp and any(True for _ in comp):
                    nf = self.A.normal_form(comp, Bidegree(*b) - self.generators[t].bidegree)
                    if nf.size and np.any(nf != 0):
                        raise InputError("element outside its bidegree")
                continue
            B, off = pos[t]
            v[off:off + B.dim] = self.A.normal_form(comp, B.bidegree)
        return v

    def space(self, b):
        """(blocks, free dim, kept free columns, normal-form matrix) at b."""
        b = Bidegree(*b)
        with self._lock:
            hit = self._space_cache.get(b)
        if hit is not None:
            return hit
        F = self.field
        A = self.A
        blocks, n = self._blocks(b)
        rows = []
        for rb, r in self.relations:
            sub = b - rb
            if sub.internal < 0:
                continue
            for u in A.basis(sub).monomials:
                prod = {t: free_mul(comp, {u: F.elem(1)}, A.odd, F) for t, comp in r.items()}
                v = self.free_vector(prod, b)
                if np.any(v != 0):
                    rows.append(v)
        if rows:
            rel, piv = linalg.rref(F, np.array(rows, dtype=F.dtype).reshape(len(rows), n))
        else:
            rel, piv = F.zeros(0, n), []
        pset = set(piv)
        keep = [c for c in range(n) if c not in pset]
        nf = F.zeros(len(keep), n)
        if keep:
            nf[np.arange(len(keep)), keep] = F.elem(1)
            if piv:
                nf[:, piv] = F.reduce(-rel[:, keep]).T
        res = (blocks, n, keep, nf, rel)
        with self._lock:
            self._space_cache[b] = res
        return res

    def _free_diff(self, b):
        F = self.field
        A = self.A
        blocks, n = self._blocks(b)
        tb = Bidegree(*b) + (0, 1)
        tblocks, tn = self._blocks(tb)
        tpos = {t: (B, off) for t, B, off in tblocks}
        D = F.zeros(tn, n)
        for t, B, off in blocks:
            g = self.generators[t]
            if t in tpos:
                TB, toff = tpos[t]
                sign = -1 if g.odd else 1
                D[toff:toff + TB.dim, off:off + B.dim] = F.scale(A.diff_matrix(B.bidegree), sign)
            for s, comp in self.differential.get(t, {}).items():
                if s not in tpos:
                    continue
                cb = g.bidegree + (0, 1) - self.generators[s].bidegree
                cvec = A.normal_form(comp, cb)
                TB, toff = tpos[s]
                blk = A.left_mult(cb, cvec, B.bidegree)
                D[toff:toff + TB.dim, off:off + B.dim] = F.add(
                    D[toff:toff + TB.dim, off:off + B.dim], blk)
        return D

    def _slice(self, i):
        F = self.field
        js = set()
        for g in self.generators:
            for j in self.A.monomials(i - g.internal):
                js.add(j + g.cohom)
        dims = {}
        for j in js:
            dims[j] = len(self.space((i, j))[2])
        d = {}
        for j in sorted(js):
            if not dims.get(j) or not dims.get(j + 1):
                continue
            _, _, keep, _, _ = self.space((i, j))
            _, _, _, nf_t, _ = self.space((i, j + 1))
            D = self._free_diff((i, j))
            d[j] = F.matmul(nf_t, D[:, keep])
            if self.check:
                _, _, _, _, rel = self.space((i, j))
                if rel.shape[0] and not F.is_zero(F.matmul(nf_t, F.matmul(D, rel.T))):
                    raise InputError(f"{self.name}: differential does not preserve relations at "
                                     f"{Bidegree(i, j)}", source=self.source)
        if self.check:
            for j in d:
                if j + 1 in d and not F.is_zero(F.matmul(d[j + 1], d[j])):
                    raise InputError(f"{self.name}: d^2 != 0 at {Bidegree(i, j)}", source=self.source)
        return Slice(dims, d)

    def _action(self, k, i):
        F = self.field
        A = self.A
        g = A.generators[k]
        gb = g.bidegree
        xvec = A.generator_vector(k)
        out = {}
        for j in self.slice(i).dims:
            b = Bidegree(i, j)
            blocks, n = self._blocks(b)
            tb = b + gb
            tblocks, tn = self._blocks(tb)
            tpos = {t: (B, off) for t, B, off in tblocks}
            X = F.zeros(tn, n)
            for t, B, off in blocks:
                if t in tpos:
                    TB, toff = tpos[t]
                    X[toff:toff + TB.dim, off:off + B.dim] = A.right_mult(gb, xvec, B.bidegree)
            keep = self.space(b)[2]
            nf_t = self.space(tb)[3]
            out[j] = F.matmul(nf_t, X[:, keep])
        return out

    def vector(self, elem, b):
        """Coordinates of a module element in the quotient basis at b."""
        _, _, keep, nf, _ = self.space(b)
        v = self.free_vector(self._coerce(elem), b)
        return self.field.matmul(nf, v.reshape(-1, 1)).ravel()

    def format_element(self, elem):
        parts = []
        for t, comp in sorted(elem.items()):
            for m, c in sorted(comp.items(), reverse=True):
                a = self.A.format_element({m: 1})
                body = self.names[t] if a == "1" else f"{a}*{self.names[t]}"
                if self.generators[t].odd:
                    # a*g = (-1)^{|a||g|} g*a
                    if self.A.mono_bidegree(m).cohom % 2:
                        c = -c
                c = self.field.elem(c)
                parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts) if parts else "0"

    def key(self):
        return self.to_text()

    def coh_bounds(self):
        if not self.generators:
            return 0, 0
        alo = self.A.cohom_lower_bound()
        lo = None if alo is None else min(g.cohom for g in self.generators) + alo
        return lo, max(g.cohom for g in self.generators)

    def span_hint(self):
        if not self.generators:
            return 0
        return max(g.internal for g in self.generators) - min(g.internal for g in self.generators)

    def to_text(self):
        lines = [self.A.to_text().rstrip("\n")]
        for g in self.generators:
            lines.append(f"modgen {g.name} internal={g.internal} cohom={g.cohom}")
        for t, img in sorted(self.differential.items()):
            lines.append(f"moddiff {self.names[t]} = {self.format_element(img)}")
        for _, r in self.relations:
            lines.append(f"modrel {self.format_element(r)}")
        return "\n".join(lines) + "\n"


def compile_module(M, w=None):
    """Validate a presented module on ``w`` and return it (slices stay lazy)."""
    if w is not None:
        for i in w.internal_range():
            M.slice(i)
    return M


def parse_module(text, A=None, source=None, field_override=None, allow_char_2=False):
    """Parse an algebra file extended with ``modgen``/``moddiff``/``modrel`` lines."""
    if A is None:
        A = parse_algebra(text, source, field_override, allow_char_2)
    gens = []
    diff_lines = []
    rel_lines = []
    name = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "modgen":
            parts = rest.split()
            kv = {}
            for p in parts[1:]:
                key, eq, val = p.partition("=")
                if not eq:
                    raise InputError(f"expected key=value, got {p!r}", ln, source)
                kv[key] = val
            try:
                gens.append(GeneratorSpec(parts[0], int(kv["internal"]), int(kv["cohom"]),
                                          kv.get("parity")))
            except (KeyError, IndexError, ValueError) as exc:
                raise InputError(f"bad modgen line ({exc})", ln, source) from None
        elif head == "moddiff":
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise InputError("moddiff line needs '='", ln, source)
            diff_lines.append((ln, lhs.strip(), rhs))
        elif head == "modrel":
            rel_lines.append((ln, rest))
        elif head == "name":
            name = rest.strip()
    if not gens:
        raise InputError("module file has no modgen lines", source=source)
    proto = PresentedDgModule(A, gens, source=source)
    diff = {}
    for ln, lhs, rhs in diff_lines:
        if lhs not in proto.names:
            raise InputError(f"moddiff of unknown generator {lhs!r}", ln, source)
        elem = proto.parse_element(rhs, ln)
        if elem:
            try:
                deg = proto.elem_bidegree(elem)
            except InputError as exc:
                raise InputError(str(exc), ln, source) from None
            g = gens[proto.names.index(lhs)]
            if deg != (g.internal, g.cohom + 1):
                raise InputError(f"d({lhs}) has bidegree {deg}, expected "
                                 f"{Bidegree(g.internal, g.cohom + 1)}", ln, source)
        diff[lhs] = elem
    rels = []
    for ln, r in rel_lines:
        elem = proto.parse_element(r, ln)
        try:
            proto.elem_bidegree(elem)
        except InputError as exc:
            raise InputError(str(exc), ln, source) from None
        rels.append(elem)
    return A, PresentedDgModule(A, gens, diff, rels, name=name or source or "M", source=source)


# ---------------------------------------------------------------------------
# standard objects


def free_module(A, twist=0, shift=0, name=None):
    """A(twist)[shift] as a rank one free module on a generator at (-twist, -shift)."""
    label = name or ("A" if (twist, shift) == (0, 0) else f"A({twist})[{shift}]")
    return PresentedDgModule(A, [GeneratorSpec("g0", -twist, -shift)], name=label)


def residue_field(A, twist=0, shift=0):
    """k(twist)[shift] = A/m shifted."""
    k = TruncatedLt(free_module(A), 1)
    k.name = "k"
    return shift_twist(k, (twist, shift))


def standard_objects(A, d, w=None):
    """The objects k, A, A_{>=d} and A/A_{>=d}."""
    if d < 0:
        raise ValueError("d must be >= 0")
    R = free_module(A)
    return {"k": residue_field(A), "A": R, "A_ge": truncate_ge(R, d), "A_quot": truncate_lt(R, d)}


# ---------------------------------------------------------------------------
# Hom out of a free module


class FreeData:
    """Generators e_t at (p_t, q_t) and d e_t = sum_s e_s c_st with c_st in A."""

    def __init__(self, module: PresentedDgModule):
        if module.relations:
            raise ValueError("Hom complexes need a free (relation-free) source")
        self.module = module
        self.A = module.A
        self.generators = module.generators
        self.coeffs = {}
        for t, img in module.differential.items():
            g = self.generators[t]
            lst = []
            for s, comp in sorted(img.items()):
                cb = g.bidegree + (0, 1) - self.generators[s].bidegree
                v = self.A.normal_form(comp, cb)
                if np.any(v != 0):
                    lst.append((s, cb, v))
            self.coeffs[t] = lst


class HomComplex(WindowedComplex):
    """Hom_A(F, N) for F free on finitely many generators."""

    def __init__(self, F, N, name=None):
        if isinstance(F, PresentedDgModule):
            F = FreeData(F)
        super().__init__(N.A, name or f"Hom({F.module.name},{N.name})")
        self.F, self.N = F, N
        ps = [g.internal for g in F.generators]
        if not ps:
            self.lo, self.hi = 0, -1
        else:
            self.lo = None if N.lo is None else N.lo - max(ps)
            self.hi = None if N.hi is None else N.hi - min(ps)

    def _layout(self, i):
        """j -> [(t, dim, offset)], dims."""
        lay = {}
        for t, g in enumerate(self.F.generators):
            for jn in self.N.cohom_degrees(g.internal + i):
                j = jn - g.cohom
                lay.setdefault(j, []).append(t)
        out = {}
        dims = {}
        for j, ts in lay.items():
            off = 0
            blocks = []
            for t in sorted(ts):
                g = self.F.generators[t]
                n = self.N.dim((g.internal + i, g.cohom + j))
                blocks.append((t, n, off))
                off += n
            out[j] = blocks
            dims[j] = off
        return out, dims

    def _slice(self, i):
        Fd = self.field
        N = self.N
        lay, dims = self._layout(i)
        d = {}
        for j, src in lay.items():
            tgt = lay.get(j + 1)
            if not tgt:
                continue
            tpos = {t: (n, off) for t, n, off in tgt}
            D = Fd.zeros(dims[j + 1], dims[j])
            sign = 1 if j % 2 else -1  # -(-1)^j
            for s, n, off in src:
                gs = self.F.generators[s]
                b = (gs.internal + i, gs.cohom + j)
                if s in tpos:
                    tn, toff = tpos[s]
                    D[toff:toff + tn, off:off + n] = N.diff(b)
            for t, tn, toff in tgt:
                for s, cb, cvec in self.F.coeffs.get(t, ()):
                    gs = self.F.generators[s]
                    b = (gs.internal + i, gs.cohom + j)
                    sblk = [(n, off) for ss, n, off in src if ss == s]
                    if not sblk:
                        continue
                    n, off = sblk[0]
                    blk = Fd.scale(N.act_element(cvec, cb, b), sign)
                    D[toff:toff + tn, off:off + n] = Fd.add(D[toff:toff + tn, off:off + n], blk)
            d[j] = D
        return Slice(dims, d)

    def _action(self, k, i):
        Fd = self.field
        x = self.A.generators[k]
        lay, dims = self._layout(i)
        tlay, tdims = self._layout(i + x.internal)
        out = {}
        for j, src in lay.items():
            tgt = tlay.get(j + x.cohom)
            if not tgt:
                continue
            tpos = {t: (n, off) for t, n, off in tgt}
            X = Fd.zeros(tdims[j + x.cohom], dims[j])
            for t, n, off in src:
                if t not in tpos:
                    continue
                g = self.F.generators[t]
                tn, toff = tpos[t]
                sign = -1 if (x.cohom * g.cohom) % 2 else 1
                X[toff:toff + tn, off:off + n] = Fd.scale(self.N.act(k, (g.internal + i, g.cohom + j)), sign)
            out[j] = X
        return out


def hom_complex(F, N):
    return HomComplex(F, N)
