"""Connected graded-commutative dg-algebras given by generators and relations.

Everything is linearized per bidegree: the free graded-commutative span of
monomials in a bidegree modulo the span of ``monomial * relation``.  No
Groebner bases are involved, so every bidegree is exact on its own.

Monomials are exponent tuples in generator declaration order.  Odd
generators (odd cohomological degree) have exponent at most 1.
"""

from __future__ import annotations

import hashlib
import re
import threading
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import linalg
from .bigraded import Bidegree, Window
from .errors import InputError
from .linalg import DEFAULT_PRIME, Field

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_']*$")


@dataclass(frozen=True)
class GeneratorSpec:
    name: str
    internal: int
    cohom: int
    parity: str | None = None

    def __post_init__(self):
        if not _NAME.match(self.name):
            raise InputError(f"bad generator name {self.name!r}")
        natural = "odd" if self.cohom % 2 else "even"
        if self.parity is None:
            object.__setattr__(self, "parity", natural)
        elif self.parity != natural:
            raise InputError(f"generator {self.name}: parity {self.parity} does not match "
                             f"cohomological degree {self.cohom}")

    @property
    def bidegree(self):
        return Bidegree(self.internal, self.cohom)

    @property
    def odd(self):
        return self.parity == "odd"


# ---------------------------------------------------------------------------
# free graded-commutative arithmetic on exponent tuples


def mono_mul(m1, m2, odd):
    """Product of two monomials: (sign, monomial) or None when it vanishes."""
    sign = 1
    later_odd = 0  # odd factors of m1 at indices > l, accumulated from the right
    n = len(m1)
    for l in range(n - 1, -1, -1):
        if odd[l]:
            if m1[l] and m2[l]:
                return None
            if m2[l] and later_odd % 2:
                sign = -sign
            if m1[l]:
                later_odd += 1
    return sign, tuple(a + b for a, b in zip(m1, m2))


def free_mul(e1, e2, odd, field):
    out = {}
    for m1, c1 in e1.items():
        for m2, c2 in e2.items():
            r = mono_mul(m1, m2, odd)
            if r is None:
                continue
            s, m = r
            out[m] = field.elem(out.get(m, 0) + s * c1 * c2)
    return {m: c for m, c in out.items() if c != 0}


def free_add(e1, e2, field, scale=1):
    out = dict(e1)
    for m, c in e2.items():
        out[m] = field.elem(out.get(m, 0) + scale * c)
    return {m: c for m, c in out.items() if c != 0}


# ---------------------------------------------------------------------------
# element parsing

_TOKEN = re.compile(r"\s*(?:(\d+(?:/\d+)?)|([A-Za-z_][A-Za-z0-9_']*)|(\^)|(\*)|(\+)|(-))")


def parse_terms(text, names, line=None, source=None):
    """Parse ``"3*x^2*y - e*x"`` into [(coef, [(name, power), ...]), ...]."""
    pos = 0
    toks = []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise InputError(f"cannot parse {text[pos:]!r}", line, source)
        pos = m.end()
        num, name, caret, star, plus, minus = m.groups()
        if num is not None:
            toks.append(("num", Fraction(num)))
        elif name is not None:
            if name not in names:
                raise InputError(f"unknown generator {name!r}", line, source)
            toks.append(("name", name))
        elif caret:
            toks.append(("^", None))
        elif star:
            toks.append(("*", None))
        elif plus:
            toks.append(("+", None))
        elif minus:
            toks.append(("-", None))
    if not toks:
        raise InputError("empty expression", line, source)
    terms = []
    k = 0
    while k < len(toks):
        sign = 1
        while k < len(toks) and toks[k][0] in "+-":
            if toks[k][0] == "-":
                sign = -sign
            k += 1
        coef = Fraction(sign)
        factors = []
        expect_factor = True
        while k < len(toks) and toks[k][0] not in "+-":
            kind, val = toks[k]
            if kind == "*":
                if expect_factor:
                    raise InputError("dangling '*'", line, source)
                expect_factor = True
                k += 1
                continue
            if not expect_factor:
                raise InputError("missing '*' between factors", line, source)
            expect_factor = False
            if kind == "num":
                coef *= val
                k += 1
            elif kind == "name":
                power = 1
                if k + 1 < len(toks) and toks[k + 1][0] == "^":
                    if k + 2 >= len(toks) or toks[k + 2][0] != "num" or toks[k + 2][1].denominator != 1:
                        raise InputError("exponent must be a nonnegative integer", line, source)
                    power = int(toks[k + 2][1])
                    k += 3
                else:
                    k += 1
                factors.append((val, power))
            else:
                raise InputError(f"unexpected token {kind!r}", line, source)
        if expect_factor:
            raise InputError("incomplete term", line, source)
        terms.append((coef, factors))
    return terms


@dataclass
class BidegreeBasis:
    bidegree: Bidegree
    free: list  # free monomials, lex descending
    monomials: list  # quotient representatives (non-pivot free monomials)
    normal_form: np.ndarray  # (len(monomials), len(free)) projection
    free_index: dict = field(repr=False, default_factory=dict)
    index: dict = field(repr=False, default_factory=dict)

    @property
    def dim(self):
        return len(self.monomials)


@dataclass
class ValidationReport:
    ok: bool
    violations: list  # (bidegree, message)
    checked: Window | None = None

    def __bool__(self):
        return self.ok


class DgAlgebra:
    """A connected graded-commutative dg-algebra presentation with cached linearization."""

    def __init__(self, generators, relations=(), differential=None, field=None, name=None,
                 source=None):
        self.field = field or Field(DEFAULT_PRIME)
        self.generators = tuple(generators)
        self.name = name or "A"
        self.source = source
        names = [g.name for g in self.generators]
        if len(set(names)) != len(names):
            raise InputError("duplicate generator names", source=source)
        self.names = names
        self.odd = tuple(g.odd for g in self.generators)
        for g in self.generators:
            if g.internal < 1:
                raise InputError(f"generator {g.name}: internal degree must be >= 1 (connectedness)",
                                 source=source)
            if g.cohom > 0:
                raise InputError(f"generator {g.name}: cohomological degree must be <= 0",
                                 source=source)
        self.relations = []
        for k, r in enumerate(relations):
            r = self._coerce(r)
            if not r:
                continue
            self.relations.append((self._homogeneous_degree(r, f"relation {k + 1}"), r))
        self.differential = {}
        for gname, image in (differential or {}).items():
            if gname not in names:
                raise InputError(f"differential of unknown generator {gname!r}", source=source)
            g = self.generators[names.index(gname)]
            image = self._coerce(image)
            if image:
                deg = self._homogeneous_degree(image, f"d({gname})")
                want = Bidegree(g.internal, g.cohom + 1)
                if deg != want:
                    raise InputError(f"d({gname}) has bidegree {deg}, expected {want} "
                                     f"(differential must have bidegree (0,1)) at generator {gname}",
                                     source=source)
            self.differential[names.index(gname)] = image
        self._lock = threading.RLock()
        self._mono_cache = {}
        self._basis_cache = {}
        self._dfree_cache = {}
        self._tensor_cache = {}
        self._diff_cache = {}

    # -- construction helpers -------------------------------------------------

    def _coerce(self, elem):
        if isinstance(elem, str):
            return self.parse_element(elem)
        return {tuple(m): self.field.elem(c) for m, c in dict(elem).items() if self.field.elem(c) != 0}

    def mono_bidegree(self, m):
        i = sum(e * g.internal for e, g in zip(m, self.generators))
        j = sum(e * g.cohom for e, g in zip(m, self.generators))
        return Bidegree(i, j)

    def _homogeneous_degree(self, elem, what):
        degs = {self.mono_bidegree(m) for m in elem}
        if len(degs) != 1:
            raise InputError(f"{what} is not homogeneous (bidegrees {sorted(degs)})", source=self.source)
        return degs.pop()

    def generator_monomial(self, k, power=1):
        m = [0] * len(self.generators)
        m[k] = power
        return tuple(m)

    def parse_element(self, text, line=None):
        out = {}
        n = len(self.generators)
        for coef, factors in parse_terms(text, self.names, line, self.source):
            cur = {tuple([0] * n): self.field.elem(coef)}
            for name, power in factors:
                k = self.names.index(name)
                for _ in range(power):
                    cur = free_mul(cur, {self.generator_monomial(k): self.field.elem(1)}, self.odd, self.field)
            out = free_add(out, cur, self.field)
        return out

    # -- structure -------------------------------------------------------------

    @property
    def max_generator_degree(self):
        return max((g.internal for g in self.generators), default=1)

    @property
    def max_relation_degree(self):
        return max((b.internal for b, _ in self.relations), default=0)

    def even_degree0_generators(self):
        return [k for k, g in enumerate(self.generators) if g.cohom == 0]

    def monomials(self, internal):
        """Free monomials of the given internal degree, grouped by cohomological degree."""
        with self._lock:
            hit = self._mono_cache.get(internal)
            if hit is not None:
                return hit
            out = {}
            if internal >= 0:
                gens = self.generators
                n = len(gens)
                cur = [0] * n

                def rec(k, remaining):
                    if k == n:
                        if remaining == 0:
                            m = tuple(cur)
                            out.setdefault(self.mono_bidegree(m).cohom, []).append(m)
                        return
                    g = gens[k]
                    cap = 1 if g.odd else remaining // g.internal
                    for e in range(min(cap, remaining // g.internal), -1, -1):
                        cur[k] = e
                        rec(k + 1, remaining - e * g.internal)
                    cur[k] = 0

                rec(0, internal)
                for j in out:
                    out[j].sort(reverse=True)
            self._mono_cache[internal] = out
            return out

    def cohom_degrees(self, internal):
        """Cohomological degrees where A is nonzero in this internal degree."""
        return sorted(j for j in self.monomials(internal) if self.dim((internal, j)))

    def basis(self, b):
        b = Bidegree(*b)
        with self._lock:
            hit = self._basis_cache.get(b)
            if hit is not None:
                return hit
            F = self.field
            free = list(self.monomials(b.internal).get(b.cohom, [])) if b.internal >= 0 else []
            free_index = {m: k for k, m in enumerate(free)}
            rows = []
            for rdeg, r in self.relations:
                sub = b - rdeg
                if sub.internal < 0:
                    continue
                for u in self.monomials(sub.internal).get(sub.cohom, []):
                    prod = free_mul({u: F.elem(1)}, r, self.odd, F)
                    if prod:
                        v = F.zeros(len(free))
                        for m, c in prod.items():
                            v[free_index[m]] = c
                        rows.append(v)
            if rows:
                ideal, pivots = linalg.rref(F, np.array(rows, dtype=F.dtype).reshape(len(rows), len(free)))
            else:
                ideal, pivots = F.zeros(0, len(free)), []
            pivset = set(pivots)
            keep = [k for k in range(len(free)) if k not in pivset]
            nf = F.zeros(len(keep), len(free))
            if keep:
                nf[np.arange(len(keep)), keep] = F.elem(1)
                if pivots:
                    nf[:, pivots] = F.reduce(-ideal[:, keep]).T
            monos = [free[k] for k in keep]
            out = BidegreeBasis(b, free, monos, nf, free_index, {m: r for r, m in enumerate(monos)})
            out.ideal = ideal
            self._basis_cache[b] = out
            return out

    def dim(self, b):
        return self.basis(b).dim

    def total_dim(self, internal):
        return sum(self.dim((internal, j)) for j in self.monomials(internal))

    def normal_form(self, elem, b=None):
        """Vector of a free element in the quotient basis of its bidegree."""
        if b is None:
            if not elem:
                raise ValueError("zero element needs an explicit bidegree")
            b = self._homogeneous_degree(elem, "element")
        B = self.basis(b)
        v = self.field.zeros(len(B.free))
        for m, c in elem.items():
            if m not in B.free_index:
                raise InputError(f"monomial {m} not in bidegree {b}")
            v[B.free_index[m]] = self.field.elem(v[B.free_index[m]] + c)
        if B.dim == 0:
            return self.field.zeros(0)
        return self.field.matmul(B.normal_form, v.reshape(-1, 1)).ravel()

    def element(self, v, b):
        """Free element (dict) from a quotient-basis vector."""
        B = self.basis(b)
        return {m: v[k] for k, m in enumerate(B.monomials) if v[k] != 0}

    def top(self, probe=None):
        """Largest internal degree with A nonzero, or None if not detected finite."""
        if all(g.odd for g in self.generators):
            return sum(g.internal for g in self.generators)
        if not self.relations:
            return None
        gmax = self.max_generator_degree
        probe = probe or (4 * (self.max_relation_degree + gmax) + 8)
        run = 0
        for i in range(1, probe + 1):
            if self.total_dim(i) == 0:
                run += 1
                if run == gmax:
                    return i - gmax
            else:
                run = 0
        return None

    def cohom_lower_bound(self):
        """Lower bound for the cohomological support of A, or None if unbounded."""
        t = self.top()
        if t is not None:
            return min(min(self.cohom_degrees(i), default=0) for i in range(t + 1))
        total = 0
        for g in self.generators:
            if g.cohom < 0:
                if not g.odd:
                    return None
                total += g.cohom
        return total

    # -- products and differential ---------------------------------------------

    def product_tensor(self, b1, b2):
        """T[r, k1, k2]: coordinates of basis(b1)[k1] * basis(b2)[k2] at b1 + b2."""
        b1, b2 = Bidegree(*b1), Bidegree(*b2)
        key = (b1, b2)
        with self._lock:
            hit = self._tensor_cache.get(key)
            if hit is not None:
                return hit
            F = self.field
            B1, B2 = self.basis(b1), self.basis(b2)
            b12 = b1 + b2
            B12 = self.basis(b12)
            T = F.zeros(B12.dim, B1.dim, B2.dim)
            if B12.dim:
                for k1, m1 in enumerate(B1.monomials):
                    for k2, m2 in enumerate(B2.monomials):
                        r = mono_mul(m1, m2, self.odd)
                        if r is None:
                            continue
                        s, m = r
                        col = B12.normal_form[:, B12.free_index[m]]
                        T[:, k1, k2] = F.reduce(col * s)
            self._tensor_cache[key] = T
            return T

    def left_mult(self, b1, v1, b2):
        """Matrix of x -> v1 * x from A_{b2} to A_{b1+b2}, v1 a vector at b1."""
        T = self.product_tensor(b1, b2)
        if T.size == 0:
            return self.field.zeros(T.shape[0], T.shape[2])
        return self.field.reduce(np.tensordot(T, v1, axes=([1], [0])))

    def right_mult(self, b1, v1, b2):
        """Matrix of x -> x * v1 from A_{b2} to A_{b2+b1}, v1 a vector at b1."""
        T = self.product_tensor(b2, b1)
        if T.size == 0:
            return self.field.zeros(T.shape[0], T.shape[1])
        return self.field.reduce(np.tensordot(T, v1, axes=([2], [0])))

    def generator_vector(self, k):
        g = self.generators[k]
        return self.normal_form({self.generator_monomial(k): self.field.elem(1)}, g.bidegree)

    def mult_matrix(self, g, b, side="left"):
        """Multiplication by generator ``g`` (index or name) from A_b to A_{b+deg g}."""
        k = self.names.index(g) if isinstance(g, str) else g
        if isinstance(g, GeneratorSpec):
            k = self.names.index(g.name)
        gb = self.generators[k].bidegree
        v = self.generator_vector(k)
        if side == "left":
            return self.left_mult(gb, v, b)
        return self.right_mult(gb, v, b)

    def free_diff(self, m):
        """Leibniz expansion of d on a free monomial (unreduced free element)."""
        hit = self._dfree_cache.get(m)
        if hit is not None:
            return hit
        F = self.field
        try:
            k = next(i for i, e in enumerate(m) if e)
        except StopIteration:
            return {}
        g = self.generator_monomial(k)
        rest = tuple(e - (1 if i == k else 0) for i, e in enumerate(m))
        dg = self.differential.get(k, {})
        out = free_mul(dg, {rest: F.elem(1)}, self.odd, F) if dg else {}
        drest = self.free_diff(rest)
        if drest:
            sign = -1 if self.generators[k].odd else 1
            out = free_add(out, free_mul({g: F.elem(1)}, drest, self.odd, F), F, sign)
        self._dfree_cache[m] = out
        return out

    def diff_matrix(self, b):
        b = Bidegree(*b)
        with self._lock:
            hit = self._diff_cache.get(b)
            if hit is not None:
                return hit
            F = self.field
            src = self.basis(b)
            tgt_b = b + (0, 1)
            tgt = self.basis(tgt_b)
            out = F.zeros(tgt.dim, src.dim)
            if tgt.dim and src.dim and self.differential:
                for k, m in enumerate(src.monomials):
                    dm = self.free_diff(m)
                    if dm:
                        out[:, k] = self.normal_form(dm, tgt_b)
            self._diff_cache[b] = out
            return out

    # -- serialization -----------------------------------------------------------

    def format_element(self, elem):
        if not elem:
            return "0"
        parts = []
        for m, c in sorted(elem.items(), reverse=True):
            factors = []
            for k, e in enumerate(m):
                if e == 1:
                    factors.append(self.names[k])
                elif e > 1:
                    factors.append(f"{self.names[k]}^{e}")
            c = self.field.elem(c)
            body = "*".join(factors)
            if not body:
                parts.append(f"{c}")
            elif c == 1:
                parts.append(body)
            else:
                parts.append(f"{c}*{body}")
        return " + ".join(parts)

    def to_text(self):
        lines = [f"field {'QQ' if self.field.is_rational else 'p=' + str(self.field.p)}"]
        for g in self.generators:
            lines.append(f"gen {g.name} internal={g.internal} cohom={g.cohom}")
        for _, r in self.relations:
            lines.append(f"rel {self.format_element(r)}")
        for k, img in sorted(self.differential.items()):
            lines.append(f"diff {self.names[k]} = {self.format_element(img)}")
        return "\n".join(lines) + "\n"

    def content_hash(self):
        return hashlib.sha256(self.to_text().encode()).hexdigest()

    def __repr__(self):
        return f"DgAlgebra({self.name!r}, gens={self.names})"


# ---------------------------------------------------------------------------
# validation


def check_dga(A, w):
    """Check d^2 = 0, d(I) in I, Leibniz and connectedness on bidegrees of ``w``."""
    F = A.field
    bad = []
    for b in w:
        if b.internal < 0 or b.cohom > 0:
            if A.dim(b) if b.internal >= 0 else 0:
                bad.append((b, "nonzero component outside connected range"))
            continue
        if b.internal == 0 and A.dim(b) != (1 if b.cohom == 0 else 0):
            bad.append((b, "A_0 is not k"))
        d1 = A.diff_matrix(b)
        d2 = A.diff_matrix(b + (0, 1))
        if d1.size and d2.size and not F.is_zero(F.matmul(d2, d1)):
            bad.append((b, "d^2 != 0"))
        B = A.basis(b)
        ideal = getattr(B, "ideal", None)
        if ideal is not None and ideal.shape[0]:
            for row in ideal:
                elem = {B.free[k]: row[k] for k in np.flatnonzero(row != 0)}
                img = {}
                for m, c in elem.items():
                    img = free_add(img, {mm: cc * c for mm, cc in A.free_diff(m).items()}, F)
                if img and not F.is_zero(A.normal_form(img, b + (0, 1))):
                    bad.append((b, f"d does not preserve relation ideal at {A.format_element(elem)}"))
                    break
        for k, g in enumerate(A.generators):
            gb = g.bidegree
            lhs = F.matmul(A.diff_matrix(b + gb), A.mult_matrix(k, b))
            dg = A.differential.get(k)
            rhs = F.zeros(*lhs.shape)
            if dg:
                rhs = A.left_mult(gb + (0, 1), A.normal_form(dg, gb + (0, 1)), b)
            sign = -1 if g.odd else 1
            rhs = F.add(rhs, F.scale(F.matmul(A.mult_matrix(k, b + (0, 1)), A.diff_matrix(b)), sign))
            if lhs.size and not F.is_zero(F.sub(lhs, rhs)):
                bad.append((b, f"Leibniz fails for generator {g.name}"))
    return ValidationReport(not bad, bad, w)


# ---------------------------------------------------------------------------
# builders


def _field(field):
    return field if field is not None else Field(DEFAULT_PRIME)


def polynomial(names=("x",), degrees=None, field=None, name=None):
    """Polynomial ring on even generators of cohomological degree 0."""
    if isinstance(names, int):
        names = ["x", "y", "z", "w"][:names] if names <= 4 else [f"x{k + 1}" for k in range(names)]
    degrees = degrees or [1] * len(names)
    gens = [GeneratorSpec(n, d, 0) for n, d in zip(names, degrees)]
    return DgAlgebra(gens, field=_field(field), name=name or f"k[{','.join(names)}]")


def exterior(names=("e",), bidegrees=None, field=None, name=None):
    """Exterior algebra; generators of even cohomological degree get e^2 = 0 as a relation."""
    bidegrees = bidegrees or [(1, 0)] * len(names)
    gens = [GeneratorSpec(n, i, j) for n, (i, j) in zip(names, bidegrees)]
    rels = [f"{g.name}^2" for g in gens if not g.odd]
    A = DgAlgebra(gens, field=_field(field), name=name or f"Lambda({','.join(names)})")
    if rels:
        A = DgAlgebra(gens, rels, field=A.field, name=A.name)
    return A


def koszul(S, forms, names=None, name=None):
    """Koszul dg-algebra S<e_1..e_c>, e_k of bidegree (deg f_k, -1) and d e_k = f_k."""
    forms = [S._coerce(f) for f in forms]
    names = names or [f"e{k + 1}" if len(forms) > 1 else "e" for k in range(len(forms))]
    gens = list(S.generators)
    for n, f in zip(names, forms):
        deg = S._homogeneous_degree(f, "form")
        if deg.cohom != 0:
            raise InputError("Koszul forms must have cohomological degree 0")
        gens.append(GeneratorSpec(n, deg.internal, -1))
    pad = len(names)
    rels = [{m + (0,) * pad: c for m, c in r.items()} for _, r in S.relations]
    diff = {nm: {m + (0,) * pad: c for m, c in f.items()} for nm, f in zip(names, forms)}
    for k, img in S.differential.items():
        diff[S.names[k]] = {m + (0,) * pad: c for m, c in img.items()}
    label = name or f"Koszul({S.name}; {', '.join(S.format_element(f) for f in forms)})"
    return DgAlgebra(gens, rels, diff, field=S.field, name=label)


def quotient(S, relations, name=None):
    """S modulo extra homogeneous relations (same generators and differential)."""
    rels = [r for _, r in S.relations] + [S._coerce(r) for r in relations]
    diff = {S.names[k]: v for k, v in S.differential.items()}
    return DgAlgebra(S.generators, rels, diff, field=S.field, name=name or f"{S.name}/(...)")


def truncation(A, d):
    """The quotient dg-algebra A / A_{>=d}."""
    rels = []
    for i in range(d, d + A.max_generator_degree):
        for ms in A.monomials(i).values():
            rels.extend({m: 1} for m in ms)
    return quotient(A, rels, name=f"{A.name}/{A.name}_>={d}")


def trivial_extension(names, powers, a, degrees=None, field=None, name=None):
    """A0 = k[x_1..x_n]/(x_i^{m_i}) extended by Hom_k(A0, k)(-a), zero differential.

    A0 is Gorenstein, so the dual is cyclic on a generator ``u`` of internal
    degree a - socle degree; the result is k[x, u]/(x_i^{m_i}, u^2).
    """
    degrees = degrees or [1] * len(names)
    socle = sum((m - 1) * d for m, d in zip(powers, degrees))
    udeg = a - socle
    if udeg < 1:
        raise InputError("trivial extension needs a > socle degree of A0 (connectedness)")
    gens = [GeneratorSpec(n, d, 0) for n, d in zip(names, degrees)] + [GeneratorSpec("u", udeg, 0)]
    rels = [f"{n}^{m}" for n, m in zip(names, powers)] + ["u^2"]
    return DgAlgebra(gens, rels, field=_field(field), name=name or f"TrivExt({a})")


# ---------------------------------------------------------------------------
# text format

_KV = re.compile(r"(\w+)=(-?\w+)")


def _kv(parts, line, source):
    out = {}
    for p in parts:
        m = _KV.fullmatch(p)
        if not m:
            raise InputError(f"expected key=value, got {p!r}", line, source)
        out[m.group(1)] = m.group(2)
    return out


def parse_algebra(text, source=None, field_override=None, allow_char_2=False):
    """Parse the line-oriented algebra format.

    Lines: ``field p=32003`` (or ``field QQ``), ``gen x internal=1 cohom=0``,
    ``rel <expr>``, ``diff <gen> = <expr>``; ``#`` starts a comment.
    Module lines (``modgen``, ``moddiff``, ``modrel``) are ignored here.
    """
    field = None
    gens = []
    rel_lines = []
    diff_lines = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        if head == "field":
            tok = rest.strip()
            try:
                if tok in ("QQ", "Q", "rationals"):
                    field = Field.rationals()
                else:
                    kv = _kv(tok.split(), ln, source)
                    field = Field(int(kv["p"]), allow_char_2=allow_char_2)
            except (KeyError, ValueError) as exc:
                raise InputError(f"bad field line: {exc}", ln, source) from None
        elif head == "gen":
            parts = rest.split()
            if not parts:
                raise InputError("gen needs a name", ln, source)
            kv = _kv(parts[1:], ln, source)
            try:
                gens.append(GeneratorSpec(parts[0], int(kv["internal"]), int(kv["cohom"]),
                                          kv.get("parity")))
            except KeyError as exc:
                raise InputError(f"gen missing {exc}", ln, source) from None
            except InputError as exc:
                raise InputError(str(exc), ln, source) from None
            g = gens[-1]
            if g.internal < 1 or g.cohom > 0:
                raise InputError(f"generator {g.name}: need internal >= 1 and cohom <= 0 "
                                 "(connectedness)", ln, source)
        elif head == "rel":
            rel_lines.append((ln, rest))
        elif head == "diff":
            lhs, eq, rhs = rest.partition("=")
            if not eq:
                raise InputError("diff line needs '='", ln, source)
            diff_lines.append((ln, lhs.strip(), rhs))
        elif head in ("modgen", "moddiff", "modrel", "name"):
            continue
        else:
            raise InputError(f"unknown directive {head!r}", ln, source)
    if field_override is not None:
        field = field_override
    field = field or Field(DEFAULT_PRIME)
    proto = DgAlgebra(gens, field=field, source=source)
    rels = []
    for ln, r in rel_lines:
        elem = proto.parse_element(r, ln)
        try:
            proto._homogeneous_degree(elem, "relation")
        except InputError as exc:
            raise InputError(str(exc).split(": ", 1)[-1], ln, source) from None
        rels.append(elem)
    diff = {}
    for ln, lhs, rhs in diff_lines:
        if lhs not in proto.names:
            raise InputError(f"diff of unknown generator {lhs!r}", ln, source)
        diff[lhs] = proto.parse_element(rhs, ln)
        g = gens[proto.names.index(lhs)]
        if diff[lhs]:
            deg = proto._homogeneous_degree(diff[lhs], f"d({lhs})")
            if deg != (g.internal, g.cohom + 1):
                raise InputError(f"d({lhs}) has bidegree {deg}, expected "
                                 f"{Bidegree(g.internal, g.cohom + 1)} at generator {lhs}", ln, source)
    name = None
    for raw in text.splitlines():
        if raw.startswith("name "):
            name = raw[5:].strip()
    return DgAlgebra(gens, rels, diff, field=field, name=name or source or "A", source=source)
