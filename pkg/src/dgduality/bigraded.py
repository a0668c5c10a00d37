"""Bidegrees, shifts, windows and dimension tables.

A bidegree is ``(internal, cohomological)``.  The shift convention is
``V(m)_i^j = V_{i+m}^j`` and ``V[m]_i^j = V_i^{j+m}``; the k-dual lives at
``(V*)_i^j = (V_{-i}^{-j})*``.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Iterator, NamedTuple

from .errors import WindowNotCertified


class Bidegree(NamedTuple):
    internal: int
    cohom: int

    def __add__(self, other):
        return Bidegree(self.internal + other[0], self.cohom + other[1])

    def __sub__(self, other):
        return Bidegree(self.internal - other[0], self.cohom - other[1])

    def __neg__(self):
        return Bidegree(-self.internal, -self.cohom)

    def __str__(self):
        return f"({self.internal},{self.cohom})"


class ShiftSpec(NamedTuple):
    twist: int = 0
    shift: int = 0

    def __add__(self, other):
        return ShiftSpec(self.twist + other.twist, self.shift + other.shift)


def apply_shift(b, s):
    """Bidegree of the original object that sits at ``b`` in the shifted one."""
    return Bidegree(b[0] + s[0], b[1] + s[1])


def dual_bidegree(b):
    return Bidegree(-b[0], -b[1])


@dataclass(frozen=True)
class Window:
    i_min: int
    i_max: int
    j_min: int
    j_max: int

    def __post_init__(self):
        if self.i_min > self.i_max or self.j_min > self.j_max:
            raise ValueError(f"empty window {self}")

    @classmethod
    def parse(cls, text):
        parts = [int(x) for x in text.split(":")]
        if len(parts) != 4:
            raise ValueError("window must be imin:imax:jmin:jmax")
        return cls(*parts)

    def __str__(self):
        return f"{self.i_min}:{self.i_max}:{self.j_min}:{self.j_max}"

    def __contains__(self, b):
        return self.i_min <= b[0] <= self.i_max and self.j_min <= b[1] <= self.j_max

    def contains_window(self, other):
        return (self.i_min <= other.i_min and other.i_max <= self.i_max
                and self.j_min <= other.j_min and other.j_max <= self.j_max)

    def intersect(self, other):
        w = (max(self.i_min, other.i_min), min(self.i_max, other.i_max),
             max(self.j_min, other.j_min), min(self.j_max, other.j_max))
        if w[0] > w[1] or w[2] > w[3]:
            return None
        return Window(*w)

    def shifted(self, s):
        """Window of the shifted object covering what ``self`` covered in the original."""
        return Window(self.i_min - s[0], self.i_max - s[0], self.j_min - s[1], self.j_max - s[1])

    def dual(self):
        return Window(-self.i_max, -self.i_min, -self.j_max, -self.j_min)

    def internal_range(self):
        return range(self.i_min, self.i_max + 1)

    def cohom_range(self):
        return range(self.j_min, self.j_max + 1)

    def __iter__(self) -> Iterator[Bidegree]:
        for i in self.internal_range():
            for j in self.cohom_range():
                yield Bidegree(i, j)


@dataclass(frozen=True)
class DimTable:
    """Per-bidegree dimensions, exact on ``valid`` except at ``unknown`` entries."""

    dims: dict
    valid: Window
    unknown: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        clean = {}
        for b, v in self.dims.items():
            b = Bidegree(*b)
            if v < 0:
                raise ValueError(f"negative dimension at {b}")
            if v:
                if b not in self.valid:
                    raise ValueError(f"nonzero entry {b} outside valid window {self.valid}")
                clean[b] = int(v)
        object.__setattr__(self, "dims", clean)
        object.__setattr__(self, "unknown",
                           frozenset(Bidegree(*b) for b in self.unknown if b in self.valid))

    def __getitem__(self, b):
        b = Bidegree(*b)
        if b not in self.valid:
            raise WindowNotCertified(f"{b} outside certified window {self.valid}")
        if b in self.unknown:
            raise WindowNotCertified(f"{b} not stabilized")
        return self.dims.get(b, 0)

    def get(self, b, default=None):
        try:
            return self[b]
        except WindowNotCertified:
            return default

    def nonzero(self):
        return dict(sorted(self.dims.items()))

    def restrict(self, w):
        w2 = self.valid.intersect(w)
        if w2 is None:
            raise WindowNotCertified(f"{w} disjoint from certified window {self.valid}")
        return DimTable({b: v for b, v in self.dims.items() if b in w2}, w2,
                        frozenset(b for b in self.unknown if b in w2))

    def shifted(self, s):
        """Table of the shifted object X(s.twist)[s.shift] given the table of X."""
        return DimTable({Bidegree(b[0] - s[0], b[1] - s[1]): v for b, v in self.dims.items()},
                        self.valid.shifted(s),
                        frozenset(Bidegree(b[0] - s[0], b[1] - s[1]) for b in self.unknown))

    def dual(self):
        return DimTable({dual_bidegree(b): v for b, v in self.dims.items()}, self.valid.dual(),
                        frozenset(dual_bidegree(b) for b in self.unknown))

    def total(self):
        return sum(self.dims.values())

    def cohom_support(self):
        return sorted({b.cohom for b in self.dims})

    def internal_support(self):
        return sorted({b.internal for b in self.dims})

    # CSV
    def to_csv(self, include_window=True):
        buf = io.StringIO()
        if include_window:
            buf.write(f"# valid {self.valid}\n")
            if self.unknown:
                buf.write("# unknown " + " ".join(str(b) for b in sorted(self.unknown)) + "\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["internal", "cohomological", "dim"])
        for b in self.valid:
            if b in self.unknown:
                continue
            v = self.dims.get(b, 0)
            if v:
                writer.writerow([b.internal, b.cohom, v])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text):
        valid = None
        unknown = []
        rows = []
        for line in text.splitlines():
            if line.startswith("# valid "):
                valid = Window.parse(line.split()[2])
            elif line.startswith("# unknown "):
                for tok in line.split()[2:]:
                    i, j = tok.strip("()").split(",")
                    unknown.append(Bidegree(int(i), int(j)))
            elif line and not line.startswith("#"):
                rows.append(line)
        reader = csv.DictReader(rows)
        dims = {Bidegree(int(r["internal"]), int(r["cohomological"])): int(r["dim"]) for r in reader}
        if valid is None:
            keys = list(dims) or [Bidegree(0, 0)]
            valid = Window(min(b[0] for b in keys), max(b[0] for b in keys),
                           min(b[1] for b in keys), max(b[1] for b in keys))
        return cls(dims, valid, frozenset(unknown))


def table_equal(a, b, w):
    """Bidegrees of ``w`` where the tables differ; raises if w is not certified for both."""
    for t in (a, b):
        if not t.valid.contains_window(w):
            raise WindowNotCertified(f"window {w} not inside certified window {t.valid}")
        bad = [x for x in t.unknown if x in w]
        if bad:
            raise WindowNotCertified(f"unstable entries {sorted(bad)} inside {w}")
    return [x for x in w if a.dims.get(x, 0) != b.dims.get(x, 0)]


def sup_inf(table):
    """(sup, inf) of the occupied cohomological degrees; (None, None) for a zero table."""
    degs = table.cohom_support()
    if not degs:
        return None, None
    return max(degs), min(degs)
