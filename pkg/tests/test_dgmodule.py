import pytest
from hypothesis import given, settings, strategies as st

from dgduality.algebra import exterior, koszul, polynomial, quotient
from dgduality.bigraded import Bidegree, ShiftSpec, Window
from dgduality.dgmodule import (ChainMap, check_module, cohomology, cone, euler_characteristic,
                                free_module, k_dual, parse_module, residue_field, shift_twist,
                                smart_truncate_ge, smart_truncate_le, truncate_ge, truncate_lt)
from dgduality.errors import InputError

KXY = polynomial(2)
KOS = koszul(polynomial(2), ["x^2", "y^2"])

KOSZUL_RESOLUTION_OF_K = """\
gen x internal=1 cohom=0
gen y internal=1 cohom=0
modgen a internal=0 cohom=0
modgen b1 internal=1 cohom=-1
modgen b2 internal=1 cohom=-1
modgen c internal=2 cohom=-2
moddiff b1 = a*x
moddiff b2 = a*y
moddiff c = b1*y - b2*x
"""

W = Window(-3, 6, -3, 1)
twists = st.integers(-3, 3)


@settings(max_examples=15, deadline=None)
@given(twists, twists)
def test_free_module_shift_convention(t, s):
    M = free_module(KXY, t, s)
    A = free_module(KXY)
    for b in Window(-4, 4, -3, 3):
        assert M.dim(b) == A.dim((b[0] + t, b[1] + s))


def test_residue_field():
    k = residue_field(KXY)
    assert cohomology(k, W).nonzero() == {Bidegree(0, 0): 1}
    assert residue_field(KXY, 2, 1).dim((-2, -1)) == 1


def test_koszul_complex_resolves_k():
    _, M = parse_module(KOSZUL_RESOLUTION_OF_K)
    assert check_module(M, W) == []
    assert cohomology(M, W).nonzero() == {Bidegree(0, 0): 1}


def test_broken_differential_is_flagged():
    text = KOSZUL_RESOLUTION_OF_K.replace("b1*y - b2*x", "b1*y + b2*x")
    _, M = parse_module(text)
    with pytest.raises(InputError, match="d\\^2"):
        cohomology(M, W)


def test_module_parse_error_line():
    text = KOSZUL_RESOLUTION_OF_K + "moddiff b1 = a*x*y\n"
    with pytest.raises(InputError) as exc:
        parse_module(text)
    assert exc.value.line == 10


@pytest.mark.parametrize("A", [KXY, KOS, exterior(), quotient(KXY, ["x*y"])], ids=lambda A: A.name)
def test_k_dual_dimensions_and_structure(A):
    M = truncate_lt(free_module(A), 4)
    D = k_dual(M)
    for b in W:
        assert D.dim(b) == M.dim((-b[0], -b[1]))
    assert check_module(D, W) == []


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 4))
def test_truncations_split_dimensions(d):
    A = free_module(KOS)
    hi, lo = truncate_ge(A, d), truncate_lt(A, d)
    for b in Window(0, 6, -2, 0):
        assert hi.dim(b) + lo.dim(b) == A.dim(b)
    assert check_module(hi, W) == [] and check_module(lo, W) == []


@settings(max_examples=10, deadline=None)
@given(st.integers(-3, 1))
def test_smart_truncations(n):
    M = free_module(KOS)
    full = cohomology(M, W)
    le, ge = smart_truncate_le(M, n), smart_truncate_ge(M, n)
    assert check_module(le, W) == [] and check_module(ge, W) == []
    assert cohomology(le, W).nonzero() == {b: v for b, v in full.nonzero().items() if b.cohom <= n}
    assert cohomology(ge, W).nonzero() == {b: v for b, v in full.nonzero().items() if b.cohom >= n}


def test_smart_truncations_on_two_cohomology_rows():
    # x^2, x^3 is not a regular sequence: H^0 = k[x]/(x^2) and H^-1 is a copy of it moved up by 3
    X = free_module(koszul(polynomial(1), ["x^2", "x^3"]))
    w = Window(0, 8, -3, 1)
    full = cohomology(X, w).nonzero()
    assert full == {(0, 0): 1, (1, 0): 1, (3, -1): 1, (4, -1): 1}
    for n in (-1, 0):
        le = cohomology(smart_truncate_le(X, n), w).nonzero()
        ge = cohomology(smart_truncate_ge(X, n), w).nonzero()
        assert le == {b: v for b, v in full.items() if b.cohom <= n}
        assert ge == {b: v for b, v in full.items() if b.cohom >= n}


@settings(max_examples=10, deadline=None)
@given(twists, twists)
def test_cohomology_of_shift_is_shifted_table(t, s):
    M = truncate_ge(free_module(KOS), 2)
    base = cohomology(M, Window(-6, 10, -6, 4))
    moved = cohomology(shift_twist(M, (t, s)), W)
    assert moved.nonzero() == base.shifted(ShiftSpec(t, s)).restrict(W).nonzero()


def test_cone_of_identity_is_acyclic():
    M = free_module(KOS)
    C = cone(ChainMap(M, M, lambda b: M.field.eye(M.dim(b))))
    assert cohomology(C, W).nonzero() == {}
    assert check_module(C, W) == []


def test_euler_characteristic_of_complex_equals_cohomology():
    M = free_module(KOS)
    for i in range(6):
        assert euler_characteristic(M, i) == euler_characteristic(M, i, table=True)
