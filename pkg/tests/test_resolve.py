from math import comb

import pytest

from dgduality import resolve
from dgduality.algebra import exterior, koszul, polynomial, quotient
from dgduality.bigraded import Bidegree, Window
from dgduality.dgmodule import (ChainMap, HomComplex, PresentedDgModule, free_module,
                                parse_module, residue_field, truncate_ge)
from dgduality.homology import ext_table
from dgduality.resolve import (betti_table, hom_map, lift_map, semifree_resolution,
                               verify_resolution)


@pytest.mark.parametrize("n", [1, 2, 3])
@pytest.mark.parametrize("through", [4, 6])
def test_betti_numbers_of_k_are_binomial(n, through):
    R = semifree_resolution(residue_field(polynomial(n)), through)
    assert verify_resolution(R).ok and verify_resolution(R).minimal
    assert betti_table(R) == {Bidegree(t, -t): comb(n, t) for t in range(n + 1)}


@pytest.mark.parametrize("A", [quotient(polynomial(1), ["x^2"]), koszul(polynomial(1), ["x^2"]),
                               exterior()], ids=lambda A: A.name)
def test_k_over_dual_numbers_has_one_generator_per_degree(A):
    R = semifree_resolution(residue_field(A), 5)
    assert verify_resolution(R).ok
    assert betti_table(R) == {Bidegree(t, -t): 1 for t in range(6)}


def test_quotient_ring_resolution():
    S = polynomial(2)
    M = PresentedDgModule(S, free_module(S).generators, relations=["g0*x*y"])
    R = semifree_resolution(M, 6)
    assert verify_resolution(R).ok
    assert betti_table(R) == {Bidegree(0, 0): 1, Bidegree(2, -1): 1}


def test_truncation_resolution():
    S = polynomial(2)
    R = semifree_resolution(truncate_ge(free_module(S), 2), 6)
    assert verify_resolution(R).ok
    # the ideal (x,y)^2 has three quadric generators and two linear syzygies
    assert betti_table(R) == {Bidegree(2, 0): 3, Bidegree(3, -1): 2}


def test_extension_from_a_shorter_resolution():
    k = residue_field(polynomial(2))
    short = semifree_resolution(k, 1)
    longer = semifree_resolution(k, 4, start=short)
    assert betti_table(longer) == betti_table(semifree_resolution(k, 4))


PRESENTATION = """\
gen x internal=1 cohom=0
gen y internal=1 cohom=0
modgen a internal=0 cohom=0
modgen b internal=1 cohom=-1
moddiff b = a*x
"""

REDUNDANT = PRESENTATION + """\
modgen u internal=2 cohom=0
modgen v internal=2 cohom=-1
moddiff v = u
"""


def test_ext_invariant_under_redundant_generator_pair():
    _, M = parse_module(PRESENTATION)
    _, M2 = parse_module(REDUNDANT, A=M.A)
    w = Window(-6, 3, -1, 3)
    for N in (free_module(M.A), residue_field(M.A)):
        assert ext_table(M, N, w).nonzero() == ext_table(M2, N, w).nonzero()
    R2 = semifree_resolution(M2, 5)
    assert verify_resolution(R2).minimal
    assert betti_table(R2) == betti_table(semifree_resolution(M, 5))


def test_identity_lift_induces_identity_on_ext():
    A = polynomial(2)
    k = residue_field(A)
    R = semifree_resolution(k, 5)
    ident = ChainMap(k, k, lambda b: k.field.eye(k.dim(b)))
    L = lift_map(ident, R, R)
    H = HomComplex(R.module, k)
    for b in (Bidegree(-1, 1), Bidegree(-2, 2)):
        m = hom_map(L, H, H, b)
        assert m.shape[0] == m.shape[1] == H.dim(b)
        assert resolve.linalg.rank(k.field, m) == H.dim(b)


def test_cache_round_trip(tmp_path):
    k = residue_field(polynomial(3))
    fresh = semifree_resolution(k, 5)
    resolve.set_cache_dir(str(tmp_path))
    try:
        cold = semifree_resolution(k, 5)
        warm = semifree_resolution(k, 5)
        empty = semifree_resolution(truncate_ge(k, 3), 5)
        empty_again = semifree_resolution(truncate_ge(k, 3), 5)
    finally:
        resolve.set_cache_dir(None)
    assert list(tmp_path.glob("*.res"))
    for R in (cold, warm):
        assert R.to_text() == fresh.to_text()
        assert verify_resolution(R).ok
    assert empty.generators == empty_again.generators == ()
