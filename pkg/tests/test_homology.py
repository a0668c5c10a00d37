import pytest

from dgduality.algebra import exterior, koszul, polynomial, quotient
from dgduality.bigraded import Bidegree, Window, table_equal
from dgduality.dgmodule import cohomology, free_module, residue_field, truncate_ge
from dgduality.homology import (derived_global_sections, ext_qgr, ext_table, local_cohomology_cech,
                                local_cohomology_colim, triangle_check)

W = Window(-6, 4, -2, 3)


def test_local_cohomology_of_line():
    loc = local_cohomology_colim(free_module(polynomial(1)), W)
    assert not loc.unstable
    # H^1_m(k[x]) = x^-1 k[x^-1]
    assert loc.table.nonzero() == {Bidegree(i, 1): 1 for i in range(-6, 0)}


def test_local_cohomology_of_plane_colim_and_cech():
    A = free_module(polynomial(2))
    want = {Bidegree(i, 2): -i - 1 for i in range(-6, -1)}
    for loc in (local_cohomology_colim(A, W), local_cohomology_cech(A, W)):
        assert not loc.unstable
        assert loc.table.nonzero() == want


@pytest.mark.parametrize("A", [polynomial(1), quotient(polynomial(2), ["x*y"]), exterior(),
                               koszul(polynomial(1), ["x^2"])], ids=lambda A: A.name)
def test_pipelines_agree(A):
    for M in (free_module(A), residue_field(A), free_module(A, -2), truncate_ge(free_module(A), 2)):
        a = local_cohomology_colim(M, W)
        b = local_cohomology_cech(M, W)
        assert not a.unstable and not b.unstable
        assert table_equal(a.table, b.table, W) == []


def test_torsion_module_is_its_own_local_cohomology():
    A = polynomial(2)
    k = residue_field(A)
    assert local_cohomology_colim(k, W).table.nonzero() == {Bidegree(0, 0): 1}
    assert derived_global_sections(k, W).table.nonzero() == {}


def test_projective_line_sections():
    gam = derived_global_sections(free_module(polynomial(2)), Window(-5, 5, -1, 2))
    assert not gam.unstable
    want = {Bidegree(l, 0): l + 1 for l in range(0, 6)}
    want.update({Bidegree(l, 1): -l - 1 for l in range(-5, -1)})
    assert gam.table.nonzero() == want


@pytest.mark.parametrize("A", [polynomial(1), polynomial(2), quotient(polynomial(2), ["x*y"])],
                         ids=lambda A: A.name)
def test_triangle_constraints(A):
    M = free_module(A)
    w = Window(-4, 4, -1, 3)
    loc = local_cohomology_colim(M, w).table
    gam = derived_global_sections(M, w).table
    assert triangle_check(loc, cohomology(M, w), gam, w) == []


def test_ext_qgr_of_structure_sheaf_on_line():
    A = polynomial(2)
    R = free_module(A, -2, 2)
    q = ext_qgr(free_module(A), R, Window(-3, 3, -3, 0))
    assert not q.unstable
    # Ext^{-1}(O, O(-2)[2])_{-l} = H^0(O(l)) for l >= 0
    assert {b: v for b, v in q.table.nonzero().items() if b.cohom == -1} == {
        Bidegree(-l, -1): l + 1 for l in range(0, 4)}


def test_ext_of_k_into_polynomial_ring():
    for n in (1, 2, 3):
        A = polynomial(n)
        ext = ext_table(residue_field(A), free_module(A), Window(-5, 5, -1, 4))
        assert ext.nonzero() == {Bidegree(-n, n): 1}


def test_stabilization_points_are_recorded():
    loc = local_cohomology_colim(free_module(polynomial(1)), W)
    assert set(loc.stabilized_at) == set(W)
    assert "internal,cohomological,stabilized_at" in loc.stabilized_csv()
