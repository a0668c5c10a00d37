import pytest
from hypothesis import given, settings, strategies as st

from dgduality.algebra import exterior, koszul, polynomial, quotient
from dgduality.bigraded import Bidegree, Window
from dgduality.dgmodule import free_module, residue_field, shift_twist, truncate_ge
from dgduality.duality import (balanced_check, condition_chi_check, dualizing_module,
                               finiteness_check, gorenstein_detect, local_duality_check,
                               reflexivity_check, serre_duality_check, vanishing_range_check)
from dgduality.errors import NotGorenstein

KX = polynomial(1)
KXY = polynomial(2)


@pytest.mark.parametrize("A, an", [
    (KX, (1, 1)), (KXY, (2, 2)), (exterior(), (-1, 0)), (quotient(KX, ["x^2"]), (-1, 0)),
    (koszul(KX, ["x^2"]), (-1, 0)), (quotient(KXY, ["x*y"]), (0, 1)),
    (koszul(KXY, ["x^2+y^2"]), (0, 1)),
], ids=lambda v: getattr(v, "name", str(v)))
def test_gorenstein_parameters(A, an):
    cert = gorenstein_detect(A)
    assert cert.gorenstein_in_window
    assert (cert.a, cert.n) == an


def test_non_gorenstein_ring():
    A = quotient(KXY, ["x^2", "x*y"])
    cert = gorenstein_detect(A)
    assert not cert.gorenstein_in_window
    assert len(cert.evidence.nonzero()) >= 2
    with pytest.raises(NotGorenstein):
        dualizing_module(A, cert)


def test_dualizing_module_twist_and_shift():
    R = dualizing_module(KXY, gorenstein_detect(KXY))
    assert R.generators[0].bidegree == Bidegree(2, -2)


def test_balanced_and_negative_control():
    w = Window(-5, 3, -2, 3)
    assert balanced_check(KXY, free_module(KXY, -2, 2), w).status() == "PASS"
    assert balanced_check(KXY, free_module(KXY, 0, 2), w).status() == "FAIL"


@pytest.mark.parametrize("make", [free_module, residue_field, lambda A: free_module(A, -2),
                                  lambda A: truncate_ge(free_module(A), 2)])
def test_local_duality_on_the_line(make):
    rep = local_duality_check(make(KX), free_module(KX, -1, 1), Window(-5, 5, -2, 2))
    assert rep.status() == "PASS", rep.mismatches


def test_local_duality_fails_with_wrong_dualizing_module():
    rep = local_duality_check(free_module(KX), free_module(KX, 0, 1), Window(-5, 5, -2, 2))
    assert rep.status() == "FAIL"


@settings(max_examples=6, deadline=None)
@given(st.integers(-2, 2), st.integers(-1, 1))
def test_shift_equivariance(t, s):
    R = free_module(KX, -1, 1)
    w = Window(-4, 4, -2, 2)
    base = local_duality_check(residue_field(KX), R, w)
    moved = local_duality_check(shift_twist(residue_field(KX), (t, s)), R, w.shifted((t, s)))
    assert base.status() == moved.status() == "PASS"
    assert moved.tables["local_cohomology"].nonzero() == \
        base.tables["local_cohomology"].shifted((t, s)).nonzero()


def test_serre_on_projective_line():
    rep = serre_duality_check(free_module(KXY), free_module(KXY, -2, 2), Window(-3, 3, -1, 2), (-3, 3))
    assert rep.status() == "PASS", rep.mismatches
    sec = rep.tables["sections"]
    assert [sec[(l, 0)] for l in range(-3, 4)] == [max(l + 1, 0) for l in range(-3, 4)]
    assert [sec[(l, 1)] for l in range(-3, 4)] == [max(-l - 1, 0) for l in range(-3, 4)]


def test_serre_detects_wrong_dualizing_module():
    rep = serre_duality_check(free_module(KXY), free_module(KXY, -1, 2), Window(-3, 3, -1, 2), (-3, 3))
    assert rep.status() == "FAIL"


def test_condition_chi():
    assert condition_chi_check(KXY, free_module(KXY), Window(-6, 4, -1, 3)).status() == "PASS"
    assert condition_chi_check(exterior(), free_module(exterior()), Window(-4, 4, -1, 2)).passed


def test_vanishing_range_attained_on_plane():
    rep = vanishing_range_check(free_module(KXY), free_module(KXY, -2, 2), Window(-4, 4, -2, 3), (-4, 4))
    assert rep.status() == "PASS"
    assert rep.allowed == (0, 1)
    assert rep.occupied == [0, 1]


def test_reflexivity_of_k():
    rep = reflexivity_check(residue_field(KXY), free_module(KXY, -2, 2), Window(-3, 3, -3, 3))
    assert rep.status() == "PASS"


def test_finiteness_sections_follow_hilbert_function():
    rep = finiteness_check(free_module(KXY), 0, Window(0, 5, -1, 2))
    assert rep.status() == "PASS"
    assert [rep.tables["sections"][(l, 0)] for l in range(6)] == [l + 1 for l in range(6)]


def test_report_artifacts():
    rep = local_duality_check(free_module(KX), free_module(KX, 0, 1), Window(-2, 2, -1, 1))
    text = rep.mismatches_csv()
    assert text.startswith("# valid -2:2:-1:1\ninternal,cohomological,lhs,rhs\n")
    assert rep.summary().startswith("FAIL local window=-2:2:-1:1 mismatches=")
