import itertools
from math import comb

import pytest
from hypothesis import given, settings, strategies as st

from dgduality.algebra import (check_dga, exterior, koszul, parse_algebra, polynomial, quotient,
                               trivial_extension, truncation)
from dgduality.bigraded import Window
from dgduality.dgmodule import cohomology, free_module
from dgduality.errors import InputError


def standard_count(n, i, gens):
    """Monomials of degree i in n variables avoiding every exponent vector in ``gens``."""
    total = 0
    for e in itertools.product(range(i + 1), repeat=n):
        if sum(e) != i:
            continue
        if any(all(a >= b for a, b in zip(e, g)) for g in gens):
            continue
        total += 1
    return total


@pytest.mark.parametrize("n", [1, 2, 3])
def test_polynomial_hilbert_function(n):
    A = polynomial(n)
    for i in range(7):
        assert A.dim((i, 0)) == comb(n + i - 1, i)


def test_weighted_degrees():
    A = polynomial(["x", "y"], degrees=[1, 2])
    # monomials x^a y^b with a + 2b = i
    assert [A.dim((i, 0)) for i in range(6)] == [i // 2 + 1 for i in range(6)]


@settings(max_examples=20, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(0, 3)).filter(lambda e: sum(e) > 0),
                min_size=1, max_size=3))
def test_monomial_quotients_match_standard_monomials(exps):
    rels = [f"x^{a}*y^{b}" for a, b in exps]
    A = quotient(polynomial(2), rels)
    for i in range(6):
        assert A.dim((i, 0)) == standard_count(2, i, exps)


def test_odd_generator_squares_to_zero():
    A = koszul(polynomial(1), ["x^2"])
    assert A.parse_element("e*e") == {}
    assert A.dim((4, -2)) == 0
    assert A.dim((3, -1)) == 1


def test_exterior_on_even_generator_is_dual_numbers():
    L = exterior()
    assert [L.dim((i, 0)) for i in range(4)] == [1, 1, 0, 0]


def test_koszul_cohomology_is_quotient_ring():
    A = koszul(polynomial(2), ["x^2", "y^2"])
    w = Window(0, 6, -2, 0)
    got = cohomology(free_module(A), w).nonzero()
    # k[x,y]/(x^2, y^2) sits in cohomological degree 0
    want = {(i, 0): standard_count(2, i, [(2, 0), (0, 2)]) for i in range(7)}
    assert got == {b: v for b, v in want.items() if v}


@pytest.mark.parametrize("A", [polynomial(2), quotient(polynomial(2), ["x*y"]),
                               koszul(polynomial(1), ["x^2"]), exterior(),
                               koszul(polynomial(2), ["x^2+y^2"]), truncation(polynomial(2), 3),
                               trivial_extension(["x"], [2], 3)], ids=lambda A: A.name)
def test_check_dga_on_examples(A):
    assert check_dga(A, Window(-1, 6, -3, 1)).ok


def test_check_dga_flags_unstable_ideal():
    A = parse_algebra("gen x internal=1 cohom=0\ngen e internal=2 cohom=-1\n"
                      "rel x*e\ndiff e = x^2\n")
    rep = check_dga(A, Window(0, 4, -2, 0))
    assert not rep.ok
    assert any("ideal" in msg for _, msg in rep.violations)


@pytest.mark.parametrize("text, line", [
    ("gen x internal=1 cohom=0\nrel x +* x\n", 2),
    ("gen x internal=1 cohom=0\ngen y internal=2 cohom=0\nrel x + y\n", 3),
    ("gen x internal=1 cohom=0\ngen e internal=2 cohom=-1\ndiff e = x\n", 3),
    ("gen x internal=0 cohom=0\n", 1),
    ("field p=6\ngen x internal=1 cohom=0\n", 1),
])
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(InputError) as exc:
        parse_algebra(text)
    assert exc.value.line == line


def test_round_trip_text():
    A = koszul(polynomial(2), ["x^2+y^2"])
    B = parse_algebra(A.to_text())
    for i in range(6):
        for j in (-1, 0):
            assert A.dim((i, j)) == B.dim((i, j))
