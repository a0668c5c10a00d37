import pytest
from hypothesis import given, strategies as st

from dgduality.bigraded import Bidegree, DimTable, ShiftSpec, Window, sup_inf, table_equal
from dgduality.errors import WindowNotCertified

small = st.integers(-6, 6)


@st.composite
def windows(draw):
    a, b = sorted((draw(small), draw(small)))
    c, d = sorted((draw(small), draw(small)))
    return Window(a, b, c, d)


@st.composite
def tables(draw):
    w = draw(windows())
    cells = list(w)
    dims = draw(st.dictionaries(st.sampled_from(cells), st.integers(0, 5), max_size=6))
    return DimTable(dims, w)


def test_window_parse_and_iteration():
    w = Window.parse("-1:1:0:1")
    assert str(w) == "-1:1:0:1"
    assert len(list(w)) == 6
    assert Bidegree(0, 1) in w and (2, 0) not in w
    with pytest.raises(ValueError):
        Window(1, 0, 0, 0)


def test_bidegree_arithmetic():
    assert Bidegree(1, 2) + (0, 1) == (1, 3)
    assert -Bidegree(1, -2) == (-1, 2)


@given(tables())
def test_csv_round_trip(t):
    assert DimTable.from_csv(t.to_csv()) == t


@given(tables(), small, small)
def test_shift_round_trip(t, a, b):
    s = ShiftSpec(a, b)
    back = t.shifted(s).shifted(ShiftSpec(-a, -b))
    assert back == t


@given(tables())
def test_dual_is_involution(t):
    assert t.dual().dual() == t


def test_twist_convention():
    # V(m)_i = V_{i+m}: the entry of V at internal 3 shows up at internal 1 in V(2)
    t = DimTable({(3, 0): 1}, Window(0, 5, 0, 0))
    assert t.shifted(ShiftSpec(2, 0)).nonzero() == {Bidegree(1, 0): 1}
    assert t.shifted(ShiftSpec(0, 1)).nonzero() == {Bidegree(3, -1): 1}


def test_uncertified_lookups_raise():
    t = DimTable({(0, 0): 2}, Window(0, 1, 0, 0), frozenset({Bidegree(1, 0)}))
    assert t[(0, 0)] == 2
    with pytest.raises(WindowNotCertified):
        t[(5, 0)]
    with pytest.raises(WindowNotCertified):
        t[(1, 0)]
    with pytest.raises(WindowNotCertified):
        table_equal(t, t, Window(0, 1, 0, 0))


def test_sup_inf():
    assert sup_inf(DimTable({(0, -1): 1, (2, 3): 1}, Window(0, 2, -1, 3))) == (3, -1)
    assert sup_inf(DimTable({}, Window(0, 0, 0, 0))) == (None, None)


def test_negative_dimension_rejected():
    with pytest.raises(ValueError):
        DimTable({(0, 0): -1}, Window(0, 0, 0, 0))
