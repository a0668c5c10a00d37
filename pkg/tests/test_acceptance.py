"""Acceptance suite: one test group per criterion, all comparisons exact.

Run ``pytest tests/test_acceptance.py -v``; the terminal summary prints one
PASS/FAIL line per criterion.
"""

import filecmp
from math import comb
from pathlib import Path

import pytest

from dgduality import cli, duality, resolve
from dgduality.algebra import GeneratorSpec, exterior, koszul, polynomial, quotient
from dgduality.bigraded import Bidegree, Window, table_equal
from dgduality.dgmodule import (PresentedDgModule, free_module, parse_module, residue_field,
                                truncate_ge)
from dgduality.homology import ext_table, local_cohomology_cech, local_cohomology_colim
from dgduality.resolve import betti_table, semifree_resolution, verify_resolution

# dimensions are integers; every comparison below is exact
TOLERANCE = 0

CORPUS = cli.CORPUS_DIR
ENTRIES = cli.read_index(CORPUS)
GORENSTEIN = [e for e in ENTRIES if e["a"] is not None]


def entry_id(e):
    return Path(e["file"]).stem


def load(e):
    return cli.load_algebra(CORPUS / e["file"])


def cone_on_first_generator(A):
    """Cone of multiplication by the first cohomological-degree-0 generator, A(-deg x) -> A."""
    k = A.even_degree0_generators()[0]
    g = A.generators[k]
    gens = [GeneratorSpec("a", 0, 0), GeneratorSpec("b", g.internal, -1)]
    return PresentedDgModule(A, gens, {"b": f"a*{g.name}"}, name=f"cone({g.name})")


def assert_exact(lhs, rhs):
    assert abs(lhs - rhs) <= TOLERANCE, (lhs, rhs)


# ---------------------------------------------------------------------------
# 1. dual-pipeline local cohomology

C1_WINDOW = Window(-10, 10, -5, 5)
C1_ALGEBRAS = {
    "k[x]": polynomial(1), "k[x,y]": polynomial(2), "k[x,y]/(xy)": quotient(polynomial(2), ["x*y"]),
    "Koszul(k[x],x^2)": koszul(polynomial(1), ["x^2"]), "Lambda(e)": exterior(),
}
C1_MODULES = {"A": free_module, "k": residue_field, "A(-2)": lambda A: free_module(A, -2),
              "A>=2": lambda A: truncate_ge(free_module(A), 2)}


@pytest.mark.criterion(1, "colimit and Cech local cohomology agree")
@pytest.mark.parametrize("alg", list(C1_ALGEBRAS))
@pytest.mark.parametrize("mod", list(C1_MODULES))
def test_c1_pipelines_agree(alg, mod):
    M = C1_MODULES[mod](C1_ALGEBRAS[alg])
    a = local_cohomology_colim(M, C1_WINDOW)
    b = local_cohomology_cech(M, C1_WINDOW)
    assert not a.unstable and not b.unstable
    assert table_equal(a.table, b.table, C1_WINDOW) == []


# ---------------------------------------------------------------------------
# 2. Serre duality on k[x,y]

KXY = polynomial(2)
C2_WINDOW = Window(-5, 5, -2, 3)
C2_TWISTS = (-5, 5)
CONE_XY = """\
modgen a internal=0 cohom=0
modgen b internal=2 cohom=-1
moddiff b = a*x^2 + a*y^2
"""


def c2_modules():
    text = KXY.to_text()
    return {
        "A": free_module(KXY), "k(1)": residue_field(KXY, 1), "k(-1)": residue_field(KXY, -1),
        "k(2)": residue_field(KXY, 2), "k(-2)": residue_field(KXY, -2),
        "A>=3": truncate_ge(free_module(KXY), 3), "cone(x)": cone_on_first_generator(KXY),
        "cone(x^2+y^2)": parse_module(text + CONE_XY, A=KXY)[1],
    }


@pytest.mark.criterion(2, "Serre duality on k[x,y] with R = A(-2)[2], P^1 table")
@pytest.mark.parametrize("mod", list(c2_modules()))
def test_c2_serre(mod):
    M = c2_modules()[mod]
    rep = duality.serre_duality_check(M, free_module(KXY, -2, 2), C2_WINDOW, C2_TWISTS)
    assert rep.status() == "PASS", rep.mismatches


@pytest.mark.criterion(2, "Serre duality on k[x,y] with R = A(-2)[2], P^1 table")
def test_c2_projective_line_table():
    rep = duality.serre_duality_check(free_module(KXY), free_module(KXY, -2, 2), C2_WINDOW, C2_TWISTS)
    sec = rep.tables["sections"]
    cech = local_cohomology_cech(free_module(KXY), Window(-5, 5, -1, 3)).table
    for l in range(-5, 6):
        assert_exact(sec[(l, 0)], max(l + 1, 0))
        assert_exact(sec[(l, 1)], max(-l - 1, 0))
        # Cech oracle: H^1 of the sections is H^2_m(A), H^0 is A_l since H^0_m = H^1_m = 0
        assert_exact(sec[(l, 1)], cech[(l, 2)])
        assert_exact(sec[(l, 0)], KXY.dim((l, 0)) if l >= 0 else 0)


# ---------------------------------------------------------------------------
# 3. Gorenstein parameters


@pytest.mark.criterion(3, "gorenstein_detect parameters")
@pytest.mark.parametrize("c", [1, 2, 3])
def test_c3_polynomial(c):
    cert = duality.gorenstein_detect(polynomial(c))
    assert cert.gorenstein_in_window and (cert.a, cert.n) == (c, c)


@pytest.mark.criterion(3, "gorenstein_detect parameters")
def test_c3_dual_numbers_models():
    ring = duality.gorenstein_detect(quotient(polynomial(1), ["x^2"]))
    for A in (exterior(), koszul(polynomial(1), ["x^2"])):
        cert = duality.gorenstein_detect(A)
        assert cert.gorenstein_in_window and (cert.a, cert.n) == (-1, 0)
        # same Ext(k, A) table as the quasi-isomorphic ordinary ring k[x]/(x^2)
        assert cert.evidence.nonzero() == ring.evidence.nonzero()


# ---------------------------------------------------------------------------
# 4. balanced identity


@pytest.mark.criterion(4, "balanced identity and wrong-twist negative control")
@pytest.mark.parametrize("e", GORENSTEIN, ids=entry_id)
def test_c4_balanced(e):
    A = load(e)
    w = cli.parse_window(e["window"])
    assert duality.balanced_check(A, free_module(A, -e["a"], e["n"]), w).status() == "PASS"
    wrong = free_module(A, cli._negative_twist(e["a"]), e["n"])
    assert duality.balanced_check(A, wrong, w).status() == "FAIL"


# ---------------------------------------------------------------------------
# 5. local duality


@pytest.mark.criterion(5, "local duality on the corpus")
@pytest.mark.parametrize("mod", ["A", "k", "A(-1)", "A(-2)"])
@pytest.mark.parametrize("e", GORENSTEIN, ids=entry_id)
def test_c5_local_duality(e, mod):
    A = load(e)
    M = {"A": free_module(A), "k": residue_field(A), "A(-1)": free_module(A, -1),
         "A(-2)": free_module(A, -2)}[mod]
    rep = duality.local_duality_check(M, free_module(A, -e["a"], e["n"]), cli.parse_window(e["window"]))
    assert rep.status() == "PASS", rep.mismatches


# ---------------------------------------------------------------------------
# 6. vanishing range


@pytest.mark.criterion(6, "vanishing range of R^j Gamma")
@pytest.mark.parametrize("mod", ["A", "A[-3]", "cone"])
@pytest.mark.parametrize("e", GORENSTEIN, ids=entry_id)
def test_c6_vanishing(e, mod):
    A = load(e)
    M = {"A": lambda: free_module(A), "A[-3]": lambda: free_module(A, 0, -3),
         "cone": lambda: cone_on_first_generator(A)}[mod]()
    w = cli.parse_window(e["window"])
    w = Window(w.i_min, w.i_max, min(w.j_min, -3), max(w.j_max, 3))
    rep = duality.vanishing_range_check(M, free_module(A, -e["a"], e["n"]), w,
                                        cli.parse_twists(e["twists"]))
    assert rep.status() == "PASS", (rep.mismatches, rep.notes)


@pytest.mark.criterion(6, "vanishing range of R^j Gamma")
def test_c6_range_attained_on_plane():
    rep = duality.vanishing_range_check(free_module(KXY), free_module(KXY, -2, 2), C2_WINDOW, C2_TWISTS)
    assert rep.allowed == (0, 1)
    assert rep.occupied == [0, 1]


# ---------------------------------------------------------------------------
# 7. resolution engine


@pytest.mark.criterion(7, "resolution engine self-consistency")
@pytest.mark.parametrize("e", ENTRIES, ids=entry_id)
def test_c7_verify_resolution(e):
    A = load(e)
    mods = [residue_field(A), free_module(A), truncate_ge(free_module(A), 2), cone_on_first_generator(A)]
    for M in mods:
        R = semifree_resolution(M, 5)
        rep = verify_resolution(R)
        assert rep.ok and rep.minimal, rep.failures


@pytest.mark.criterion(7, "resolution engine self-consistency")
@pytest.mark.parametrize("n", [1, 2, 3])
def test_c7_betti_census(n):
    k = residue_field(polynomial(n))
    for through in (n + 1, n + 4):
        assert betti_table(semifree_resolution(k, through)) == {
            Bidegree(t, -t): comb(n, t) for t in range(n + 1)}


@pytest.mark.criterion(7, "resolution engine self-consistency")
@pytest.mark.parametrize("e", ENTRIES, ids=entry_id)
def test_c7_redundant_generator_pair(e):
    A = load(e)
    M = cone_on_first_generator(A)
    x = A.generators[A.even_degree0_generators()[0]].name
    extra = (GeneratorSpec("u", 2, 0), GeneratorSpec("v", 2, -1))
    pair = PresentedDgModule(A, M.generators + extra, {"b": f"a*{x}", "v": "u"})
    w = Window(-5, 3, -2, 3)
    for N in (free_module(A), residue_field(A)):
        assert ext_table(M, N, w).nonzero() == ext_table(pair, N, w).nonzero()


# ---------------------------------------------------------------------------
# 8. determinism


@pytest.mark.criterion(8, "byte-identical corpus artifacts across workers and cache states")
def test_c8_determinism(tmp_path):
    runs = {}
    for name, jobs, cache in (("serial", 1, None), ("cold", 4, tmp_path / "cache"),
                              ("warm", 4, tmp_path / "cache")):
        out = tmp_path / name
        code, rows, _ = cli.run_corpus(CORPUS, str(out), jobs, str(cache) if cache else None)
        resolve.set_cache_dir(None)
        assert code == 0
        runs[name] = out
    assert list((tmp_path / "cache").glob("*.res"))
    for name in ("cold", "warm"):
        cmp = filecmp.dircmp(runs["serial"], runs[name])
        assert _identical(cmp), name


def _identical(cmp):
    if cmp.left_only or cmp.right_only or cmp.diff_files or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(cmp.left, cmp.right, cmp.common_files, shallow=False)
    return not mismatch and not errors and all(_identical(sub) for sub in cmp.subdirs.values())
