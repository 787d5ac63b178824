import pytest

from app.services.dessin import (
    DessinMonodromy,
    belyi_adjust,
    dessin_dictionary,
    fingerprint_check,
    intermediate_cover,
    new_dessin,
    origami_from_dessin,
    riemann_hurwitz_report,
    strip_doubling_check,
)
from app.services.grpcore import InvalidInputError, Permutation
from app.services.origami import singularity_data
from app.utils.builtins import builtin_dessin


@pytest.fixture(scope="module")
def dessin6() -> DessinMonodromy:
    return builtin_dessin("dessin6")


@pytest.fixture(scope="module")
def origami24(dessin6):
    return origami_from_dessin(dessin6)


@pytest.fixture(scope="module")
def dessin4() -> DessinMonodromy:
    return builtin_dessin("dessin4")


def test_dessin6_shape(dessin6):
    assert dessin6.degree == 6
    assert dessin6.is_pure
    assert dessin6.is_totally_ramified_at_infinity
    assert dessin6.genus == 0


def test_rejects_intransitive_dessin():
    with pytest.raises(InvalidInputError):
        DessinMonodromy.from_cycles(4, [[1, 2]], [[3, 4]])


def test_from_cycles_names_the_field():
    with pytest.raises(InvalidInputError, match="Field 'g1'"):
        DessinMonodromy.from_cycles(3, [[1, 2, 3]], [[1, 1]])


def test_dictionary_branch_loops(dessin6):
    loops = dessin_dictionary(dessin6)
    assert loops["c0"] == dessin6.g0 ** 2
    assert loops["c1"].is_identity()
    assert loops["c2"].is_identity()
    assert loops["c3"] == dessin6.g_inf ** 2
    assert loops["ab"] == loops["a"] * loops["b"]


def test_dictionary_surface_relation(dessin6):
    loops = dessin_dictionary(dessin6)
    a, b = loops["a"], loops["b"]
    relation = a * b * a.inverse() * b.inverse() * loops["c3"] * loops["c2"] * loops["c1"] * loops["c0"]
    assert relation.is_identity()


def test_intermediate_cover_of_dessin6(dessin6):
    cover = intermediate_cover(dessin6)
    assert cover.degree == 6
    assert cover.branch_profiles["c0"] == (1, 1, 1, 3)
    assert cover.branch_profiles["c3"] == (3, 3)
    assert cover.zero_orders == (2, 2, 2)
    assert cover.genus == 4
    assert cover.marked_points == 18
    assert cover.strip_cycles == {"1/0": 3, "0/1": 1, "1/1": 4}


def test_origami_from_dessin(origami24):
    assert origami24.d == 24
    data = singularity_data(origami24)
    assert data.genus == 4
    assert data.zero_orders == (2, 2, 2)
    assert data.n == 18


@pytest.mark.parametrize("name, genus, n", [("dessin2", 1, 8), ("dessin4", 2, 14), ("dessin6", 4, 18)])
def test_origami_genus_matches_the_branch_data(name, genus, n):
    dessin = builtin_dessin(name)
    data = singularity_data(origami_from_dessin(dessin))
    assert data.genus == intermediate_cover(dessin).genus == genus
    assert data.n == n


def test_riemann_hurwitz_report(dessin6):
    report = riemann_hurwitz_report(dessin6)
    assert report["dessin"]["genus"] == 0
    assert report["dessin"]["cycle_counts"] == [4, 3, 1]
    assert report["intermediate"]["genus"] == 4
    assert report["intermediate"]["zero_orders"] == [2, 2, 2]
    assert report["intermediate"]["points_over_branch"] == 18
    assert report["origami"]["consistent"]
    assert report["origami"]["n"] == report["origami"]["expected_n"] == 18


def test_riemann_hurwitz_expectation_does_not_read_the_origami(dessin4):
    report = riemann_hurwitz_report(dessin4)
    # g0^2 and g1^2 trivial, g_inf^2 a pair of transpositions
    assert report["intermediate"]["branch_profiles"]["c3"] == [2, 2]
    assert report["intermediate"]["genus"] == 2
    assert report["origami"]["expected_n"] == 14
    assert report["origami"]["consistent"]


def test_strip_doubling(dessin6, origami24):
    result = strip_doubling_check(dessin6, origami24)
    assert {label: row["strips"] for label, row in result.items()} == {"1/0": 6, "0/1": 2, "1/1": 8}
    assert all(row["passed"] for row in result.values())


def test_fingerprint_of_the_degree_four_dessin(dessin4):
    report = fingerprint_check(origami_from_dessin(dessin4), 4)
    assert report.counts == {"1/0": 2, "0/1": 1, "1/1": 3}
    assert report.r == 3
    assert report.distinct
    for heights in report.heights.values():
        assert set(heights) == {2}
    assert report.passed
    assert report.failures == []


def test_fingerprint_fails_when_g0_has_order_three(origami24):
    report = fingerprint_check(origami24, 6)
    assert report.counts == {"1/0": 3, "0/1": 2, "1/1": 5}
    assert report.heights["0/1"] == [1, 1]
    assert sorted(report.heights["1/1"]) == [1, 1, 2, 2, 2]
    assert not report.passed
    assert any("miss the value 1" in f for f in report.failures)
    assert any(f.startswith("0/1: maximal cylinder heights") for f in report.failures)


def test_fingerprint_preconditions(origami24):
    with pytest.raises(InvalidInputError):
        fingerprint_check(origami24, 5)
    with pytest.raises(InvalidInputError):
        fingerprint_check(origami24, 3)


def test_origami_from_dessin_preconditions():
    with pytest.raises(InvalidInputError, match="pure"):
        origami_from_dessin(builtin_dessin("cube"))
    # pure, but two points over infinity
    split = DessinMonodromy.from_cycles(4, [[1, 2], [3, 4]], [[1, 3], [2, 4]])
    with pytest.raises(InvalidInputError, match="infinity"):
        origami_from_dessin(split)


@pytest.mark.parametrize("mode, factor", [("compose_4x_1mx", 2), ("precompose_square_then_4x", 4)])
def test_belyi_adjust_produces_pure_dessins(mode, factor):
    cube = builtin_dessin("cube")
    adjusted = belyi_adjust(cube, mode)
    assert adjusted.degree == factor * cube.degree
    assert adjusted.is_pure


def test_belyi_adjust_rejects_unknown_mode():
    with pytest.raises(InvalidInputError):
        belyi_adjust(builtin_dessin("cube"), "x^5")


def test_new_dessin(dessin6):
    rebuilt = new_dessin(dessin6.g0, dessin6.g1)
    assert rebuilt == dessin6
    with pytest.raises(InvalidInputError):
        new_dessin(dessin6.g0, Permutation.identity(5))
