import pytest

from app.services.grpcore import InvalidInputError, ResourceLimitError
from app.services.origami import Origami, canonicalize
from app.services.veech import (
    IDENTITY,
    S,
    T,
    act,
    as_matrix,
    contains,
    cusp_report,
    mat_mul,
    matrix_to_word,
    same_teichmueller_curve,
    veech_group,
    veech_report,
    word_to_matrix,
)


def _random_matrix(rng):
    m = IDENTITY
    for _ in range(rng.randint(0, 6)):
        m = mat_mul(m, S if rng.random() < 0.5 else ((1, rng.randint(-3, 3)), (0, 1)))
    return m


def test_identity_and_s_fourth_power(random_origamis):
    for o in random_origamis:
        start = canonicalize(o)
        assert act(IDENTITY, o).key() == start.key()
        image = o
        for _ in range(4):
            image = act(S, image)
        assert image.key() == start.key()


def test_st_relation(random_origamis):
    # (ST)^3 S^-2 = I
    for o in random_origamis:
        image = act(S, act(S, o))
        for _ in range(3):
            image = act(S, act(T, image))
        assert image.key() == canonicalize(o).key()


def test_action_is_compatible_with_products(rng, random_origamis):
    for o in random_origamis:
        a, b = _random_matrix(rng), _random_matrix(rng)
        assert act(mat_mul(a, b), o).key() == act(a, act(b, o)).key()


def test_matrix_words(rng):
    for _ in range(50):
        m = _random_matrix(rng)
        assert word_to_matrix(matrix_to_word(m)) == m
    assert matrix_to_word(IDENTITY) == []


def test_as_matrix_rejects_bad_determinant():
    with pytest.raises(InvalidInputError):
        as_matrix([[2, 0], [0, 1]])
    with pytest.raises(InvalidInputError):
        as_matrix([[1, 0]])


def test_t_on_l22(l22):
    image = act(T, l22)
    assert image.key() == canonicalize(Origami(3, l22.h, l22.v * l22.h.inverse())).key()
    assert image.key() != canonicalize(l22).key()


def test_s2_veech_group_is_gamma2(s2):
    vgd = veech_group(s2)
    assert vgd.index == 6
    assert vgd.contains_minus_identity
    report = veech_report(s2)
    assert report["contains_gamma2"]
    assert report["equals_gamma2"]
    assert sorted(c["width"] for c in report["cusps"]) == [2, 2, 2]
    assert report["curve_genus"] == 0


def test_s2_maximal_degeneration(s2):
    vgd = veech_group(s2)
    cusps = cusp_report(s2, vgd)
    assert sum(c.width for c in cusps.cusps) == vgd.index
    assert 3 in [c.node_count for c in cusps.cusps]
    assert cusps.maximally_degenerate
    for k in cusps.maximally_degenerate:
        assert cusps.cusps[k].node_count == 3


def test_l22_veech_group(l22):
    vgd = veech_group(l22)
    assert vgd.index == 3
    assert contains(vgd, S, l22)
    assert not contains(vgd, T, l22)
    assert veech_report(l22)["equals_gamma2"] is False


def test_torus_veech_group_is_everything(torus):
    vgd = veech_group(torus)
    assert vgd.index == 1
    assert cusp_report(torus, vgd).curve_genus == 0


def test_cusp_widths_sum_to_index(random_origamis):
    for o in random_origamis[:30]:
        vgd = veech_group(o)
        cusps = cusp_report(o, vgd)
        assert sum(c.width for c in cusps.cusps) == vgd.index
        for g in vgd.generators:
            assert contains(vgd, g, o)


def test_monodromy_non_uniqueness(l22):
    other = Origami.from_cycles(3, [[1, 2, 3]], [[1, 2]])
    assert same_teichmueller_curve(l22, other)
    assert not same_teichmueller_curve(l22, Origami.from_cycles(3, [[1, 2, 3]], []))


def test_orbit_bound(s2):
    with pytest.raises(ResourceLimitError):
        veech_group(s2, bound=2)


def test_veech_report_logs_toolkit_errors(s2, caplog):
    with pytest.raises(ResourceLimitError):
        veech_report(s2, bound=2)
    assert "Error computing Veech group" in caplog.text


def test_veech_report_does_not_log_programming_errors(s2, caplog, monkeypatch):
    def broken(o, vgd):
        raise ValueError("bug")

    monkeypatch.setattr("app.services.veech.cusp_report", broken)
    with pytest.raises(ValueError):
        veech_report(s2)
    assert "Error computing Veech group" not in caplog.text
