import pytest
import sympy

from app.services.grpcore import InvalidInputError, Permutation, Word, commutator
from app.services.gtledger import (
    RHO,
    Action,
    Presentation,
    artin_identity_check,
    class_of,
    conjugation_action,
    formal_power_class,
    gt_pair_basic_check,
    in_subgroup,
    named_word,
    parse_exponent,
    parse_ledger_script,
    parse_word,
    return_length,
    subgroup_abelianization,
    tau,
    verify_gt_ledger,
)
from app.utils.builtins import S2_LEDGER


@pytest.fixture(scope="module")
def ledger_reports():
    return {report.name: report for report in verify_gt_ledger()}


@pytest.fixture(scope="module")
def b4_level():
    levels = {level.name: level for level in parse_ledger_script(S2_LEDGER)}
    level = levels["b4"]
    return level, subgroup_abelianization(level.presentation())


def test_named_words():
    assert named_word(4, "x12") == tau(1, 2)
    assert named_word(4, "y2") == tau(1, 2)
    assert named_word(4, "x31") == named_word(4, "x13")
    assert named_word(4, "x13") == tau(2) * tau(1, 2) * tau(2, -1)
    assert named_word(4, "y3") == tau(2) * tau(1, 2) * tau(2)
    assert named_word(4, "epsilon") == named_word(4, "w3") ** 2
    for bad in ("x15", "tau4", "k6", "q1", "x1"):
        with pytest.raises(InvalidInputError):
            named_word(4, bad)


def test_parse_word():
    assert parse_word("(tau1^2 tau2)^2", 4) == (tau(1, 2) * tau(2)) ** 2
    assert parse_word("[tau1, tau3]", 4) == commutator(tau(1), tau(3))
    assert parse_word("1", 4).is_identity()
    for bad in ("tau1 ^", "(tau1", "tau1)", "[tau1 tau2]", "3 tau1"):
        with pytest.raises(InvalidInputError):
            parse_word(bad, 4)


def test_parse_exponent():
    assert parse_exponent("-2*rho") == -2 * RHO
    assert parse_exponent("2*(d_l - rho)") == sympy.expand(2 * (sympy.Symbol("d_l") - RHO))
    for bad in ("rho^2", "rho*d_l", "rho/2", "sigma", "1.5*rho"):
        with pytest.raises(InvalidInputError):
            parse_exponent(bad)


def test_artin_identity_check():
    assert artin_identity_check(commutator(tau(1) * tau(3), tau(2) * tau(1) * tau(3) * tau(2)), 4)
    braid = tau(1) * tau(2) * tau(1) * (tau(2) * tau(1) * tau(2)).inverse()
    assert artin_identity_check(braid, 3)
    assert artin_identity_check(commutator(tau(1), tau(3)), 4)
    assert not artin_identity_check(tau(1), 3)
    assert not artin_identity_check(commutator(tau(1), tau(2)), 3)


def test_full_twist_is_central():
    w4 = named_word(4, "w4")
    for i in range(1, 4):
        assert artin_identity_check(commutator(w4, tau(i)), 4)


def test_braid_presentation():
    assert len(Presentation.braid(4).relators) == 3
    assert Presentation.braid(2).relators == []
    with pytest.raises(InvalidInputError):
        Presentation.braid(1)
    with pytest.raises(InvalidInputError):
        Presentation(ngens=1, relators=[Word.gen(1)])


def test_pure_braid_abelianizations():
    p3 = subgroup_abelianization(Presentation.braid(3))
    assert p3.index == 6
    assert p3.rank == 3
    assert p3.torsion == []
    p4 = subgroup_abelianization(Presentation.braid(4))
    assert p4.index == 24
    assert p4.rank == 6


def test_point_stabilizer_subgroup():
    sab = subgroup_abelianization(Presentation.braid(3), subgroup=3)
    assert sab.index == 3
    assert in_subgroup(sab, tau(1))
    assert not in_subgroup(sab, tau(2))


def test_abelianization_rejects_bad_images():
    a = Permutation.from_cycles([[1, 2]], 3)
    b = Permutation.from_cycles([[1, 2, 3]], 3)
    with pytest.raises(InvalidInputError):
        subgroup_abelianization(Presentation.braid(3), [a, b])
    with pytest.raises(InvalidInputError):
        subgroup_abelianization(Presentation.braid(3), [a])


def test_class_of_and_formal_powers():
    p3 = subgroup_abelianization(Presentation.braid(3))
    with pytest.raises(InvalidInputError):
        class_of(p3, tau(1))
    assert return_length(p3, tau(1)) == 2
    assert return_length(p3, tau(1) * tau(2)) == 3
    x12 = [sympy.Integer(c) for c in class_of(p3, named_word(3, "x12")).free]
    assert formal_power_class(p3, tau(1), 2 * RHO) == [sympy.expand(RHO * c) for c in x12]


def test_b4_relations(b4_level):
    _, sab = b4_level

    def w(text):
        return parse_word(text, 4)

    assert class_of(sab, w("x12 x13 x14 x23 x24 x34")).is_zero(modulo_torsion=True)
    assert (class_of(sab, w("x13")) - class_of(sab, w("x24"))).is_zero(modulo_torsion=True)
    c = w("[z3 tau2, (tau1 tau3)^2]")
    expected = w("x12^-1 x13 x24 x34^-1")
    assert (class_of(sab, c) - class_of(sab, expected)).is_zero(modulo_torsion=True)
    assert conjugation_action(sab, w("z3 tau2"), c, modulo_torsion=True)[0] == Action.INVERTS
    assert conjugation_action(sab, w("(tau1 tau3)^2"), c, modulo_torsion=True)[0] == Action.FIXES


def test_s2_ledger_passes(ledger_reports):
    assert list(ledger_reports) == ["gamma04", "b4", "gamma06", "h4"]
    for report in ledger_reports.values():
        failed = [(c.anchor, c.detail) for c in report.claims if not c.passed]
        assert failed == []
        assert report.passed


def test_s2_ledger_solutions(ledger_reports):
    assert ledger_reports["gamma04"].solution == {"d_l": "-rho"}
    assert ledger_reports["b4"].solution == {"d_l": "-2*rho", "a": "rho"}
    assert ledger_reports["gamma06"].solution == {"d_l": "-2*rho", "d_m": "-rho", "d_r": "-2*rho"}
    assert ledger_reports["h4"].solution == {}


def test_ledger_reports_are_json_ready(ledger_reports):
    data = ledger_reports["b4"].to_json()
    assert data["level"] == "b4"
    assert data["index"] == 24
    assert all(set(c) == {"anchor", "passed", "detail"} for c in data["claims"])


def test_failing_ledger_names_the_equation():
    script = "level broken\ngroup braid 3\nequation power\nlhs pow tau1^2 : rho\n"
    (report,) = verify_gt_ledger(script, workers=1)
    assert not report.passed
    failed = [c.anchor for c in report.claims if not c.passed]
    assert failed == ["broken/power"]


def test_failing_placeholder_hypothesis():
    script = "level bad\ngroup braid 3\nequation e\nlhs f tau1 | tau2 : vanish\n"
    (report,) = verify_gt_ledger(script, workers=1)
    assert not report.passed
    assert report.claims[0].anchor == "bad/e"


@pytest.mark.parametrize(
    "script, message",
    [
        ("group braid 4\n", "before the first"),
        ("level a\ngroup braid 4\nfoo bar\n", "unknown directive"),
        ("level a\ncheck class tau1\n", "'group' must come before"),
        ("level a\ngroup braid 4\nunknowns rho\n", "cannot be an unknown"),
        ("level a\ngroup cube 4\n", "unknown group kind"),
        ("level a\ngroup braid 4\nlhs pow tau1 : rho\n", "term before"),
        ("level a\ngroup braid 4\nequation e\nlhs f tau1 | tau2 : guess\n", "unknown rule"),
    ],
)
def test_parse_ledger_script_errors(script, message):
    with pytest.raises(InvalidInputError, match=message):
        parse_ledger_script(script)


def test_gt_pair_basic_check():
    result = gt_pair_basic_check(1, Word())
    assert result["two_cycle"]["passed"]
    assert result["three_cycle"]["passed"]
    assert result["pentagon_shadow"]["passed"]
    assert result["pentagon_shadow"]["necessary_only"]
    assert result["pentagon_shadow"]["vacuous"]
    assert "derived subgroup" in result["pentagon_shadow"]["detail"]
    x, y = Word.gen(0), Word.gen(1)
    assert gt_pair_basic_check(3, commutator(x, y))["two_cycle"]["passed"]
    with pytest.raises(InvalidInputError):
        gt_pair_basic_check(2, Word())
    with pytest.raises(InvalidInputError):
        gt_pair_basic_check(1, x)


def test_pentagon_shadow_passes_for_every_commutator():
    x, y = Word.gen(0), Word.gen(1)
    for f in (commutator(x, y), commutator(y, x) ** 2, commutator(x * x, y)):
        shadow = gt_pair_basic_check(1, f)["pentagon_shadow"]
        assert shadow["passed"]
        assert shadow["vacuous"]
