import pytest
from sympy import Rational

from app.services.algver import (
    FamilyIdentity,
    FamilyManifest,
    HyperellipticFamily,
    builtin_families,
    builtin_manifest,
    builtin_maps,
    check_at_random_points,
    compose_maps,
    degenerate_fiber_collapse,
    derive_target_cubic,
    fiber_profile,
    parse_poly,
    poly_to_text,
    singular_parameters,
    t,
    to_poly,
    verify_covering_identity,
    verify_families,
    x,
)
from app.services.grpcore import InvalidInputError


def test_parse_poly():
    assert parse_poly("1/4*x^3 - 3/2*x^2 + 9/4*x") == to_poly(x * (x - 3) ** 2 / 4)
    assert parse_poly("x*t - 2") == to_poly(x * t - 2)
    assert parse_poly("-t^2") == to_poly(-t ** 2)


@pytest.mark.parametrize("text", ["", "x^^2", "2*x*x", "3*y", "1/0*x", "x**2"])
def test_parse_poly_rejects_malformed(text):
    with pytest.raises(InvalidInputError):
        parse_poly(text)


def test_fiber_profile_of_the_cubic():
    P = parse_poly("1/4*x^3 - 3/2*x^2 + 9/4*x")
    assert fiber_profile(P, 0) == [2, 1]
    assert fiber_profile(P, 1) == [2, 1]
    assert fiber_profile(P, Rational(1, 2)) == [1, 1, 1]


def test_covering_identities():
    families, maps = builtin_families(), builtin_maps()
    assert verify_covering_identity(families["S2"], maps["pi1"], families["E1"])
    assert verify_covering_identity(families["E1"], maps["iota"], families["base"])
    assert verify_covering_identity(families["S2"], maps["pi"], families["base"])
    assert not verify_covering_identity(families["S2"], maps["identity"], families["base"])


def test_composition():
    maps = builtin_maps()
    pi = compose_maps(maps["pi1"], maps["iota"])
    assert pi.P == to_poly((4 * x * (x - 1)) ** 2)


def test_target_cubic():
    families, maps = builtin_families(), builtin_maps()
    g = derive_target_cubic(families["L22"], maps["L22"])
    assert g is not None
    assert g.degree(x) == 3
    assert check_at_random_points(families["L22"], maps["L22"], g, count=10, seed=7)


def test_no_cubic_target():
    maps = builtin_maps()
    quintic = HyperellipticFamily("quintic", to_poly(x ** 5 - t))
    assert derive_target_cubic(quintic, maps["identity"]) is None


def test_singular_parameters_of_s2():
    singular = singular_parameters(builtin_families()["S2"])
    assert singular.rational_roots == [0, 1]


def test_maximal_degeneration_at_zero():
    assert degenerate_fiber_collapse(builtin_families()["S2"], 0) == 3


def test_verify_families():
    claims = verify_families()
    assert claims
    failed = [c.anchor for c in claims if not c.passed]
    assert failed == []
    anchors = [c.anchor for c in claims]
    assert "S2.singular-parameters" in anchors
    assert "L22.target-cubic" in anchors


def test_poly_to_text():
    assert poly_to_text(parse_poly("1/4*x^3 - 3/2*x^2 + 9/4*x")) == "1/4*x^3 - 3/2*x^2 + 9/4*x"
    assert poly_to_text(parse_poly("-t^2 + 1")) == "-t^2 + 1"
    assert poly_to_text(to_poly(0 * x)) == "0"
    for family in builtin_families().values():
        assert parse_poly(poly_to_text(family.f)) == family.f


def test_builtin_manifest_round_trip():
    manifest = builtin_manifest()
    data = manifest.to_json()
    rebuilt = FamilyManifest.from_text(
        data["families"],
        {name: (m["P"], m["R"]) for name, m in data["maps"].items()},
        [FamilyIdentity(**i) for i in data["identities"]],
    )
    for name, family in manifest.families.items():
        assert rebuilt.families[name].f == family.f
    for name, m in manifest.maps.items():
        assert (rebuilt.maps[name].P, rebuilt.maps[name].R) == (m.P, m.R)
    assert rebuilt.identities == manifest.identities
    claims = verify_families(rebuilt)
    assert [c.anchor for c in claims] == ["S2.pi1.E1", "E1.iota.base", "S2.pi.base", "L22.L22.target-cubic"]
    assert all(c.passed for c in claims)


def test_manifest_identity_can_fail():
    manifest = FamilyManifest.from_text(
        {"E": "x^3 - x", "F": "x^3 - x", "G": "x^3 + x"},
        {"id": ("x", "1")},
        [FamilyIdentity("E", "id", "F"), FamilyIdentity("E", "id", "G")],
    )
    claims = verify_families(manifest)
    assert [(c.anchor, c.passed) for c in claims] == [("E.id.F", True), ("E.id.G", False)]


def test_manifest_errors_name_the_entry():
    with pytest.raises(InvalidInputError, match="Family 'E'"):
        FamilyManifest.from_text({"E": "x^^2"}, {}, [])
    with pytest.raises(InvalidInputError, match="Map 'm'"):
        FamilyManifest.from_text({"E": "x^3 - x"}, {"m": ("x", "y")}, [])
    with pytest.raises(InvalidInputError, match="unknown map 'm'"):
        FamilyManifest.from_text({"E": "x^3 - x"}, {}, [FamilyIdentity("E", "m")])
