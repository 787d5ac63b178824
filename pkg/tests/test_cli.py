import json

import pytest

from app.cli import EXIT_FAILED, EXIT_OK, EXIT_USAGE, run


def _json(capsys):
    return json.loads(capsys.readouterr().out)


def test_veech_on_s2(capsys):
    assert run(["veech", "S2"]) == EXIT_OK
    report = _json(capsys)
    assert report["index"] == 6
    assert report["equals_gamma2"] is True
    assert sorted(c["width"] for c in report["cusps"]) == [2, 2, 2]


def test_invariants_text_format(capsys):
    assert run(["--format", "text", "invariants", "L22"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "genus: 2" in out
    assert "stratum: H(2)" in out
    # one corner class holding all three squares
    assert "commutator: (" in out
    assert out.split("commutator: ")[1].split("\n")[0].count(" ") == 2


def test_cylinders_direction(capsys):
    assert run(["cylinders", "S2", "--direction", "0/1"]) == EXIT_OK
    report = _json(capsys)
    assert report["direction"] == "0/1"
    assert report["count"] == 3


def test_same_curve(tmp_path, capsys):
    other = tmp_path / "l22b.json"
    other.write_text(json.dumps({"d": 3, "h": [[1, 2, 3]], "v": [[1, 2]]}))
    assert run(["same-curve", "L22", str(other)]) == EXIT_OK
    assert _json(capsys)["same_orbit"] is True


def test_validate_rejects_disconnected_origami(tmp_path, capsys):
    path = tmp_path / "split.json"
    path.write_text(json.dumps({"d": 2, "h": [], "v": []}))
    assert run(["validate", str(path)]) == EXIT_USAGE
    assert "transitively" in capsys.readouterr().err


def test_validate_names_the_missing_field(tmp_path, capsys):
    path = tmp_path / "partial.json"
    path.write_text(json.dumps({"d": 2, "h": [[1, 2]]}))
    assert run(["validate", str(path)]) == EXIT_USAGE
    assert "'v'" in capsys.readouterr().err


def test_malformed_json(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    assert run(["validate", str(path)]) == EXIT_USAGE
    assert "Malformed JSON" in capsys.readouterr().err


def test_usage_errors(capsys):
    assert run(["frobnicate"]) == EXIT_USAGE
    assert run([]) == EXIT_USAGE
    assert run(["--orbit-bound", "0", "builtins"]) == EXIT_USAGE
    assert run(["validate", "no-such-origami"]) == EXIT_USAGE


def test_orbit_bound_exceeded(capsys):
    assert run(["--orbit-bound", "2", "veech", "S2"]) == EXIT_USAGE
    assert "exceeds bound" in capsys.readouterr().err


def test_builtins(capsys):
    assert run(["builtins"]) == EXIT_OK
    names = _json(capsys)["builtins"]
    assert names["S2"] == "origami"
    assert names["dessin6"] == "dessin"
    assert names["S2-ledger"] == "ledger"


def test_from_dessin_and_fingerprint(tmp_path, capsys):
    assert run(["from-dessin", "dessin4"]) == EXIT_OK
    report = _json(capsys)
    assert report["origami"]["d"] == 16
    assert report["riemann_hurwitz"]["origami"]["consistent"]
    assert all(row["passed"] for row in report["strip_doubling"].values())

    path = tmp_path / "origami16.json"
    path.write_text(json.dumps(report["origami"]))
    assert run(["fingerprint", str(path), "--source-degree", "4"]) == EXIT_OK
    fingerprint = _json(capsys)
    assert fingerprint["degree"] == 16
    assert fingerprint["stratum"] == "H(1,1)"
    assert sorted(fingerprint["dessin_check"]["counts"].values()) == [1, 2, 3]
    assert fingerprint["dessin_check"]["passed"]


def test_fingerprint_failure_exits_failed(tmp_path, capsys):
    assert run(["from-dessin", "dessin6"]) == EXIT_OK
    report = _json(capsys)
    path = tmp_path / "origami24.json"
    path.write_text(json.dumps(report["origami"]))
    assert run(["fingerprint", str(path), "--source-degree", "6"]) == EXIT_FAILED
    assert "miss the value 1" in capsys.readouterr().err


def test_verify_families(capsys):
    assert run(["verify-families"]) == EXIT_OK
    assert _json(capsys)["passed"] is True


def test_verify_families_manifest(tmp_path, capsys):
    manifest = {
        "families": {"E": "x^3 - x", "G": "x^3 + x"},
        "maps": {"id": {"P": "x", "R": "1"}},
        "identities": [{"source": "E", "map": "id", "target": "E"}],
    }
    path = tmp_path / "families.json"
    path.write_text(json.dumps(manifest))
    assert run(["verify-families", "--manifest", str(path)]) == EXIT_OK
    report = _json(capsys)
    assert report["source"] == "manifest"
    assert [c["anchor"] for c in report["claims"]] == ["E.id.E"]

    manifest["identities"].append({"source": "E", "map": "id", "target": "G"})
    path.write_text(json.dumps(manifest))
    assert run(["verify-families", "--manifest", str(path)]) == EXIT_FAILED
    assert "FAILED: E.id.G" in capsys.readouterr().err


def test_verify_gt_failure_names_the_anchor(tmp_path, capsys):
    path = tmp_path / "broken.ledger"
    path.write_text("level broken\ngroup braid 3\nequation power\nlhs pow tau1^2 : rho\n")
    assert run(["verify-gt", "--ledger", str(path)]) == EXIT_FAILED
    captured = capsys.readouterr()
    assert "FAILED: broken/power" in captured.err
    assert json.loads(captured.out)["passed"] is False


def test_verify_gt_missing_ledger(capsys):
    assert run(["verify-gt", "--ledger", "no-such-ledger"]) == EXIT_USAGE


@pytest.mark.parametrize("fmt", ["json", "text"])
def test_reports_are_deterministic(capsys, fmt):
    run(["--format", fmt, "veech", "L22"])
    first = capsys.readouterr().out
    run(["--format", fmt, "veech", "L22"])
    assert capsys.readouterr().out == first
