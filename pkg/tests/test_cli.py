import io
import json

from derivator import cli


def call(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_homology_of_inline_complex():
    code, out, _ = call("homology", "--complex", '{"ranks": {"-1": 1, "0": 1}, "diffs": {"-1": [[2]]}}')
    assert code == 0
    doc = json.loads(out)
    assert doc["homology"]["0"]["text"] == "Z/2"
    assert doc["homology"]["0"]["torsion"] == [2]


def test_group_cohomology_both_routes():
    code, out, _ = call("group-cohomology", "--group", "C2", "--max-degree", "3", "--method", "both")
    assert code == 0
    doc = json.loads(out)
    assert doc["table"]["bar"] == ["Z", "0", "Z/2", "0"]
    assert doc["table"]["resolution"] == doc["table"]["bar"]


def test_group_homology_sign_rep():
    code, out, _ = call("group-cohomology", "--group", "S3", "--module", "sign", "--homology",
                        "--max-degree", "1")
    assert code == 0
    # H_1: C2 inverts H_1(C3) = Z/3 and the sign undoes it; the 2-part dies on restriction
    assert json.loads(out)["table"]["bar"] == ["Z/2", "Z/3"]


def test_table_format():
    code, out, _ = call("group-cohomology", "--group", "C3", "--max-degree", "2", "--format", "table")
    assert code == 0
    assert "bar: Z, 0, Z/3" in out


def test_local_cohomology():
    code, out, _ = call("local-cohomology", "--Y", "2", "--module", "Z/8", "--degree", "0")
    assert code == 0
    doc = json.dumps(json.loads(out))
    assert "Z/8" in doc and "stabilized" in doc


def test_lhs_command():
    code, out, _ = call("lhs", "--group", "C4", "--subgroup", "C2", "--pmax", "4")
    assert code == 0
    doc = json.loads(out)
    assert doc["E2_matches_direct"]
    assert not doc["degenerates_at_E2"]


def test_check_derivator_is_deterministic():
    a = call("check-derivator", "--suite", "der4", "--seed", "7", "--trials", "5")
    b = call("check-derivator", "--suite", "der4", "--seed", "7", "--trials", "5")
    assert a[0] == 0 and a == b
    assert json.loads(a[1])["passed"] == 5


def test_kan_and_rectify():
    code, out, _ = call("kan", "--functor", "BC2->e", "--ring", "Z", "--seed", "3")
    assert code == 0
    assert "certified_window" in json.loads(out)
    code, out, _ = call("rectify", "--seed", "2", "--trials", "2")
    assert code == 0


def test_input_errors_exit_one():
    assert call("group-cohomology", "--group", "A5")[0] == 1
    assert call("homology", "--complex", "{not json")[0] == 1
    assert call("kan", "--functor", "nope")[0] == 1
    assert call("suite", "--only", "nope")[0] == 1
    assert call("no-such-command")[0] == 1
    code, _, err = call("lhs", "--group", "S3", "--subgroup", "C2")
    assert code == 1 and "error" in err


def test_failed_check_exits_two(monkeypatch):
    def broken(seed, trials):
        return {"suite": "x", "seed": seed, "trials": 1, "passed": 0, "failed": 1, "results": [],
                "counterexamples": [{}]}
    monkeypatch.setitem(cli.SUITES, "der4", broken)
    assert call("check-derivator", "--suite", "der4")[0] == 2
