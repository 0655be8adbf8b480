import json

import pytest

from hopda.cli import run_command
from hopda.textio import load_machine
from conftest import CORPUS


def run(capsys, *argv):
    code = run_command([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_decide_anbn(capsys):
    code, out, _ = run(capsys, "decide", "--chars", "c1,c2", CORPUS / "anbn.hopda")
    assert code == 0 and out.startswith("unbounded")


def test_decide_json_roundtrip(capsys):
    code, out, _ = run(capsys, "decide", "--chars", "c1,c2", "--json", CORPUS / "anbn.hopda")
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "unbounded" and rep["chars"] == ["c1", "c2"]
    assert json.loads(json.dumps(rep, sort_keys=True)) == rep
    orders = [lv["order"] for lv in rep["levels"]]
    assert orders == sorted(orders, reverse=True) and orders[-1] == 0


def test_decide_is_deterministic(capsys):
    outs = [run(capsys, "decide", "--chars", "c1", "--json", CORPUS / "exp2.hopda")[1] for _ in range(2)]
    assert outs[0] == outs[1]


def test_timing_only_on_request(capsys):
    _, out, _ = run(capsys, "decide", "--chars", "c1", "--json", "--timing", CORPUS / "star_union.hopda")
    assert all("seconds" in lv for lv in json.loads(out)["levels"])
    _, out, _ = run(capsys, "decide", "--chars", "c1", "--json", CORPUS / "star_union.hopda")
    assert not any("seconds" in lv for lv in json.loads(out)["levels"])


def test_unknown_char_is_input_error(capsys):
    code, _, err = run(capsys, "decide", "--chars", "c7", CORPUS / "anbn.hopda")
    assert code == 1 and "c7" in err


def test_missing_file_and_usage(capsys, tmp_path):
    assert run(capsys, "decide", "--chars", "c1", tmp_path / "nope.hopda")[0] == 1
    assert run(capsys, "decide", CORPUS / "anbn.hopda")[0] == 1
    bad = tmp_path / "bad.hopda"
    bad.write_text("order 1; rule q a;")
    code, _, err = run(capsys, "decide", "--chars", "c1", bad)
    assert code == 1 and "line 1" in err


def test_budget_abort(capsys):
    code, _, err = run(capsys, "decide", "--chars", "c1", "--budget-saturation", "5", CORPUS / "exp2.hopda")
    assert code == 2 and "order-2" in err


def test_enumerate_depth_zero(capsys):
    code, out, _ = run(capsys, "enumerate", "--depth", "0", CORPUS / "anbn.hopda")
    assert code == 0 and out.strip() == "(none)"


def test_enumerate_json(capsys):
    code, out, _ = run(capsys, "enumerate", "--depth", "20", "--cap", "3", "--raw", "--json", CORPUS / "anbn.hopda")
    assert json.loads(out)["vectors"] == [[1, 1], [2, 2], [3, 3]]


def test_reduce_writes_machine(capsys, tmp_path):
    dst = tmp_path / "r.hopda"
    code, _, err = run(capsys, "reduce", "--levels", "1", "-o", dst, CORPUS / "exp2.hopda")
    assert code == 0 and json.loads(err)["order"] == 1
    assert load_machine(dst).order == 1


def test_linearize(capsys):
    code, out, _ = run(capsys, "linearize", CORPUS / "loop0.hopda")
    assert code == 0 and "initial" in out
    assert run(capsys, "linearize", CORPUS / "anbn.hopda")[0] == 1
    assert run(capsys, "linearize", "--reduce", CORPUS / "anbn.hopda")[0] == 0


def test_prestar_dump(capsys):
    code, out, _ = run(capsys, "prestar", CORPUS / "anbn.hopda")
    assert code == 0 and "states" in out


def test_nfa_diagonal(capsys, tmp_path):
    f = tmp_path / "n.nfa"
    f.write_text("initial p; final q; trans p c1 p; trans p eps q; trans q c2 q;")
    code, out, _ = run(capsys, "nfa-diagonal", "--chars", "c1,c2", "--json", f)
    assert code == 0 and json.loads(out)["holds"]
    assert run(capsys, "nfa-diagonal", "--chars", "c3", f)[0] == 1


def test_score(capsys, tmp_path):
    f = tmp_path / "t.tree"
    f.write_text("(eps (c (c (c (eps)))) (c (c (eps))))")
    code, out, _ = run(capsys, "score", "--char", "c", "--json", f)
    assert code == 0 and json.loads(out) == {"char": "c", "score": 4, "count": 5}


@pytest.mark.parametrize("name", ["finite", "mixed"])
def test_bounded_verdicts(capsys, name):
    code, out, _ = run(capsys, "decide", "--chars", "c1,c2", CORPUS / f"{name}.hopda")
    assert code == 0 and out.startswith("bounded")
