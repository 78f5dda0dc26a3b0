import json

import pytest

from superjet.cli import main

A3 = """[frobenius]
potential = 1/2*u1_0^2*u3_0 + 1/2*u1_0*u2_0^2 + {a}*u2_0^2*u3_0^2 + {b}*u3_0^5
euler = 1, 3/4, 1/2
charge = 1/2
"""


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_schouten_builtin_pairs(capsys):
    code, out, _ = run(capsys, "schouten", "--format", "json")
    assert code == 0
    rep = json.loads(out)
    assert rep["schema"] == 1 and rep["verb"] == "schouten" and rep["ok"] is True
    assert len(rep["checks"]) == 6
    assert all(c["pass"] and c["value"] == "0" for c in rep["checks"].values())


def test_schouten_two_arguments(capsys):
    code, out, _ = run(capsys, "schouten", "--format", "json", "1/2*u1_0*th1_0*th1_1", "1/2*u1_0*th1_0*th1_1")
    assert code == 0
    assert json.loads(out)["zero"] is True
    code, out, _ = run(capsys, "schouten", "--format", "json", "u1_0^3", "1/2*th1_0*th1_1")
    assert json.loads(out)["zero"] is False


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["schouten", "u1_0"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["verify-example", "nope"])
    assert exc.value.code == 2
    capsys.readouterr()


def test_parse_error_exit_code(capsys):
    code, _, err = run(capsys, "schouten", "u1_0 +", "th1_0")
    assert code == 10
    assert "ParseSyntaxError" in err


def test_missing_file(capsys, tmp_path):
    code, _, err = run(capsys, "wdvv-check", str(tmp_path / "absent.frob"))
    assert code == 34
    code, out, _ = run(capsys, "wdvv-check", "--format", "json", str(tmp_path / "absent.frob"))
    assert code == 34


def test_wdvv_pass_and_fail(capsys, tmp_path):
    good = tmp_path / "a3.frob"
    good.write_text(A3.format(a="1/4", b="1/60"))
    bad = tmp_path / "bad.frob"
    bad.write_text(A3.format(a="1", b="1"))
    code, out, _ = run(capsys, "wdvv-check", "--format", "json", str(good))
    assert code == 0 and json.loads(out)["mu"] == ["-1/4", "0", "1/4"]
    code, out, _ = run(capsys, "wdvv-check", str(bad))
    assert code == 1
    assert out.startswith("FAIL  wdvv")


def test_kdv_super(capsys):
    code, out, _ = run(capsys, "kdv-super", "--format", "json")
    rep = json.loads(out)
    assert code == 0 and rep["ok"]
    assert rep["flows"]["t"]["u1_0"] == "u1_0*u1_1 + 1/12*eps^2*u1_3"


def test_virasoro_ops_b2(capsys):
    code, out, _ = run(capsys, "virasoro-ops", "--format", "json", "--cutoff", "6")
    assert code == 0
    assert json.loads(out)["ok"]


def test_virasoro_solve_symbolic_and_special(capsys):
    code, out, _ = run(capsys, "virasoro-solve-1d", "--format", "json")
    rep = json.loads(out)
    assert code == 0
    assert rep["linearizable"] is None
    assert rep["linearizability_conditions"] == ["3*c - 3/8 = 0"]
    code, out, _ = run(capsys, "virasoro-solve-1d", "--format", "json", "--c", "1/8")
    rep = json.loads(out)
    assert rep["O2"] == "0" and rep["linearizable"] is True


@pytest.mark.parametrize("name", ["kdv", "kdv-family", "b2", "virasoro-1d"])
def test_verify_example(capsys, name):
    code, out, _ = run(capsys, "verify-example", name)
    assert code == 0
    assert "FAIL" not in out


def test_output_is_deterministic(capsys, tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    assert main(["virasoro-solve-1d", "--out", str(a)]) == 0
    assert main(["virasoro-solve-1d", "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    capsys.readouterr()
