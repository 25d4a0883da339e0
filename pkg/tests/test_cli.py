import json
import subprocess
import sys

import pytest

from fermica import io
from fermica.circuits import CircuitError, synthesize
from fermica.classify import classify
from fermica.cli import main
from fermica.fca import Forking
from fermica.graded_algebra import X, Y, Z, identity


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def forking_file(tmp_path):
    p = tmp_path / "forking.json"
    p.write_text(io.dump_rule(Forking(0.3, 1).rule))
    return p


@pytest.mark.parametrize("name", sorted(io.BUILTINS))
def test_rule_round_trip_is_exact(name):
    rule = io.builtin(name).rule
    back = io.load_rule(io.dump_rule(rule))
    assert back.image_x.terms == rule.image_x.terms
    assert back.image_y.terms == rule.image_y.terms
    assert back.neighbourhood == rule.neighbourhood


def test_rule_file_errors():
    with pytest.raises(io.InputError):
        io.load_rule("{not json")
    with pytest.raises(io.InputError):
        io.load_rule(json.dumps({"neighbourhood": [0]}))
    with pytest.raises(io.InputError):
        io.load_rule(json.dumps({"neighbourhood": [0], "image_x": [{"coeff_re": 1}], "image_y": []}))


def test_parse_operator():
    assert io.parse_operator("X(0)") == X(0)
    assert io.parse_operator("X(0) Y(1)") == X(0) * Y(1)
    assert io.parse_operator("2 X(0)*Y(1) + 0.5i Z(2) - I") == 2 * X(0) * Y(1) + 0.5j * Z(2) - identity()
    assert io.parse_operator("(1+2j) X(-1)") == (1 + 2j) * X(-1)
    assert io.parse_operator("i Y(0) X(0)") == Z(0)
    for bad in ("", "X(0", "Q(1)", "X(0) +", "(X(0)"):
        with pytest.raises(io.InputError):
            io.parse_operator(bad)


def test_parse_params_and_window():
    assert io.parse_params("theta=pi/2,n=1") == {"theta": pytest.approx(1.5707963267948966), "n": 1}
    assert io.parse_window("-2..3").size == 6
    with pytest.raises(io.InputError):
        io.parse_window("3..1")
    with pytest.raises(io.InputError):
        io.builtin("forking", {"phi": 1.0})


def test_circuit_file_reverifies():
    rule = Forking(0.3, 1).rule
    c = synthesize(classify(Forking(0.3, 1)))
    data = json.loads(json.dumps(io.circuit_to_dict(c, rule)))
    back = io.circuit_from_dict(data)
    assert back.depth == 2
    # a tampered matrix entry no longer reproduces the rule
    row = data["layers"][1]["template"]["matrix"][0]
    data["layers"][1]["template"]["matrix"][0] = [[-re, -im] for re, im in row]
    with pytest.raises((CircuitError, io.InputError)):
        io.circuit_from_dict(data)


def test_validate(capsys, forking_file, tmp_path):
    assert run(capsys, "validate", str(forking_file))[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(
        json.dumps(
            {
                "neighbourhood": [0, 1],
                "image_x": [{"coeff_re": 1.0, "coeff_im": 0.0, "modes": [0]}],
                "image_y": [{"coeff_re": 1.0, "coeff_im": 0.0, "modes": [2]}],
            }
        )
    )
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1 and "overlap" in out
    mal = tmp_path / "mal.json"
    mal.write_text("{")
    assert run(capsys, "validate", str(mal))[0] == 2
    assert run(capsys, "validate", str(tmp_path / "missing.json"))[0] == 2


def test_index(capsys, tmp_path):
    code, out, _ = run(capsys, "index", "--builtin", "majorana-shift-plus", "--json")
    rep = json.loads(out)
    assert code == 0
    assert abs(rep["index"]["log2_num"]) == 1 and rep["index"]["log2_den"] == 2
    assert rep["schema"] == "fermica.report/1" and len(rep["inputs_digest"]) == 64
    code, out, _ = run(capsys, "index", "--builtin", "identity")
    assert code == 0 and out.startswith("ind = 1 ")
    cp = tmp_path / "cp.json"
    cp.write_text(io.dump_rule(io.builtin("controlled-phase", {"phi": 1.0}).rule))
    code, out, _ = run(capsys, "index", str(cp), "--json")
    assert json.loads(out)["index"] == {"log2_num": 0, "log2_den": 1}


def test_classify(capsys, forking_file):
    code, out, _ = run(capsys, "classify", str(forking_file), "--json")
    res = json.loads(out)["result"]
    assert code == 0 and res["family"] == "forking"
    assert res["params"]["n"] == 1 and abs(res["params"]["theta"] - 0.3) < 1e-9
    assert "image_x" in res["normal_form"]
    code, out, _ = run(capsys, "classify", "--builtin", "identity")
    assert code == 0 and out.startswith("local-conjugation")
    code, out, _ = run(capsys, "classify", "--builtin", "controlled-phase", "--params", "phi=1.0", "--json")
    assert abs(json.loads(out)["result"]["params"]["phi"] - 1.0) < 1e-9


def test_synthesize(capsys, forking_file, tmp_path):
    target = tmp_path / "circuit.json"
    code, _, _ = run(capsys, "synthesize", str(forking_file), "-o", str(target))
    assert code == 0
    data = json.loads(target.read_text())
    assert data["depth"] == 2
    assert all(len(layer["template"]["matrix"]) == 4 for layer in data["layers"])
    io.circuit_from_dict(data)
    code, out, err = run(capsys, "synthesize", "--builtin", "shift-plus")
    assert code == 1 and "index is equal to one" in err and "2^(" in err
    code, out, _ = run(capsys, "synthesize", "--builtin", "conjugation:theta=0.3,n=1")
    data = json.loads(out)
    assert code == 0 and data["depth"] == 1 and len(data["layers"][0]["template"]["matrix"]) == 2


def test_evolve(capsys):
    code, out, _ = run(capsys, "evolve", "--builtin", "majorana-shift-plus", "--op", "X(0)", "--steps", "2")
    assert code == 0 and out.strip() == repr(X(1))
    code, out, _ = run(capsys, "evolve", "--builtin", "identity", "--op", "X(0) Y(3) + 2 Z(1)", "--steps", "3")
    assert out.strip() == repr(X(0) * Y(3) + 2 * Z(1))
    code, out, _ = run(capsys, "evolve", "--builtin", "forking", "--op", "Z(0)")
    assert out.strip() == repr(-1j * Y(-1) * X(1))
    assert run(capsys, "evolve", "--builtin", "forking", "--op", "Z(0")[0] == 2
    assert run(capsys, "evolve", "--builtin", "forking", "--op", "X(0)", "--window", "0..1")[0] == 2


def test_equivalence(capsys, forking_file, tmp_path):
    code, out, _ = run(capsys, "equivalence", "--builtin", "forking", "--builtin", "identity", "--json")
    assert code == 0 and json.loads(out)["result"]["depth"] == 2
    code, out, _ = run(capsys, "equivalence", "--builtin", "shift-plus", "--builtin", "majorana-shift-plus", "--json")
    rep = json.loads(out)
    assert code == 1 and rep["result"]["equivalent"] is False
    assert abs(rep["index"]["log2_num"]) == 1 and rep["index"]["log2_den"] == 2
    code, out, _ = run(capsys, "equivalence", str(forking_file), str(forking_file), "--json")
    assert code == 0 and json.loads(out)["result"]["depth"] == 0


def test_usage_errors(capsys):
    assert run(capsys, "nonsense")[0] == 2
    assert run(capsys, "index")[0] == 2
    assert run(capsys, "index", "--builtin", "no-such-rule")[0] == 2


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "fermica", "index", "--builtin", "shift-minus"], capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("ind = 2^(1)")
