import json
import subprocess
import sys

import pytest

from losrcert.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def ghz_file(tmp_path, capsys):
    path = tmp_path / "ghz.json"
    assert run(capsys, "oracle", "--family", "ghz", "--noise", "1", "--out", str(path))[0] == 0
    return path


def test_inflations_listing(capsys):
    code, out, _ = run(capsys, "inflations", "--n", "4", "--order", "2")
    assert code == 0 and "6 classes" in out
    assert "multiplicity 12 raw wirings 96" in out


def test_oracle_writes_exact_values(ghz_file):
    data = json.loads(ghz_file.read_text())
    assert data["mode"] == "rational"
    assert any("sqrt2" in v for v in json.dumps(data).split('"'))


def test_certify_k1_feasible(ghz_file, capsys):
    code, out, _ = run(capsys, "certify", "--behavior", str(ghz_file), "--order", "1", "--exact")
    assert code == 0 and json.loads(out)["verdict"] == "feasible"


def test_demo_shared_bit(capsys):
    code, out, _ = run(capsys, "demo", "shared-bit", "--n", "3")
    data = json.loads(out)
    assert code == 2 and data["verdict"] == "infeasible"
    assert data["witness_value"]["exact"] == "2/1"


def test_eval_ghz(ghz_file, capsys):
    code, out, _ = run(capsys, "eval", "--inequality", "ghz", "--behavior", str(ghz_file))
    data = json.loads(out)
    assert code == 0 and data["slack"]["exact"] == "-2/1+2/1*sqrt2"


def test_eval_w_bkp(tmp_path, capsys):
    path = tmp_path / "w.json"
    run(capsys, "oracle", "--family", "w", "--m", "4", "--out", str(path))
    code, out, _ = run(capsys, "eval", "--inequality", "bkp", "--m", "4", "--behavior", str(path),
                       "--conditioned")
    assert code == 0 and abs(json.loads(out)["i_bkp"] - 0.3045) < 1e-4


def test_bad_file_is_parse_error(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text('{"format": "losrcert-behavior/1",\n "parties": [}\n')
    code, _, err = run(capsys, "eval", "--inequality", "ghz", "--behavior", str(path))
    assert code == 1 and "parse error" in err and "line" in err


def test_missing_file_and_bad_args(tmp_path, capsys):
    assert run(capsys, "eval", "--inequality", "ghz", "--behavior", str(tmp_path / "nope.json"))[0] == 1
    assert run(capsys, "oracle", "--family", "ghz", "--noise", "2")[0] == 1
    assert run(capsys, "frobnicate")[0] == 1


def test_verify_rejects_foreign_certificate(tmp_path, ghz_file, capsys):
    cert = tmp_path / "c.json"
    assert run(capsys, "demo", "shared-bit")[0] == 2
    from losrcert.certify import solve_feasibility
    from losrcert.constraints import shared_bit_system
    from losrcert.io import write_certificate
    write_certificate(str(cert), solve_feasibility(shared_bit_system(3)).certificate)
    code, _, err = run(capsys, "verify", "--cert", str(cert), "--behavior", str(ghz_file), "--order", "1")
    assert code == 1 and "error" in err


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "losrcert", "demo", "shared-bit", "--n", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 2 and json.loads(r.stdout)["witness_value"]["exact"] == "5/2"
