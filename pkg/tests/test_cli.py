import json
import subprocess
import sys
from fractions import Fraction as F

import pytest

from roughlab.cli import main
from roughlab.construct import SandwichCertificate
from roughlab.probe import LadderReport, WitnessReport


def run(argv, tmp_path, name="out.json"):
    out = tmp_path / name
    code = main(argv + ["--output", str(out)])
    return code, out.read_text() if out.exists() else None


def test_eval_takagi(tmp_path):
    code, text = run(["eval", "--fn", "takagi", "--x", "1/3"], tmp_path)
    assert code == 0 and json.loads(text)["value"] == "2/3"


def test_eval_domain_error(capsys):
    assert main(["eval", "--fn", "takagi", "--x", "3/2"]) == 1
    assert "3/2" in capsys.readouterr().err


def test_malformed_rational_names_token(capsys):
    assert main(["eval", "--fn", "takagi", "--x", "1/q"]) == 1
    assert "1/q" in capsys.readouterr().err


def test_unknown_key_rejected():
    assert main(["eval", "--fn", "takagi", "--x", "0", "--bogus", "1"]) == 1
    assert main(["nonsense"]) == 1


def test_decimal_input_is_exact(tmp_path):
    code, text = run(["eval", "--fn", "takagi", "--x", "0.25"], tmp_path)
    assert code == 0 and json.loads(text) == {"fn": "takagi", "value": "1/2", "x": "1/4"}


def test_rejected_margin_exit_two(tmp_path):
    code, text = run(["eval", "--fn", "margin", "--a", "1/2", "--b", "3"], tmp_path)
    assert code == 2 and json.loads(text)["rejected"] == "margin-nonpositive"


def test_witness_preset_round_trip(tmp_path):
    code, text = run(["witness", "--preset", "lemma-default", "--x", "1/2", "--m", "3"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    assert doc["verdict"] == "certified" and doc["m"] == 3
    rep = WitnessReport.from_json(doc)
    assert rep.x == F(1, 2)
    again = rep.to_json()
    assert all(doc[k] == again[k] for k in again)


def test_build_g_round_trip(tmp_path):
    code, text = run(["build-g", "--depth", "2", "--grid-level", "4"], tmp_path)
    assert code == 0
    doc = json.loads(text)
    cert = SandwichCertificate.from_json(doc)
    assert cert.valid
    again = cert.to_json()
    assert all(doc[k] == again[k] for k in again)


def test_ladder_formats(tmp_path):
    code, text = run(["ladder"], tmp_path)
    assert code == 0
    rep = LadderReport.from_json(json.loads(text))
    assert len(rep.samples) == 10
    code, csv_text = run(["ladder", "--format", "csv"], tmp_path, "out.csv")
    assert code == 0
    lines = csv_text.splitlines()
    assert lines[0] == "h_num,h_den,q_lo,q_hi" and len(lines) == 11
    assert lines[1].startswith("1,8,")


def test_perturb_reports_minimal_m(tmp_path):
    code, text = run(["perturb", "--slope-x", "5", "--eps-pert", "1", "--n", "2"], tmp_path)
    doc = json.loads(text)
    assert code == 0 and doc["m"] == 43 and doc["ok"]


def test_lipschitz_none_found_for_identity(tmp_path):
    code, text = run(["lipschitz", "--fn", "identity", "--x", "1/2", "--M", "2"], tmp_path)
    assert code == 0 and json.loads(text)["found"] is False


@pytest.mark.parametrize("argv", [
    ["ladder"],
    ["perturb", "--random-cells", "2", "--seed", "11", "--n", "3"],
    ["banach", "--n", "1"],
    ["glue", "--count", "3"],
    ["extend", "--depth", "2"],
    ["family", "--depth", "2", "--grid-level", "4"],
])
def test_byte_determinism_across_processes(argv, tmp_path):
    outs = []
    for k in range(2):
        path = tmp_path / f"run{k}.json"
        subprocess.run([sys.executable, "-m", "roughlab", *argv, "--output", str(path)], check=True)
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
