import json
import subprocess
import sys

import pytest

from idealrpp.cli import run
from idealrpp.experiments import RunRecord
from idealrpp.rpp import pair_instance

BASE = pair_instance((2, 2), (2, 2), (10, 10))


@pytest.fixture
def base_file(tmp_path):
    p = tmp_path / "pair.json"
    p.write_text(BASE.dumps())
    return p


def test_not_ideal_writes_witness(base_file, tmp_path, capsys):
    out = tmp_path / "w.json"
    rep = tmp_path / "r.json"
    assert run(["check-ideal", "--kind", "SBL", "--instance", str(base_file), "--out", str(out),
                "--report", str(rep)]) == 3
    wit = json.loads(out.read_text())
    assert wit["phi"] != "0"
    assert json.loads(rep.read_text())["ideal"] is False
    assert "not ideal" in capsys.readouterr().out


def test_ideal_exits_zero(base_file, tmp_path):
    out = tmp_path / "w.json"
    assert run(["check-ideal", "--kind", "su", "--instance", str(base_file), "--out", str(out)]) == 0
    assert not out.exists()


def test_negated_union_witness(base_file, tmp_path):
    out = tmp_path / "w.json"
    assert run(["witness", "--kind", "NU", "--instance", str(base_file), "--out", str(out)]) == 3
    assert json.loads(out.read_text())["phi"] == "4/5"


def test_circuits_for_split_model(base_file, tmp_path):
    out = tmp_path / "c.json"
    assert run(["circuits", "--kind", "SBL", "--instance", str(base_file), "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert data["circuits"] and all(len(c["rows"]) == len(c["multipliers"]) for c in data["circuits"])


def test_verify_lemmas_on_pair(base_file, capsys):
    assert run(["verify-lemmas", "--lemma", "L3", "--instance", str(base_file)]) == 0
    out = capsys.readouterr().out
    assert "L3.1.A       pass" in out and "fail" not in out


def test_build_iom_writes_lp(base_file, tmp_path):
    out = tmp_path / "iom.lp"
    sep = tmp_path / "sep.lp"
    assert run(["build-iom", "--kind", "SU", "--instance", str(base_file), "--out", str(out),
                "--separation", str(sep)]) == 0
    assert out.read_text().startswith("\\") and "Binaries" in sep.read_text()


def test_gen_greedy_export_round(tmp_path, capsys):
    d = tmp_path / "insts"
    assert run(["gen", "--n", "4", "--seed", "3", "--count", "2", "--out-dir", str(d)]) == 0
    files = sorted(d.iterdir())
    assert len(files) == 2
    lay = tmp_path / "lay.json"
    assert run(["greedy", "--instance", str(files[0]), "--out", str(lay)]) == 0
    assert len(json.loads(lay.read_text())["centers"]) == 4
    mps = tmp_path / "m.mps"
    hints = tmp_path / "h.json"
    assert run(["export", "--kind", "HU", "--instance", str(files[0]), "--format", "mps", "--cuts", "spu",
                "--warm", "--priorities", "--hints", str(hints), "--out", str(mps)]) == 0
    assert mps.read_text().rstrip().endswith("ENDATA")
    assert "start" in json.loads(hints.read_text())


def test_summarize(tmp_path, capsys):
    recs = tmp_path / "runs.json"
    recs.write_text(json.dumps([RunRecord("SU", 10, runtime=2.0).to_json(),
                                RunRecord("RU", 10, gap=1.5).to_json()]))
    table = tmp_path / "t.json"
    assert run(["summarize", "--records", str(recs), "--json", str(table)]) == 0
    assert "2.0s" in capsys.readouterr().out
    assert json.loads(table.read_text())["columns"] == ["SU", "RU"]


def test_usage_error_exits_two():
    with pytest.raises(SystemExit) as exc:
        run(["check-ideal", "--kind", "XX", "--instance", "none.json"])
    assert exc.value.code == 2


def test_domain_error_exits_one(tmp_path, capsys):
    p = tmp_path / "t.json"
    p.write_text(pair_instance((0, 2), (0, 2), (10, 10)).dumps())
    assert run(["check-ideal", "--kind", "SU", "--instance", str(p)]) == 1
    assert "error" in capsys.readouterr().err
    assert run(["greedy", "--instance", str(tmp_path / "missing.json")]) == 1


def test_module_entry_point(base_file):
    res = subprocess.run([sys.executable, "-m", "idealrpp", "check-ideal", "--kind", "SU",
                          "--instance", str(base_file)], capture_output=True, text=True)
    assert res.returncode == 0 and "ideal" in res.stdout
