import csv
import json
from pathlib import Path

import numpy as np
import pytest

from arcgas.cli import main

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


def write(path, obj):
    path.write_text(json.dumps(obj))
    return str(path)


@pytest.mark.parametrize("name", ["interval", "half_circle", "perturbed"])
def test_analyze(tmp_path, name):
    out = tmp_path / name
    assert main(["analyze", "--arc", str(CONFIGS / f"{name}.json"), "--out", str(out)]) == 0
    doc = json.loads((out / "report.json").read_text())
    assert set(doc["report"]["route_agreement"].values()) == {"PASS"}
    assert doc["manifest"]["arc_hash"]
    assert "timestamp" not in doc["manifest"]


def test_analyze_rerun_is_byte_identical(tmp_path):
    texts = []
    for i in range(3):
        main(["analyze", "--arc", str(CONFIGS / "perturbed.json"), "--out", str(tmp_path / str(i))])
        texts.append((tmp_path / str(i) / "report.json").read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_predict_half_circle(tmp_path):
    arc = str(CONFIGS / "half_circle.json")
    assert main(["predict", "--arc", arc, "--beta", "2", "--out", str(tmp_path / "b2")]) == 0
    rep = json.loads((tmp_path / "b2" / "prediction.json").read_text())["report"]
    assert rep["constant"] == pytest.approx(np.log(2) / 8, abs=1e-8)
    assert main(["predict", "--arc", arc, "--beta", "4", "--u", "1,0,0.5",
                 "--out", str(tmp_path / "b4")]) == 0
    rep = json.loads((tmp_path / "b4" / "prediction.json").read_text())["report"]
    assert rep["constant"] == pytest.approx(rep["JA"] / 24 + rep["JF"] / 16, abs=1e-12)
    assert rep["constant"] == pytest.approx(np.log(2) / 16, abs=1e-8)
    assert rep["clt_variance"] > 0


def test_usage_errors(tmp_path):
    assert main(["analyze", "--arc", str(tmp_path / "missing.json")]) == 1
    assert main(["predict", "--arc", str(CONFIGS / "interval.json"), "--beta", "-1"]) == 1
    bad = write(tmp_path / "bad.json", {"family": "circular", "alpha": 4.0})
    assert main(["analyze", "--arc", bad]) == 1
    assert main(["verify", "--suite", "nonsense"]) == 1
    assert main(["nonsense"]) == 1
    params = write(tmp_path / "p.json", {"mode": "chain"})
    assert main(["simulate", "--params", params, "--out", str(tmp_path / "o")]) == 1
    params = write(tmp_path / "q.json", {"mode": "other", "n": 4})
    assert main(["simulate", "--params", params, "--out", str(tmp_path / "o")]) == 1


def test_verify_closed_forms(tmp_path):
    assert main(["verify", "--suite", "closed-forms", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "verify-closed-forms.json").read_text())
    assert doc["failures"] == 0
    assert all(c["passed"] for c in doc["checks"])


def test_verify_exit_code_counts_failures(monkeypatch):
    from arcgas import cli
    from arcgas.verification import Check
    fake = [Check("a", "1", 0, 0, 0, False), Check("b", "1", 0, 0, 0, True), Check("c", "1", 0, 0, 0, False)]
    monkeypatch.setattr(cli, "run_suite", lambda name: fake)
    assert main(["verify", "--suite", "closed-forms"]) == 4


def test_simulate_chain_deterministic(tmp_path):
    outs = []
    for i in range(3):
        out = tmp_path / str(i)
        assert main(["simulate", "--params", str(CONFIGS / "chain.json"), "--sweeps", "640",
                     "--out", str(out)]) == 0
        outs.append(((out / "summary.json").read_bytes(), (out / "series.csv").read_bytes()))
    assert outs[0] == outs[1] == outs[2]
    rows = list(csv.DictReader((tmp_path / "0" / "series.csv").read_text().splitlines()))
    assert len(rows) == 640 and "linear" in rows[0]
    summary = json.loads(outs[0][0])
    assert summary["manifest"]["settings"]["sweeps"] == 640
    main(["simulate", "--params", str(CONFIGS / "chain.json"), "--sweeps", "640", "--seed", "2",
          "--out", str(tmp_path / "other")])
    assert (tmp_path / "other" / "series.csv").read_bytes() != outs[0][1]


def test_simulate_thermo_csv(tmp_path):
    params = write(tmp_path / "t.json", {"mode": "thermo", "arc": {"family": "circular", "alpha": 1.2},
                                         "n": 8, "beta": 2.0, "sweeps": 640, "burn_in": 100, "nodes": 4})
    assert main(["simulate", "--params", params, "--out", str(tmp_path / "o")]) == 0
    rows = list(csv.DictReader((tmp_path / "o" / "thermo_nodes.csv").read_text().splitlines()))
    assert len(rows) == 4
    assert set(rows[0]) >= {"s", "weight", "b_prime", "se"}
    thermo = json.loads((tmp_path / "o" / "summary.json").read_text())["thermo"]
    assert abs(thermo["estimate"] - thermo["exact_beta2"]) < max(0.1, 6 * thermo["se"])


def test_simulate_clt(tmp_path):
    params = write(tmp_path / "c.json", {"mode": "clt", "n": 20, "sweeps": 640, "burn_in": 100,
                                         "chains": 2, "u": [1.0]})
    assert main(["simulate", "--params", params, "--out", str(tmp_path / "o")]) == 0
    clt = json.loads((tmp_path / "o" / "summary.json").read_text())["clt"]
    assert clt["chains"] == 2 and clt["predicted_variance"] == pytest.approx(0.25)
