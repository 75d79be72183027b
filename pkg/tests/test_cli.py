import csv
import json
import subprocess
import sys

import pytest

from frozen import FROZEN
from qkd_rng_audit import rng_models
from qkd_rng_audit.cli import main, parse_dist, parse_grid


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def as_json(capsys, *argv):
    code, out, _ = run(capsys, *argv, "--format", "json")
    return code, json.loads(out)


@pytest.mark.parametrize(
    "spec, deficit",
    [
        ("iid_bias:b=0.5,omega=8", 0.0),
        ("iid_bias:b=0.25,omega=8", FROZEN["deficit_b025_w8"]),
        ("point:atom=0110", 4.0),
    ],
)
def test_entropy_command(capsys, spec, deficit):
    code, rec = as_json(capsys, "entropy", "--dist", spec)
    assert code == 0
    assert rec["deficit"] == pytest.approx(deficit, abs=1e-12)
    assert rec["config"]["dist"] == spec


def test_entropy_from_file(capsys, tmp_path):
    path = tmp_path / "law.json"
    path.write_text(rng_models.dumps(rng_models.markov(6, 0.5, [[0.9, 0.1], [0.1, 0.9]])))
    code, rec = as_json(capsys, "entropy", "--dist", str(path))
    assert code == 0 and rec["kind"] == "markov" and rec["omega"] == 6


def test_text_output_digits(capsys):
    code, out, _ = run(capsys, "entropy", "--dist", "iid_bias:b=0.25,omega=8")
    assert "deficit: 1.509775\n" in out
    code, out, _ = run(capsys, "entropy", "--dist", "iid_bias:b=0.25,omega=8", "--digits", "4")
    assert "deficit: 1.51\n" in out


@pytest.mark.parametrize("spec", ["iid_bias:b=2,omega=4", "gauss:mu=0", "iid_bias:b", "{broken json"])
def test_bad_distribution_exit_codes(capsys, spec):
    code, _, err = run(capsys, "entropy", "--dist", spec)
    assert code in (2, 3) and err


def test_missing_file_is_io_error(capsys, tmp_path):
    code, _, err = run(capsys, "entropy", "--dist", str(tmp_path / "nope.json"))
    assert code == 4


def test_bound_command(capsys):
    code, rec = as_json(capsys, "bound", "--k", "1", "--epsA", "2e-6")
    assert code == 0
    assert rec["leading"] == pytest.approx(FROZEN["leading_k1"], rel=1e-12)
    assert rec["exact"] == pytest.approx(FROZEN["exact_k1"], rel=1e-8)
    code, rec = as_json(capsys, "bound", "--k", "4", "--eps0", "0.01", "--epsA", "0")
    assert rec["leading"] == rec["exact"] == 0.01


def test_format_defaults_are_per_command(capsys):
    code, out, _ = run(capsys, "bound", "--k", "1", "--epsA", "0")
    assert '"format": "text"' in out.splitlines()[0]
    code, out, _ = run(capsys, "sweep", "--epsA", "0")
    assert out.startswith("# config: ") and '"format": "csv"' in out.splitlines()[0]


def test_single_record_csv(capsys):
    code, out, _ = run(capsys, "bound", "--k", "1", "--epsA", "2e-6", "--format", "csv")
    lines = out.splitlines()
    assert code == 0 and lines[0].startswith("# config: ")
    (row,) = csv.DictReader(lines[1:])
    assert float(row["leading"]) == pytest.approx(FROZEN["leading_k1"], rel=1e-8)


def test_bound_vacuous_and_saturated(capsys):
    code, rec = as_json(capsys, "bound", "--k", "128", "--epsA", "0.2")
    assert code == 0 and rec["vacuous"]
    code, out, err = run(capsys, "bound", "--k", "2", "--epsA", "3")
    assert code == 3 and "saturated" in err


def test_sweep_csv(capsys, tmp_path):
    out = tmp_path / "sweep.csv"
    code, _, _ = run(capsys, "sweep", "--k", "64", "--epsA", "logspace:1e-8:1e-2:13", "--out", str(out))
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# config: ")
    rows = list(csv.DictReader(lines[1:]))
    assert len(rows) == 13
    leading = [float(r["leading"]) for r in rows]
    exact = [float(r["exact"]) for r in rows]
    assert leading == sorted(leading) and exact == sorted(exact)


def test_sweep_deterministic_bytes(capsys, tmp_path):
    args = ["sweep", "--k", "8,64", "--eps0", "0,0.1", "--epsA", "1e-6,1e-3", "--epsB", "0,1e-5"]
    for fmt in ("csv", "json"):
        a, b = tmp_path / f"a.{fmt}", tmp_path / f"b.{fmt}"
        run(capsys, *args, "--format", fmt, "--out", str(a))
        run(capsys, *args, "--format", fmt, "--out", str(b))
        assert a.read_bytes().replace(b"a." + fmt.encode(), b"") == b.read_bytes().replace(b"b." + fmt.encode(), b"")
    doc = json.loads((tmp_path / "a.json").read_text())
    assert len(doc["rows"]) == 16


def test_sweep_empty_grid(capsys):
    code, _, err = run(capsys, "sweep", "--k", "64", "--epsA", "")
    assert code == 2 and "at least one value" in err


def test_sweep_unwritable(capsys, tmp_path):
    code, _, _ = run(capsys, "sweep", "--epsA", "1e-6", "--out", str(tmp_path / "missing" / "x.csv"))
    assert code == 4


def test_usage_error_exit_code():
    with pytest.raises(SystemExit) as exc:
        main(["bound", "--k", "notanint", "--epsA", "0"])
    assert exc.value.code == 2


SIM = ["simulate", "--n-qubits", "4", "--k", "2", "--test-method", "alternate", "--hashing", "none"]


def test_simulate_uniform(capsys, tmp_path):
    code, out, _ = run(capsys, *SIM, "--dist", "uniform", "--out", str(tmp_path))
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["info"] == pytest.approx(0.0, abs=1e-12)
    assert report["holevo_ceiling"] == "PASS" and report["theorem_check"] == "PASS"
    assert report["config"]["alice_law"]["omega"] == 8
    assert "holevo_ceiling: PASS" in out


def test_simulate_biased(capsys, tmp_path):
    code, _, _ = run(capsys, *SIM, "--dist", "iid_bias:b=0.3", "--eve", "pattern", "--out", str(tmp_path))
    report = json.loads((tmp_path / "report.json").read_text())
    assert code == 0
    assert report["info"] <= report["h"] + 1e-9
    assert report["holevo_ceiling"] == "PASS"


def test_simulate_monte_carlo(capsys, tmp_path):
    code, _, _ = run(capsys, *SIM, "--dist", "iid_bias:b=0.3", "--trials", "5000", "--out", str(tmp_path))
    report = json.loads((tmp_path / "report.json").read_text())
    assert code == 0 and report["half_width"] > 0 and report["config"]["mode"] == "monte_carlo"


def test_simulate_cap_guidance(capsys, tmp_path):
    code, _, err = run(capsys, "simulate", "--n-qubits", "20", "--dist", "uniform", "--out", str(tmp_path))
    assert code == 3 and "--trials" in err


def test_seed_env_fallback(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("QKD_RNG_AUDIT_SEED", "42")
    run(capsys, *SIM, "--dist", "uniform", "--out", str(tmp_path))
    assert json.loads((tmp_path / "report.json").read_text())["config"]["seed"] == 42
    monkeypatch.delenv("QKD_RNG_AUDIT_SEED")
    run(capsys, *SIM, "--dist", "uniform", "--out", str(tmp_path))
    assert json.loads((tmp_path / "report.json").read_text())["config"]["seed"] == 0


def test_replay_byte_identical(capsys, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    run(capsys, *SIM, "--dist", "markov:p01=0.3,p10=0.2", "--eve", "ir:0.5", "--seed", "7", "--out", str(first))
    code, _, _ = run(capsys, "replay", str(first / "transcript.json"), "--out", str(second))
    assert code == 0
    for name in ("report.json", "transcript.json"):
        assert (first / name).read_bytes() == (second / name).read_bytes()


def test_json_round_trip(capsys, tmp_path):
    run(capsys, *SIM, "--dist", "uniform", "--out", str(tmp_path))
    text = (tmp_path / "report.json").read_text()
    assert json.dumps(json.loads(text), indent=2, sort_keys=True) + "\n" == text


def test_parse_helpers():
    assert parse_dist("uniform", 3) == rng_models.uniform(3)
    assert parse_dist("explicit:table=0.1/0.2/0.3/0.4").omega == 2
    assert parse_dist('{"omega": 2, "kind": "iid_bias", "b": "0.25"}') == rng_models.iid_bias(2, 0.25)
    assert parse_grid("1,2,3", int) == [1, 2, 3]
    assert len(parse_grid("linspace:0:1:5")) == 5


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "qkd_rng_audit", "bound", "--k", "1", "--epsA", "0"], capture_output=True, text=True)
    assert out.returncode == 0 and "leading: 0" in out.stdout
