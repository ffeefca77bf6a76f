"""End-to-end CLI checks (subprocess level)."""

import json
import math

import pytest

from conftest import run_cli


def test_convert_pinned_output():
    out = run_cli("convert", "--t", 0, "--T", 10, "--from", "exp", "--to", "libor", "--value", 0.05)
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert lines[0] == "0.0648721271"
    assert lines[1] == "round_trip_residual 0"


def test_convert_domain_violation_exits_2():
    out = run_cli("convert", "--t", 0, "--T", 10, "--from", "libor", "--to", "exp", "--value", -0.2)
    assert out.returncode == 2
    assert "error" in out.stderr.lower()
    assert out.stdout == ""


def test_unknown_subcommand_exits_2():
    out = run_cli("frobnicate")
    assert out.returncode == 2


def test_unknown_model_exits_2():
    out = run_cli("longrate", "--model", "nosuchmodel", "--t", 0, "--conv", "libor")
    assert out.returncode == 2
    assert "nosuchmodel" in out.stderr


def test_longrate_reference_model_pinned():
    out = run_cli("longrate", "--model", "ref1f", "--t", 0, "--conv", "libor")
    assert out.returncode == 0
    assert out.stdout.strip() == "0.75 CONVERGED"


def test_longrate_flat_curve():
    out = run_cli("longrate", "--curve", "flat:0.03", "--conv", "exp")
    assert out.stdout.strip() == "0.03 CONVERGED"
    out = run_cli("longrate", "--curve", "flat:0.03", "--conv", "libor")
    assert out.stdout.strip() == "inf DIVERGENT"


def test_longrate_trace_csv(tmp_path):
    trace = tmp_path / "trace.csv"
    out = run_cli("longrate", "--model", "pareto2", "--t", 0, "--conv", "pareto:2", "--trace", trace)
    assert out.returncode == 0
    lines = trace.read_text().splitlines()
    assert lines[0] == "horizon,rate"
    assert len(lines) > 50


def test_value_unit_flow_pinned():
    out = run_cli("value", "--model", "ref1f", "--flow", "T=10,amount=1", "--seed", 1)
    assert out.returncode == 0
    assert out.stdout.splitlines()[0] == "0.116161616"


def test_value_rejects_bad_flow():
    out = run_cli("value", "--model", "ref1f", "--flow", "T=10", "--seed", 1)
    assert out.returncode == 2


def test_curve_table_and_probes():
    out = run_cli("curve", "--curve", "flat:0.03", "--probes", "10:10;20:40")
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert lines[0] == "maturity_years,discount_factor,exponential_rate"
    assert lines[1].startswith("1,0.970445534,0.03")
    assert lines[-1].startswith("time_consistency_residual ")
    assert float(lines[-1].split()[1]) <= 1e-12


def test_simulate_deterministic_csv(tmp_path):
    args = ("simulate", "--model", "ref1f", "--seed", 3, "--n", 100,
            "--grid", "lin:0:2:5", "--out")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run_cli(*args, a)
    run_cli(*args, b, env_extra={"LONGRATE_THREADS": "5"})
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().splitlines()[0] == "path,t,M"


def test_simulate_requires_seed():
    out = run_cli("simulate", "--model", "ref1f", "--n", 10, "--out", "x.csv")
    assert out.returncode == 2


def test_classify_json_shape(tmp_path):
    out = run_cli("classify", "--curve", "pareto:2:0.04")
    assert out.returncode == 0
    doc = json.loads(out.stdout)
    assert doc["kind"] == "tail_pareto"
    assert doc["lambda"] == pytest.approx(2.0, rel=1e-2)
    assert doc["level"] == pytest.approx(0.04, rel=1e-2)


def test_audit_dir_reference_model_passes():
    out = run_cli("audit", "dir", "--model", "ref1f", "--seed", 7)
    assert out.returncode == 0
    assert out.stdout.strip().endswith("long-rate monotonicity audit: PASS")


def test_audit_strat_flat_curve_passes():
    out = run_cli("audit", "strat", "--curve", "flat:0.03")
    assert out.returncode == 0
    assert "stratification audit: PASS" in out.stdout


def test_audit_kernel_passes_and_writes_json(tmp_path):
    path = tmp_path / "audit.json"
    out = run_cli("audit", "kernel", "--model", "ref1f", "--seed", 7, "--n", 4000,
                  "--json", path)
    assert out.returncode == 0
    doc = json.loads(path.read_text())
    assert doc["kernel_conditions"]["verdict"] == "PASS"
    assert doc["deflated_bond"]["verdict"] == "PASS"


def test_audit_pareto_wrong_index_fails_with_exit_1():
    out = run_cli("audit", "pareto", "--model", "pareto2", "--seed", 5, "--n", 2000,
                  "--lam", 3)
    assert out.returncode == 1
    assert "FAIL" in out.stdout


def test_greenbook_pinned_rows():
    out = run_cli("greenbook", "--schedule", "greenbook_example")
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert "30,0.349937749,0.035" in lines
    residual = next(l for l in lines if l.startswith("time_consistency_residual"))
    assert float(residual.split()[1]) > 0.0
    assert "tail_class exponential" in lines


def test_greenbook_rerun_byte_identical():
    a = run_cli("greenbook", "--schedule", "greenbook_example")
    b = run_cli("greenbook", "--schedule", "greenbook_example")
    assert a.stdout == b.stdout


def test_aggregate_discrete_with_estimate():
    mix = json.dumps({"kind": "discrete", "rates": [0.01, 0.03], "weights": [0.5, 0.5]})
    out = run_cli("aggregate", "--mix", mix, "--times", "0,10,100", "--estimate")
    assert out.returncode == 0
    lines = out.stdout.splitlines()
    assert lines[0] == "t,aggregate_discount"
    est = next(l for l in lines if l.startswith("asymptotic_rate"))
    assert abs(float(est.split()[1]) - 0.01) < 1e-3


def test_aggregate_sample_writes_csv(tmp_path):
    path = tmp_path / "taus.csv"
    mix = json.dumps({"kind": "gamma", "shape": 2.0, "mean_rate": 0.04})
    out = run_cli("aggregate", "--mix", mix, "--sample", 100, "--seed", 11, "--out", path)
    assert out.returncode == 0
    assert "censored" in out.stdout
    lines = path.read_text().splitlines()
    assert lines[0] == "tau"
    assert len(lines) == 101


def test_all_numbers_use_nine_significant_digits():
    out = run_cli("value", "--model", "ref2f", "--flow", "T=10,amount=1", "--seed", 1)
    head = out.stdout.splitlines()[0]
    assert head == "0.104278075"  # 9 significant digits, no trailing noise
