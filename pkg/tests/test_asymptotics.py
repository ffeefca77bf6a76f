"""Long-rate estimation, tail classification, and the structural audits."""

import math

import numpy as np
import pytest

import longrate as lr
from longrate import (
    ModelState,
    RateConvention,
    bond_evaluator,
    classify_curve,
    curve_evaluator,
    default_long_rate_horizons,
    deterministic_long_rate,
    dir_monotonicity_audit,
    estimate_long_rate,
    pareto_kernel_certificate,
    stratification_audit,
)
from longrate.errors import DomainError, InadmissibleCurveError

EXP = RateConvention.exponential()
LIBOR = RateConvention.libor()


# ---------------------------------------------------------------------------
# Long-rate estimation
# ---------------------------------------------------------------------------


def test_reference_long_libor_estimate(ref1f):
    est = estimate_long_rate(bond_evaluator(ref1f, ModelState(0.0, 1.0)), 0.0, LIBOR)
    assert est.status == "CONVERGED"
    assert abs(est.value - 0.75) <= 1e-6


def test_estimate_converges_at_other_states(ref1f):
    state = ModelState(2.0, 1.3)
    est = estimate_long_rate(bond_evaluator(ref1f, state), 2.0, LIBOR)
    closed = lr.long_libor_1f(ref1f, state)
    assert abs(est.value - closed) <= 1e-6


@pytest.mark.parametrize("lam", [0.5, 2.0, 3.0])
def test_pareto_long_rate_estimates(lam):
    model = lr.zoo.pareto_one_factor(lam)
    conv = RateConvention.tail_pareto(lam)
    est = estimate_long_rate(bond_evaluator(model, ModelState(0.0, 1.0)), 0.0, conv)
    closed = lr.long_pareto_1f(model, ModelState(0.0, 1.0))
    assert est.status == "CONVERGED"
    assert abs(est.value - closed) <= 1e-6


def test_flat_curve_exponential_estimate(curves):
    est = estimate_long_rate(curve_evaluator(curves["flat3"]), 0.0, EXP)
    assert est.status == "CONVERGED"
    assert est.value == pytest.approx(0.03, abs=1e-9)


def test_flat_curve_libor_diverges(curves):
    est = estimate_long_rate(curve_evaluator(curves["flat3"]), 0.0, LIBOR)
    assert est.status == "DIVERGENT"
    assert est.value == math.inf


def test_estimate_records_trace(ref1f, tmp_path):
    est = estimate_long_rate(bond_evaluator(ref1f, ModelState(0.0, 1.0)), 0.0, LIBOR)
    horizons = default_long_rate_horizons()
    assert len(est.trace) == len(horizons)
    assert est.trace[0][0] == pytest.approx(horizons[0])
    out = tmp_path / "trace.csv"
    lr.save_trace_csv(est, out)
    lines = out.read_text().splitlines()
    assert lines[0] == "horizon,rate"
    assert len(lines) == 1 + len(est.trace)


def test_estimate_needs_enough_horizons(ref1f):
    with pytest.raises(DomainError):
        estimate_long_rate(
            bond_evaluator(ref1f, ModelState(0.0, 1.0)), 0.0, LIBOR,
            horizons=np.array([10.0]),
        )


def test_constant_curve_is_inadmissible():
    """P == 1 never decays, so no admissible kernel can sit behind it."""
    curve = lr.curve_from_function(
        lambda t: np.ones_like(np.asarray(t, dtype=float)),
        tail=lr.ExponentialTail(0.0),
    )
    with pytest.raises(InadmissibleCurveError):
        stratification_audit(curve_evaluator(curve), 0.0)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


def test_classify_flat_exponential(curves):
    out = classify_curve(curves["flat3"])
    assert out.kind == "exponential"
    assert out.rate == pytest.approx(0.03, rel=1e-2)
    assert not out.diagnostics.ambiguous


def test_classify_gamma_two(curves):
    out = classify_curve(curves["gamma2"])
    assert out.kind == "tail_pareto"
    assert out.lam == pytest.approx(2.0, rel=1e-2)
    assert out.level == pytest.approx(0.04, rel=1e-2)


def test_classify_hyperbolic(curves):
    out = classify_curve(curves["hyperbolic2"])
    assert out.kind == "tail_pareto"
    assert out.lam == pytest.approx(1.0, rel=1e-2)
    assert out.level == pytest.approx(0.02, rel=1e-2)


def test_classify_short_grid_is_undetermined():
    grid = np.linspace(0.0, 30.0, 31)
    curve = lr.DiscountCurve(grid, np.exp(-0.03 * grid))
    out = classify_curve(curve)
    assert out.kind == "undetermined"
    assert "tail data" in out.diagnostics.note


def test_classify_as_dict_round_trips(curves):
    doc = classify_curve(curves["gamma3"]).as_dict()
    assert doc["kind"] == "tail_pareto"
    assert set(doc) >= {"kind", "rate", "lambda", "level", "diagnostics"}


# ---------------------------------------------------------------------------
# Deterministic propagation
# ---------------------------------------------------------------------------


def test_propagation_hyperbolic_pinned(curves):
    hyp = curves["hyperbolic2"]
    assert deterministic_long_rate(hyp, 0.0, LIBOR) == pytest.approx(0.02, rel=1e-9)
    assert deterministic_long_rate(hyp, 50.0, LIBOR) == pytest.approx(0.01, rel=1e-9)


def test_propagation_gamma3_pinned(curves):
    g3 = curves["gamma3"]
    conv = RateConvention.tail_pareto(3.0)
    # t with P = 0.729 = 0.9^3: 1 + 0.02 t / 3 = 1/0.9; the only error is
    # grid interpolation of P(0, t)
    t = 3.0 * (1.0 / 0.9 - 1.0) / 0.02
    assert deterministic_long_rate(g3, t, conv) == pytest.approx(0.018, rel=1e-5)


def test_propagation_degenerate_limits(curves):
    hyp = curves["hyperbolic2"]
    assert deterministic_long_rate(hyp, 0.0, EXP) == 0.0
    assert deterministic_long_rate(hyp, 0.0, RateConvention.tail_pareto(2.0)) == 0.0
    assert deterministic_long_rate(hyp, 0.0, RateConvention.tail_pareto(0.5)) == math.inf
    flat = curves["flat3"]
    assert deterministic_long_rate(flat, 0.0, EXP) == pytest.approx(0.03)
    assert deterministic_long_rate(flat, 0.0, LIBOR) == math.inf
    z = deterministic_long_rate(flat, 0.0, RateConvention.zero_coupon(1.0))
    assert z == pytest.approx(math.expm1(0.03), rel=1e-9)


def test_propagation_agrees_with_estimator(curves):
    """Closed-form propagation vs direct estimation at horizon 1e6."""
    horizons = default_long_rate_horizons(stop=1e6)
    hyp = curves["hyperbolic2"]
    for t in (0.0, 10.0, 50.0):
        est = estimate_long_rate(curve_evaluator(hyp), t, LIBOR, horizons=horizons)
        assert abs(est.value - deterministic_long_rate(hyp, t, LIBOR)) <= 1e-4
    g2 = curves["gamma2"]
    conv = RateConvention.tail_pareto(2.0)
    for t in (0.0, 25.0):
        est = estimate_long_rate(curve_evaluator(g2), t, conv, horizons=horizons)
        assert abs(est.value - deterministic_long_rate(g2, t, conv)) <= 1e-4


# ---------------------------------------------------------------------------
# Stratification
# ---------------------------------------------------------------------------


def test_stratification_pareto2_pattern(pareto2):
    rep = stratification_audit(bond_evaluator(pareto2, ModelState(0.0, 1.0)), 0.0)
    assert rep.verdict == "PASS", "\n".join(rep.lines())
    assert rep.data["exponential"]["trend"] == "ZERO"
    assert rep.data["indices"]["2"]["trend"] == "FINITE_POSITIVE"
    assert rep.data["indices"]["1"]["trend"] == "DIVERGENT"
    assert rep.data["indices"]["3"]["trend"] == "ZERO"
    assert rep.data["indices"]["2"]["value"] == pytest.approx(1.5811388300841898, abs=1e-6)


def test_stratification_flat_curve_pattern(curves):
    rep = stratification_audit(curve_evaluator(curves["flat3"]), 0.0)
    assert rep.verdict == "PASS", "\n".join(rep.lines())
    assert rep.data["exponential"]["trend"] == "FINITE_POSITIVE"
    for key in ("1", "2", "3"):
        assert rep.data["indices"][key]["trend"] == "DIVERGENT"


def test_stratification_across_zoo():
    """No false verdicts on any bundled model."""
    for name, model in lr.zoo.model_zoo().items():
        lam = model.a.lam
        state = ModelState(0.0, 1.0, 1.0 if name in ("ref2f", "ref2fx") else None)
        alphas = sorted({0.5, 1.0, 2.0, 3.0} | {lam})
        rep = stratification_audit(bond_evaluator(model, state), 0.0, alphas=alphas)
        assert rep.verdict == "PASS", f"{name}:\n" + "\n".join(rep.lines())
        assert rep.data["exponential"]["trend"] == "ZERO", name
        for alpha in alphas:
            trend = rep.data["indices"][f"{alpha:g}"]["trend"]
            if alpha == lam:
                assert trend == "FINITE_POSITIVE", (name, alpha)
            elif alpha < lam:
                assert trend == "DIVERGENT", (name, alpha)
            else:
                assert trend == "ZERO", (name, alpha)


# ---------------------------------------------------------------------------
# Monotonicity audit
# ---------------------------------------------------------------------------


def test_dir_audit_flat_curve(curves):
    rep = dir_monotonicity_audit(curves["flat3"], [0.0, 1.0, 5.0, 25.0])
    assert rep.verdict == "PASS", "\n".join(rep.lines())
    ests = rep.data["values"]
    assert max(ests) - min(ests) <= 1e-9


def test_dir_audit_model_degenerate_case(ref1f):
    grid = np.array([0.0, 1.0, 2.0, 5.0, 10.0])
    ens = lr.ensemble_for_model(ref1f, grid, 2000, seed=7)
    rep = dir_monotonicity_audit(ref1f, [0.0, 1.0, 5.0], ensemble=ens)
    assert rep.verdict == "PASS", "\n".join(rep.lines())
    assert rep.data["max_rate"] <= 1e-6


def test_dir_audit_model_needs_ensemble(ref1f):
    with pytest.raises(DomainError):
        dir_monotonicity_audit(ref1f, [0.0, 1.0])


# ---------------------------------------------------------------------------
# Tail-Pareto certificate
# ---------------------------------------------------------------------------


@pytest.fixture(scope="module")
def cert_ensemble(pareto2):
    grid = np.concatenate([[0.0], np.geomspace(1.0, 1e4, 29)])
    return lr.ensemble_for_model(pareto2, grid, 8000, seed=5)


def test_certificate_passes_at_declared_index(pareto2, cert_ensemble):
    rep = pareto_kernel_certificate(pareto2, cert_ensemble)
    assert rep.verdict == "PASS", "\n".join(rep.lines())


def test_certificate_fails_at_wrong_index(pareto2, cert_ensemble):
    low = pareto_kernel_certificate(pareto2, cert_ensemble, lam=1.0)
    assert low.verdict == "FAIL"
    high = pareto_kernel_certificate(pareto2, cert_ensemble, lam=3.0)
    assert high.verdict == "FAIL"


def test_certificate_rejects_bad_index(pareto2, cert_ensemble):
    with pytest.raises(DomainError):
        pareto_kernel_certificate(pareto2, cert_ensemble, lam=-2.0)
