"""Command-line front end.

All numeric output is printed to 9 significant digits; files are plain
CSV/JSON with sorted keys and LF endings, so repeated runs with the same
inputs and seeds are byte-identical.  Exit codes: 0 on success, 1 when
an audit reports FAIL, 2 on input/domain errors.

Model references resolve in order: filesystem path, packaged config
(``ref1f.json``, ``ref2f.json``, ``pareto2.json``), catalogue name
(``ref1f``, ``pareto2``, ``ref2f``, ...).  Curve references resolve as:
CSV path, ``flat:<rate>``, ``pareto:<lam>:<level>``, catalogue name.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import zoo
from .aggregation import (
    DiscreteMixture,
    ExponentialMixture,
    GammaMixture,
    aggregate_discount,
    asymptotic_exponential_rate,
    sample_calamity_time,
)
from .asymptotics import (
    classify_curve,
    curve_evaluator,
    default_long_rate_horizons,
    deterministic_long_rate,
    dir_monotonicity_audit,
    estimate_long_rate,
    pareto_kernel_certificate,
    save_trace_csv,
    stratification_audit,
)
from .errors import DomainError, LongrateError
from .kernel_models import (
    Model,
    ModelState,
    OneFactorModel,
    TwoFactorModel,
    bond_evaluator,
    load_model_config,
    long_libor_2f,
    long_pareto_1f,
)
from .montecarlo import (
    CashFlow,
    CashFlowSchedule,
    deflated_bond_martingale_check,
    ensemble_for_model,
    kernel_condition_audit,
    value_claim,
    write_ensemble_csv,
)
from .reporting import FAIL, AuditReport
from .termstructure import (
    DiscountCurve,
    ExponentialTail,
    RateConvention,
    Tenor,
    convert_rate,
    default_curve_grid,
    flat_exponential_curve,
    load_curve_csv,
    rate_from_log_discount,
    save_curve_csv,
    tail_pareto_curve,
    time_consistency_residual,
)

__all__ = ["main", "build_parser", "STPRSchedule", "RunConfig"]


def _fmt(x) -> str:
    return f"{float(x):.9g}"


def _round9(obj):
    """Limit every float to 9 significant digits; make non-finite values JSON-safe."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isfinite(v):
            return float(f"{v:.9g}")
        return "inf" if v == math.inf else ("-inf" if v == -math.inf else "nan")
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _emit_json(doc, path=None) -> None:
    text = json.dumps(_round9(doc), indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _print_report(report: AuditReport) -> None:
    for line in report.lines():
        print(line)


def _report_exit(*reports: AuditReport) -> int:
    return 1 if any(r.verdict == FAIL for r in reports) else 0


def _parse_floats(text: str, name: str) -> list[float]:
    try:
        return [float(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        raise DomainError(f"{name}: expected comma-separated numbers, got {text!r}") from None


def _parse_grid(spec: str) -> np.ndarray:
    """Time grids: 'lin:<start>:<stop>:<count>', 'geom:<start>:<stop>:<count>'
    (0 is prepended), or a comma-separated list starting at 0."""
    if spec.startswith("lin:") or spec.startswith("geom:"):
        kind, rest = spec.split(":", 1)
        parts = rest.split(":")
        if len(parts) != 3:
            raise DomainError(f"grid spec {spec!r}: expected {kind}:start:stop:count")
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
        if kind == "lin":
            grid = np.linspace(start, stop, count)
        else:
            grid = np.concatenate([[0.0], np.geomspace(start, stop, count)])
        return grid
    return np.asarray(_parse_floats(spec, "grid"), dtype=float)


# ---------------------------------------------------------------------------
# Reference resolution
# ---------------------------------------------------------------------------


def _packaged(name: str):
    return resources.files("longrate").joinpath("data", name)


def _resolve_model(ref: str) -> Model:
    if os.path.exists(ref):
        return load_model_config(ref)
    packaged = _packaged(ref if ref.endswith(".json") else ref + ".json")
    if packaged.is_file():
        with resources.as_file(packaged) as fp:
            return load_model_config(fp)
    try:
        return zoo.zoo_model(ref)
    except DomainError:
        pass
    raise DomainError(
        f"cannot resolve model {ref!r}: not a file, packaged config, or catalogue name"
    )


def _resolve_curve(ref: str) -> DiscountCurve:
    if os.path.exists(ref):
        return load_curve_csv(ref)
    if ref.startswith("flat:"):
        return flat_exponential_curve(float(ref[5:]))
    if ref.startswith("pareto:"):
        parts = ref.split(":")
        if len(parts) != 3:
            raise DomainError(f"curve spec {ref!r}: expected pareto:<lam>:<level>")
        return tail_pareto_curve(float(parts[1]), float(parts[2]), grid=zoo.long_grid())
    try:
        return zoo.zoo_curve(ref)
    except DomainError:
        pass
    raise DomainError(
        f"cannot resolve curve {ref!r}: not a CSV file, flat:/pareto: spec, "
        "or catalogue name"
    )


def _model_state(model: Model, args) -> ModelState:
    if isinstance(model, TwoFactorModel):
        return ModelState(args.t, args.m, 1.0 if args.n is None else args.n)
    if getattr(args, "n", None) is not None:
        raise DomainError("--n only applies to two-factor models")
    return ModelState(args.t, args.m)


@dataclass(frozen=True)
class RunConfig:
    """Validated inputs for a simulation-backed run.

    Seeds are always explicit: no command draws entropy implicitly, which
    is what makes repeated runs byte-identical.
    """

    model_ref: str
    seed: int
    n_paths: int
    grid: np.ndarray
    horizons: np.ndarray | None = None
    out: str | None = None
    json_out: str | None = None

    def __post_init__(self):
        if self.seed is None:
            raise DomainError("an explicit --seed is required")
        if self.n_paths < 1:
            raise DomainError(f"n_paths must be positive, got {self.n_paths!r}")

    def model(self) -> Model:
        return _resolve_model(self.model_ref)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------


def cmd_convert(args) -> int:
    tenor = Tenor(args.t, args.T)
    conv_from = RateConvention.parse(args.conv_from)
    conv_to = RateConvention.parse(args.conv_to)
    out = convert_rate(tenor, conv_from, conv_to, args.value)
    back = convert_rate(tenor, conv_to, conv_from, out)
    print(_fmt(out))
    print(f"round_trip_residual {_fmt(abs(back - args.value))}")
    return 0


def cmd_curve(args) -> int:
    curve = _resolve_curve(args.curve)
    times = (
        _parse_floats(args.times, "--times")
        if args.times
        else [t for t in (1.0, 5.0, 10.0, 30.0, 50.0, 100.0) if t <= curve.horizon]
    )
    print("maturity_years,discount_factor,exponential_rate")
    rows = []
    for t in times:
        ld = curve.log_df(t)
        if t > 0.0:
            rate = rate_from_log_discount(Tenor(0.0, t), RateConvention.exponential(), ld)
        else:
            rate = math.nan
        rows.append({"maturity": t, "discount_factor": math.exp(ld), "rate": rate})
        print(f"{_fmt(t)},{_fmt(math.exp(ld))},{_fmt(rate)}")
    doc = {"rows": rows, "horizon": curve.horizon}
    if args.probes:
        pairs = []
        for chunk in args.probes.split(";"):
            parts = chunk.split(":")
            if len(parts) != 2:
                raise DomainError(f"--probes entry {chunk!r}: expected t:x")
            pairs.append((float(parts[0]), float(parts[1])))
        residual = time_consistency_residual(curve, pairs)
        doc["time_consistency_residual"] = residual
        print(f"time_consistency_residual {_fmt(residual)}")
    if args.out:
        save_curve_csv(curve, args.out)
    if args.json:
        _emit_json(doc, args.json)
    return 0


def _mixture_from_config(cfg: dict):
    if not isinstance(cfg, dict) or "kind" not in cfg:
        raise DomainError("mixture config must be an object with a 'kind' key")
    kind = cfg["kind"]
    try:
        if kind == "discrete":
            return DiscreteMixture(cfg["weights"], cfg["rates"])
        if kind == "exponential":
            return ExponentialMixture(cfg["mean_rate"])
        if kind == "gamma":
            return GammaMixture(cfg["shape"], cfg["mean_rate"])
    except KeyError as exc:
        raise DomainError(f"mixture config missing key {exc.args[0]!r}") from None
    raise DomainError(f"unknown mixture kind {kind!r}")


def cmd_aggregate(args) -> int:
    if os.path.exists(args.mix):
        with open(args.mix, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    else:
        try:
            cfg = json.loads(args.mix)
        except json.JSONDecodeError:
            raise DomainError(
                f"--mix {args.mix!r} is neither a file nor inline JSON"
            ) from None
    mixture = _mixture_from_config(cfg)
    times = _parse_floats(args.times, "--times")
    print("t,aggregate_discount")
    for t in times:
        print(f"{_fmt(t)},{_fmt(aggregate_discount(mixture, t))}")
    if args.estimate:
        est = asymptotic_exponential_rate(mixture)
        print(f"asymptotic_rate {_fmt(est.value)} {est.status}")
    if args.sample:
        if args.seed is None:
            raise DomainError("--sample needs an explicit --seed")
        if not args.out:
            raise DomainError("--sample needs --out for the CSV file")
        sample = sample_calamity_time(mixture, args.sample, args.seed, cap=args.cap)
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("tau\n")
            for v in sample.times:
                fh.write(_fmt(v) + "\n")
        print(f"censored {int(sample.censored.sum())} of {args.sample} at cap {_fmt(sample.cap)}")
    return 0


def cmd_simulate(args) -> int:
    config = RunConfig(args.model, args.seed, args.n, _parse_grid(args.grid), out=args.out)
    model = config.model()
    ensemble = ensemble_for_model(
        model, config.grid, config.n_paths, config.seed, rho=args.rho
    )
    write_ensemble_csv(ensemble, config.out)
    final = ensemble.m[:, -1]
    mean = float(np.mean(final))
    se = float(np.std(final, ddof=1) / math.sqrt(final.size)) if final.size > 1 else 0.0
    print(f"paths {ensemble.n_paths} grid_points {ensemble.grid.size}")
    print(f"terminal_mean {_fmt(mean)} se {_fmt(se)}")
    return 0


def _parse_flow(spec: str, model: Model) -> CashFlow:
    fields = {}
    for chunk in spec.split(","):
        if "=" not in chunk:
            raise DomainError(f"--flow entry {chunk!r}: expected key=value")
        key, value = chunk.split("=", 1)
        fields[key.strip()] = value.strip()
    if "T" not in fields:
        raise DomainError(f"--flow {spec!r}: missing T=<time>")
    T = float(fields.pop("T"))
    if set(fields) == {"amount"}:
        return CashFlow(T, amount=float(fields["amount"]))
    if set(fields) == {"payoff"}:
        name = fields["payoff"]
        if name == "M":
            payoff = (lambda m: m) if isinstance(model, OneFactorModel) else (lambda m, n: m)
        elif name == "N":
            if isinstance(model, OneFactorModel):
                raise DomainError("payoff=N needs a two-factor model")
            payoff = lambda m, n: n
        else:
            raise DomainError(f"--flow {spec!r}: payoff must be M or N, got {name!r}")
        return CashFlow(T, payoff=payoff)
    raise DomainError(f"--flow {spec!r}: specify exactly one of amount=, payoff=")


def cmd_value(args) -> int:
    model = _resolve_model(args.model)
    state = _model_state(model, args)
    schedule = CashFlowSchedule(tuple(_parse_flow(s, model) for s in args.flow))
    result = value_claim(
        model,
        state,
        schedule,
        n_paths=args.paths,
        seed=args.seed,
        rho=args.rho,
        simulate_constants=args.simulate_constants,
    )
    print(_fmt(result.value))
    for fv in result.flows:
        line = f"flow T={_fmt(fv.time)} value={_fmt(fv.value)} method={fv.method}"
        if fv.standard_error is not None:
            line += f" se={_fmt(fv.standard_error)}"
        print(line)
    if args.json:
        _emit_json(result.as_dict(), args.json)
    return 0


def _closed_form_long_rate(model: Model, state: ModelState, conv: RateConvention):
    if conv.kind not in ("libor", "tail_pareto"):
        return None
    lam = conv.pareto_index
    if isinstance(model, OneFactorModel):
        return long_pareto_1f(model, state) if lam == model.lam else None
    return long_libor_2f(model, state) if lam == 1.0 else None


def cmd_longrate(args) -> int:
    conv = RateConvention.parse(args.conv)
    horizons = default_long_rate_horizons(stop=args.horizon)
    if args.model:
        model = _resolve_model(args.model)
        state = _model_state(model, args)
        evaluator = bond_evaluator(model, state)
        closed = _closed_form_long_rate(model, state, conv)
        t = state.t
    else:
        curve = _resolve_curve(args.curve)
        evaluator = curve_evaluator(curve)
        t = args.t
        try:
            closed = deterministic_long_rate(curve, t, conv)
        except LongrateError:
            closed = None
    est = estimate_long_rate(evaluator, t, conv, horizons)
    headline = est.value if closed is None else closed
    print(f"{_fmt(headline)} {est.status}")
    if args.trace:
        save_trace_csv(est, args.trace)
    if args.json:
        _emit_json(
            {
                "convention": conv.label(),
                "t": t,
                "estimate": est.value,
                "status": est.status,
                "tail_sup": est.tail_sup,
                "horizon": est.horizon,
                "closed_form": closed,
                "decade_sups": list(est.decade_sups),
            },
            args.json,
        )
    return 0


def cmd_classify(args) -> int:
    curve = _resolve_curve(args.curve)
    window = None
    if args.window:
        parts = args.window.split(":")
        if len(parts) != 2:
            raise DomainError(f"--window {args.window!r}: expected lo:hi")
        window = (float(parts[0]), float(parts[1]))
    result = classify_curve(curve, window=window)
    _emit_json(result.as_dict(), args.json)
    if args.json:
        print(result.kind)
    return 0


def _audit_dir(args) -> int:
    times = _parse_floats(args.times, "--times")
    horizons = default_long_rate_horizons(stop=args.horizon)
    if args.model:
        config = RunConfig(
            args.model, args.seed, args.n,
            np.unique(np.concatenate([[0.0], np.asarray(times)])),
            json_out=args.json,
        )
        model = config.model()
        ensemble = ensemble_for_model(
            model, config.grid, config.n_paths, config.seed, rho=args.rho
        )
        report = dir_monotonicity_audit(
            model, times, ensemble=ensemble, horizons=horizons, kappa=args.kappa
        )
    else:
        curve = _resolve_curve(args.curve)
        report = dir_monotonicity_audit(curve, times, horizons=horizons, kappa=args.kappa)
    _print_report(report)
    if args.json:
        _emit_json(report.as_dict(), args.json)
    return _report_exit(report)


def _audit_strat(args) -> int:
    indices = _parse_floats(args.indices, "--indices")
    horizons = default_long_rate_horizons(stop=args.horizon)
    if args.model:
        model = _resolve_model(args.model)
        state = _model_state(model, args)
        evaluator = bond_evaluator(model, state)
        t = state.t
    else:
        evaluator = curve_evaluator(_resolve_curve(args.curve))
        t = args.t
    report = stratification_audit(evaluator, t, alphas=indices, horizons=horizons)
    _print_report(report)
    if args.json:
        _emit_json(report.as_dict(), args.json)
    return _report_exit(report)


def _audit_kernel(args) -> int:
    config = RunConfig(args.model, args.seed, args.n, _parse_grid(args.grid), json_out=args.json)
    model = config.model()
    ensemble = ensemble_for_model(
        model, config.grid, config.n_paths, config.seed, rho=args.rho
    )
    conditions = kernel_condition_audit(model, ensemble)
    times = [t for t in ensemble.grid if t <= args.maturity]
    deflated = deflated_bond_martingale_check(model, ensemble, times, args.maturity)
    _print_report(conditions)
    _print_report(deflated)
    if args.json:
        _emit_json(
            {"kernel_conditions": conditions.as_dict(), "deflated_bond": deflated.as_dict()},
            args.json,
        )
    return _report_exit(conditions, deflated)


def _audit_pareto(args) -> int:
    config = RunConfig(args.model, args.seed, args.n, _parse_grid(args.grid), json_out=args.json)
    model = config.model()
    ensemble = ensemble_for_model(
        model, config.grid, config.n_paths, config.seed, rho=args.rho
    )
    report = pareto_kernel_certificate(model, ensemble, lam=args.lam)
    _print_report(report)
    if args.json:
        _emit_json(report.as_dict(), args.json)
    return _report_exit(report)


# ---------------------------------------------------------------------------
# Green-Book-style schedules
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class STPRSchedule:
    """Banded flat-rate schedule covering [0, inf).

    ``bands`` is a tuple of (start, end, rate) with end None for the
    final open band.  Bands must be contiguous from 0 and rates positive.
    By default each band's rate acts as the forward rate over the band,
    so the discount curve is continuous and piecewise exponential; the
    spot interpretation (P = exp(-rate(t) * t)) is also available but
    makes P discontinuous at band boundaries.
    """

    bands: tuple[tuple[float, float | None, float], ...]
    components: dict | None = None

    def __post_init__(self):
        if not self.bands:
            raise DomainError("schedule needs at least one band")
        object.__setattr__(self, "bands", tuple(tuple(b) for b in self.bands))
        prev_end = 0.0
        for i, band in enumerate(self.bands):
            if len(band) != 3:
                raise DomainError(f"band {i}: expected [start, end, rate], got {band!r}")
            start, end, rate = band
            start = float(start)
            last = i == len(self.bands) - 1
            if start != prev_end:
                raise DomainError(
                    f"band {i}: starts at {start!r} but previous band ends at "
                    f"{prev_end!r} (bands must tile [0, inf) with no gaps)"
                )
            if end is None:
                if not last:
                    raise DomainError(f"band {i}: only the final band may be open-ended")
            else:
                end = float(end)
                if end <= start:
                    raise DomainError(f"band {i}: end {end!r} must exceed start {start!r}")
                if last:
                    raise DomainError("final band must be open-ended (end null)")
                prev_end = end
            rate = float(rate)
            if not (math.isfinite(rate) and rate > 0.0):
                raise DomainError(f"band {i}: rate must be positive, got {rate!r}")

    @classmethod
    def from_config(cls, cfg: dict) -> "STPRSchedule":
        if not isinstance(cfg, dict) or "bands" not in cfg:
            raise DomainError("schedule config must be an object with a 'bands' key")
        return cls(tuple(tuple(b) for b in cfg["bands"]), cfg.get("components"))

    @classmethod
    def load(cls, path) -> "STPRSchedule":
        with open(path, "r", encoding="utf-8") as fh:
            try:
                cfg = json.load(fh)
            except json.JSONDecodeError as exc:
                raise DomainError(f"{path}: invalid JSON ({exc})") from None
        return cls.from_config(cfg)

    @property
    def boundaries(self) -> list[float]:
        return [float(b[1]) for b in self.bands if b[1] is not None]

    def rate_at(self, t: float) -> float:
        t = float(t)
        if t < 0.0:
            raise DomainError(f"time must be nonnegative, got {t!r}")
        for start, end, rate in self.bands:
            if end is None or t < float(end):
                return float(rate)
        raise AssertionError("bands must cover [0, inf)")

    def neg_log_df(self, t: float) -> float:
        """-ln P(0,t) under forward-band compounding (continuous P)."""
        t = float(t)
        total = 0.0
        for start, end, rate in self.bands:
            hi = t if end is None else min(float(end), t)
            if hi <= float(start):
                break
            total += float(rate) * (hi - float(start))
        return total

    def curve(self, grid=None, spot: bool = False) -> DiscountCurve:
        g = default_curve_grid() if grid is None else np.asarray(grid, dtype=float)
        g = np.unique(np.concatenate([g, self.boundaries]))
        if spot:
            values = np.array([math.exp(-self.rate_at(t) * t) for t in g])
        else:
            values = np.array([math.exp(-self.neg_log_df(t)) for t in g])
        tail_rate = float(self.bands[-1][2])
        return DiscountCurve(g, values, ExponentialTail(tail_rate))


def cmd_greenbook(args) -> int:
    ref = args.schedule
    if os.path.exists(ref):
        schedule = STPRSchedule.load(ref)
    else:
        packaged = _packaged(ref if ref.endswith(".json") else ref + ".json")
        if not packaged.is_file():
            raise DomainError(f"cannot resolve schedule {ref!r}")
        with resources.as_file(packaged) as fp:
            schedule = STPRSchedule.load(fp)
    curve = schedule.curve(spot=args.spot_rates)
    maturities = (
        _parse_floats(args.times, "--times")
        if args.times
        else [1.0, 5.0, 10.0, 20.0, 30.0, 50.0, 75.0, 100.0, 125.0, 150.0,
              200.0, 250.0, 300.0, 400.0, 500.0, 1000.0]
    )
    print("band_start,band_end,rate")
    for start, end, rate in schedule.bands:
        end_text = "inf" if end is None else _fmt(end)
        print(f"{_fmt(start)},{end_text},{_fmt(rate)}")
    print("maturity_years,discount_factor,exponential_rate")
    rows = []
    for t in maturities:
        df = math.exp(curve.log_df(t))
        rate = rate_from_log_discount(Tenor(0.0, t), RateConvention.exponential(), curve.log_df(t))
        rows.append({"maturity": t, "discount_factor": df, "exponential_rate": rate})
        print(f"{_fmt(t)},{_fmt(df)},{_fmt(rate)}")
    probes = [(10.0, 10.0), (10.0, 20.0), (15.0, 15.0), (20.0, 40.0), (30.0, 30.0),
              (50.0, 50.0), (75.0, 75.0), (100.0, 100.0), (150.0, 150.0)]
    residual = time_consistency_residual(curve, probes)
    print(f"time_consistency_residual {_fmt(residual)}")
    classification = classify_curve(curve)
    print(f"tail_class {classification.kind}")
    doc = {
        "bands": [[b[0], b[1], b[2]] for b in schedule.bands],
        "components": schedule.components,
        "interpretation": "spot" if args.spot_rates else "forward",
        "rows": rows,
        "time_consistency_residual": residual,
        "classification": classification.as_dict(),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("maturity_years,discount_factor,exponential_rate\n")
            for row in rows:
                fh.write(
                    f"{_fmt(row['maturity'])},{_fmt(row['discount_factor'])},"
                    f"{_fmt(row['exponential_rate'])}\n"
                )
    if args.json:
        _emit_json(doc, args.json)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------


def _add_state_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--t", type=float, default=0.0, help="state time (years)")
    p.add_argument("--m", type=float, default=1.0, help="first factor value")
    p.add_argument("--n", type=float, default=None, help="second factor value (two-factor)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="longrate",
        description="Term-structure analytics: conversions, kernels, long-rate audits.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("convert", help="convert a rate between quotation conventions")
    p.add_argument("--t", type=float, default=0.0)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--from", dest="conv_from", required=True,
                   help="exp | libor | pareto:<lam> | zc:<kappa>")
    p.add_argument("--to", dest="conv_to", required=True)
    p.add_argument("--value", type=float, required=True)
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("curve", help="inspect a discount curve")
    p.add_argument("--curve", required=True, help="CSV path, flat:<r>, pareto:<lam>:<L>, or name")
    p.add_argument("--times", help="comma-separated maturities")
    p.add_argument("--probes", help="time-consistency probes t:x;t:x;...")
    p.add_argument("--out", help="write normalized curve CSV here")
    p.add_argument("--json", help="write summary JSON here")
    p.set_defaults(func=cmd_curve)

    p = sub.add_parser("aggregate", help="aggregate discount functions from rate mixtures")
    p.add_argument("--mix", required=True, help="mixture JSON (file or inline)")
    p.add_argument("--times", default="0,10,100,1000")
    p.add_argument("--estimate", action="store_true",
                   help="estimate the asymptotic exponential rate")
    p.add_argument("--sample", type=int, help="sample this many calamity times")
    p.add_argument("--seed", type=int)
    p.add_argument("--cap", type=float, default=1e4)
    p.add_argument("--out", help="CSV file for sampled times")
    p.set_defaults(func=cmd_aggregate)

    p = sub.add_parser("simulate", help="simulate martingale driver paths")
    p.add_argument("--model", required=True)
    p.add_argument("--grid", default="lin:0:10:21")
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("value", help="price a cash-flow schedule under a model")
    p.add_argument("--model", required=True)
    _add_state_args(p)
    p.add_argument("--flow", action="append", required=True,
                   help='e.g. "T=10,amount=1" or "T=1,payoff=M" (repeatable)')
    p.add_argument("--paths", type=int, default=100_000)
    p.add_argument("--seed", type=int)
    p.add_argument("--rho", type=float, default=0.0)
    p.add_argument("--simulate-constants", action="store_true")
    p.add_argument("--json", help="write the valuation report here")
    p.set_defaults(func=cmd_value)

    p = sub.add_parser("longrate", help="estimate a long rate")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--model")
    group.add_argument("--curve")
    _add_state_args(p)
    p.add_argument("--conv", required=True)
    p.add_argument("--horizon", type=float, default=1e8)
    p.add_argument("--trace", help="write horizon,rate trace CSV here")
    p.add_argument("--json")
    p.set_defaults(func=cmd_longrate)

    p = sub.add_parser("classify", help="classify a curve's tail decay law")
    p.add_argument("--curve", required=True)
    p.add_argument("--window", help="fit window lo:hi")
    p.add_argument("--json")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("audit", help="run a structural audit")
    audit_sub = p.add_subparsers(dest="audit_kind", required=True)

    q = audit_sub.add_parser("dir", help="long-rate monotonicity audit")
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--model")
    group.add_argument("--curve")
    q.add_argument("--times", default="0,1,2,5,10")
    q.add_argument("--seed", type=int)
    q.add_argument("--n", type=int, default=1000)
    q.add_argument("--rho", type=float, default=0.0)
    q.add_argument("--kappa", type=float, default=1.0)
    q.add_argument("--horizon", type=float, default=1e8)
    q.add_argument("--json")
    q.set_defaults(func=_audit_dir)

    q = audit_sub.add_parser("strat", help="long-rate stratification audit")
    group = q.add_mutually_exclusive_group(required=True)
    group.add_argument("--model")
    group.add_argument("--curve")
    _add_state_args(q)
    q.add_argument("--indices", default="1,2,3")
    q.add_argument("--horizon", type=float, default=1e8)
    q.add_argument("--json")
    q.set_defaults(func=_audit_strat)

    q = audit_sub.add_parser("kernel", help="pricing-kernel admissibility audit")
    q.add_argument("--model", required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--n", type=int, default=20_000)
    q.add_argument("--grid", default="0,0.5,1,2,5,10")
    q.add_argument("--maturity", type=float, default=10.0)
    q.add_argument("--rho", type=float, default=0.0)
    q.add_argument("--json")
    q.set_defaults(func=_audit_kernel)

    q = audit_sub.add_parser("pareto", help="tail-Pareto kernel certificate")
    q.add_argument("--model", required=True)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--n", type=int, default=20_000)
    q.add_argument("--grid", default="geom:1:1e4:29")
    q.add_argument("--lam", type=float, default=None,
                   help="audit at this index (default: the model's)")
    q.add_argument("--rho", type=float, default=0.0)
    q.add_argument("--json")
    q.set_defaults(func=_audit_pareto)

    p = sub.add_parser("greenbook", help="build a curve from a banded STPR schedule")
    p.add_argument("--schedule", required=True, help="schedule JSON (file or packaged name)")
    p.add_argument("--spot-rates", action="store_true",
                   help="interpret band rates as spot (not forward) rates")
    p.add_argument("--times")
    p.add_argument("--out", help="write curve table CSV here")
    p.add_argument("--json")
    p.set_defaults(func=cmd_greenbook)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except LongrateError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
