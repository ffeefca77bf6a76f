"""longrate: term-structure analytics for the very long run.

Rate-convention algebra, aggregation-based discount functions, rational
pricing-kernel models with closed-form bond prices, seeded Monte Carlo,
and numerical audits of long-rate asymptotics.
"""

from .errors import (
    DegenerateModelError,
    DomainError,
    ExtrapolationError,
    InadmissibleCurveError,
    LongrateError,
    UnattainableRateError,
    UnsupportedOperationError,
)
from .termstructure import (
    DiscountCurve,
    ExponentialTail,
    OrderingReport,
    ParetoTail,
    RateConvention,
    RateQuote,
    Tenor,
    convert_rate,
    curve_from_function,
    default_curve_grid,
    discount_from_rate,
    flat_exponential_curve,
    forward_discount,
    load_curve_csv,
    log_discount_from_rate,
    ordering_audit,
    rate_from_discount,
    rate_from_log_discount,
    save_curve_csv,
    tail_pareto_curve,
    time_consistency_residual,
)
from .aggregation import (
    AsymptoticRateEstimate,
    CalamityTimeSample,
    DiscreteMixture,
    ExponentialMixture,
    GammaMixture,
    aggregate_discount,
    asymptotic_exponential_rate,
    empirical_survival,
    log_aggregate_discount,
    sample_calamity_time,
)
from .drivers import GBMDriver
from .kernel_models import (
    BondEvaluator,
    CoefficientFunction,
    FGHCoefficients,
    ModelState,
    OneFactorModel,
    TwoFactorModel,
    attainable_long_rates,
    attainable_short_rates,
    bond_evaluator,
    bond_from_long_rate_1f,
    bond_from_short_rate_1f,
    bond_log_df,
    bond_price,
    bond_price_1f,
    bond_price_2f,
    expected_kernel,
    fgh_coefficients,
    fit_initial_curve,
    kernel_value,
    load_model_config,
    long_libor_1f,
    long_libor_2f,
    long_pareto_1f,
    model_from_config,
    model_to_config,
    save_model_config,
    short_rate_1f,
    short_rate_2f,
    state_from_long_rate_1f,
    state_from_short_rate_1f,
    theta_value,
)
from .montecarlo import (
    CashFlow,
    CashFlowSchedule,
    FlowValuation,
    PathEnsemble,
    ValuationResult,
    deflated_bond_martingale_check,
    ensemble_for_model,
    kernel_condition_audit,
    kernel_paths,
    simulate_paths,
    value_claim,
    write_ensemble_csv,
)
from .asymptotics import (
    AsymptoticClass,
    CurveForwardEvaluator,
    FitDiagnostics,
    LongRateEstimate,
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
from .reporting import FAIL, INCONCLUSIVE, PASS, AuditReport, CheckResult
from . import zoo

__version__ = "0.1.0"
