"""Rational pricing-kernel models with power-law tails.

A one-factor model is pi_t = a(t) + b(t) M_t where M is a positive
martingale with M_0 = 1 and a, b are strictly positive C1 functions
decaying like t^-lam with finite tail limits

    A = lim t^lam a(t),   B = lim t^lam b(t),   A + B > 0.

Bond prices are the conditional-expectation quotient

    P(t, T) = (a(T) + b(T) M_t) / (a(t) + b(t) M_t),

the short rate is r_t = -(a'(t) + b'(t) M_t) / (a(t) + b(t) M_t), and the
long tail-Pareto rate of index lam is

    L_t = ((a(t) + b(t) M_t) / (abar + bbar M_t)) ** (1/lam),

with abar = A * lam**-lam, bbar = B * lam**-lam (for lam = 1 this is the
long simple rate).  Because bond prices are monotone rational functions
of the factor, the state can be recovered from either rate and bonds can
be quoted directly against them.

Two-factor models pi_t = a(t) + b(t) M_t + c(t) N_t (tail index fixed at
1) additionally admit the linear pricing decomposition

    P(t, T) = F + G * r_t + H / L_t

whose coefficients solve a 3x3 linear system in (F, G, H); see
``fgh_coefficients``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .drivers import GBMDriver
from .errors import (
    DegenerateModelError,
    DomainError,
    UnattainableRateError,
    UnsupportedOperationError,
)
from .termstructure import DiscountCurve, ParetoTail

__all__ = [
    "CoefficientFunction",
    "ModelState",
    "OneFactorModel",
    "TwoFactorModel",
    "FGHCoefficients",
    "kernel_value",
    "expected_kernel",
    "theta_value",
    "bond_price",
    "bond_log_df",
    "BondEvaluator",
    "bond_evaluator",
    "bond_price_1f",
    "short_rate_1f",
    "long_libor_1f",
    "long_pareto_1f",
    "state_from_short_rate_1f",
    "state_from_long_rate_1f",
    "bond_from_short_rate_1f",
    "bond_from_long_rate_1f",
    "attainable_short_rates",
    "attainable_long_rates",
    "bond_price_2f",
    "short_rate_2f",
    "long_libor_2f",
    "fgh_coefficients",
    "fit_initial_curve",
    "model_from_config",
    "model_to_config",
    "load_model_config",
    "save_model_config",
]

# Rank-deficiency threshold for state inversions, relative to the size of
# the terms entering the determinant.
_DEGENERACY_RTOL = 1e-14

_POSITIVITY_PROBES = (0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 50.0, 100.0)
_TAIL_PROBE = 1e6
_TAIL_RTOL = 1e-3


def _as_float(name, value):
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class CoefficientFunction:
    """A strictly positive C1 coefficient with declared power-law tail.

    ``fn`` evaluates the coefficient (must broadcast over numpy arrays);
    ``deriv`` evaluates its derivative, or is None for sampled-curve
    coefficients, in which case short-rate operations are unsupported.
    ``lam`` is the tail index and ``tail_limit`` the declared value of
    lim t^lam fn(t) (0 is allowed, e.g. for exponentially damped terms).
    """

    fn: Callable
    deriv: Callable | None
    lam: float
    tail_limit: float
    family: str = "user"
    params: dict | None = None

    def __post_init__(self):
        lam = _as_float("tail index", self.lam)
        if lam <= 0.0:
            raise DomainError(f"tail index must be positive, got {lam!r}")
        tl = _as_float("tail limit", self.tail_limit)
        if tl < 0.0:
            raise DomainError(f"tail limit must be nonnegative, got {tl!r}")

    def __call__(self, t):
        return self.fn(t)

    @property
    def differentiable(self) -> bool:
        return self.deriv is not None

    def derivative(self, t):
        if self.deriv is None:
            raise UnsupportedOperationError(
                "coefficient has no derivative evaluator (sampled-curve variant); "
                "short-rate operations are unavailable"
            )
        return self.deriv(t)

    def validate(self) -> None:
        """Check positivity on probe points and the declared tail limit.

        The tail check compares t^lam * fn(t) at t = 1e6 against
        ``tail_limit`` with relative tolerance 1e-3 (floored at the same
        absolute level); it rejects e.g. constant coefficients, whose
        lim inf does not vanish.
        """
        for p in _POSITIVITY_PROBES:
            v = float(self.fn(p))
            if not (math.isfinite(v) and v > 0.0):
                raise DomainError(
                    f"coefficient must be strictly positive, got {v!r} at t={p!r}"
                )
            if self.deriv is not None and not math.isfinite(float(self.deriv(p))):
                raise DomainError(f"coefficient derivative not finite at t={p!r}")
        scaled = _TAIL_PROBE**self.lam * float(self.fn(_TAIL_PROBE))
        tol = _TAIL_RTOL * max(1.0, abs(self.tail_limit))
        if not math.isfinite(scaled) or abs(scaled - self.tail_limit) > tol:
            raise DomainError(
                f"declared tail limit {self.tail_limit!r} not matched: "
                f"t^lam * f(t) = {scaled!r} at t={_TAIL_PROBE:g}"
            )

    # -- catalogue ---------------------------------------------------------

    @classmethod
    def rational(
        cls, scale: float, shift: float, lam: float, power: float | None = None
    ) -> "CoefficientFunction":
        """f(t) = scale / (shift + t)**power, power >= lam (default power = lam)."""
        scale = _as_float("scale", scale)
        shift = _as_float("shift", shift)
        lam = _as_float("lam", lam)
        power = lam if power is None else _as_float("power", power)
        if scale <= 0.0 or shift <= 0.0 or power <= 0.0:
            raise DomainError("rational coefficient needs positive scale, shift, power")
        if power < lam:
            raise DomainError(
                f"decay power {power!r} below tail index {lam!r}: tail limit diverges"
            )
        tail = scale if power == lam else 0.0

        def fn(t, _s=scale, _h=shift, _p=power):
            return _s * (_h + np.asarray(t, dtype=float)) ** -_p

        def deriv(t, _s=scale, _h=shift, _p=power):
            return -_p * _s * (_h + np.asarray(t, dtype=float)) ** -(_p + 1.0)

        return cls(fn, deriv, lam, tail, "rational",
                   {"scale": scale, "shift": shift, "power": power})

    @classmethod
    def exp_rational(
        cls, scale: float, shift: float, power: float, decay: float, lam: float
    ) -> "CoefficientFunction":
        """f(t) = scale * exp(-decay t) / (shift + t)**power with decay > 0.

        The tail limit under any power-law index is 0, so such terms can
        only appear alongside a genuinely rational coefficient.
        """
        scale = _as_float("scale", scale)
        shift = _as_float("shift", shift)
        power = _as_float("power", power)
        decay = _as_float("decay", decay)
        lam = _as_float("lam", lam)
        if scale <= 0.0 or shift <= 0.0 or power < 0.0 or decay <= 0.0:
            raise DomainError(
                "exp_rational coefficient needs positive scale, shift, decay and "
                "nonnegative power"
            )

        def fn(t, _s=scale, _h=shift, _p=power, _d=decay):
            tt = np.asarray(t, dtype=float)
            return _s * np.exp(-_d * tt) * (_h + tt) ** -_p

        def deriv(t, _s=scale, _h=shift, _p=power, _d=decay):
            tt = np.asarray(t, dtype=float)
            return -_s * np.exp(-_d * tt) * (_h + tt) ** -(_p + 1.0) * (
                _d * (_h + tt) + _p
            )

        return cls(fn, deriv, lam, 0.0, "exp_rational",
                   {"scale": scale, "shift": shift, "power": power, "decay": decay})

    @classmethod
    def user_defined(
        cls,
        fn: Callable,
        deriv: Callable | None,
        lam: float,
        tail_limit: float,
    ) -> "CoefficientFunction":
        """Wrap user callables; the declared tail limit is checked numerically."""
        return cls(fn, deriv, lam, tail_limit, "user", None)


@dataclass(frozen=True)
class ModelState:
    """Factor values at a point in time.  ``n`` is None for one-factor models."""

    t: float
    m: float
    n: float | None = None

    def __post_init__(self):
        t = _as_float("t", self.t)
        if t < 0.0:
            raise DomainError(f"state time must be nonnegative, got {t!r}")
        m = _as_float("m", self.m)
        if m <= 0.0:
            raise DomainError(f"martingale factor m must be positive, got {m!r}")
        if self.n is not None:
            n = _as_float("n", self.n)
            if n <= 0.0:
                raise DomainError(f"martingale factor n must be positive, got {n!r}")


def _check_same_lam(coeffs: Sequence[CoefficientFunction]) -> float:
    lams = {c.lam for c in coeffs}
    if len(lams) != 1:
        raise DomainError(f"coefficients must share one tail index, got {sorted(lams)}")
    return lams.pop()


@dataclass(frozen=True)
class OneFactorModel:
    """pi_t = a(t) + b(t) M_t with tail index lam shared by a and b."""

    a: CoefficientFunction
    b: CoefficientFunction
    driver: GBMDriver | None = None

    def __post_init__(self):
        lam = _check_same_lam((self.a, self.b))
        self.a.validate()
        self.b.validate()
        if self.a.tail_limit + self.b.tail_limit <= 0.0:
            raise DomainError("tail limits must satisfy A + B > 0")
        object.__setattr__(self, "_lam", lam)

    @property
    def lam(self) -> float:
        return self._lam

    @property
    def factors(self) -> int:
        return 1

    @property
    def abar(self) -> float:
        return self.a.tail_limit * self.lam ** -self.lam

    @property
    def bbar(self) -> float:
        return self.b.tail_limit * self.lam ** -self.lam

    @property
    def differentiable(self) -> bool:
        return self.a.differentiable and self.b.differentiable


@dataclass(frozen=True)
class TwoFactorModel:
    """pi_t = a(t) + b(t) M_t + c(t) N_t, tail index fixed at 1."""

    a: CoefficientFunction
    b: CoefficientFunction
    c: CoefficientFunction
    drivers: tuple[GBMDriver, GBMDriver] | None = None

    def __post_init__(self):
        lam = _check_same_lam((self.a, self.b, self.c))
        if lam != 1.0:
            raise DomainError(f"two-factor models require tail index 1, got {lam!r}")
        for coef in (self.a, self.b, self.c):
            coef.validate()
        if self.a.tail_limit + self.b.tail_limit + self.c.tail_limit <= 0.0:
            raise DomainError("tail limits must satisfy A + B + C > 0")
        if self.drivers is not None and len(self.drivers) != 2:
            raise DomainError("two-factor models need exactly two drivers")

    @property
    def lam(self) -> float:
        return 1.0

    @property
    def factors(self) -> int:
        return 2

    @property
    def differentiable(self) -> bool:
        return all(f.differentiable for f in (self.a, self.b, self.c))


Model = OneFactorModel | TwoFactorModel


def _state_for(model, state: ModelState) -> ModelState:
    if isinstance(model, OneFactorModel):
        if state.n is not None:
            raise DomainError("one-factor model takes a state without n")
    elif isinstance(model, TwoFactorModel):
        if state.n is None:
            raise DomainError("two-factor model needs a state with n")
    else:
        raise DomainError(f"unknown model type {type(model).__name__}")
    return state


def kernel_value(model: Model, state: ModelState) -> float:
    """pi at the given state."""
    _state_for(model, state)
    v = float(model.a(state.t)) + float(model.b(state.t)) * state.m
    if isinstance(model, TwoFactorModel):
        v += float(model.c(state.t)) * state.n
    return v


def expected_kernel(model: Model, t: float) -> float:
    """E[pi_t] = a(t) + b(t) (+ c(t)); the martingales have unit mean."""
    v = float(model.a(t)) + float(model.b(t))
    if isinstance(model, TwoFactorModel):
        v += float(model.c(t))
    return v


def theta_value(model: Model, state: ModelState) -> float:
    """theta_t = lim inf_T E_t[T^lam pi_T], the benchmark dual to the long rate.

    For these rational models theta_t = lam^lam * (abar + bbar M_t)
    = A + B M_t (plus C N_t in the two-factor case), a positive
    martingale, so the supermartingale property holds with equality.
    """
    _state_for(model, state)
    if isinstance(model, OneFactorModel):
        return model.a.tail_limit + model.b.tail_limit * state.m
    return (
        model.a.tail_limit
        + model.b.tail_limit * state.m
        + model.c.tail_limit * state.n
    )


# ---------------------------------------------------------------------------
# Bond prices and rates
# ---------------------------------------------------------------------------


def _check_maturity(t: float, T: float) -> None:
    if not math.isfinite(float(T)) or float(T) < float(t):
        raise DomainError(f"maturity must satisfy T >= t, got t={t!r}, T={T!r}")


def bond_price_1f(model: OneFactorModel, state: ModelState, T: float) -> float:
    """P(t, T) = (a(T) + b(T) M_t) / (a(t) + b(t) M_t)."""
    _state_for(model, state)
    _check_maturity(state.t, T)
    num = float(model.a(T)) + float(model.b(T)) * state.m
    return num / kernel_value(model, state)


def bond_price_2f(model: TwoFactorModel, state: ModelState, T: float) -> float:
    _state_for(model, state)
    _check_maturity(state.t, T)
    num = (
        float(model.a(T))
        + float(model.b(T)) * state.m
        + float(model.c(T)) * state.n
    )
    return num / kernel_value(model, state)


def bond_price(model: Model, state: ModelState, T: float) -> float:
    if isinstance(model, OneFactorModel):
        return bond_price_1f(model, state, T)
    return bond_price_2f(model, state, T)


def bond_log_df(model: Model, state: ModelState, T: float) -> float:
    """ln P(t, T); numerator and denominator are positive by construction."""
    _state_for(model, state)
    _check_maturity(state.t, T)
    num = float(model.a(T)) + float(model.b(T)) * state.m
    if isinstance(model, TwoFactorModel):
        num += float(model.c(T)) * state.n
    return math.log(num) - math.log(kernel_value(model, state))


@dataclass(frozen=True)
class BondEvaluator:
    """Bond evaluator at a fixed state, exposing df and log df.

    The asymptotics estimators accept this object (they use ``log_df`` to
    stay accurate at extreme horizons).
    """

    model: Model
    state: ModelState

    def log_df(self, t: float, T: float) -> float:
        if float(t) != float(self.state.t):
            raise DomainError(
                f"evaluator is anchored at t={self.state.t!r}, got t={t!r}"
            )
        return bond_log_df(self.model, self.state, T)

    def df(self, t: float, T: float) -> float:
        return math.exp(self.log_df(t, T))

    def __call__(self, t: float, T: float) -> float:
        return self.df(t, T)


def bond_evaluator(model: Model, state: ModelState) -> BondEvaluator:
    """Anchor a model at a state for use with the long-rate estimators."""
    _state_for(model, state)
    return BondEvaluator(model, state)


def short_rate_1f(model: OneFactorModel, state: ModelState) -> float:
    """r_t = -(a'(t) + b'(t) M_t) / (a(t) + b(t) M_t)."""
    _state_for(model, state)
    num = float(model.a.derivative(state.t)) + float(model.b.derivative(state.t)) * state.m
    return -num / kernel_value(model, state)


def short_rate_2f(model: TwoFactorModel, state: ModelState) -> float:
    _state_for(model, state)
    num = (
        float(model.a.derivative(state.t))
        + float(model.b.derivative(state.t)) * state.m
        + float(model.c.derivative(state.t)) * state.n
    )
    return -num / kernel_value(model, state)


def long_pareto_1f(model: OneFactorModel, state: ModelState) -> float:
    """Long tail-Pareto rate of the model's own index lam.

    L = ((a(t) + b(t) M_t) / (abar + bbar M_t)) ** (1/lam).
    """
    _state_for(model, state)
    bench = model.abar + model.bbar * state.m
    return (kernel_value(model, state) / bench) ** (1.0 / model.lam)


def long_libor_1f(model: OneFactorModel, state: ModelState) -> float:
    """Long simple (Libor) rate; defined for tail index 1 models only.

    For lam != 1 the simple long rate is degenerate (0 or infinite); use
    ``long_pareto_1f`` at the model's own index instead.
    """
    if model.lam != 1.0:
        raise DomainError(
            f"long simple rate needs tail index 1, model has lam={model.lam!r}; "
            "use long_pareto_1f"
        )
    return long_pareto_1f(model, state)


def long_libor_2f(model: TwoFactorModel, state: ModelState) -> float:
    """L = (a(t) + b(t) M_t + c(t) N_t) / (A + B M_t + C N_t)."""
    _state_for(model, state)
    bench = (
        model.a.tail_limit
        + model.b.tail_limit * state.m
        + model.c.tail_limit * state.n
    )
    return kernel_value(model, state) / bench


# ---------------------------------------------------------------------------
# State inversions and bond quotes against rates
# ---------------------------------------------------------------------------


def _coef_at(model: OneFactorModel, t: float):
    a_t = float(model.a(t))
    b_t = float(model.b(t))
    ap = float(model.a.derivative(t))
    bp = float(model.b.derivative(t))
    return a_t, b_t, ap, bp


def _short_rate_wronskian(model: OneFactorModel, t: float):
    a_t, b_t, ap, bp = _coef_at(model, t)
    w = a_t * bp - b_t * ap
    scale = abs(a_t * bp) + abs(b_t * ap)
    if abs(w) <= _DEGENERACY_RTOL * scale:
        raise DegenerateModelError(
            "NO_INVERSE",
            f"short rate at t={t:g} does not depend on the factor "
            "(a'b - ab' vanishes); the state cannot be recovered",
        )
    return a_t, b_t, ap, bp, w


def attainable_short_rates(model: OneFactorModel, t: float) -> tuple[float, float]:
    """Open interval of short rates the model can attain at time t."""
    a_t, b_t, ap, bp, _ = _short_rate_wronskian(model, t)
    lo, hi = sorted((-ap / a_t, -bp / b_t))
    return lo, hi


def state_from_short_rate_1f(model: OneFactorModel, t: float, r: float) -> ModelState:
    """Invert r_t for the factor: M = -(a'(t) + r a(t)) / (b'(t) + r b(t))."""
    r = _as_float("short rate", r)
    a_t, b_t, ap, bp, _ = _short_rate_wronskian(model, t)
    lo, hi = sorted((-ap / a_t, -bp / b_t))
    if not lo < r < hi:
        raise UnattainableRateError(r, (lo, hi), "short rate")
    m = -(ap + r * a_t) / (bp + r * b_t)
    return ModelState(t, m)


def bond_from_short_rate_1f(
    model: OneFactorModel, t: float, T: float, r: float
) -> float:
    """Bond price linear in the short rate:

    P = ((a(T) b'(t) - b(T) a'(t)) + (a(T) b(t) - b(T) a(t)) r) / (a(t) b'(t) - b(t) a'(t)).
    """
    r = _as_float("short rate", r)
    _check_maturity(t, T)
    a_t, b_t, ap, bp, w = _short_rate_wronskian(model, t)
    lo, hi = sorted((-ap / a_t, -bp / b_t))
    if not lo < r < hi:
        raise UnattainableRateError(r, (lo, hi), "short rate")
    a_T = float(model.a(T))
    b_T = float(model.b(T))
    return ((a_T * bp - b_T * ap) + (a_T * b_t - b_T * a_t) * r) / w


def _long_rate_determinant(model: OneFactorModel, t: float):
    a_t = float(model.a(t))
    b_t = float(model.b(t))
    abar, bbar = model.abar, model.bbar
    det = a_t * bbar - b_t * abar
    scale = abs(a_t * bbar) + abs(b_t * abar)
    if abs(det) <= _DEGENERACY_RTOL * scale:
        raise DegenerateModelError(
            "NO_INVERSE",
            f"long rate at t={t:g} does not depend on the factor "
            "(a bbar - b abar vanishes); the state cannot be recovered",
        )
    return a_t, b_t, abar, bbar, det


def attainable_long_rates(model: OneFactorModel, t: float) -> tuple[float, float]:
    """Open interval of long rates (model's own index) attainable at time t."""
    a_t, b_t, abar, bbar, _ = _long_rate_determinant(model, t)
    inv = 1.0 / model.lam
    lo, hi = sorted(((a_t / abar) ** inv, (b_t / bbar) ** inv))
    return lo, hi


def state_from_long_rate_1f(model: OneFactorModel, t: float, L: float) -> ModelState:
    """Invert the long rate for the factor via y = L^-lam:

    M = (abar - y a(t)) / (y b(t) - bbar).
    """
    L = _as_float("long rate", L)
    if L <= 0.0:
        raise DomainError(f"long rate must be positive, got {L!r}")
    a_t, b_t, abar, bbar, _ = _long_rate_determinant(model, t)
    lo, hi = attainable_long_rates(model, t)
    if not lo < L < hi:
        raise UnattainableRateError(L, (lo, hi), "long rate")
    y = L ** -model.lam
    m = (abar - y * a_t) / (y * b_t - bbar)
    return ModelState(t, m)


def bond_from_long_rate_1f(model: OneFactorModel, t: float, T: float, L: float) -> float:
    """Bond price inversely linear in the long rate (y = L^-lam):

    P = ((a(T) bbar - b(T) abar) + (a(t) b(T) - b(t) a(T)) y) / (a(t) bbar - b(t) abar).
    """
    L = _as_float("long rate", L)
    if L <= 0.0:
        raise DomainError(f"long rate must be positive, got {L!r}")
    _check_maturity(t, T)
    a_t, b_t, abar, bbar, det = _long_rate_determinant(model, t)
    lo, hi = attainable_long_rates(model, t)
    if not lo < L < hi:
        raise UnattainableRateError(L, (lo, hi), "long rate")
    y = L ** -model.lam
    a_T = float(model.a(T))
    b_T = float(model.b(T))
    return ((a_T * bbar - b_T * abar) + (a_t * b_T - b_t * a_T) * y) / det


@dataclass(frozen=True)
class FGHCoefficients:
    """Coefficients of P(t,T) = F + G * r_t + H / L_t for two-factor models."""

    f: float
    g: float
    h: float


def fgh_coefficients(model: TwoFactorModel, t: float, T: float) -> FGHCoefficients:
    """Solve the pricing decomposition P = F + G r + H / L at (t, T).

    Writing pi = a + bM + cN, each of P, r and 1/L is a ratio with
    denominator pi, so matching coefficients of (1, M, N) gives a 3x3
    linear system with determinant

        D = (b c~ - c b~) a' + (c a~ - a c~) b' + (a b~ - b a~) c'

    evaluated at t, where x~ denotes tail limits.  When D is far from
    zero the unique solution comes out in closed form.  A vanishing D
    means the coefficient rows are dependent; if two coefficient
    functions are globally proportional the system stays consistent and
    the decomposition still exists (just not uniquely), so the minimum
    norm solution is returned.  Only an inconsistent singular system
    (rank drop without a matching right-hand side) reports
    NO_DECOMPOSITION.
    """
    _check_maturity(t, T)
    a_t, b_t, c_t = float(model.a(t)), float(model.b(t)), float(model.c(t))
    ap = float(model.a.derivative(t))
    bp = float(model.b.derivative(t))
    cp = float(model.c.derivative(t))
    A, B, C = model.a.tail_limit, model.b.tail_limit, model.c.tail_limit
    a_T, b_T, c_T = float(model.a(T)), float(model.b(T)), float(model.c(T))
    d_terms = (
        (b_t * C - c_t * B) * ap,
        (c_t * A - a_t * C) * bp,
        (a_t * B - b_t * A) * cp,
    )
    D = sum(d_terms)
    scale = sum(abs(x) for x in d_terms)
    if scale > 0.0 and abs(D) > 1e-9 * scale:
        f = ((B * cp - C * bp) * a_T + (C * ap - A * cp) * b_T + (A * bp - B * ap) * c_T) / D
        g = ((B * c_t - C * b_t) * a_T + (C * a_t - A * c_t) * b_T + (A * b_t - B * a_t) * c_T) / D
        h = ((bp * c_t - cp * b_t) * a_T + (cp * a_t - ap * c_t) * b_T + (ap * b_t - bp * a_t) * c_T) / D
        return FGHCoefficients(f, g, h)
    mat = np.array([[a_t, -ap, A], [b_t, -bp, B], [c_t, -cp, C]])
    rhs = np.array([a_T, b_T, c_T])
    sol, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    residual = float(np.max(np.abs(mat @ sol - rhs)))
    if residual > 1e-10 * max(1.0, float(np.max(np.abs(rhs)))):
        raise DegenerateModelError(
            "NO_DECOMPOSITION",
            f"pricing decomposition is rank-deficient at t={t:g} and the "
            f"coefficient system is inconsistent (residual {residual:.3g})",
        )
    return FGHCoefficients(float(sol[0]), float(sol[1]), float(sol[2]))


# ---------------------------------------------------------------------------
# Calibration from an initial discount curve
# ---------------------------------------------------------------------------


def fit_initial_curve(
    curve: DiscountCurve,
    weights: Sequence,
    drivers=None,
) -> Model:
    """Split an initial discount curve into kernel coefficients.

    Each coefficient is w_i(t) * P(0, t) for a weight w_i in (0, 1); the
    weights (constants or callables of t) must sum to 1, so the fitted
    model reproduces the input curve at time 0 exactly.  Two weights give
    a one-factor model, three a two-factor model (index 1).

    The curve must carry a tail-Pareto asymptotic model: the coefficient
    tail limits are w_i * K with K = lim t^lam P(0, t), which a curve
    with an exponential (or no) tail does not have.  Coefficients built
    this way have no derivative evaluator, so short-rate operations on
    the fitted model report UNSUPPORTED.
    """
    if not isinstance(curve.tail, ParetoTail):
        raise DomainError(
            "fit_initial_curve needs a curve with a tail-Pareto asymptotic model "
            "(power-law tail limits do not exist otherwise)"
        )
    lam = curve.tail.lam
    n = len(weights)
    if n not in (2, 3):
        raise DomainError(f"need 2 or 3 weights, got {n}")
    if n == 3 and lam != 1.0:
        raise DomainError("two-factor fits require a curve with tail index 1")

    wfns = []
    for i, w in enumerate(weights):
        if callable(w):
            wfns.append(w)
        else:
            wv = _as_float(f"weight {i}", w)
            wfns.append(lambda t, _w=wv: _w * np.ones_like(np.asarray(t, dtype=float)) if np.ndim(t) else _w)

    probes = list(_POSITIVITY_PROBES) + [1e4, _TAIL_PROBE]
    for p in probes:
        vals = [float(np.asarray(w(p))) for w in wfns]
        if any(not 0.0 < v < 1.0 for v in vals):
            raise DomainError(
                f"weights must lie strictly inside (0, 1); got {vals!r} at t={p!r}"
            )
        if abs(sum(vals) - 1.0) > 1e-9:
            raise DomainError(f"weights must sum to 1, got {sum(vals)!r} at t={p!r}")

    K = curve.tail.tail_constant(curve.horizon, curve.log_df(curve.horizon))
    coeffs = []
    for w in wfns:
        w_inf = float(np.asarray(w(_TAIL_PROBE)))

        def fn(t, _w=w, _c=curve):
            return np.asarray(_w(t)) * _c.df(t)

        coeffs.append(
            CoefficientFunction(fn, None, lam, w_inf * K, "curve_split", None)
        )
    if n == 2:
        return OneFactorModel(coeffs[0], coeffs[1], driver=drivers)
    return TwoFactorModel(coeffs[0], coeffs[1], coeffs[2], drivers=drivers)


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------


def _cfg_get(cfg: dict, path: str):
    node = cfg
    walked = []
    for key in path.split("."):
        walked.append(key)
        if not isinstance(node, dict) or key not in node:
            raise DomainError(f"model config missing key {'.'.join(walked)!r}")
        node = node[key]
    return node


def _coefficient_from_config(cfg: dict, path: str, lam: float) -> CoefficientFunction:
    family = _cfg_get(cfg, f"{path}.family")
    params = _cfg_get(cfg, f"{path}.params")
    if family == "rational":
        coef = CoefficientFunction.rational(
            _cfg_get(cfg, f"{path}.params.scale"),
            _cfg_get(cfg, f"{path}.params.shift"),
            lam,
            params.get("power"),
        )
    elif family == "exp_rational":
        coef = CoefficientFunction.exp_rational(
            _cfg_get(cfg, f"{path}.params.scale"),
            _cfg_get(cfg, f"{path}.params.shift"),
            params.get("power", 0.0),
            _cfg_get(cfg, f"{path}.params.decay"),
            lam,
        )
    else:
        raise DomainError(f"model config {path}.family: unknown family {family!r}")
    node = _cfg_get(cfg, path)
    if "tail_limit" in node:
        declared = float(node["tail_limit"])
        if abs(declared - coef.tail_limit) > 1e-9 * max(1.0, abs(coef.tail_limit)):
            raise DomainError(
                f"model config {path}.tail_limit: declared {declared!r} but family "
                f"implies {coef.tail_limit!r}"
            )
    return coef


def _driver_from_config(cfg: dict, path: str) -> GBMDriver:
    kind = _cfg_get(cfg, f"{path}.type")
    if kind != "gbm":
        raise DomainError(f"model config {path}.type: unknown driver type {kind!r}")
    sched = _cfg_get(cfg, f"{path}.sigma")
    if isinstance(sched, (int, float)):
        return GBMDriver.constant(float(sched))
    return GBMDriver.from_schedule(sched)


def model_from_config(cfg: dict) -> Model:
    """Build a model from its JSON-style config dict.

    Layout::

        {"factors": 1, "lambda": 1.0,
         "coefficients": {"a": {"family": "rational",
                                "params": {"scale": 0.5, "shift": 1.0},
                                "tail_limit": 0.5},
                          "b": {...}},
         "drivers": {"m": {"type": "gbm", "sigma": [[0.0, 0.2]]}}}

    Two-factor configs use coefficients a, b, c and drivers m, n; the
    sigma entry may be a single number (constant volatility) or a list of
    [start_time, sigma] pairs.
    """
    factors = _cfg_get(cfg, "factors")
    lam = float(_cfg_get(cfg, "lambda"))
    if factors == 1:
        a = _coefficient_from_config(cfg, "coefficients.a", lam)
        b = _coefficient_from_config(cfg, "coefficients.b", lam)
        driver = None
        if "drivers" in cfg:
            driver = _driver_from_config(cfg, "drivers.m")
        return OneFactorModel(a, b, driver=driver)
    if factors == 2:
        a = _coefficient_from_config(cfg, "coefficients.a", lam)
        b = _coefficient_from_config(cfg, "coefficients.b", lam)
        c = _coefficient_from_config(cfg, "coefficients.c", lam)
        drivers = None
        if "drivers" in cfg:
            drivers = (
                _driver_from_config(cfg, "drivers.m"),
                _driver_from_config(cfg, "drivers.n"),
            )
        return TwoFactorModel(a, b, c, drivers=drivers)
    raise DomainError(f"model config factors: expected 1 or 2, got {factors!r}")


def _coefficient_to_config(coef: CoefficientFunction) -> dict:
    if coef.params is None:
        raise DomainError(
            f"coefficient family {coef.family!r} has no JSON form "
            "(user-defined or curve-split evaluators are not serialisable)"
        )
    return {
        "family": coef.family,
        "params": dict(coef.params),
        "tail_limit": coef.tail_limit,
    }


def model_to_config(model: Model) -> dict:
    cfg: dict = {"factors": model.factors, "lambda": model.lam}
    if isinstance(model, OneFactorModel):
        cfg["coefficients"] = {
            "a": _coefficient_to_config(model.a),
            "b": _coefficient_to_config(model.b),
        }
        if model.driver is not None:
            cfg["drivers"] = {"m": {"type": "gbm", "sigma": model.driver.schedule()}}
    else:
        cfg["coefficients"] = {
            "a": _coefficient_to_config(model.a),
            "b": _coefficient_to_config(model.b),
            "c": _coefficient_to_config(model.c),
        }
        if model.drivers is not None:
            cfg["drivers"] = {
                "m": {"type": "gbm", "sigma": model.drivers[0].schedule()},
                "n": {"type": "gbm", "sigma": model.drivers[1].schedule()},
            }
    return cfg


def load_model_config(path) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DomainError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(cfg, dict):
        raise DomainError(f"{path}: model config must be a JSON object")
    return model_from_config(cfg)


def save_model_config(model: Model, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(model_to_config(model), fh, indent=2, sort_keys=True)
        fh.write("\n")
