"""Aggregation of heterogeneous constant-rate discounting.

If a population discounts at rates distributed as mu(dr) on [0, inf),
the aggregate discount factor is the Laplace transform

    P(0, t) = integral exp(-r t) mu(dr).

Three mixing laws are supported:

* a discrete mixture sum_i p_i exp(-r_i t),
* an exponential law with mean rate L, giving the hyperbolic curve
  P = 1 / (1 + L t),
* a gamma law with shape lam and mean rate L (inverse scale lam / L),
  giving P = (1 + L t / lam) ** -lam.

The asymptotic exponential rate -ln(P)/t of a discrete mixture tends to
the smallest represented rate; for the continuous laws (support reaching
down to 0) it tends to 0.  The same Laplace transform is the survival
function of the calamity time tau = Z / R with Z standard exponential
drawn independently of R.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.special import logsumexp

from .errors import DomainError

__all__ = [
    "DiscreteMixture",
    "ExponentialMixture",
    "GammaMixture",
    "RateMixture",
    "aggregate_discount",
    "log_aggregate_discount",
    "asymptotic_exponential_rate",
    "AsymptoticRateEstimate",
    "default_horizon_schedule",
    "sample_calamity_time",
    "CalamityTimeSample",
    "empirical_survival",
]

_CHUNK = 1 << 14  # draws per seeded chunk; fixed so results do not depend on workers


@dataclass(frozen=True)
class DiscreteMixture:
    """Finitely many agents: weights p_i (summing to 1) at rates r_i >= 0."""

    weights: np.ndarray
    rates: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        r = np.asarray(self.rates, dtype=float)
        if w.ndim != 1 or r.ndim != 1 or w.shape != r.shape or w.size == 0:
            raise DomainError("weights and rates must be 1-d arrays of equal length")
        if not np.all(np.isfinite(w)) or not np.all(np.isfinite(r)):
            raise DomainError("weights and rates must be finite")
        if np.any(w <= 0.0):
            raise DomainError("weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"weights must sum to 1 within 1e-12, got {w.sum()!r}")
        if np.any(r < 0.0):
            raise DomainError("rates must be nonnegative")
        w = w.copy()
        r = r.copy()
        w.setflags(write=False)
        r.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "rates", r)


@dataclass(frozen=True)
class ExponentialMixture:
    """Exponentially distributed rates with mean ``mean_rate``."""

    mean_rate: float

    def __post_init__(self):
        L = float(self.mean_rate)
        if not math.isfinite(L) or L <= 0.0:
            raise DomainError(f"mean rate must be positive, got {self.mean_rate!r}")


@dataclass(frozen=True)
class GammaMixture:
    """Gamma-distributed rates: shape lam, mean ``mean_rate`` (so inverse scale lam/L).

    shape == 1 coincides with ``ExponentialMixture`` at the same mean.
    """

    shape: float
    mean_rate: float

    def __post_init__(self):
        lam = float(self.shape)
        L = float(self.mean_rate)
        if not math.isfinite(lam) or lam <= 0.0:
            raise DomainError(f"shape must be positive, got {self.shape!r}")
        if not math.isfinite(L) or L <= 0.0:
            raise DomainError(f"mean rate must be positive, got {self.mean_rate!r}")


RateMixture = Union[DiscreteMixture, ExponentialMixture, GammaMixture]


def _check_time(t) -> np.ndarray:
    tt = np.asarray(t, dtype=float)
    if np.any(tt < 0.0) or not np.all(np.isfinite(tt)):
        raise DomainError("time must be finite and nonnegative")
    return tt


def log_aggregate_discount(mixture: RateMixture, t):
    """ln P(0, t); safe at horizons where the factor itself underflows."""
    tt = _check_time(t)
    scalar = tt.ndim == 0
    tt = np.atleast_1d(tt)
    if isinstance(mixture, DiscreteMixture):
        # logsumexp over log p_i - r_i t, vectorised over t
        a = np.log(mixture.weights)[None, :] - np.outer(tt, mixture.rates)
        out = logsumexp(a, axis=1)
    elif isinstance(mixture, ExponentialMixture):
        out = -np.log1p(mixture.mean_rate * tt)
    elif isinstance(mixture, GammaMixture):
        out = -mixture.shape * np.log1p(mixture.mean_rate * tt / mixture.shape)
    else:
        raise DomainError(f"unknown mixture type {type(mixture).__name__}")
    return float(out[0]) if scalar else out


def aggregate_discount(mixture: RateMixture, t):
    """Aggregate discount factor P(0, t) = E[exp(-R t)] under the mixture."""
    out = np.exp(log_aggregate_discount(mixture, t))
    return float(out) if np.ndim(t) == 0 else out


def default_horizon_schedule(
    start: float = 10.0, stop: float = 1e6, per_decade: int = 8
) -> np.ndarray:
    """Geometric horizon schedule used by the asymptotic estimators."""
    if not (start > 0.0 and stop > start and per_decade >= 1):
        raise DomainError("need 0 < start < stop and per_decade >= 1")
    n = int(round(per_decade * math.log10(stop / start))) + 1
    return np.geomspace(start, stop, max(n, 2))


@dataclass(frozen=True)
class AsymptoticRateEstimate:
    """Tail behaviour of -ln(P)/t along a horizon schedule.

    ``status`` is CONVERGED when the last two successive estimates agree
    within the absolute tolerance, else UNCONVERGED.  ``target`` is the
    known limit implied by the mixture (min rate for discrete mixtures,
    0 for the continuous laws).
    """

    value: float
    target: float
    status: str
    horizons: np.ndarray
    estimates: np.ndarray

    @property
    def converged(self) -> bool:
        return self.status == "CONVERGED"


def asymptotic_exponential_rate(
    mixture: RateMixture,
    horizons: np.ndarray | None = None,
    tolerance: float = 1e-6,
) -> AsymptoticRateEstimate:
    """Estimate the long-horizon exponential rate of the aggregate curve.

    The estimate at horizon t is -ln(P(0,t))/t, evaluated in log space so
    that discrete mixtures remain computable at t = 1e6 where the factor
    itself underflows.
    """
    hs = default_horizon_schedule() if horizons is None else np.asarray(horizons, float)
    if hs.ndim != 1 or hs.size < 2 or np.any(hs <= 0) or np.any(np.diff(hs) <= 0):
        raise DomainError("horizon schedule must be increasing and positive")
    est = -log_aggregate_discount(mixture, hs) / hs
    status = "CONVERGED" if abs(est[-1] - est[-2]) < tolerance else "UNCONVERGED"
    if isinstance(mixture, DiscreteMixture):
        target = float(mixture.rates.min())
    else:
        target = 0.0
    return AsymptoticRateEstimate(float(est[-1]), target, status, hs, est)


@dataclass(frozen=True)
class CalamityTimeSample:
    """Sampled calamity times tau = Z / R, censored at ``cap``.

    ``times`` holds min(tau, cap); ``censored`` marks draws whose true
    time exceeded the cap (including infinite times from R == 0 atoms).
    """

    times: np.ndarray
    censored: np.ndarray
    cap: float
    seed: int

    def __post_init__(self):
        self.times.setflags(write=False)
        self.censored.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.times.size)

    @property
    def n_censored(self) -> int:
        return int(self.censored.sum())


def _draw_rates(mixture: RateMixture, rng: np.random.Generator, k: int) -> np.ndarray:
    if isinstance(mixture, DiscreteMixture):
        return rng.choice(mixture.rates, size=k, p=mixture.weights)
    if isinstance(mixture, ExponentialMixture):
        return rng.exponential(scale=mixture.mean_rate, size=k)
    if isinstance(mixture, GammaMixture):
        return rng.gamma(shape=mixture.shape, scale=mixture.mean_rate / mixture.shape, size=k)
    raise DomainError(f"unknown mixture type {type(mixture).__name__}")


def sample_calamity_time(
    mixture: RateMixture, n: int, seed: int, cap: float = 1e4
) -> CalamityTimeSample:
    """Draw n calamity times tau = Z / R with Z ~ Exp(1) independent of R.

    Sampling is partitioned into fixed-size chunks with per-chunk derived
    seeds, so the result depends only on (mixture, n, seed, cap) and not
    on how chunks are scheduled across workers.
    """
    if n <= 0:
        raise DomainError(f"sample size must be positive, got {n!r}")
    if not (math.isfinite(cap) and cap > 0.0):
        raise DomainError(f"censoring cap must be positive and finite, got {cap!r}")
    times = np.empty(n)
    for start in range(0, n, _CHUNK):
        k = min(_CHUNK, n - start)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=int(seed), spawn_key=(start // _CHUNK,))
        )
        rates = _draw_rates(mixture, rng, k)
        z = rng.exponential(scale=1.0, size=k)
        with np.errstate(divide="ignore", invalid="ignore"):
            times[start : start + k] = np.where(rates > 0.0, z / rates, np.inf)
    censored = times > cap
    out = times.copy()
    out[censored] = cap
    return CalamityTimeSample(out, censored, float(cap), int(seed))


def empirical_survival(sample: CalamityTimeSample, t: float) -> tuple[float, float]:
    """Fraction of sampled times exceeding t, with its binomial standard error.

    Only valid for t below the censoring cap (censored draws are known to
    exceed the cap, hence any earlier time).
    """
    if not 0.0 <= t < sample.cap:
        raise DomainError(f"survival probe must satisfy 0 <= t < cap, got {t!r}")
    hits = float(np.count_nonzero(sample.times > t))
    n = sample.n
    p = hits / n
    se = math.sqrt(max(p * (1.0 - p), 1e-300) / n)
    return p, se
