"""Rate conventions, discount factors, and discount curves.

A discount factor P over a tenor (t, T) can be quoted under several
compounding conventions:

* exponential (continuous):           P = exp(-x * R)
* simple Libor-style:                 P = 1 / (1 + x * L)
* tail-Pareto with index lam > 0:     P = (1 + x * v / lam) ** -lam
* zero-coupon compounded kappa/year:  P = (1 + z / kappa) ** -(kappa * x)

where x = T - t.  Libor is the tail-Pareto convention at lam = 1.  All
conversions funnel through the log discount factor, which keeps round
trips accurate to a few ulps even for small rates.

Negative rates are admissible as long as the discount factor stays
positive, i.e. v > -lam / x for the simple conventions and z > -kappa
for zero-coupon quotes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .errors import DomainError, ExtrapolationError

__all__ = [
    "Tenor",
    "RateConvention",
    "RateQuote",
    "discount_from_rate",
    "rate_from_discount",
    "rate_from_log_discount",
    "log_discount_from_rate",
    "convert_rate",
    "ordering_audit",
    "OrderingReport",
    "DiscountCurve",
    "ExponentialTail",
    "ParetoTail",
    "flat_exponential_curve",
    "tail_pareto_curve",
    "curve_from_function",
    "forward_discount",
    "time_consistency_residual",
    "load_curve_csv",
    "save_curve_csv",
    "default_curve_grid",
]

_EXP = "exponential"
_LIBOR = "libor"
_PARETO = "tail_pareto"
_ZC = "zero_coupon"


def _require_finite(name: str, value: float) -> float:
    v = float(value)
    if not math.isfinite(v):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return v


@dataclass(frozen=True)
class Tenor:
    """A time interval (t, T) in years with 0 <= t < T."""

    t: float
    T: float

    def __post_init__(self):
        t = _require_finite("t", self.t)
        T = _require_finite("T", self.T)
        if t < 0.0:
            raise DomainError(f"t must be nonnegative, got {t!r}")
        if not T > t:
            raise DomainError(f"T must exceed t, got t={t!r}, T={T!r}")

    @property
    def length(self) -> float:
        return float(self.T) - float(self.t)


@dataclass(frozen=True)
class RateConvention:
    """Quoting convention for a rate over a tenor.

    ``kind`` is one of "exponential", "libor", "tail_pareto",
    "zero_coupon".  ``index`` carries the tail-Pareto index lam or the
    zero-coupon compounding frequency kappa; it is None for the other
    two kinds.
    """

    kind: str
    index: float | None = None

    def __post_init__(self):
        if self.kind in (_EXP, _LIBOR):
            if self.index is not None:
                raise DomainError(f"{self.kind} convention takes no index")
        elif self.kind in (_PARETO, _ZC):
            if self.index is None:
                raise DomainError(f"{self.kind} convention requires an index")
            ix = _require_finite("index", self.index)
            if ix <= 0.0:
                raise DomainError(f"{self.kind} index must be positive, got {ix!r}")
        else:
            raise DomainError(f"unknown rate convention kind {self.kind!r}")

    @classmethod
    def exponential(cls) -> "RateConvention":
        return cls(_EXP)

    @classmethod
    def libor(cls) -> "RateConvention":
        return cls(_LIBOR)

    @classmethod
    def tail_pareto(cls, lam: float) -> "RateConvention":
        return cls(_PARETO, float(lam))

    @classmethod
    def zero_coupon(cls, kappa: float) -> "RateConvention":
        return cls(_ZC, float(kappa))

    @classmethod
    def parse(cls, text: str) -> "RateConvention":
        """Parse the CLI spelling: exp | libor | pareto:<lam> | zc:<kappa>."""
        s = text.strip().lower()
        if s == "exp":
            return cls.exponential()
        if s == "libor":
            return cls.libor()
        for prefix, maker in (("pareto:", cls.tail_pareto), ("zc:", cls.zero_coupon)):
            if s.startswith(prefix):
                try:
                    value = float(s[len(prefix):])
                except ValueError:
                    raise DomainError(f"cannot parse convention {text!r}") from None
                return maker(value)
        raise DomainError(
            f"cannot parse convention {text!r} (expected exp, libor, pareto:<lam> or zc:<kappa>)"
        )

    def label(self) -> str:
        if self.kind == _EXP:
            return "exp"
        if self.kind == _LIBOR:
            return "libor"
        if self.kind == _PARETO:
            return f"pareto:{self.index:g}"
        return f"zc:{self.index:g}"

    @property
    def pareto_index(self) -> float | None:
        """Tail-Pareto index of the convention (1 for Libor), else None."""
        if self.kind == _LIBOR:
            return 1.0
        if self.kind == _PARETO:
            return float(self.index)
        return None


@dataclass(frozen=True)
class RateQuote:
    """A rate together with its tenor and convention."""

    tenor: Tenor
    convention: RateConvention
    value: float

    def __post_init__(self):
        _require_finite("value", self.value)
        _check_rate_domain(self.tenor.length, self.convention, self.value)

    def discount_factor(self) -> float:
        return discount_from_rate(self.tenor, self.convention, self.value)


def _check_rate_domain(x: float, conv: RateConvention, value: float) -> None:
    lam = conv.pareto_index
    if lam is not None:
        lower = -lam / x
        if value <= lower:
            raise DomainError(
                f"{conv.label()} rate over tenor length {x:g} must exceed {lower!r}, "
                f"got {value!r}"
            )
    elif conv.kind == _ZC:
        kappa = float(conv.index)
        if value <= -kappa:
            raise DomainError(
                f"{conv.label()} rate must exceed {-kappa!r}, got {value!r}"
            )


def log_discount_from_rate(tenor: Tenor, conv: RateConvention, value: float) -> float:
    """ln P for a rate quote; exact in exponent space."""
    x = tenor.length
    v = _require_finite("rate", value)
    _check_rate_domain(x, conv, v)
    if conv.kind == _EXP:
        return -x * v
    lam = conv.pareto_index
    if lam is not None:
        return -lam * math.log1p(x * v / lam)
    kappa = float(conv.index)
    return -kappa * x * math.log1p(v / kappa)


def discount_from_rate(tenor: Tenor, conv: RateConvention, value: float) -> float:
    """Discount factor implied by ``value`` under ``conv`` over ``tenor``.

    Admissible but extreme quotes (a deeply negative exponential rate over
    a long tenor) can exceed float range; the factor is then inf.
    """
    try:
        return math.exp(log_discount_from_rate(tenor, conv, value))
    except OverflowError:
        return math.inf


def rate_from_log_discount(tenor: Tenor, conv: RateConvention, log_df: float) -> float:
    """Rate under ``conv`` implied by ln P over ``tenor``.

    Working from the log keeps the small-rate regime well conditioned
    (expm1 avoids the 1/P - 1 cancellation).
    """
    x = tenor.length
    ld = _require_finite("log discount factor", log_df)
    if conv.kind == _EXP:
        return -ld / x
    lam = conv.pareto_index
    if lam is not None:
        try:
            return lam * math.expm1(-ld / lam) / x
        except OverflowError:
            return math.inf
    kappa = float(conv.index)
    try:
        return kappa * math.expm1(-ld / (kappa * x))
    except OverflowError:
        return math.inf


def rate_from_discount(tenor: Tenor, conv: RateConvention, df: float) -> float:
    """Rate under ``conv`` implied by discount factor ``df`` over ``tenor``.

    ``df`` must be positive; values above 1 quote negative rates.
    """
    d = _require_finite("discount factor", df)
    if d <= 0.0:
        raise DomainError(f"discount factor must be positive, got {df!r}")
    return rate_from_log_discount(tenor, conv, math.log(d))


def convert_rate(
    tenor: Tenor, from_conv: RateConvention, to_conv: RateConvention, value: float
) -> float:
    """Re-quote ``value`` from one convention to another over the same tenor.

    Equivalent to pricing the discount factor and re-quoting it, but the
    exchange happens in log space so that from -> to -> from round trips
    are identical to round-off.
    """
    ld = log_discount_from_rate(tenor, from_conv, value)
    return rate_from_log_discount(tenor, to_conv, ld)


@dataclass(frozen=True)
class OrderingReport:
    """Ordering of the rate quotes implied by one discount factor.

    ``entries`` is ordered from the exponential rate upward: exponential
    first, then tail-Pareto rates by decreasing index (ending at Libor,
    index 1, if included).  The quoted rates must be nondecreasing in
    that order; they coincide only when the rate vanishes (df == 1).
    """

    tenor: Tenor
    discount_factor: float
    entries: tuple[tuple[str, float], ...]
    passed: bool

    def as_dict(self) -> dict:
        return {
            "t": self.tenor.t,
            "T": self.tenor.T,
            "discount_factor": self.discount_factor,
            "rates": {label: rate for label, rate in self.entries},
            "verdict": "PASS" if self.passed else "FAIL",
        }


def ordering_audit(
    tenor: Tenor, df: float, alphas: Iterable[float] = (2.0,), include_libor: bool = True
) -> OrderingReport:
    """Check the systematic ordering R <= L^(alpha) <= L^(beta) for alpha > beta.

    Computes the exponential rate and the tail-Pareto rate at each index in
    ``alphas`` (plus index 1, the Libor rate, unless disabled) for the given
    discount factor, and verifies the quotes are monotone in the convention
    order.  Equality across conventions only occurs at df == 1.
    """
    d = _require_finite("discount factor", df)
    if d <= 0.0:
        raise DomainError(f"discount factor must be positive, got {df!r}")
    lams = {float(a) for a in alphas}
    if include_libor:
        lams.add(1.0)
    if not lams:
        raise DomainError("ordering audit needs at least one tail-Pareto index")
    if min(lams) <= 0.0:
        raise DomainError("tail-Pareto indices must be positive")
    ld = math.log(d)
    entries: list[tuple[str, float]] = [
        ("exp", rate_from_log_discount(tenor, RateConvention.exponential(), ld))
    ]
    for lam in sorted(lams, reverse=True):
        label = "libor" if lam == 1.0 else f"pareto:{lam:g}"
        entries.append(
            (label, rate_from_log_discount(tenor, RateConvention.tail_pareto(lam), ld))
        )
    rates = [r for _, r in entries]
    # Monotone up to float noise; ties are exact only at df == 1.
    slack = 4.0 * np.finfo(float).eps * max(1.0, max(abs(r) for r in rates))
    ok = all(rates[i + 1] >= rates[i] - slack for i in range(len(rates) - 1))
    if d != 1.0:
        strict = all(
            rates[i + 1] > rates[i] - slack for i in range(len(rates) - 1)
        )
        ok = ok and strict
    return OrderingReport(tenor, d, tuple(entries), ok)


# ---------------------------------------------------------------------------
# Discount curves
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExponentialTail:
    """Beyond-grid continuation at a constant exponential rate."""

    rate: float

    def __post_init__(self):
        _require_finite("tail rate", self.rate)

    def log_df_beyond(self, t, t_end: float, log_df_end: float):
        return log_df_end - self.rate * (np.asarray(t, dtype=float) - t_end)


@dataclass(frozen=True)
class ParetoTail:
    """Beyond-grid continuation with tail-Pareto decay.

    P(t) = P(t_end) * ((1 + level*t/lam) / (1 + level*t_end/lam)) ** -lam,
    which is continuous at the grid end and has tail index ``lam`` and
    asymptotic simple rate ``level``.
    """

    lam: float
    level: float

    def __post_init__(self):
        lam = _require_finite("tail index", self.lam)
        level = _require_finite("tail level", self.level)
        if lam <= 0.0:
            raise DomainError(f"tail index must be positive, got {lam!r}")
        if level <= 0.0:
            raise DomainError(f"tail level must be positive, got {level!r}")

    def log_df_beyond(self, t, t_end: float, log_df_end: float):
        tt = np.asarray(t, dtype=float)
        lam, level = self.lam, self.level
        return log_df_end - lam * (
            np.log1p(level * tt / lam) - math.log1p(level * t_end / lam)
        )

    def tail_constant(self, t_end: float, log_df_end: float) -> float:
        """K = lim t^lam * P(t), the Pareto scale of the continued curve."""
        return math.exp(
            log_df_end + self.lam * (math.log(self.lam / self.level) + math.log1p(self.level * t_end / self.lam))
        )


@dataclass(frozen=True)
class DiscountCurve:
    """Time-0 discount factors on a grid, log-linearly interpolated.

    The grid starts at 0 with value 1 and is strictly increasing; values
    are strictly positive (factors above 1 encode negative rates).
    Interpolation is linear in -ln P, i.e. piecewise-constant forward
    rates.  Queries beyond the grid require an attached asymptotic tail
    model; otherwise they raise ``ExtrapolationError``.
    """

    grid: np.ndarray
    values: np.ndarray
    tail: ExponentialTail | ParetoTail | None = None
    _neglog: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if grid.ndim != 1 or values.ndim != 1 or grid.shape != values.shape:
            raise DomainError("grid and values must be 1-d arrays of equal length")
        if grid.size < 2:
            raise DomainError("curve needs at least two grid points")
        if not np.all(np.isfinite(grid)) or not np.all(np.isfinite(values)):
            raise DomainError("curve grid and values must be finite")
        if grid[0] != 0.0:
            raise DomainError(f"curve grid must start at 0, got {grid[0]!r}")
        if not np.all(np.diff(grid) > 0.0):
            raise DomainError("curve grid must be strictly increasing")
        if abs(values[0] - 1.0) > 1e-12:
            raise DomainError(f"curve value at maturity 0 must be 1, got {values[0]!r}")
        if not np.all(values > 0.0):
            raise DomainError("discount factors must be strictly positive")
        values = values.copy()
        values[0] = 1.0
        grid = grid.copy()
        grid.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)
        neglog = -np.log(values)
        neglog.setflags(write=False)
        object.__setattr__(self, "_neglog", neglog)

    @property
    def horizon(self) -> float:
        return float(self.grid[-1])

    def log_df(self, t):
        """ln P(0, t); scalar in, scalar out, arrays broadcast."""
        tt = np.asarray(t, dtype=float)
        scalar = tt.ndim == 0
        tt = np.atleast_1d(tt)
        if np.any(tt < 0.0):
            raise DomainError("maturities must be nonnegative")
        out = np.empty_like(tt)
        inside = tt <= self.grid[-1]
        out[inside] = -np.interp(tt[inside], self.grid, self._neglog)
        beyond = ~inside
        if np.any(beyond):
            if self.tail is None:
                raise ExtrapolationError(
                    f"maturity beyond curve horizon {self.horizon:g} with no "
                    "asymptotic model attached"
                )
            out[beyond] = self.tail.log_df_beyond(
                tt[beyond], self.horizon, float(-self._neglog[-1])
            )
        return float(out[0]) if scalar else out

    def df(self, t):
        return np.exp(self.log_df(t)) if np.ndim(t) else float(math.exp(self.log_df(t)))


def default_curve_grid(horizon: float = 1000.0) -> np.ndarray:
    """Annual knots to 100y, then 10 knots per decade out to ``horizon``."""
    dense = np.arange(0.0, min(100.0, horizon) + 0.5, 1.0)
    if horizon <= 100.0:
        return dense
    sparse = np.geomspace(100.0, horizon, int(10 * math.log10(horizon / 100.0)) + 1)
    return np.unique(np.concatenate([dense, sparse]))


def curve_from_function(
    fn: Callable[[np.ndarray], np.ndarray],
    grid: np.ndarray | None = None,
    tail: ExponentialTail | ParetoTail | None = None,
) -> DiscountCurve:
    g = default_curve_grid() if grid is None else np.asarray(grid, dtype=float)
    return DiscountCurve(g, np.asarray(fn(g), dtype=float), tail)


def flat_exponential_curve(rate: float, grid: np.ndarray | None = None) -> DiscountCurve:
    """P(0,t) = exp(-rate * t), continued at the same rate beyond the grid."""
    r = _require_finite("rate", rate)
    return curve_from_function(lambda t: np.exp(-r * t), grid, ExponentialTail(r))


def tail_pareto_curve(
    lam: float, level: float, grid: np.ndarray | None = None
) -> DiscountCurve:
    """P(0,t) = (1 + level*t/lam) ** -lam with the matching Pareto tail.

    lam = 1 gives the hyperbolic curve P = 1/(1 + level*t).
    """
    tail = ParetoTail(float(lam), float(level))
    return curve_from_function(
        lambda t: np.exp(-tail.lam * np.log1p(tail.level * t / tail.lam)), grid, tail
    )


def forward_discount(curve: DiscountCurve, t: float, T: float) -> float:
    """P(t, T) implied by the time-0 curve under no-arbitrage: P(0,T)/P(0,t)."""
    t = _require_finite("t", t)
    T = _require_finite("T", T)
    if t < 0.0 or T < t:
        raise DomainError(f"need 0 <= t <= T, got t={t!r}, T={T!r}")
    if T == t:
        return 1.0
    return math.exp(curve.log_df(T) - curve.log_df(t))


def time_consistency_residual(
    curve: DiscountCurve, probes: Sequence[tuple[float, float]]
) -> float:
    """max |P(0, t+x) - P(0, t) * P(0, x)| over the probe pairs (t, x).

    Zero (to round-off) exactly for flat exponential curves; any genuinely
    declining term structure shows a positive residual, which is the
    quantitative face of the time-inconsistency of such schedules.
    """
    if not probes:
        raise DomainError("need at least one probe pair")
    worst = 0.0
    for t, x in probes:
        t = _require_finite("probe t", t)
        x = _require_finite("probe x", x)
        if t < 0.0 or x <= 0.0:
            raise DomainError(f"probe needs t >= 0 and x > 0, got ({t!r}, {x!r})")
        gap = abs(
            math.exp(curve.log_df(t + x))
            - math.exp(curve.log_df(t)) * math.exp(curve.log_df(x))
        )
        worst = max(worst, gap)
    return worst


# ---------------------------------------------------------------------------
# CSV interchange
# ---------------------------------------------------------------------------

_CSV_HEADER = ["maturity_years", "discount_factor"]


def load_curve_csv(
    path, tail: ExponentialTail | ParetoTail | None = None
) -> DiscountCurve:
    """Read a curve from CSV with header ``maturity_years,discount_factor``.

    A missing (0, 1.0) first row is prepended.
    """
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DomainError(f"{path}: empty curve file") from None
        if [h.strip() for h in header] != _CSV_HEADER:
            raise DomainError(
                f"{path}: expected header {','.join(_CSV_HEADER)!r}, got {','.join(header)!r}"
            )
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise DomainError(f"{path}:{lineno}: expected 2 columns, got {len(row)}")
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                raise DomainError(f"{path}:{lineno}: non-numeric row {row!r}") from None
    if not rows:
        raise DomainError(f"{path}: no data rows")
    if rows[0][0] != 0.0:
        rows.insert(0, (0.0, 1.0))
    grid = np.array([r[0] for r in rows])
    values = np.array([r[1] for r in rows])
    return DiscountCurve(grid, values, tail)


def save_curve_csv(curve: DiscountCurve, path, fmt: str = "%.9g") -> None:
    """Write the curve grid as CSV (UTF-8, LF line endings)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_CSV_HEADER) + "\n")
        fh.write("0,1.0\n")
        for t, p in zip(curve.grid[1:], curve.values[1:]):
            fh.write(f"{fmt % t},{fmt % p}\n")
