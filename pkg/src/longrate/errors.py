"""Exception types shared across the package.

Everything user-facing derives from ``LongrateError`` so callers (and the
CLI) can distinguish bad input from genuine bugs.  ``DomainError`` and its
subclasses mean "the request was outside the admissible domain"; the CLI
maps them to exit code 2.
"""

from __future__ import annotations


class LongrateError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(LongrateError, ValueError):
    """An input violated a documented domain restriction."""


class ExtrapolationError(DomainError):
    """A curve was queried beyond its grid with no asymptotic model attached."""


class InadmissibleCurveError(DomainError):
    """The discount data cannot come from an admissible pricing kernel.

    Typical trigger: discount factors that do not tend to zero along any
    horizon subsequence (for example the constant curve P == 1).
    """


class DegenerateModelError(DomainError):
    """A model-state inversion hit a rank-deficient configuration.

    ``code`` is one of ``"NO_INVERSE"`` (short-rate inversion impossible:
    the short rate does not depend on the factor) or ``"NO_DECOMPOSITION"``
    (the two-factor pricing decomposition has a singular coefficient
    system).
    """

    def __init__(self, code: str, message: str):
        self.code = code
        super().__init__(f"{code}: {message}")


class UnattainableRateError(DomainError):
    """A requested rate lies outside the open interval the model can reach."""

    def __init__(self, value: float, interval: tuple[float, float], label: str = "rate"):
        self.value = value
        self.interval = interval
        lo, hi = interval
        super().__init__(
            f"{label} {value!r} is outside the attainable open interval ({lo!r}, {hi!r})"
        )


class UnsupportedOperationError(LongrateError):
    """The operation needs capabilities this model variant does not have.

    Raised e.g. for short-rate queries on models built from sampled curves
    without derivative evaluators.  The message always starts with
    ``UNSUPPORTED``.
    """

    def __init__(self, message: str):
        super().__init__(f"UNSUPPORTED: {message}")
