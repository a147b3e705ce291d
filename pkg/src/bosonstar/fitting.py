"""Least-squares power-law fitting and the quantitative report record."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

#: pre-asymptotic transient excluded from every fit window
FIT_T_MIN = 5.0
#: trailing fraction excluded (truncation contamination)
FIT_SKIP_FINAL = 0.10


@dataclass
class PowerLawFit:
    exponent: float
    log_amplitude: float
    residual: float         # rms residual of log y around the fit
    window: tuple           # (t_lo, t_hi) actually used
    n_points: int

    def evaluate(self, t):
        return np.exp(self.log_amplitude) * np.asarray(t) ** self.exponent


def fit_power_law(times, values, window=None) -> PowerLawFit:
    """Fit values ~ C * t^p by least squares in log-log coordinates.

    Only strictly positive samples inside ``window`` participate; the window
    defaults to [FIT_T_MIN, (1 - FIT_SKIP_FINAL) * t_max].
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if window is None:
        window = (FIT_T_MIN, (1.0 - FIT_SKIP_FINAL) * float(np.max(times)))
    lo, hi = window
    sel = (times >= lo) & (times <= hi) & (values > 0) & (times > 0)
    if np.count_nonzero(sel) < 3:
        raise ValueError(f"fit window {window} selects fewer than 3 points")
    x = np.log(times[sel])
    y = np.log(values[sel])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return PowerLawFit(float(slope), float(intercept), resid,
                       (float(lo), float(hi)), int(np.count_nonzero(sel)))


@dataclass
class FitReport:
    """Outcome of one quantitative check: the law being tested, the predicted
    value, the fitted/measured value, and the verdict at the stated tolerance."""

    experiment: str
    law: str                     # descriptive tag of the predicted behavior
    predicted: float
    fitted: float
    tolerance: float
    passed: bool
    fit_window: tuple = (0.0, 0.0)
    residual: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self):
        out = {
            "experiment": self.experiment,
            "law": self.law,
            "predicted": self.predicted,
            "fitted": self.fitted,
            "tolerance": self.tolerance,
            "passed": bool(self.passed),
            "fit_window": list(self.fit_window),
            "residual": self.residual,
        }
        out.update({f"detail.{k}": v for k, v in self.details.items()})
        return out


def exponent_report(experiment, law, fit: PowerLawFit, predicted, tolerance,
                    **details) -> FitReport:
    passed = abs(fit.exponent - predicted) <= tolerance
    return FitReport(experiment, law, float(predicted), fit.exponent,
                     float(tolerance), passed, fit.window, fit.residual,
                     dict(details))


def bound_report(experiment, law, worst_excess, tolerance=0.0, **details) -> FitReport:
    """Report for bound-type checks: ``worst_excess`` <= tolerance passes."""
    return FitReport(experiment, law, float(tolerance), float(worst_excess),
                     float(tolerance), worst_excess <= tolerance,
                     details=dict(details))
