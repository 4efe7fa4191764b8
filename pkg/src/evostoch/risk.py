"""Probability functionals on discrete P&L distributions.

Sign convention: a :class:`~evostoch.distributions.LossDistribution` holds
profits. Dispersion measures (stddev, variance, MAD) are sign-free; CVaR is
reported on losses, i.e. on the negated outcomes, so a positive CVaR means
an expected loss in the tail.
"""
from dataclasses import dataclass

import numpy as np

from ._validation import check_choice, check_unit_open
from .exceptions import ConfigurationError

RISK_MEASURES = ("stddev", "variance", "mad", "cvar")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Risk-return trade-off ``E(l) - kappa * rho(l)``, to be maximized."""

    risk_measure: str = "stddev"
    kappa: float = 1.0
    alpha: float = 0.05

    def __post_init__(self):
        check_choice(self.risk_measure, "risk_measure", RISK_MEASURES)
        if not self.kappa >= 0:
            raise ConfigurationError(f"kappa must be >= 0, got {self.kappa}")
        check_unit_open(self.alpha, "alpha")


def expectation(dist):
    return float(dist.probabilities @ dist.outcomes)


def variance(dist):
    centered = dist.outcomes - expectation(dist)
    return float(dist.probabilities @ centered**2)


def stddev(dist):
    return float(np.sqrt(variance(dist)))


def mad(dist):
    """Mean absolute deviation around the mean."""
    return float(dist.probabilities @ np.abs(dist.outcomes - expectation(dist)))


def cvar(dist, alpha):
    """Expected loss over the worst ``alpha`` probability mass.

    Outcomes are sorted from worst (lowest profit) upward and probability is
    taken until ``alpha`` is exhausted; the atom straddling the boundary
    contributes only the fraction needed.
    """
    alpha = check_unit_open(alpha, "alpha")
    order = np.argsort(dist.outcomes, kind="stable")
    losses = -dist.outcomes[order]
    p = dist.probabilities[order]
    cum_before = np.concatenate(([0.0], np.cumsum(p)[:-1]))
    taken = np.clip(alpha - cum_before, 0.0, p)
    return float(taken @ losses / alpha)


def risk(spec, dist):
    """Evaluate the risk measure named by ``spec`` on ``dist``."""
    measure = spec.risk_measure
    if measure == "stddev":
        return stddev(dist)
    if measure == "variance":
        return variance(dist)
    if measure == "mad":
        return mad(dist)
    if measure == "cvar":
        return cvar(dist, spec.alpha)
    raise ConfigurationError(f"unknown risk measure {measure!r}")


def weighted_objective(spec, dist):
    """``E(dist) - kappa * risk(dist)``; larger is better."""
    if spec.kappa == 0:
        return expectation(dist)
    return expectation(dist) - spec.kappa * risk(spec, dist)
