"""Input validation helpers shared by the data types and estimators."""
import warnings

import numpy as np

from .exceptions import ConfigurationError

PROB_TOL = 1e-9
RENORMALIZE_TOL = 1e-6


def check_probabilities(p, n, *, name="probabilities"):
    """Return ``p`` as a float64 vector of length ``n`` summing to one.

    ``None`` yields the uniform distribution. Sums off by at most
    ``RENORMALIZE_TOL`` are rescaled with a warning; anything further off
    raises ``ValueError``.
    """
    if p is None:
        return np.full(n, 1.0 / n)
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.shape[0] != n:
        raise ValueError(f"{name}: expected {n} entries, got {p.shape[0]}")
    if not np.all(np.isfinite(p)):
        raise ValueError(f"{name}: non-finite entries")
    if np.any(p < 0):
        raise ValueError(f"{name}: negative entries")
    total = float(p.sum())
    gap = abs(total - 1.0)
    if gap > RENORMALIZE_TOL:
        raise ValueError(
            f"{name} sum to {total:.12g}; must equal 1 "
            f"(deviations up to {RENORMALIZE_TOL:g} are renormalized)"
        )
    if gap > PROB_TOL:
        warnings.warn(
            f"{name} sum to {total:.12g}; renormalizing", RuntimeWarning, stacklevel=3
        )
        p = p / total
    return p


def check_matrix(values, *, name="values", ndim=2):
    a = np.asarray(values, dtype=np.float64)
    if a.ndim == 1 and ndim == 2:
        a = a.reshape(-1, 1)
    if a.ndim != ndim:
        raise ValueError(f"{name}: expected a {ndim}-d array, got shape {a.shape}")
    if a.shape[0] < 1 or (ndim == 2 and a.shape[1] < 1):
        raise ValueError(f"{name}: empty array")
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name}: contains NaN or infinite entries")
    return a


def check_choice(value, name, choices):
    if value not in choices:
        raise ConfigurationError(
            f"{name} must be one of {sorted(choices)}, got {value!r}"
        )
    return value


def check_unit_open(value, name):
    if not 0.0 < value < 1.0:
        raise ConfigurationError(f"{name} must lie in (0, 1), got {value}")
    return float(value)


def frozen_array(a, dtype=np.float64):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a
