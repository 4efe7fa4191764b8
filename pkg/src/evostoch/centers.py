"""Grouped location estimates and pointwise distances.

Used by both the single-stage clustering and the scenario tree mapping.
Groups are given as a 0-based integer label per observation and are
assumed non-empty.
"""
import numpy as np

CENTERS = ("median", "mean")
DISTANCES = ("l1", "l2")

_TIE_TOL = 1e-12


def _effective_weights(groups, weights, n_groups):
    # Groups carrying zero probability fall back to equal weights.
    if weights.min() > 0:
        return weights
    totals = np.bincount(groups, weights=weights, minlength=n_groups)
    empty_mass = totals[groups] <= 0
    if empty_mass.any():
        weights = np.where(empty_mass, 1.0, weights)
    return weights


def group_mean(values, groups, n_groups, weights):
    """Probability-weighted mean of ``values`` within each group."""
    w = _effective_weights(groups, weights, n_groups)
    return (np.bincount(groups, weights=w * values, minlength=n_groups)
            / np.bincount(groups, weights=w, minlength=n_groups))


def group_median(values, groups, n_groups, weights):
    """Probability-weighted median within each group.

    The median is the smallest value whose cumulative weight reaches half
    the group's mass; when it reaches exactly half, the next value is
    averaged in. Under equal weights this is the ordinary median.
    """
    w = _effective_weights(groups, weights, n_groups)
    order = np.lexsort((values, groups))
    g, v, w = groups[order], values[order], w[order]
    cs = np.cumsum(w)
    totals = np.bincount(g, weights=w, minlength=n_groups)
    before = np.concatenate(([0.0], np.cumsum(totals)[:-1]))
    cum = cs - before[g]
    half = 0.5 * totals[g]
    reached = cum >= half - _TIE_TOL * totals[g]
    hit = np.flatnonzero(reached)
    _, first_pos = np.unique(g[hit], return_index=True)
    first = hit[first_pos]
    med = v[first].copy()
    nxt = np.minimum(first + 1, g.size - 1)
    tie = (np.abs(cum[first] - half[first]) <= _TIE_TOL * totals[g[first]]) & (g[nxt] == g[first]) & (nxt > first)
    med[tie] = 0.5 * (v[first][tie] + v[nxt][tie])
    return med


def group_centers(values, groups, n_groups, weights, center):
    if center == "mean":
        return group_mean(values, groups, n_groups, weights)
    if center == "median":
        return group_median(values, groups, n_groups, weights)
    raise ValueError(f"unknown center {center!r}")


def pointwise_distance(diff, distance):
    """Elementwise distance for a difference array: ``|d|`` (l1) or ``d**2`` (l2)."""
    if distance == "l1":
        return np.abs(diff)
    if distance == "l2":
        return diff * diff
    raise ValueError(f"unknown distance {distance!r}")
