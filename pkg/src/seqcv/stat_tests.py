"""Distribution-free omnibus tests on a configurations-by-data-points matrix.

Cochran's Q test (binary outcomes) and the Friedman rank test (continuous
outcomes) both ask whether K configurations show identical effects across r
data points.  Matrices are laid out with one row per configuration and one
column per data point.
"""

import math
from dataclasses import dataclass

import numpy as np

__all__ = ["TestResult", "chi_square_sf", "cochran_q", "friedman", "column_midranks"]


@dataclass(frozen=True)
class TestResult:
    """Outcome of an omnibus test.

    ``degenerate`` marks a 0/0 statistic that was resolved by the "no effect"
    convention (statistic 0, p-value 1).
    """

    statistic: float
    degrees_of_freedom: int
    p_value: float
    degenerate: bool = False


def _lower_regularized_series(a, z):
    # P(a, z) via the standard power series; converges fast for z < a + 1.
    term = 1.0 / a
    total = term
    k = a
    while True:
        k += 1.0
        term *= z / k
        total += term
        if abs(term) < abs(total) * 1e-17:
            break
    return total * math.exp(-z + a * math.log(z) - math.lgamma(a))


def _upper_regularized_cf(a, z):
    # Q(a, z) via a modified Lentz continued fraction; preferred for z >= a + 1.
    tiny = 1e-300
    b = z + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0.0 else 1.0 / tiny
    h = d
    for i in range(1, 10000):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    return h * math.exp(-z + a * math.log(z) - math.lgamma(a))


def chi_square_sf(x, df):
    """Upper tail probability P(X >= x) of a chi-square variable.

    Computed through the regularized upper incomplete gamma function with a
    series / continued-fraction hybrid, absolute tolerance well below 1e-10.
    """
    if df < 1 or int(df) != df:
        raise ValueError(f"degrees of freedom must be a positive integer, got {df}")
    x = float(x)
    if not math.isfinite(x) or x < 0.0:
        raise ValueError(f"statistic must be finite and nonnegative, got {x}")
    a = df / 2.0
    z = x / 2.0
    if z == 0.0:
        return 1.0
    if z < a + 1.0:
        p = min(1.0, max(0.0, 1.0 - _lower_regularized_series(a, z)))
    else:
        p = min(1.0, max(0.0, _upper_regularized_cf(a, z)))
    return p


def _as_outcome_matrix(values):
    m = np.asarray(values, dtype=float)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D configurations x data-points matrix, got ndim={m.ndim}")
    if m.size == 0:
        raise ValueError("outcome matrix must not be empty")
    if not np.all(np.isfinite(m)):
        raise ValueError("outcome matrix contains non-finite entries")
    return m


def cochran_q(values):
    """Cochran's Q test for K binary outcome rows over r data points.

    Returns a :class:`TestResult`; when every column is constant across
    configurations the statistic is 0/0 and the degenerate "no effect"
    convention (T = 0, p = 1) applies.
    """
    m = _as_outcome_matrix(values)
    k, r = m.shape
    if k < 2:
        raise ValueError("Cochran's Q needs at least two configurations")
    if not np.all((m == 0.0) | (m == 1.0)):
        raise ValueError("Cochran's Q requires binary (0/1) entries")
    row_totals = m.sum(axis=1)
    col_totals = m.sum(axis=0)
    grand = m.sum()
    denom = float(np.sum(col_totals * (k - col_totals)))
    df = k - 1
    if denom == 0.0:
        return TestResult(0.0, df, 1.0, degenerate=True)
    t = k * (k - 1) * float(np.sum((row_totals - grand / k) ** 2)) / denom
    return TestResult(t, df, chi_square_sf(t, df), degenerate=False)


def column_midranks(column):
    """Mid-ranks (1-based, ties averaged) of a 1-D array."""
    v = np.asarray(column, dtype=float)
    order = np.argsort(v, kind="stable")
    ranks = np.empty(v.shape[0], dtype=float)
    sv = v[order]
    i = 0
    n = v.shape[0]
    while i < n:
        j = i
        while j + 1 < n and sv[j + 1] == sv[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def friedman(values):
    """Friedman rank test for K outcome rows over r data points.

    Ranks are taken within each column (data point) with ties mid-ranked; the
    tie-corrected statistic is used whenever any column has ties.  If every
    column is fully tied the degenerate convention (T = 0, p = 1) applies.
    """
    m = _as_outcome_matrix(values)
    k, r = m.shape
    if k < 2:
        raise ValueError("Friedman test needs at least two configurations")
    ranks = np.empty_like(m)
    any_ties = False
    for j in range(r):
        ranks[:, j] = column_midranks(m[:, j])
        if not any_ties and np.unique(m[:, j]).size < k:
            any_ties = True
    row_sums = ranks.sum(axis=1)
    df = k - 1
    centered = float(np.sum((row_sums - r * (k + 1) / 2.0) ** 2))
    if not any_ties:
        t = 12.0 / (r * k * (k + 1)) * centered
        return TestResult(t, df, chi_square_sf(t, df), degenerate=False)
    denom = float(np.sum(ranks**2)) - r * k * (k + 1) ** 2 / 4.0
    if denom <= 0.0:
        return TestResult(0.0, df, 1.0, degenerate=True)
    t = (k - 1) * centered / denom
    return TestResult(t, df, chi_square_sf(t, df), degenerate=False)
