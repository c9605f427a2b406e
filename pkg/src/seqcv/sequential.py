"""Sequential tests for binary top/flop traces.

Contains the open (Wald) sequential probability ratio test used to drop
losing configurations, its safety-zone and minimum-step calculators, the
worst-case path-counting error bound, and the closed gambler's-ruin test of
Spicer for comparison.
"""

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

__all__ = [
    "WaldTestPlan",
    "SpicerTestPlan",
    "min_steps",
    "plan_wald_test",
    "safety_zone",
    "is_flop_configuration",
    "path_count",
    "path_table",
    "cvst_error_bound",
    "spicer_ruin_probability",
    "plan_spicer_test",
]


@dataclass(frozen=True)
class WaldTestPlan:
    """Parametrization of the open sequential test over ``steps_S`` steps.

    The lower decision boundary is L0(s) = intercept_a + slope_b * s; a trace
    whose cumulative sum falls on or below it is a significant loser.  The
    upper boundary L1 shares the slope and is exposed for reporting only.
    """

    steps_S: int
    alpha_l: float
    beta_l: float
    pi0: float
    pi1: float
    intercept_a: float
    slope_b: float
    upper_intercept: float

    def lower_line(self, s):
        return self.intercept_a + self.slope_b * s

    def upper_line(self, s):
        return self.upper_intercept + self.slope_b * s


@dataclass(frozen=True)
class SpicerTestPlan:
    """Closed sequential test over ``games_n`` games of a gambler's-ruin match.

    A configuration is flagged as loser once its cumulative wins reach the
    lower line y = stake/(1+stake)*n - fortune_a/(1+stake).
    """

    games_n: int
    fortune_a: int
    fortune_b: int
    stake: int
    ruin_prob_at_half: float

    def lower_line(self, s):
        return (self.stake * s - self.fortune_a) / (1.0 + self.stake)

    def is_flop(self, trace, s):
        trace = np.asarray(trace)
        if trace.shape[0] != s:
            raise ValueError(f"trace length {trace.shape[0]} does not match step {s}")
        return float(trace.sum()) <= self.lower_line(s)


def _check_levels(alpha_l, beta_l):
    if not (0.0 < alpha_l < 1.0 and 0.0 < beta_l < 1.0):
        raise ValueError(f"significance levels must lie in (0, 1), got alpha_l={alpha_l}, beta_l={beta_l}")


def min_steps(alpha_l, beta_l):
    """Smallest admissible number of steps, ceil(log2((1-beta_l)/alpha_l)), clamped to >= 1."""
    _check_levels(alpha_l, beta_l)
    s = math.ceil(math.log((1.0 - beta_l) / alpha_l) / math.log(2.0))
    return max(1, s)


def plan_wald_test(steps_S, alpha_l, beta_l):
    """Construct the open sequential test whose H1 acceptance lands at step S.

    pi0 is fixed at 1/2 and pi1 = ((1-beta_l)/alpha_l)^(1/S) / 2, which places
    the expected decision step for a constant winner exactly at S.  Raises if
    S is so small that pi1 would reach 1.
    """
    _check_levels(alpha_l, beta_l)
    steps_S = int(steps_S)
    if steps_S < 1:
        raise ValueError("steps_S must be a positive integer")
    pi0 = 0.5
    pi1 = 0.5 * ((1.0 - beta_l) / alpha_l) ** (1.0 / steps_S)
    if pi1 >= 1.0:
        raise ValueError(
            f"steps_S={steps_S} is below the minimum {min_steps(alpha_l, beta_l)} "
            f"for alpha_l={alpha_l}, beta_l={beta_l} (pi1 would reach {pi1:.4f})"
        )
    d = math.log(pi1 / pi0) - math.log((1.0 - pi1) / (1.0 - pi0))
    intercept_a = math.log(beta_l / (1.0 - alpha_l)) / d
    slope_b = math.log((1.0 - pi0) / (1.0 - pi1)) / d
    upper_intercept = math.log((1.0 - beta_l) / alpha_l) / d
    return WaldTestPlan(steps_S, alpha_l, beta_l, pi0, pi1, intercept_a, slope_b, upper_intercept)


def safety_zone(plan):
    """x-intercept of the lower boundary: no trace can be dropped before it."""
    return -plan.intercept_a / plan.slope_b


def is_flop_configuration(trace, s, plan):
    """True when the cumulative trace sum lies on or below the lower boundary at step s."""
    trace = np.asarray(trace)
    if trace.ndim != 1 or trace.shape[0] != s:
        raise ValueError(f"trace length {trace.shape} does not match step s={s}")
    if s < 1 or s > plan.steps_S:
        raise ValueError(f"step s={s} outside 1..{plan.steps_S}")
    return float(trace.sum()) <= plan.lower_line(s)


@lru_cache(maxsize=64)
def _path_table(plan):
    # Worst case: a winner writes zeros up to the integer safety zone s0, then
    # climbs.  table[row][col] counts monotone paths from (0, s0) to
    # (row, col) that stay strictly above the lower boundary.  Python ints
    # avoid overflow for large S.
    s = plan.steps_S
    s0 = math.floor(safety_zone(plan))
    table = [[0] * (s + 1) for _ in range(s + 1)]
    for col in range(s + 1):
        for row in range(col + 1):
            if row == 0 and col <= s0:
                table[row][col] = 1
            elif row == col - s0:
                table[row][col] = 1
            elif plan.lower_line(col) < row < col - s0:
                table[row][col] = table[row][col - 1] + table[row - 1][col - 1]
    return table


def path_table(plan):
    """Full (S+1)x(S+1) table of surviving-path counts for ``plan``."""
    return [row[:] for row in _path_table(plan)]


def path_count(row, col, plan):
    """Number of surviving worst-case paths reaching (row, col)."""
    if not (0 <= row <= col <= plan.steps_S):
        raise ValueError(f"need 0 <= row <= col <= S, got row={row}, col={col}, S={plan.steps_S}")
    return _path_table(plan)[row][col]


def cvst_error_bound(plan, pi):
    """Worst-case probability that a late-blooming winner with success rate pi is dropped.

    The winner is assumed flop up to the integer safety zone s0 and Bernoulli(pi)
    afterwards; the bound is one minus the probability mass of all paths ending
    in the non-loser region at step S.  Binomial terms are accumulated in log
    space with a max shift to avoid underflow at large S.
    """
    if not (0.0 <= pi <= 1.0):
        raise ValueError(f"pi must lie in [0, 1], got {pi}")
    s = plan.steps_S
    s0 = math.floor(safety_zone(plan))
    r = s - s0
    lo = math.floor(plan.lower_line(s)) + 1
    lo = max(lo, 0)
    table = _path_table(plan)
    if pi == 1.0:
        survive = float(table[r][s]) if lo <= r else 0.0
        return min(1.0, max(0.0, 1.0 - survive))
    if pi == 0.0:
        survive = float(table[0][s]) if lo <= 0 else 0.0
        return min(1.0, max(0.0, 1.0 - survive))
    log_terms = []
    lp, lq = math.log(pi), math.log1p(-pi)
    for i in range(lo, r + 1):
        paths = table[i][s]
        if paths > 0:
            log_terms.append(math.log(paths) + i * lp + (r - i) * lq)
    if not log_terms:
        return 1.0
    m = max(log_terms)
    survive = math.exp(m) * sum(math.exp(t - m) for t in log_terms)
    return min(1.0, max(0.0, 1.0 - survive))


def spicer_ruin_probability(n, pi, fortune_a, fortune_b, stake=1):
    """Probability that a player with fortune_a ruins an opponent with fortune_b in exactly n games.

    Evaluates the three-case gambler's-ruin recurrence exactly; memoization is
    local to the call, so concurrent invocations see pure-function behavior.
    """
    if n < 0 or int(n) != n:
        raise ValueError(f"game count must be a nonnegative integer, got {n}")
    if not (0.0 <= pi <= 1.0):
        raise ValueError(f"pi must lie in [0, 1], got {pi}")
    if stake < 1 or int(stake) != stake:
        raise ValueError(f"stake must be a positive integer, got {stake}")

    @lru_cache(maxsize=None)
    def f(k, fa, fb):
        if fa < 0 or (k == 0 and fb > 0):
            return 0.0
        if k == 0:
            return 1.0 if (fa > 0 and fb <= 0) else 0.0
        return pi * f(k - 1, fa + 1, fb - stake) + (1.0 - pi) * f(k - 1, fa - stake, fb + stake)

    return f(int(n), int(fortune_a), int(fortune_b))


def plan_spicer_test(steps_S, alpha_l):
    """Smallest total fortunes whose fair-coin ruin probability is <= alpha_l.

    The stake is fixed at 1 and fortune_a at its minimum of 1, which makes the
    loser line as aggressive as possible (the closed test has no safety zone);
    alpha_l only controls the probability that a fair configuration ruins its
    opponent, i.e. is declared a clear winner at the horizon.  fortune_b is the
    smallest value meeting that constraint.  Raises when no fortune up to
    steps_S + 1 is feasible (the test would degenerate).
    """
    steps_S = int(steps_S)
    if steps_S < 2:
        raise ValueError("steps_S must be at least 2")
    if not (0.0 < alpha_l < 1.0):
        raise ValueError(f"alpha_l must lie in (0, 1), got {alpha_l}")
    for fortune_b in range(1, steps_S + 2):
        p = spicer_ruin_probability(steps_S, 0.5, 1, fortune_b, stake=1)
        if p <= alpha_l:
            return SpicerTestPlan(steps_S, 1, fortune_b, 1, p)
    raise ValueError(
        f"no fortune_b <= {steps_S + 1} reaches ruin probability <= {alpha_l}; the closed test degenerates"
    )
