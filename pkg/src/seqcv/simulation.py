"""Monte Carlo harnesses and the compute-budget planner.

Covers false-negative rates of the sequential tests on non-stationary
configurations, the expected speed gain over full cross-validation under a
polynomial training-time model, and the largest step count that fits a fixed
time budget.
"""

import math
from dataclasses import dataclass

import numpy as np

from .sequential import plan_spicer_test, plan_wald_test, safety_zone

__all__ = [
    "SwitchingBernoulliSpec",
    "SimulationEstimate",
    "simulate_false_negatives",
    "simulate_speed_gain",
    "BudgetSpec",
    "InfeasibleBudgetError",
    "NoRealRootError",
    "SafetyFractionError",
    "plan_budget",
    "exact_cvst_cost",
    "bound_cvst_cost",
    "max_beta_for_safety",
    "power_sum_bound_check",
]


@dataclass(frozen=True)
class SwitchingBernoulliSpec:
    """A configuration whose per-step success probability switches once.

    Steps 1..change_point draw Bernoulli(pi_before); later steps draw
    Bernoulli(pi_after).  change_point = 0 means pi_after from the start.
    """

    pi_before: float
    pi_after: float
    change_point: int
    steps_S: int
    trials: int
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.pi_before <= 1.0 and 0.0 <= self.pi_after <= 1.0):
            raise ValueError("success probabilities must lie in [0, 1]")
        if not (0 <= self.change_point <= self.steps_S):
            raise ValueError(f"need 0 <= change_point <= steps_S, got {self.change_point}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass(frozen=True)
class SimulationEstimate:
    estimate: float
    standard_error: float
    trials: int


def simulate_false_negatives(spec, plan_kind="wald", alpha_l=0.01, beta_l=0.1):
    """Fraction of switching-Bernoulli traces ever flagged as loser.

    Each trial derives its own child seed from (seed, trial index), draws a
    full trace, and applies the chosen sequential test step by step; the trial
    counts as dropped if any step flags it.  Returns the drop fraction with a
    binomial standard error.
    """
    s_max = spec.steps_S
    if plan_kind == "wald":
        plan = plan_wald_test(s_max, alpha_l, beta_l)
        lines = np.array([plan.lower_line(s) for s in range(1, s_max + 1)])
    elif plan_kind == "spicer":
        plan = plan_spicer_test(s_max, alpha_l)
        lines = np.array([plan.lower_line(s) for s in range(1, s_max + 1)])
    else:
        raise ValueError(f"unknown plan kind {plan_kind!r}")
    probs = np.where(np.arange(1, s_max + 1) <= spec.change_point, spec.pi_before, spec.pi_after)
    drops = 0
    for trial in range(spec.trials):
        rng = np.random.default_rng([spec.seed, trial])
        bits = (rng.random(s_max) < probs).astype(float)
        if np.any(np.cumsum(bits) <= lines):
            drops += 1
    rate = drops / spec.trials
    se = math.sqrt(rate * (1.0 - rate) / spec.trials)
    return SimulationEstimate(rate, se, spec.trials)


def simulate_speed_gain(
    steps_S,
    configs_K,
    winner_loser_ratio=(1, 1),
    pi_winner_range=(0.9, 1.0),
    pi_loser_range=(0.0, 0.1),
    folds=10,
    complexity_m=3,
    resamples=200,
    seed=0,
    alpha_l=0.01,
    beta_l=0.1,
):
    """Distribution of full-CV / sequential-search cost ratios.

    The cost model charges one model fit per active configuration per step at
    (s/(S+1))^m normalized units and folds*K fits at ((folds-1)/folds)^m for
    full cross-validation.  Per resample each configuration's per-step success
    rate is drawn uniformly from its winner or loser range, the trace is
    simulated, and the drop test thins the active set.  The top-rate
    configuration is never dropped, so at least one stays active and the
    K = 1 case is deterministic.

    winner_loser_ratio is an explicit (winners, losers) proportion pair; the
    winner count is the rounded share of configs_K.

    Returns a float array of per-resample ratios.
    """
    w, l = winner_loser_ratio
    if w < 0 or l < 0 or w + l == 0:
        raise ValueError("winner_loser_ratio parts must be nonnegative and not both zero")
    if configs_K < 1:
        raise ValueError("configs_K must be at least 1")
    if not (0.0 <= pi_winner_range[0] <= pi_winner_range[1] <= 1.0):
        raise ValueError("invalid winner rate range")
    if not (0.0 <= pi_loser_range[0] <= pi_loser_range[1] <= 1.0):
        raise ValueError("invalid loser rate range")
    plan = plan_wald_test(steps_S, alpha_l, beta_l)
    lines = np.array([plan.lower_line(s) for s in range(1, steps_S + 1)])
    step_costs = (np.arange(1, steps_S + 1) / (steps_S + 1.0)) ** complexity_m
    full_cost = folds * configs_K * ((folds - 1.0) / folds) ** complexity_m
    n_winners = int(round(configs_K * w / (w + l)))
    ratios = np.empty(resamples)
    for r in range(resamples):
        rng = np.random.default_rng([seed, r])
        rates = np.empty(configs_K)
        rates[:n_winners] = rng.uniform(pi_winner_range[0], pi_winner_range[1], n_winners)
        rates[n_winners:] = rng.uniform(pi_loser_range[0], pi_loser_range[1], configs_K - n_winners)
        bits = rng.random((configs_K, steps_S)) < rates[:, None]
        sums = np.cumsum(bits.astype(float), axis=1)
        keep = int(np.argmax(rates))
        active = np.ones(configs_K, dtype=bool)
        cvst_cost = 0.0
        for s in range(steps_S):
            cvst_cost += active.sum() * step_costs[s]
            flop = active & (sums[:, s] <= lines[s])
            flop[keep] = False
            active &= ~flop
        ratios[r] = full_cost / cvst_cost
    return ratios


class InfeasibleBudgetError(ValueError):
    """The budget cannot cover even the minimal modeled cost."""


class NoRealRootError(ValueError):
    """The cost quadratic has no real root for these parameters."""


class SafetyFractionError(ValueError):
    """The safety fraction is too small for the power-sum bound to apply."""


@dataclass(frozen=True)
class BudgetSpec:
    """Inputs of the step-count planner.

    budget_T and full_fit_time_t are in the same time unit; keep_fraction_r is
    the expected fraction of configurations surviving past the safety zone,
    safety_fraction_s_r the safety zone as a fraction of the step count, and
    complexity_m the polynomial degree of the learner's training time.
    """

    budget_T: float
    full_fit_time_t: float
    configs_K: int
    keep_fraction_r: float
    safety_fraction_s_r: float
    complexity_m: int

    def __post_init__(self):
        if self.budget_T <= 0 or self.full_fit_time_t <= 0:
            raise ValueError("budget_T and full_fit_time_t must be positive")
        if self.configs_K < 1:
            raise ValueError("configs_K must be at least 1")
        if not (0.0 < self.keep_fraction_r < 1.0):
            raise ValueError("keep_fraction_r must lie in (0, 1)")
        if not (0.0 < self.safety_fraction_s_r < 1.0):
            raise ValueError("safety_fraction_s_r must lie in (0, 1)")
        if self.complexity_m < 1 or int(self.complexity_m) != self.complexity_m:
            raise ValueError("complexity_m must be a positive integer")


def _quadratic_coeffs(spec):
    t, k = spec.full_fit_time_t, spec.configs_K
    r, sr, m = spec.keep_fraction_r, spec.safety_fraction_s_r, spec.complexity_m
    denom = ((1.0 - r) * sr ** (m + 1) + r) * t * k
    a = (m + 1) / 4.0 * (t * k * (1.0 - r) * sr**m + t * k * r - 2.0 * spec.budget_T) / denom
    b = m * (m + 1) / 12.0 * ((1.0 - r) * sr ** (m - 1) + r) / (((1.0 - r) * sr ** (m + 1) + r))
    return a, b


def plan_budget(spec):
    """Largest step count S whose modeled search cost fits the budget.

    Solves the quadratic relaxation S^2 + 2aS + b <= 0 and returns
    floor(-a + sqrt(a^2 - b)).  Raises a distinct error per violated
    feasibility constraint.
    """
    t, k = spec.full_fit_time_t, spec.configs_K
    r, sr, m = spec.keep_fraction_r, spec.safety_fraction_s_r, spec.complexity_m
    if 2.0 * spec.budget_T < t * k * (1.0 - r) * sr**m + t * k * r:
        raise InfeasibleBudgetError(
            f"budget {spec.budget_T} below the feasibility floor "
            f"{(t * k * (1.0 - r) * sr**m + t * k * r) / 2.0}"
        )
    a, b = _quadratic_coeffs(spec)
    if a * a < b:
        raise NoRealRootError(f"cost quadratic has no real root (a={a:.6g}, b={b:.6g})")
    steps = math.floor(-a + math.sqrt(a * a - b))
    if sr * steps <= m / (2.0 * math.pi):
        raise SafetyFractionError(
            f"safety fraction {sr} gives safety zone {sr * steps:.4g} <= m/(2*pi) = {m / (2 * math.pi):.4g}"
        )
    return steps


def exact_cvst_cost(spec, steps_S):
    """Modeled search time at S using exact power sums (not the asymptotic bound)."""
    t, k = spec.full_fit_time_t, spec.configs_K
    r, sr, m = spec.keep_fraction_r, spec.safety_fraction_s_r, spec.complexity_m
    s0 = math.floor(sr * steps_S)
    early = sum((i / steps_S) ** m for i in range(1, s0 + 1))
    full = sum((i / steps_S) ** m for i in range(1, steps_S + 1))
    return t * k * (1.0 - r) * early + t * k * r * full


def bound_cvst_cost(spec, steps_S):
    """Modeled search time at S using the asymptotic power-sum upper bound."""
    t, k = spec.full_fit_time_t, spec.configs_K
    r, sr, m = spec.keep_fraction_r, spec.safety_fraction_s_r, spec.complexity_m
    early = sr ** (m - 1) * ((sr * steps_S) ** 2 / (m + 1) + sr * steps_S / 2.0 + m / 12.0)
    late = steps_S**2 / (m + 1) + steps_S / 2.0 + m / 12.0
    return t * k / steps_S * ((1.0 - r) * early + r * late)


def max_beta_for_safety(alpha_l, steps_S, target_safety, tol=1e-6):
    """Largest beta_l whose test plan has a safety zone of at least target_safety.

    The safety zone shrinks as beta_l grows, so the feasible set is an
    interval (0, beta*]; bisection recovers beta* to ``tol``.  Raises when
    even the smallest beta_l misses the target.
    """
    if not (0.0 < target_safety < steps_S):
        raise ValueError(f"target_safety must lie in (0, steps_S), got {target_safety}")

    def feasible(beta):
        try:
            return safety_zone(plan_wald_test(steps_S, alpha_l, beta)) >= target_safety
        except ValueError:
            return False

    lo, hi = 1e-12, 1.0 - 1e-12
    if not feasible(lo):
        raise ValueError(
            f"no beta_l < 1 reaches safety zone {target_safety} for alpha_l={alpha_l}, steps_S={steps_S}"
        )
    if feasible(hi):
        return hi
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def power_sum_bound_check(n, m):
    """(exact normalized power sum, asymptotic upper bound) for sum_{i<=n} i^m / n^(m-1).

    The bound n^2/(m+1) + n/2 + m/12 is only guaranteed for n > m/(2*pi);
    callers compare the pair in that regime.
    """
    if n < 1 or int(n) != n or m < 1 or int(m) != m:
        raise ValueError("n and m must be positive integers")
    exact = sum(i**m for i in range(1, n + 1)) / n ** (m - 1)
    bound = n**2 / (m + 1) + n / 2.0 + m / 12.0
    return exact, bound
