"""Main model-selection loop on linearly growing data subsets.

Each step trains every surviving configuration on the first n = s * delta
points, converts held-out pointwise losses into a binary top/flop column via
a nonparametric omnibus test, drops statistically significant losers with the
open sequential test, and stops early once the survivors' recent traces are
indistinguishable.
"""

import logging
import time
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from .learners import LearnerSpec, score_configurations
from .sequential import is_flop_configuration, plan_wald_test
from .stat_tests import cochran_q, column_midranks, friedman

log = logging.getLogger(__name__)

__all__ = [
    "Configuration",
    "CVSTParams",
    "CVSTResult",
    "run_cvst",
    "top_configurations",
    "outlier_binarize",
    "similar_performance",
    "select_winner",
]


@dataclass(frozen=True)
class Configuration:
    """One point of the hyperparameter grid."""

    id: int
    params: tuple  # sorted (name, value) pairs; hashable and order-stable

    @classmethod
    def from_dict(cls, id, params):
        return cls(id, tuple(sorted(params.items())))

    def as_dict(self):
        return dict(self.params)


@dataclass(frozen=True)
class CVSTParams:
    """Meta-parameters of the sequential search."""

    steps_S: int = 10
    alpha: float = 0.05
    alpha_l: float = 0.01
    beta_l: float = 0.1
    w_stop: int = 3
    task: str = "regression"
    similarity_mode: str = "residual"
    seed: int = 0

    def __post_init__(self):
        if not (1 <= self.w_stop < self.steps_S):
            raise ValueError(f"need 1 <= w_stop < steps_S, got w_stop={self.w_stop}, steps_S={self.steps_S}")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie in (0, 1)")
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.similarity_mode not in ("residual", "outlier"):
            raise ValueError(f"unknown similarity mode {self.similarity_mode!r}")
        # validates alpha_l/beta_l ranges and steps_S >= minimum
        plan_wald_test(self.steps_S, self.alpha_l, self.beta_l)


@dataclass
class CVSTResult:
    winner: Configuration
    stopped_early_at: int | None
    per_step: np.ndarray  # |C| x S mean losses, NaN where never computed
    trace: np.ndarray  # |C| x S binary top/flop history
    active_matrix: np.ndarray  # |C| x S activity after each step's drop stage
    survivors_per_step: list
    timing: list  # wall-clock seconds per executed step

    @property
    def steps_run(self):
        return len(self.survivors_per_step)


def top_configurations(pointwise, alpha, task, ids=None, binary=None):
    """Indices of the top-performing rows of a pointwise loss matrix.

    Rows are sorted ascending by mean loss and compared incrementally: for
    k = 2..K the first k rows are tested (Cochran's Q for classification or a
    supplied binary matrix, Friedman otherwise) at the Bonferroni-corrected
    level alpha/(K-1).  The rows before the first significant test are the top
    group; with no significant test every row is top.

    Args:
        pointwise: K x r loss matrix of the active configurations.
        alpha: similarity significance level.
        task: "regression" or "classification".
        ids: optional row labels returned instead of row indices.
        binary: optional K x r binary matrix tested in place of `pointwise`
            (outlier similarity mode); sorting still uses `pointwise` means.

    Returns:
        Set of ids (or row indices) flagged as top.
    """
    m = np.asarray(pointwise, dtype=float)
    if m.ndim != 2 or m.shape[0] < 1:
        raise ValueError("pointwise must be a non-empty 2-D matrix")
    if np.isnan(m).any():
        raise ValueError("pointwise rows of active configurations must be complete")
    if ids is None:
        ids = list(range(m.shape[0]))
    k_total = m.shape[0]
    if k_total == 1:
        return {ids[0]}
    means = m.mean(axis=1)
    order = np.argsort(means, kind="stable")
    test_matrix = m if binary is None else np.asarray(binary, dtype=float)
    sorted_test = test_matrix[order]
    corrected = alpha / (k_total - 1)
    use_q = task == "classification" or binary is not None
    for k in range(2, k_total + 1):
        sub = sorted_test[:k]
        result = cochran_q(sub) if use_q else friedman(sub)
        if result.p_value <= corrected:
            return {ids[i] for i in order[: k - 1]}
    return {ids[i] for i in order}


def outlier_binarize(residuals, alpha):
    """Binary outlier indicators from signed per-point residuals.

    Each configuration's residual spread sigma_c is estimated from its own
    row (zero-mean normality assumption); a point is an outlier when its
    absolute residual exceeds the two-sided alpha confidence bound.  A
    zero-spread row yields all zeros.
    """
    r = np.asarray(residuals, dtype=float)
    if r.ndim != 2:
        raise ValueError("residuals must be a 2-D matrix")
    if not np.all(np.isfinite(r)):
        raise ValueError("residuals must be finite")
    z = NormalDist().inv_cdf(1.0 - alpha / 2.0)
    sigma = np.sqrt(np.mean(r**2, axis=1))
    out = np.zeros_like(r)
    nonzero = sigma > 0
    out[nonzero] = (np.abs(r[nonzero]) > z * sigma[nonzero, None]).astype(float)
    return out


def similar_performance(trace_window, alpha):
    """True (stop) when the survivors' trace window shows no significant difference."""
    w = np.asarray(trace_window, dtype=float)
    if w.ndim != 2 or w.shape[0] < 1:
        raise ValueError("trace window must be a non-empty 2-D matrix")
    if w.shape[0] == 1:
        return True
    return cochran_q(w).p_value > alpha


def select_winner(per_step, active, w_stop, s, configurations=None):
    """Configuration with the lowest mean rank over the last w_stop steps.

    Ranks in each step are taken against every non-missing column entry
    (including configurations dropped later), ties mid-ranked; exact mean-rank
    ties break toward the lowest id.
    """
    p = np.asarray(per_step, dtype=float)
    active = np.asarray(active, dtype=bool)
    if s < 1:
        raise ValueError("s must be at least 1")
    if not active.any():
        raise ValueError("no active configuration to select from")
    window = range(max(0, s - w_stop), s)
    rank_sum = np.zeros(p.shape[0])
    for i in window:
        col = p[:, i]
        known = ~np.isnan(col)
        ranks = np.full(p.shape[0], np.nan)
        ranks[known] = column_midranks(col[known])
        rank_sum += np.where(active, ranks, 0.0)
    mean_rank = rank_sum / len(list(window))
    best = None
    for c in np.flatnonzero(active):
        if best is None or mean_rank[c] < mean_rank[best]:
            best = int(c)
    if configurations is not None:
        return configurations[best]
    return best


def run_cvst(data, learner, grid, params, n_threads=1):
    """Run the sequential model-selection loop and return the winner.

    Args:
        data: the full :class:`Dataset`; the first n = s * delta points of the
            given order are the step-s training set.
        learner: base :class:`LearnerSpec` whose kind/tolerances apply to every
            configuration; sigma and lambda come from each grid entry.
        grid: list of :class:`Configuration` with `log10_sigma` and
            `log10_lambda` parameters.
        params: :class:`CVSTParams`.
        n_threads: per-step parallelism across configurations; results are
            identical for any thread count.
    """
    if not grid:
        raise ValueError("empty configuration grid")
    if params.task != data.task:
        raise ValueError(f"params.task={params.task!r} does not match data.task={data.task!r}")
    n_total = len(data)
    s_max = params.steps_S
    delta = n_total // (s_max + 1)
    if delta < 1:
        raise ValueError(f"need at least steps_S + 1 = {s_max + 1} data points, got {n_total}")
    plan = plan_wald_test(s_max, params.alpha_l, params.beta_l)
    n_cfg = len(grid)
    specs = [
        LearnerSpec(
            learner.kind,
            log10_sigma=c.as_dict()["log10_sigma"],
            log10_lambda=c.as_dict()["log10_lambda"],
            max_iter=learner.max_iter,
            tol=learner.tol,
        )
        for c in grid
    ]
    trace = np.zeros((n_cfg, s_max))
    per_step = np.full((n_cfg, s_max), np.nan)
    active = np.ones(n_cfg, dtype=bool)
    active_matrix = np.zeros((n_cfg, s_max), dtype=bool)
    survivors = []
    timing = []
    stopped_early_at = None
    s = 0
    for s in range(1, s_max + 1):
        t0 = time.perf_counter()
        n_train = s * delta
        train = data.slice(np.arange(n_train))
        test = data.slice(np.arange(n_train, n_total))
        idx = np.flatnonzero(active)
        losses, residuals = score_configurations(
            train, test, learner.kind, [specs[i] for i in idx], n_threads=n_threads
        )
        failed = np.isnan(losses).any(axis=1)
        for row in np.flatnonzero(failed):
            log.warning("deactivating failed configuration id=%d at step %d", idx[row], s)
            active[idx[row]] = False
        ok = ~failed
        idx = idx[ok]
        losses = losses[ok]
        if idx.size == 0:
            raise ValueError(f"every configuration failed at step {s}")
        per_step[idx, s - 1] = losses.mean(axis=1)
        binary = None
        if params.similarity_mode == "outlier" and params.task == "regression":
            binary = outlier_binarize(residuals[ok], params.alpha)
        top = top_configurations(losses, params.alpha, params.task, ids=list(idx), binary=binary)
        trace[list(top), s - 1] = 1.0
        dropped = [c for c in idx if is_flop_configuration(trace[c, :s], s, plan)]
        if len(dropped) == len(idx):
            # total elimination: keep the best-mean configuration of this step
            keep = idx[int(np.argmin(losses.mean(axis=1)))]
            dropped = [c for c in dropped if c != keep]
        for c in dropped:
            active[c] = False
        active_matrix[:, s - 1] = active
        survivors.append(int(active.sum()))
        timing.append(time.perf_counter() - t0)
        if s >= params.w_stop:
            window = trace[active, s - params.w_stop : s]
            if similar_performance(window, params.alpha):
                stopped_early_at = s
                break
    winner = select_winner(per_step, active, params.w_stop, s, configurations=grid)
    return CVSTResult(winner, stopped_early_at, per_step, trace, active_matrix, survivors, timing)
