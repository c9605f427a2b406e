"""Kernel learners (ridge regression and logistic regression) plus the full-CV baseline.

Both learners use a Gaussian kernel and a per-sample regularization
convention: the ridge parameter lambda multiplies the training-set size n in
the linear system, so a fixed (sigma, lambda) pair corresponds to a fixed
hypothesis class no matter how large the training subset is.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)

__all__ = [
    "Dataset",
    "LearnerSpec",
    "FittedModel",
    "LearnerFailure",
    "gaussian_kernel",
    "gram_matrix",
    "fit_krr",
    "fit_klr",
    "predict",
    "predict_labels",
    "full_cv",
    "FullCVResult",
    "klr_objective",
]

JITTERS = (0.0, 1e-10, 1e-8, 1e-6)


class LearnerFailure(RuntimeError):
    """Raised when a configuration cannot be fit (singular system, divergence)."""


@dataclass(frozen=True)
class Dataset:
    """Feature matrix plus target vector with the task kind.

    Classification targets must be encoded as 0/1 so squared error equals the
    misclassification indicator.
    """

    features: np.ndarray
    targets: np.ndarray
    task: str

    def __post_init__(self):
        x = np.asarray(self.features, dtype=float)
        y = np.asarray(self.targets, dtype=float)
        if x.ndim != 2:
            raise ValueError("features must be a 2-D matrix")
        if y.ndim != 1 or y.shape[0] != x.shape[0]:
            raise ValueError("targets must be a vector matching the feature rows")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        if self.task not in ("regression", "classification"):
            raise ValueError(f"unknown task {self.task!r}")
        if self.task == "classification" and not np.all((y == 0.0) | (y == 1.0)):
            raise ValueError("classification targets must be binary 0/1")
        object.__setattr__(self, "features", x)
        object.__setattr__(self, "targets", y)

    def __len__(self):
        return self.features.shape[0]

    def slice(self, idx):
        return Dataset(self.features[idx], self.targets[idx], self.task)


@dataclass(frozen=True)
class LearnerSpec:
    """Learner kind plus Gaussian-kernel and ridge parameters on log10 scales."""

    kind: str  # "krr" | "klr"
    log10_sigma: float = 0.0
    log10_lambda: float = 0.0
    max_iter: int = 100
    tol: float = 1e-6

    def __post_init__(self):
        if self.kind not in ("krr", "klr"):
            raise ValueError(f"unknown learner kind {self.kind!r}")

    @property
    def sigma(self):
        return 10.0**self.log10_sigma

    @property
    def lam(self):
        return 10.0**self.log10_lambda


@dataclass
class FittedModel:
    kind: str
    support: np.ndarray
    coef: np.ndarray
    sigma: float
    intercept: float = 0.0
    iterations: int = 0
    converged: bool = True
    single_class: bool = False


def gaussian_kernel(a, b, sigma):
    """exp(-||a - b||^2 / (2 sigma^2)) for two feature vectors."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"dimension mismatch: {a.shape} vs {b.shape}")
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    d2 = float(np.sum((a - b) ** 2))
    return math.exp(-d2 / (2.0 * sigma * sigma))


def gram_matrix(x, z, sigma):
    """Gaussian kernel matrix between the rows of x and z."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape[1] != z.shape[1]:
        raise ValueError(f"dimension mismatch: {x.shape[1]} vs {z.shape[1]}")
    d2 = np.sum(x * x, axis=1)[:, None] + np.sum(z * z, axis=1)[None, :] - 2.0 * x @ z.T
    np.maximum(d2, 0.0, out=d2)
    return np.exp(-d2 / (2.0 * sigma * sigma))


def _chol_solve(a, rhs):
    """Cholesky solve with escalating diagonal jitter; returns (solution, factor used)."""
    n = a.shape[0]
    for jitter in JITTERS:
        try:
            chol = np.linalg.cholesky(a + jitter * np.eye(n) if jitter else a)
        except np.linalg.LinAlgError:
            continue
        sol = np.linalg.solve(chol.T, np.linalg.solve(chol, rhs))
        if np.all(np.isfinite(sol)):
            return sol
    raise LearnerFailure("linear system not positive definite after jitter escalation")


def fit_krr(train, spec):
    """Kernel ridge regression: solves (G + n*lambda*I) coef = y.

    Raises :class:`LearnerFailure` when the (possibly jittered) system is
    singular or inconsistent, e.g. duplicated points at lambda = 0 with
    conflicting targets.
    """
    if train.task != "regression":
        raise ValueError("fit_krr expects a regression dataset")
    x, y = train.features, train.targets
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one training point")
    g = gram_matrix(x, x, spec.sigma)
    a = g + (n * spec.lam) * np.eye(n)
    coef = _chol_solve(a, y)
    resid = np.abs(a @ coef - y).max()
    if not np.isfinite(resid) or resid > 1e-4 * max(1.0, np.abs(y).max()):
        raise LearnerFailure(f"ridge system inconsistent (residual {resid:.3g})")
    return FittedModel("krr", x.copy(), coef, spec.sigma)


def _sigmoid(f):
    out = np.empty_like(f)
    pos = f >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-f[pos]))
    ef = np.exp(f[~pos])
    out[~pos] = ef / (1.0 + ef)
    return out


def klr_objective(g, y, coef, intercept, n_lam):
    """Penalized negative log-likelihood with RKHS-norm penalty (coef' G coef)."""
    f = g @ coef + intercept
    # log(1 + e^f) evaluated stably
    loglik = float(np.sum(y * f - np.logaddexp(0.0, f)))
    return -loglik + 0.5 * n_lam * float(coef @ (g @ coef))


def fit_klr(train, spec):
    """Penalized kernel logistic regression fit by IRLS with step halving.

    The penalty is the RKHS norm coef' G coef scaled by n*lambda; an
    unpenalized intercept is included so heavy shrinkage recovers the class
    prior.  Single-class input yields a flagged constant-probability model.
    """
    if train.task != "classification":
        raise ValueError("fit_klr expects a classification dataset")
    x, y = train.features, train.targets
    n = x.shape[0]
    if n < 1:
        raise ValueError("need at least one training point")
    mean = float(y.mean())
    if mean in (0.0, 1.0):
        p = min(max(mean, 1e-12), 1.0 - 1e-12)
        model = FittedModel("klr", x.copy(), np.zeros(n), spec.sigma, intercept=math.log(p / (1 - p)))
        model.single_class = True
        return model
    g = gram_matrix(x, x, spec.sigma)
    n_lam = n * spec.lam
    coef = np.zeros(n)
    intercept = math.log(mean / (1.0 - mean))
    obj = klr_objective(g, y, coef, intercept, n_lam)
    converged = False
    it = 0
    for it in range(1, spec.max_iter + 1):
        f = g @ coef + intercept
        p = _sigmoid(f)
        w = np.clip(p * (1.0 - p), 1e-10, None)
        z = f + (y - p) / w
        a = g + np.diag(n_lam / w)
        try:
            u = _chol_solve(a, z)
            v = _chol_solve(a, np.ones(n))
        except LearnerFailure as exc:
            raise LearnerFailure(f"IRLS system failed at iteration {it}: {exc}") from exc
        new_intercept = float(u.sum() / v.sum())
        new_coef = u - new_intercept * v
        if not (np.all(np.isfinite(new_coef)) and math.isfinite(new_intercept)):
            raise LearnerFailure("IRLS diverged to non-finite coefficients")
        step = 1.0
        d_coef = new_coef - coef
        d_int = new_intercept - intercept
        while step > 1e-8:
            cand_coef = coef + step * d_coef
            cand_int = intercept + step * d_int
            cand_obj = klr_objective(g, y, cand_coef, cand_int, n_lam)
            if cand_obj <= obj + 1e-12:
                break
            step *= 0.5
        else:
            converged = True
            break
        delta = max(np.abs(step * d_coef).max(), abs(step * d_int))
        coef, intercept, obj = cand_coef, cand_int, cand_obj
        if delta < spec.tol:
            converged = True
            break
    return FittedModel("klr", x.copy(), coef, spec.sigma, intercept=intercept, iterations=it, converged=converged)


def predict(model, points):
    """Kernel expansion over the support inputs.

    KRR returns real-valued predictions; KLR returns probabilities.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2-D matrix")
    if points.shape[0] == 0:
        return np.empty(0)
    if points.shape[1] != model.support.shape[1]:
        raise ValueError(f"dimension mismatch: {points.shape[1]} vs {model.support.shape[1]}")
    if model.single_class:
        return np.full(points.shape[0], _sigmoid(np.array([model.intercept]))[0])
    k = gram_matrix(points, model.support, model.sigma)
    f = k @ model.coef + model.intercept
    if model.kind == "klr":
        return _sigmoid(f)
    return f


def predict_labels(model, points):
    """0/1 labels for a KLR model, thresholding probabilities at 0.5."""
    return (predict(model, points) >= 0.5).astype(float)


@dataclass(frozen=True)
class _Standardizer:
    x_mean: np.ndarray
    x_scale: np.ndarray
    y_mean: float
    y_scale: float

    @classmethod
    def fit(cls, x, y, normalize_y):
        x_mean = x.mean(axis=0)
        x_scale = x.std(axis=0)
        x_scale = np.where(x_scale > 0, x_scale, 1.0)
        if normalize_y:
            y_mean = float(y.mean())
            y_scale = float(y.std()) or 1.0
        else:
            y_mean, y_scale = 0.0, 1.0
        return cls(x_mean, x_scale, y_mean, y_scale)

    def x(self, x):
        return (x - self.x_mean) / self.x_scale

    def y(self, y):
        return (y - self.y_mean) / self.y_scale

    def y_inv(self, y):
        return y * self.y_scale + self.y_mean


def _score_group(train, test, kind, sigma, specs):
    """Fit every spec of one sigma group on ``train`` and score per point on ``test``.

    Returns a list aligned with ``specs`` of (losses, residuals) pairs;
    residuals are signed (regression) or None (classification); a failed fit
    yields (None, None).  Feature (and regression-target) standardization uses
    training statistics only.
    """
    std = _Standardizer.fit(train.features, train.targets, normalize_y=(kind == "krr"))
    xtr = std.x(train.features)
    xte = std.x(test.features)
    n = xtr.shape[0]
    g = gram_matrix(xtr, xtr, sigma)
    k_test = gram_matrix(xte, xtr, sigma)
    eigvals = eigvecs = proj = None
    if kind == "krr":
        # one eigendecomposition of G serves every lambda in the group
        ytr = std.y(train.targets)
        try:
            eigvals, eigvecs = np.linalg.eigh(g)
            proj = eigvecs.T @ ytr
        except np.linalg.LinAlgError:
            pass
    out = []
    for spec in specs:
        try:
            if kind == "krr":
                ytr = std.y(train.targets)
                shifted = eigvals + n * spec.lam if eigvals is not None else None
                if shifted is None or np.any(shifted <= 0.0):
                    a = g + (n * spec.lam) * np.eye(n)
                    coef = _chol_solve(a, ytr)
                else:
                    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                        coef = eigvecs @ (proj / shifted)
                resid_chk = np.abs(g @ coef + (n * spec.lam) * coef - ytr).max()
                if not np.isfinite(resid_chk) or resid_chk > 1e-4 * max(1.0, np.abs(ytr).max()):
                    raise LearnerFailure(f"ridge system inconsistent (residual {resid_chk:.3g})")
                pred = std.y_inv(k_test @ coef)
                residuals = pred - test.targets
                out.append((residuals**2, residuals))
            else:
                model = fit_klr(Dataset(xtr, train.targets, "classification"), spec)
                # reuse the shared test kernel block unless the fit degenerated
                if model.single_class:
                    prob = predict(model, xte)
                else:
                    prob = _sigmoid(k_test @ model.coef + model.intercept)
                labels = (prob >= 0.5).astype(float)
                out.append(((labels != test.targets).astype(float), None))
        except LearnerFailure as exc:
            log.warning("configuration (sigma=%g, lambda=%g) failed: %s", sigma, spec.lam, exc)
            out.append((None, None))
    return out


def score_configurations(train, test, kind, specs, n_threads=1):
    """Per-point held-out losses for many (sigma, lambda) specs on one split.

    Groups specs by sigma so each Gram matrix is built once.  Returns
    (losses, residuals) arrays of shape (len(specs), len(test)); rows of
    failed fits are NaN.  Deterministic regardless of thread count.
    """
    n_test = len(test)
    losses = np.full((len(specs), n_test), np.nan)
    residuals = np.full((len(specs), n_test), np.nan) if kind == "krr" else None
    groups = {}
    for i, spec in enumerate(specs):
        groups.setdefault(spec.sigma, []).append(i)

    def run_group(item):
        sigma, idx = item
        return idx, _score_group(train, test, kind, sigma, [specs[i] for i in idx])

    items = list(groups.items())
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(run_group, items))
    else:
        results = [run_group(item) for item in items]
    for idx, scored in results:
        for i, (loss_row, resid_row) in zip(idx, scored):
            if loss_row is not None:
                losses[i] = loss_row
                if residuals is not None:
                    residuals[i] = resid_row
    return losses, residuals


@dataclass
class FullCVResult:
    mean_losses: np.ndarray
    winner_index: int
    fold_sizes: list


def full_cv(data, specs, folds=10, seed=0, n_threads=1):
    """k-fold cross-validation over the whole grid on the full data set.

    One seeded shuffle, then contiguous blocks as folds.  The winner is the
    argmin of the pooled held-out loss, ties broken by grid order.
    """
    if folds < 2:
        raise ValueError("folds must be at least 2")
    n = len(data)
    if n < folds:
        raise ValueError(f"cannot split {n} points into {folds} folds")
    if not specs:
        raise ValueError("empty configuration grid")
    kind = specs[0].kind
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    blocks = np.array_split(perm, folds)
    loss_sums = np.zeros(len(specs))
    counts = np.zeros(len(specs))
    for block in blocks:
        mask = np.ones(n, dtype=bool)
        mask[block] = False
        train = data.slice(np.flatnonzero(mask))
        test = data.slice(block)
        losses, _ = score_configurations(train, test, kind, specs, n_threads=n_threads)
        ok = ~np.isnan(losses).any(axis=1)
        loss_sums[ok] += losses[ok].sum(axis=1)
        counts[ok] += losses.shape[1]
        counts[~ok] = np.nan
    mean_losses = loss_sums / counts
    finite = np.where(np.isfinite(mean_losses), mean_losses, np.inf)
    winner = int(np.argmin(finite))
    if not np.isfinite(finite[winner]):
        raise LearnerFailure("every configuration failed during cross-validation")
    return FullCVResult(mean_losses, winner, [len(b) for b in blocks])
