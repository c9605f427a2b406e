"""Command-line frontend.

Subcommands bind datasets, configuration grids, and test-plan parameters to
the library.  Exit codes: 0 success, 2 argument errors, 3 data errors,
4 infeasible test plan or budget.
"""

import argparse
import hashlib
import itertools
import json
import math
import os
import sys
import time

import numpy as np

from . import __version__
from .cvst import Configuration, CVSTParams, run_cvst
from .datagen import GeneratorSpec, gen_noisy_sine, gen_noisy_sinc, load_csv, write_csv
from .learners import LearnerFailure, LearnerSpec, full_cv
from .sequential import cvst_error_bound, plan_wald_test, safety_zone
from .simulation import (
    BudgetSpec,
    InfeasibleBudgetError,
    NoRealRootError,
    SafetyFractionError,
    SwitchingBernoulliSpec,
    plan_budget,
    simulate_false_negatives,
    simulate_speed_gain,
)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_PLAN = 4


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def _sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _default_threads():
    env = os.environ.get("SEQCV_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def load_grid(path):
    """Parse a JSON grid file into a list of configurations.

    The file maps axis names to either an explicit value list or an inclusive
    arithmetic range {"from", "to", "by"}.  The cross product over axes in
    sorted name order defines the grid.
    """
    if not os.path.exists(path):
        raise CliError(EXIT_USAGE, f"grid file not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise CliError(EXIT_USAGE, f"cannot parse grid file {path}: {exc}") from None
    if not isinstance(raw, dict) or not raw:
        raise CliError(EXIT_USAGE, f"grid file {path} must map axis names to ranges or lists")
    axes = {}
    for name in sorted(raw):
        spec = raw[name]
        if isinstance(spec, dict):
            missing = {"from", "to", "by"} - set(spec)
            if missing:
                raise CliError(EXIT_USAGE, f"axis {name!r}: range needs from/to/by, missing {sorted(missing)}")
            lo, hi, by = float(spec["from"]), float(spec["to"]), float(spec["by"])
            if by <= 0 or hi < lo:
                raise CliError(EXIT_USAGE, f"axis {name!r}: need by > 0 and to >= from")
            count = int(math.floor((hi - lo) / by + 1e-9)) + 1
            values = [lo + i * by for i in range(count)]
        elif isinstance(spec, list) and spec:
            values = [float(v) for v in spec]
        else:
            raise CliError(EXIT_USAGE, f"axis {name!r} must be a non-empty list or a from/to/by range")
        if not all(math.isfinite(v) for v in values):
            raise CliError(EXIT_USAGE, f"axis {name!r} contains non-finite values")
        axes[name] = values
    names = list(axes)
    grid = []
    for i, combo in enumerate(itertools.product(*(axes[n] for n in names))):
        grid.append(Configuration.from_dict(i, dict(zip(names, combo))))
    return grid


def _load_data(path, task):
    if not os.path.exists(path):
        raise CliError(EXIT_DATA, f"data file not found: {path}")
    try:
        return load_csv(path, task)
    except ValueError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None


def _require_kernel_axes(grid):
    params = grid[0].as_dict()
    for axis in ("log10_sigma", "log10_lambda"):
        if axis not in params:
            raise CliError(EXIT_USAGE, f"grid must define the {axis!r} axis for kernel learners")


def _matrix_lines(name, matrix):
    lines = [f"[{name}]"]
    for row in np.asarray(matrix, dtype=float):
        lines.append(",".join(_fmt(float(v)) for v in row))
    lines.append(f"[/{name}]")
    return lines


def _write_report(path, lines):
    text = "\n".join(lines) + "\n"
    if path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def cmd_run(args):
    grid = load_grid(args.grid)
    print(f"grid size: {len(grid)}", file=sys.stderr)
    _require_kernel_axes(grid)
    task = "regression" if args.learner == "krr" else "classification"
    data = _load_data(args.data, task)
    w_stop = args.wstop if args.wstop is not None else (6 if args.steps == 20 else 3)
    try:
        params = CVSTParams(
            steps_S=args.steps,
            alpha=args.alpha,
            alpha_l=args.alpha_l,
            beta_l=args.beta_l,
            w_stop=w_stop,
            task=task,
            similarity_mode=args.similarity,
            seed=args.seed,
        )
    except ValueError as exc:
        raise CliError(EXIT_PLAN, str(exc)) from None
    base = LearnerSpec(args.learner)
    t0 = time.perf_counter()
    try:
        result = run_cvst(data, base, grid, params, n_threads=args.threads)
    except ValueError as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    total = time.perf_counter() - t0
    for s, dt in enumerate(result.timing, start=1):
        print(f"step {s} wall-clock: {dt:.3f}s", file=sys.stderr)
    print(f"total wall-clock: {total:.3f}s", file=sys.stderr)
    lines = [
        "format: seqcv-run-report v1",
        f"version: {__version__}",
        f"data_sha256: {_sha256_file(args.data)}",
        f"grid_sha256: {_sha256_file(args.grid)}",
        f"seed: {args.seed}",
        f"learner: {args.learner}",
        f"task: {task}",
        f"steps_S: {args.steps}",
        f"alpha: {_fmt(args.alpha)}",
        f"alpha_l: {_fmt(args.alpha_l)}",
        f"beta_l: {_fmt(args.beta_l)}",
        f"w_stop: {w_stop}",
        f"similarity: {args.similarity}",
        f"grid_size: {len(grid)}",
        f"winner_id: {result.winner.id}",
        "winner_params: " + ",".join(f"{k}={_fmt(v)}" for k, v in result.winner.params),
        f"stopped_early_at: {result.stopped_early_at if result.stopped_early_at is not None else 'none'}",
        "survivors_per_step: " + ",".join(str(c) for c in result.survivors_per_step),
    ]
    lines += _matrix_lines("P_S", result.per_step)
    lines += _matrix_lines("T_S", result.trace)
    _write_report(args.output, lines)
    print(f"winner: id={result.winner.id} " + ",".join(f"{k}={_fmt(v)}" for k, v in result.winner.params))
    return EXIT_OK


def cmd_fullcv(args):
    grid = load_grid(args.grid)
    print(f"grid size: {len(grid)}", file=sys.stderr)
    _require_kernel_axes(grid)
    task = "regression" if args.learner == "krr" else "classification"
    data = _load_data(args.data, task)
    specs = [
        LearnerSpec(args.learner, log10_sigma=c.as_dict()["log10_sigma"], log10_lambda=c.as_dict()["log10_lambda"])
        for c in grid
    ]
    t0 = time.perf_counter()
    try:
        result = full_cv(data, specs, folds=args.folds, seed=args.seed, n_threads=args.threads)
    except (ValueError, LearnerFailure) as exc:
        raise CliError(EXIT_DATA, str(exc)) from None
    print(f"total wall-clock: {time.perf_counter() - t0:.3f}s", file=sys.stderr)
    winner = grid[result.winner_index]
    lines = [
        "format: seqcv-fullcv-report v1",
        f"version: {__version__}",
        f"data_sha256: {_sha256_file(args.data)}",
        f"grid_sha256: {_sha256_file(args.grid)}",
        f"seed: {args.seed}",
        f"learner: {args.learner}",
        f"task: {task}",
        f"folds: {args.folds}",
        f"grid_size: {len(grid)}",
        f"winner_id: {winner.id}",
        "winner_params: " + ",".join(f"{k}={_fmt(v)}" for k, v in winner.params),
        f"winner_mean_loss: {_fmt(float(result.mean_losses[result.winner_index]))}",
        "fold_sizes: " + ",".join(str(n) for n in result.fold_sizes),
        "mean_losses: " + ",".join(_fmt(float(v)) for v in result.mean_losses),
    ]
    _write_report(args.output, lines)
    print(f"winner: id={winner.id} " + ",".join(f"{k}={_fmt(v)}" for k, v in winner.params))
    return EXIT_OK


def cmd_gen(args):
    spec = GeneratorSpec(args.family, args.dim, args.noise, args.count, args.seed)
    data = gen_noisy_sine(spec) if args.family == "noisy_sine" else gen_noisy_sinc(spec)
    write_csv(data, args.output)
    print(f"wrote {len(data)} rows to {args.output}")
    return EXIT_OK


def cmd_safety_zone(args):
    try:
        plan = plan_wald_test(args.steps, args.alpha_l, args.beta_l)
    except ValueError as exc:
        raise CliError(EXIT_PLAN, str(exc)) from None
    print(f"{safety_zone(plan):.2f}")
    return EXIT_OK


def cmd_error_bound(args):
    try:
        plan = plan_wald_test(args.steps, args.alpha_l, args.beta_l)
        bound = cvst_error_bound(plan, args.pi)
    except ValueError as exc:
        raise CliError(EXIT_PLAN, str(exc)) from None
    print(_fmt(bound))
    return EXIT_OK


def cmd_plan_budget(args):
    try:
        spec = BudgetSpec(args.budget, args.fit_time, args.configs, args.keep_r, args.safety_sr, args.complexity_m)
        steps = plan_budget(spec)
    except InfeasibleBudgetError as exc:
        raise CliError(EXIT_PLAN, f"infeasible budget (constraint 1): {exc}") from None
    except NoRealRootError as exc:
        raise CliError(EXIT_PLAN, f"no real root (constraint 2): {exc}") from None
    except SafetyFractionError as exc:
        raise CliError(EXIT_PLAN, f"safety fraction too small (constraint 3): {exc}") from None
    except ValueError as exc:
        raise CliError(EXIT_USAGE, str(exc)) from None
    print(steps)
    return EXIT_OK


def cmd_simulate(args):
    if args.kind == "false-negatives":
        try:
            spec = SwitchingBernoulliSpec(
                args.pi_before, args.pi_after, args.change_point, args.steps, args.trials, args.seed
            )
            est = simulate_false_negatives(spec, plan_kind=args.plan, alpha_l=args.alpha_l, beta_l=args.beta_l)
        except ValueError as exc:
            raise CliError(EXIT_PLAN, str(exc)) from None
        print("pi_before,pi_after,change_point,steps_S,plan,estimate,standard_error,trials")
        print(
            f"{_fmt(args.pi_before)},{_fmt(args.pi_after)},{args.change_point},{args.steps},"
            f"{args.plan},{_fmt(est.estimate)},{_fmt(est.standard_error)},{est.trials}"
        )
    else:
        try:
            w, l = (int(p) for p in args.ratio.split(":"))
        except ValueError:
            raise CliError(EXIT_USAGE, f"ratio must look like W:L, got {args.ratio!r}") from None
        try:
            ratios = simulate_speed_gain(
                args.steps,
                args.configs,
                winner_loser_ratio=(w, l),
                folds=args.folds,
                complexity_m=args.complexity_m,
                resamples=args.resamples,
                seed=args.seed,
                alpha_l=args.alpha_l,
                beta_l=args.beta_l,
            )
        except ValueError as exc:
            raise CliError(EXIT_PLAN, str(exc)) from None
        print("steps_S,configs_K,ratio,median_ratio,mean_ratio,resamples")
        print(
            f"{args.steps},{args.configs},{args.ratio},{_fmt(float(np.median(ratios)))},"
            f"{_fmt(float(np.mean(ratios)))},{args.resamples}"
        )
    return EXIT_OK


def _add_plan_flags(p, steps_default=10):
    p.add_argument("--steps", type=int, default=steps_default, help="maximum number of steps S")
    p.add_argument("--alpha-l", type=float, default=0.01, dest="alpha_l", help="sequential test significance level")
    p.add_argument("--beta-l", type=float, default=0.1, dest="beta_l", help="sequential test type II level")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="seqcv",
        description="Model selection on growing data subsets with sequential elimination.",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="sequential search on a CSV dataset", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("data", help="CSV dataset (header row, target last)")
    p.add_argument("--grid", required=True, help="JSON grid file")
    p.add_argument("--learner", choices=("krr", "klr"), default="krr", help="kernel learner")
    _add_plan_flags(p)
    p.add_argument("--alpha", type=float, default=0.05, help="similarity significance level")
    p.add_argument("--wstop", type=int, default=None, help="early-stop window (default 6 when --steps 20, else 3)")
    p.add_argument("--similarity", choices=("residual", "outlier"), default="residual", help="similarity mode")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--threads", type=int, default=_default_threads(), help="per-step parallelism")
    p.add_argument("--output", default="-", help="report path, - for stdout")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("fullcv", help="k-fold cross-validation over the full grid", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("data", help="CSV dataset (header row, target last)")
    p.add_argument("--grid", required=True, help="JSON grid file")
    p.add_argument("--learner", choices=("krr", "klr"), default="krr", help="kernel learner")
    p.add_argument("--folds", type=int, default=10, help="number of folds")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--threads", type=int, default=_default_threads(), help="parallelism over configurations")
    p.add_argument("--output", default="-", help="report path, - for stdout")
    p.set_defaults(func=cmd_fullcv)

    p = sub.add_parser("gen", help="generate a synthetic dataset", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--family", choices=("noisy_sine", "noisy_sinc"), required=True, help="generator family")
    p.add_argument("--dim", type=int, default=1, help="intrinsic dimensionality")
    p.add_argument("--noise", type=float, default=0.0, help="noise standard deviation")
    p.add_argument("--count", type=int, default=100, help="number of points")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.add_argument("--output", required=True, help="CSV output path")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("safety-zone", help="safety zone of a test plan", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_plan_flags(p)
    p.set_defaults(func=cmd_safety_zone)

    p = sub.add_parser("error-bound", help="worst-case drop probability of a late winner", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    _add_plan_flags(p)
    p.add_argument("--pi", type=float, required=True, help="post-safety-zone success probability")
    p.set_defaults(func=cmd_error_bound)

    p = sub.add_parser("plan-budget", help="largest step count fitting a time budget", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--budget", type=float, required=True, help="total time budget T")
    p.add_argument("--fit-time", type=float, required=True, dest="fit_time", help="full-data fit time t")
    p.add_argument("--configs", type=int, required=True, help="number of configurations K")
    p.add_argument("--keep-r", type=float, default=0.5, dest="keep_r", help="expected surviving fraction r")
    p.add_argument("--safety-sr", type=float, default=0.3, dest="safety_sr", help="safety zone fraction s_r")
    p.add_argument("--complexity-m", type=int, default=3, dest="complexity_m", help="learner time complexity degree m")
    p.set_defaults(func=cmd_plan_budget)

    p = sub.add_parser("simulate", help="Monte Carlo harnesses", formatter_class=argparse.ArgumentDefaultsHelpFormatter)
    p.add_argument("--kind", choices=("false-negatives", "speed-gain"), required=True, help="harness to run")
    _add_plan_flags(p)
    p.add_argument("--plan", choices=("wald", "spicer"), default="wald", help="sequential test (false-negatives)")
    p.add_argument("--pi-before", type=float, default=0.5, dest="pi_before", help="success rate before the change point")
    p.add_argument("--pi-after", type=float, default=1.0, dest="pi_after", help="success rate after the change point")
    p.add_argument("--change-point", type=int, default=0, dest="change_point", help="step at which the rate switches")
    p.add_argument("--trials", type=int, default=10000, help="Monte Carlo trials (false-negatives)")
    p.add_argument("--configs", type=int, default=50, help="number of configurations K (speed-gain)")
    p.add_argument("--ratio", default="1:1", help="winners:losers proportion (speed-gain)")
    p.add_argument("--folds", type=int, default=10, help="full-CV folds in the cost model (speed-gain)")
    p.add_argument("--complexity-m", type=int, default=3, dest="complexity_m", help="learner time complexity degree m")
    p.add_argument("--resamples", type=int, default=200, help="resamples (speed-gain)")
    p.add_argument("--seed", type=int, default=0, help="random seed")
    p.set_defaults(func=cmd_simulate)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry():
    sys.exit(main())


if __name__ == "__main__":
    entry()
