"""Synthetic benchmark generators and CSV dataset I/O."""

import csv
from dataclasses import dataclass

import numpy as np

from .learners import Dataset

__all__ = ["GeneratorSpec", "gen_noisy_sine", "gen_noisy_sinc", "write_csv", "load_csv"]


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters of a synthetic data draw.

    `intrinsic_dim` scales the difficulty (number of periods for the sine,
    frequency of the overlay for the sinc); `noise` is the standard deviation
    of the additive Gaussian noise.
    """

    family: str  # "noisy_sine" | "noisy_sinc"
    intrinsic_dim: int = 1
    noise: float = 0.0
    count: int = 100
    seed: int = 0

    def __post_init__(self):
        if self.family not in ("noisy_sine", "noisy_sinc"):
            raise ValueError(f"unknown generator family {self.family!r}")
        if self.intrinsic_dim < 1 or int(self.intrinsic_dim) != self.intrinsic_dim:
            raise ValueError("intrinsic_dim must be a positive integer")
        if self.noise < 0.0:
            raise ValueError("noise must be nonnegative")
        if self.count < 1:
            raise ValueError("count must be at least 1")


def gen_noisy_sine(spec):
    """Binary classification set: x uniform on [0, 2*pi*d], label = sign of sin(x) + noise.

    A noisy value of exactly zero maps to label 1, matching the convention
    that the boundary belongs to the positive class.
    """
    if spec.family != "noisy_sine":
        raise ValueError("spec.family must be 'noisy_sine'")
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(0.0, 2.0 * np.pi * spec.intrinsic_dim, spec.count)
    y = np.sin(x) + rng.normal(0.0, spec.noise, spec.count) if spec.noise > 0 else np.sin(x)
    labels = (y >= 0.0).astype(float)
    return Dataset(x[:, None], labels, "classification")


def gen_noisy_sinc(spec):
    """Regression set: x uniform on [-pi, pi], y = sinc(4x) + sin(15*d*x)/5 + noise.

    sinc is the unnormalized sin(t)/t with sinc(0) = 1, so the curve peaks at
    one in the origin.
    """
    if spec.family != "noisy_sinc":
        raise ValueError("spec.family must be 'noisy_sinc'")
    rng = np.random.default_rng(spec.seed)
    x = rng.uniform(-np.pi, np.pi, spec.count)
    # np.sinc is the normalized sin(pi t)/(pi t); rescale to plain sin(4x)/(4x)
    y = np.sinc(4.0 * x / np.pi) + np.sin(15.0 * spec.intrinsic_dim * x) / 5.0
    if spec.noise > 0:
        y = y + rng.normal(0.0, spec.noise, spec.count)
    return Dataset(x[:, None], y, "regression")


def write_csv(data, path):
    """Write a dataset as UTF-8 CSV with header x1..xd,y.

    Floats use 17 significant digits so a read-back reproduces every value
    exactly.
    """
    d = data.features.shape[1]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow([f"x{i + 1}" for i in range(d)] + ["y"])
        for row, target in zip(data.features, data.targets):
            writer.writerow([f"{v:.17g}" for v in row] + [f"{target:.17g}"])


def load_csv(path, task):
    """Parse a header-plus-numeric-rows CSV into a dataset.

    The last column is the target; all fields must be numeric and every row
    must match the header width.  Errors name the offending line.
    """
    if task not in ("regression", "classification"):
        raise ValueError(f"unknown task {task!r}")
    rows = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        width = len(header)
        if width < 2:
            raise ValueError(f"{path}: header must name at least one feature and the target")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != width:
                raise ValueError(f"{path}: line {lineno}: expected {width} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}: line {lineno}: non-numeric field") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    m = np.asarray(rows, dtype=float)
    features, targets = m[:, :-1], m[:, -1]
    if task == "classification" and not np.all((targets == 0.0) | (targets == 1.0)):
        raise ValueError(f"{path}: classification targets must be binary 0/1")
    return Dataset(features, targets, task)
