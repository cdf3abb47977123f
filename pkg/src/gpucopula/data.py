"""Copula samples: validation, ranking, mixture simulation, CSV I/O, splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import special
from scipy.stats import rankdata

from .parametric import CopulaFamily, ParametricCopula, sample as sample_copula

__all__ = [
    "DataError",
    "MixtureSimConfig",
    "validate_sample",
    "pseudo_observations",
    "simulate_mixture",
    "mixture_cdf",
    "read_sample",
    "write_sample",
    "read_matrix",
    "write_matrix",
    "split",
]


class DataError(ValueError):
    """Input data violate the copula-sample contract."""


def validate_sample(data, name: str = "data") -> np.ndarray:
    """Return ``data`` as a float ``(n, 2)`` array with entries in (0, 1)."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise DataError(f"{name} must be an n x 2 array, got shape {x.shape}")
    if x.shape[0] < 1:
        raise DataError(f"{name} is empty")
    if not np.all(np.isfinite(x)):
        raise DataError(f"{name} contains non-finite values")
    bad = np.flatnonzero(np.any((x <= 0) | (x >= 1), axis=1))
    if bad.size:
        raise DataError(f"{name} row {bad[0]} lies outside the open unit square: {x[bad[0]]}")
    return x


def pseudo_observations(raw) -> np.ndarray:
    """Per-column average ranks divided by ``n + 1``."""
    x = np.asarray(raw, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise DataError(f"raw data must be an n x 2 array, got shape {x.shape}")
    n = x.shape[0]
    if n < 2:
        raise DataError("need at least two rows to rank")
    if not np.all(np.isfinite(x)):
        raise DataError("raw data contain non-finite values")
    for c in range(2):
        if np.all(x[:, c] == x[0, c]):
            raise DataError(f"column {c} is constant; ranks carry no information")
    return rankdata(x, method="average", axis=0) / (n + 1.0)


@dataclass(frozen=True)
class MixtureSimConfig:
    """Two-component mixture with Gaussian margins.

    Component 1 couples N(mu11, sd11) and N(mu12, sd12) through a Clayton
    copula with parameter ``gamma``; component 2 is a bivariate normal with
    correlation ``rho``, means ``(mu21, mu22)`` and sds ``(sd21, sd22)``.
    """

    weight: float = 0.5
    gamma: float = 6.0
    rho: float = 0.6
    means: tuple = (0.0, 0.0, 0.0, 2.0)
    sds: tuple = (1.0, 1.0, 1.0, 1.0)

    def __post_init__(self):
        if not 0.0 <= self.weight <= 1.0:
            raise ValueError("mixture weight must lie in [0, 1]")
        if not self.gamma > 0:
            raise ValueError("Clayton parameter must be positive")
        if not -1.0 < self.rho < 1.0:
            raise ValueError("correlation must lie in (-1, 1)")
        if len(self.means) != 4 or len(self.sds) != 4:
            raise ValueError("means and sds need four entries (mu11, mu12, mu21, mu22)")
        if any(not s > 0 for s in self.sds):
            raise ValueError("standard deviations must be positive")
        object.__setattr__(self, "means", tuple(float(m) for m in self.means))
        object.__setattr__(self, "sds", tuple(float(s) for s in self.sds))

    def as_dict(self) -> dict:
        return {
            "weight": self.weight,
            "gamma": self.gamma,
            "rho": self.rho,
            "means": list(self.means),
            "sds": list(self.sds),
        }


def mixture_cdf(config: MixtureSimConfig, x, coord: int):
    """Marginal mixture CDF of coordinate ``coord`` (0 or 1)."""
    m1, s1 = config.means[coord], config.sds[coord]
    m2, s2 = config.means[2 + coord], config.sds[2 + coord]
    w = config.weight
    return w * special.ndtr((x - m1) / s1) + (1.0 - w) * special.ndtr((x - m2) / s2)


def simulate_mixture(config: MixtureSimConfig, n: int, rng: np.random.Generator):
    """Draw ``(raw, copula)``: raw mixture data and their exact mixture-CDF transform."""
    if n < 1:
        raise ValueError("n must be positive")
    first = rng.uniform(size=n) < config.weight
    k1 = int(first.sum())
    raw = np.empty((n, 2))
    cl = sample_copula(ParametricCopula(CopulaFamily.CLAYTON, config.gamma), k1, rng) if k1 else np.empty((0, 2))
    raw[first, 0] = config.means[0] + config.sds[0] * special.ndtri(cl[:, 0])
    raw[first, 1] = config.means[1] + config.sds[1] * special.ndtri(cl[:, 1])
    k2 = n - k1
    z1 = rng.standard_normal(k2)
    z2 = config.rho * z1 + math.sqrt(1.0 - config.rho**2) * rng.standard_normal(k2)
    raw[~first, 0] = config.means[2] + config.sds[2] * z1
    raw[~first, 1] = config.means[3] + config.sds[3] * z2
    cop = np.column_stack([mixture_cdf(config, raw[:, c], c) for c in range(2)])
    eps = np.finfo(float).eps
    return raw, np.clip(cop, eps * 0.5, 1.0 - eps * 0.5)


def split(data, n_train: int):
    """Order-preserving split into the first ``n_train`` rows and the rest."""
    x = np.asarray(data)
    n = x.shape[0]
    if not 1 <= n_train < n:
        raise ValueError(f"n_train must satisfy 1 <= n_train < {n}, got {n_train}")
    return x[:n_train], x[n_train:]


def write_matrix(path, data, header=("u", "v")) -> None:
    x = np.asarray(data, dtype=float)
    with open(path, "w", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in x:
            fh.write(",".join(f"{val:.17g}" for val in row) + "\n")


def read_matrix(path, header=None) -> np.ndarray:
    """Read a numeric CSV with a header row; ``header`` pins the column names."""
    path = Path(path)
    rows = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if header is not None and names != list(header):
            raise DataError(f"{path}: expected header {','.join(header)!r}, got {','.join(names)!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != len(names):
                raise DataError(f"{path}:{lineno}: expected {len(names)} fields, got {len(row)}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric field in {row!r}") from None
    if not rows:
        raise DataError(f"{path}: no data rows")
    x = np.asarray(rows, dtype=float)
    if not np.all(np.isfinite(x)):
        bad = int(np.flatnonzero(~np.all(np.isfinite(x), axis=1))[0])
        raise DataError(f"{path}:{bad + 2}: non-finite value")
    return x


def write_sample(path, data) -> None:
    """Write a copula sample as CSV with header ``u,v`` at 17 significant digits."""
    write_matrix(path, validate_sample(data))


def read_sample(path) -> np.ndarray:
    """Read a ``u,v`` CSV, rejecting values outside the open unit square by line."""
    x = read_matrix(path, header=("u", "v"))
    bad = np.flatnonzero(np.any((x <= 0) | (x >= 1), axis=1))
    if bad.size:
        raise DataError(
            f"{path}:{bad[0] + 2}: value outside the open unit interval: "
            f"{x[bad[0], 0]!r},{x[bad[0], 1]!r}"
        )
    return x
