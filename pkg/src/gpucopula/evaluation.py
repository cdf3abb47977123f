"""Log predictive scores, predictive sampling, density grids and Kendall's tau."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats
from scipy.special import gammaln

from .data import validate_sample
from .parametric import ParametricCopula, logdensity as parametric_logdensity
from .partition import Family, _cells, component_params, draw_component_logdensities

__all__ = [
    "LpsReport",
    "lps",
    "lps_parametric",
    "pointwise_log_predictive",
    "predictive_sample",
    "density_grid",
    "kendall_tau",
    "kendall_tau_naive",
]


@dataclass(frozen=True)
class LpsReport:
    """Log predictive score; ``mean`` (per test point) is the headline number."""

    model: str
    total: float
    mean: float
    n_test: int
    n_draws: int

    def as_row(self) -> dict:
        return {
            "model": self.model,
            "lps_mean": self.mean,
            "lps_total": self.total,
            "n_test": self.n_test,
            "n_draws": self.n_draws,
        }


def _draw_logdens(draw, family, u, v, rotated):
    dens, logw, rest = draw_component_logdensities(draw, family, u, v, rotated)
    terms = dens + logw
    m = terms.max(axis=1)
    if rest > 0:
        m = np.maximum(m, math.log(rest))
    s = np.exp(terms - m[:, None]).sum(axis=1)
    if rest > 0:
        s += rest * np.exp(-m)
    return m + np.log(s)


def pointwise_log_predictive(draws, family, test, rotated: bool = False,
                             max_cells: int = 4_000_000):
    """Log of the posterior-mean density at each test point.

    Averages densities over draws as ``max + log(mean(exp(x - max)))`` with a
    per-point max over all draws, so duplicated draws leave the result
    unchanged. Large problems are done in two passes over the draws instead
    of holding the full draws-by-points matrix.
    """
    draws = list(draws)
    if not draws:
        raise ValueError("no posterior draws")
    x = validate_sample(test, "test data")
    family = Family.parse(family)
    u, v = x[:, 0], x[:, 1]
    t, n = len(draws), x.shape[0]

    def rows():
        for d in draws:
            yield _draw_logdens(d, family, u, v, rotated)

    if t * n <= max_cells:
        ld = np.array(list(rows()))
        gmax = ld.max(axis=0)
        return gmax + np.log(np.exp(ld - gmax).sum(axis=0) / t)
    gmax = np.full(n, -np.inf)
    for row in rows():
        np.maximum(gmax, row, out=gmax)
    sums = np.zeros(n)
    for row in rows():
        sums += np.exp(row - gmax)
    return gmax + np.log(sums / t)


def lps(draws, family, test, rotated: bool = False, model: str | None = None) -> LpsReport:
    """Monte Carlo log predictive score of ``test`` under posterior ``draws``."""
    draws = list(draws)
    pts = pointwise_log_predictive(draws, family, test, rotated)
    total = float(math.fsum(pts))
    n = pts.size
    if model is None:
        model = Family.parse(family).value + ("-rotated" if rotated else "")
    return LpsReport(model, total, total / n, n, len(draws))


def lps_parametric(copula: ParametricCopula, test) -> LpsReport:
    x = validate_sample(test, "test data")
    ld = parametric_logdensity(copula, x[:, 0], x[:, 1])
    total = float(math.fsum(ld))
    return LpsReport(copula.label, total, total / x.shape[0], x.shape[0], 1)


def _beta_draw(family, theta, j, rng):
    a, b = component_params(family, theta, j)
    return rng.beta(a, b)


def predictive_sample(draws, family, m: int, rng: np.random.Generator,
                      rotated: bool = False, concentration: float = 1.0) -> np.ndarray:
    """Sample ``m`` points from the posterior predictive copula.

    Each point picks a draw uniformly, then a component with probability
    ``rho_s``. Mass beyond the stored components continues the stick-breaking
    construction with Beta(1, M) sticks and uniform atoms, extended lazily
    and shared by all points that use the same draw.
    """
    draws = list(draws)
    if not draws:
        raise ValueError("no posterior draws")
    if m < 1:
        raise ValueError("m must be positive")
    family = Family.parse(family)
    which = rng.integers(len(draws), size=m)
    pick = rng.uniform(size=m)
    out = np.empty((m, 2))
    for t in np.unique(which):
        idx = np.flatnonzero(which == t)
        d = draws[t]
        w = np.asarray(d.weights, dtype=float)
        atoms = np.asarray(d.atoms, dtype=float).reshape(-1, 2)
        cum = np.cumsum(w)
        need = pick[idx].max()
        if need >= cum[-1]:
            rest = 1.0 - cum[-1]
            extra_w, extra_a = [], []
            total = cum[-1]
            while total <= need and rest > 0:
                eta = rng.beta(1.0, concentration)
                extra_w.append(rest * eta)
                extra_a.append(rng.uniform(size=2))
                total += rest * eta
                rest *= 1.0 - eta
            if extra_w:
                w = np.concatenate([w, extra_w])
                atoms = np.vstack([atoms, extra_a])
                cum = np.cumsum(w)
        comp = np.searchsorted(cum, pick[idx], side="right")
        comp = np.minimum(comp, len(w) - 1)
        ya = atoms[comp]
        for c in range(2):
            j = _cells(family, d.theta, ya[:, c])
            out[idx, c] = _beta_draw(family, d.theta, j, rng)
    if rotated:
        out = 1.0 - out
    eps = np.finfo(float).eps
    return np.clip(out, eps * 0.5, 1.0 - eps * 0.5)


def density_grid(draws, family, resolution: int, rotated: bool = False) -> np.ndarray:
    """Posterior-mean density at cell centres of a ``resolution`` square grid.

    Row ``i`` holds ``u = (i + 0.5) / resolution``; column ``k`` holds ``v``.
    """
    if resolution < 2:
        raise ValueError("resolution must be at least 2")
    draws = list(draws)
    if not draws:
        raise ValueError("no posterior draws")
    family = Family.parse(family)
    g = (np.arange(resolution) + 0.5) / resolution
    if rotated:
        g_eval = 1.0 - g
    else:
        g_eval = g
    lg, l1g = np.log(g_eval), np.log1p(-g_eval)
    grid = np.zeros((resolution, resolution))
    for d in draws:
        w = np.asarray(d.weights, dtype=float)
        atoms = np.asarray(d.atoms, dtype=float).reshape(-1, 2)
        dens = []
        for c in range(2):
            j = _cells(family, d.theta, atoms[:, c])
            a, b = component_params(family, d.theta, j)
            ln = gammaln(a + b) - gammaln(a) - gammaln(b)
            dens.append(np.exp(ln[:, None] + (a - 1.0)[:, None] * lg + (b - 1.0)[:, None] * l1g))
        grid += dens[0].T @ (w[:, None] * dens[1])
        grid += max(0.0, 1.0 - w.sum())
    return grid / len(draws)


def kendall_tau(data) -> float:
    """Kendall's tau-b, O(n log n)."""
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("data must be an n x 2 array")
    if x.shape[0] < 2:
        raise ValueError("Kendall's tau needs at least two observations")
    return float(stats.kendalltau(x[:, 0], x[:, 1]).statistic)


def kendall_tau_naive(data) -> float:
    """Kendall's tau-b by direct pair counting, O(n^2)."""
    x = np.asarray(data, dtype=float)
    if x.shape[0] < 2:
        raise ValueError("Kendall's tau needs at least two observations")
    du = np.sign(x[:, 0][:, None] - x[:, 0][None, :])
    dv = np.sign(x[:, 1][:, None] - x[:, 1][None, :])
    iu = np.triu_indices(x.shape[0], 1)
    s = float(np.sum(du[iu] * dv[iu]))
    n0 = len(iu[0])
    t_u = float(np.sum(du[iu] == 0))
    t_v = float(np.sum(dv[iu] == 0))
    return s / math.sqrt((n0 - t_u) * (n0 - t_v))
