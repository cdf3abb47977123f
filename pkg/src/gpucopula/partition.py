"""Generating functions, partitions of [0, 1] and beta-mixture copula densities.

Two generating families are supported. The binomial family gives a finite
partition with ``theta`` equal cells (the Bernstein copula); the negative
binomial family gives an infinite partition with breakpoints ``j / (theta + j)``
that pile up near 1, which is what produces upper tail dependence. Rotating a
copula evaluates it at ``(1 - u, 1 - v)`` and moves the tail dependence to the
lower corner.

Every function here is pure and vectorised over its array arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import nbinom

__all__ = [
    "Family",
    "GeneratingSpec",
    "ComponentIndexPair",
    "pmf",
    "alpha",
    "breakpoint",
    "locate",
    "component_logdensity",
    "component_params",
    "mixture_logdensity",
    "upper_tail_coefficient",
    "rotate",
    "n_terms",
    "diagonal_weights",
    "gpu_density",
]

# tail mass and term cap for truncated negative binomial sums
TAIL_TOL = 1e-12
MAX_TERMS = 100_000


class Family(str, enum.Enum):
    BINOMIAL = "binomial"
    NEGBINOMIAL = "negbinomial"

    @classmethod
    def parse(cls, value) -> "Family":
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        aliases = {
            "binomial": cls.BINOMIAL,
            "bernstein": cls.BINOMIAL,
            "bernsteincbp": cls.BINOMIAL,
            "negbinomial": cls.NEGBINOMIAL,
            "negbin": cls.NEGBINOMIAL,
            "negbinc": cls.NEGBINOMIAL,
            "negative_binomial": cls.NEGBINOMIAL,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown generating family {value!r}") from None


@dataclass(frozen=True)
class GeneratingSpec:
    """Generating family, smoothing parameter and rotation flag."""

    family: Family
    theta: float
    rotated: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        theta = float(self.theta)
        if not np.isfinite(theta) or theta <= 0:
            raise ValueError(f"theta must be a positive finite number, got {self.theta!r}")
        if self.family is Family.BINOMIAL and theta != int(theta):
            raise ValueError(f"binomial theta must be a positive integer, got {self.theta!r}")
        object.__setattr__(self, "theta", theta)

    @property
    def finite(self) -> bool:
        return self.family is Family.BINOMIAL


@dataclass(frozen=True)
class ComponentIndexPair:
    j1: int
    j2: int

    def check(self, spec: GeneratingSpec) -> None:
        for j in (self.j1, self.j2):
            _check_index(spec, j)


def rotate(spec: GeneratingSpec) -> GeneratingSpec:
    """Return the same spec with the rotation flag flipped."""
    return replace(spec, rotated=not spec.rotated)


def _check_index(spec: GeneratingSpec, i, lower=1):
    i = np.asarray(i)
    if np.any(i != np.floor(i)):
        raise ValueError("component indices must be integers")
    if np.any(i < lower):
        raise ValueError(f"component index must be >= {lower}, got {i.min()}")
    if spec.finite and np.any(i > spec.theta):
        raise ValueError(
            f"component index {i.max()} exceeds binomial theta={spec.theta:g}"
        )
    return i.astype(float)


def _check_unit(u, closed: bool, name: str = "u"):
    u = np.asarray(u, dtype=float)
    if not np.all(np.isfinite(u)):
        raise ValueError(f"{name} must be finite")
    if closed:
        bad = (u < 0) | (u > 1)
    else:
        bad = (u <= 0) | (u >= 1)
    if np.any(bad):
        where = "[0, 1]" if closed else "the open interval (0, 1)"
        raise ValueError(f"{name} must lie in {where}")
    return u


def _scalar_out(x, *inputs):
    if all(np.ndim(a) == 0 for a in inputs):
        return x.item() if isinstance(x, np.ndarray) else x
    return x


def _log_pmf(family: Family, theta, i, u):
    # log phi_{i,theta}(u); xlogy-style handling keeps u in {0, 1} finite
    with np.errstate(divide="ignore", invalid="ignore"):
        if family is Family.BINOMIAL:
            logc = gammaln(theta) - gammaln(i) - gammaln(theta - i + 1)
            a, b = i - 1, theta - i
        else:
            logc = gammaln(theta + i - 1) - gammaln(theta) - gammaln(i)
            a, b = i - 1, theta
        lu = np.where(a == 0, 0.0, a * np.log(u))
        l1u = np.where(b == 0, 0.0, b * np.log1p(-u))
    return logc + lu + l1u


def pmf(spec: GeneratingSpec, i, u):
    """Generating function ``phi_{i,theta}(u)``, i.e. the shifted pmf at ``i``.

    For fixed ``u`` the values over all admissible ``i`` sum to one.
    """
    ii = _check_index(spec, i)
    uu = _check_unit(u, closed=True)
    out = np.exp(_log_pmf(spec.family, spec.theta, ii, uu))
    return _scalar_out(out, i, u)


def alpha(spec: GeneratingSpec, i):
    """Prior predictive mass ``alpha_i``, the integral of ``phi_i`` over [0, 1]."""
    ii = _check_index(spec, i)
    t = spec.theta
    if spec.finite:
        out = np.full_like(ii, 1.0 / t)
    else:
        out = t / ((t + ii - 1.0) * (t + ii))
    return _scalar_out(out, i)


def breakpoint(spec: GeneratingSpec, j):
    """Cumulative prior mass ``Lambda_j``; ``Lambda_0 = 0``."""
    jj = _check_index(spec, j, lower=0)
    t = spec.theta
    out = jj / t if spec.finite else jj / (t + jj)
    return _scalar_out(out, j)


def _cells(family: Family, theta, y):
    """Locator without validation; returns float cell indices."""
    theta = np.asarray(theta, dtype=float)
    y = np.asarray(y, dtype=float)
    if family is Family.BINOMIAL:
        j = np.ceil(theta * y)
        j = np.clip(j, 1.0, theta)
        # guard ceil against rounding right at a breakpoint
        j = np.where(y > j / theta, j + 1.0, j)
        j = np.where((j > 1) & (y <= (j - 1.0) / theta), j - 1.0, j)
        return np.clip(j, 1.0, theta)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        j = np.maximum(np.ceil(theta * y / (1.0 - y)), 1.0)
        j = np.where(y > j / (theta + j), j + 1.0, j)
        j = np.where((j > 1) & (y <= (j - 1.0) / (theta + j - 1.0)), j - 1.0, j)
        bad = (y > j / (theta + j)) | ((j > 1) & (y <= (j - 1.0) / (theta + j - 1.0)))
    if np.any(bad):
        j = np.array(j, dtype=float)
        tb, yb, jb = np.broadcast_arrays(theta, y, j)
        for idx in zip(*np.nonzero(bad)) if j.ndim else [()]:
            j[idx] = _smallest_cell(float(tb[idx]), float(yb[idx]), float(jb[idx]))
    return j


def _smallest_cell(theta: float, y: float, guess: float) -> float:
    # Near y = 1 consecutive breakpoints j / (theta + j) can round to the same
    # float; return the smallest j whose rounded breakpoint reaches y.
    def lam(k):
        return k / (theta + k)

    hi = max(guess, 1.0)
    step = 1.0
    while lam(hi) < y:
        hi += step
        step *= 2.0
    lo, step = hi - 1.0, 1.0
    while lo > 0 and lam(lo) >= y:
        lo = max(hi - step, 0.0)
        step *= 2.0
    # invariant: lam(lo) < y <= lam(hi), lo < hi
    while hi - lo > 1.0:
        mid = math.floor((lo + hi) / 2.0)
        if lam(mid) >= y:
            hi = mid
        else:
            lo = mid
    return hi


def locate(spec: GeneratingSpec, y):
    """Index ``j`` of the partition cell ``(Lambda_{j-1}, Lambda_j]`` holding ``y``."""
    yy = _check_unit(y, closed=False, name="y")
    j = _cells(spec.family, spec.theta, yy)
    if np.ndim(j) == 0 and np.ndim(y) == 0:
        return int(j)
    return j.astype(np.int64) if np.all(j < 2.0**62) else j


def component_params(family: Family, theta, j):
    """Beta shape parameters ``(a, b)`` of component ``j``."""
    family = Family.parse(family)
    j = np.asarray(j, dtype=float)
    if family is Family.BINOMIAL:
        return j, theta - j + 1.0
    return j, np.broadcast_to(np.asarray(theta, dtype=float) + 1.0, j.shape)


def _log_beta_density(a, b, lu, l1u):
    return (
        gammaln(a + b) - gammaln(a) - gammaln(b)
        + (a - 1.0) * lu
        + (b - 1.0) * l1u
    )


def component_logdensity(spec: GeneratingSpec, j, u):
    """Log of the beta kernel ``phi_j(u) / alpha_j``.

    Binomial: Beta(j, theta - j + 1). Negative binomial: Beta(j, theta + 1).
    A rotated spec evaluates the kernel at ``1 - u``.
    """
    jj = _check_index(spec, j)
    uu = _check_unit(u, closed=False)
    if spec.rotated:
        uu = 1.0 - uu
    a, b = component_params(spec.family, spec.theta, jj)
    out = _log_beta_density(a, b, np.log(uu), np.log1p(-uu))
    return _scalar_out(out, j, u)


def _draw_arrays(draw):
    weights = np.atleast_1d(np.asarray(draw.weights, dtype=float))
    atoms = np.asarray(draw.atoms, dtype=float).reshape(-1, 2)
    if weights.size == 0:
        raise ValueError("draw holds no components")
    if atoms.shape[0] != weights.size:
        raise ValueError("draw weights and atoms differ in length")
    if np.any(weights < 0):
        raise ValueError("draw weights must be non-negative")
    total = weights.sum()
    if total > 1.0 + 1e-10:
        raise ValueError(f"draw weights sum to {total!r} > 1")
    return weights, atoms, max(0.0, 1.0 - total)


def draw_component_logdensities(draw, family, u, v, rotated=False):
    """Per-component log densities, shape ``(len(u), n_components)``.

    Also returns the log weights and the remainder mass. ``u`` and ``v`` are
    assumed validated.
    """
    family = Family.parse(family)
    weights, atoms, rest = _draw_arrays(draw)
    theta = float(draw.theta)
    j1 = _cells(family, theta, atoms[:, 0])
    j2 = _cells(family, theta, atoms[:, 1])
    if rotated:
        u, v = 1.0 - u, 1.0 - v
    lu, l1u = np.log(u)[:, None], np.log1p(-u)[:, None]
    lv, l1v = np.log(v)[:, None], np.log1p(-v)[:, None]
    a1, b1 = component_params(family, theta, j1)
    a2, b2 = component_params(family, theta, j2)
    dens = _log_beta_density(a1, b1, lu, l1u) + _log_beta_density(a2, b2, lv, l1v)
    with np.errstate(divide="ignore"):
        logw = np.log(weights)
    return dens, logw, rest


def mixture_logdensity(draw, family, u, v, rotated=False):
    """Log density of the truncated stick-breaking copula of one posterior draw.

    Components contribute ``rho_s * beta(u | .) * beta(v | .)``; unrepresented
    stick mass ``1 - sum(rho)`` contributes the uniform density.

    ``draw`` is any object with ``theta``, ``weights`` and ``atoms`` attributes.
    """
    uu = np.atleast_1d(_check_unit(u, closed=False))
    vv = np.atleast_1d(_check_unit(v, closed=False, name="v"))
    uu, vv = np.broadcast_arrays(uu, vv)
    shape = uu.shape
    dens, logw, rest = draw_component_logdensities(
        draw, family, uu.ravel(), vv.ravel(), rotated
    )
    terms = dens + logw
    if rest > 0:
        terms = np.column_stack([terms, np.full(terms.shape[0], np.log(rest))])
    out = logsumexp(terms, axis=1).reshape(shape)
    return _scalar_out(out, u, v)


def upper_tail_coefficient(theta: int) -> float:
    """``1 - C(2 theta, theta) / 4**theta`` for the diagonal negative binomial copula.

    Only valid for integer ``theta`` with diagonal weights; it is a diagnostic
    and not the tail coefficient of a fitted posterior copula.
    """
    if int(theta) != theta or theta < 1:
        raise ValueError("theta must be a positive integer")
    t = float(theta)
    log_central = gammaln(2 * t + 1) - 2 * gammaln(t + 1) - t * np.log(4.0)
    return float(-np.expm1(log_central))


def n_terms(spec: GeneratingSpec, u, tol: float = TAIL_TOL, cap: int = MAX_TERMS) -> int:
    """Number of leading indices whose generating functions sum to ``1 - tol`` at every ``u``.

    Binomial specs always need ``theta`` terms. For the negative binomial the
    tail ``sum_{i > K} phi_i(u)`` is a negative binomial survival function,
    largest at the largest ``u``; the count is capped at ``cap``.
    """
    if spec.finite:
        return int(spec.theta)
    umax = float(np.max(_check_unit(u, closed=True)))
    if spec.rotated:
        umax = 1.0 - float(np.min(u))
    if umax <= 0.0:
        return 1
    if umax >= 1.0:
        return cap
    k = nbinom.isf(tol, spec.theta, 1.0 - umax)
    return int(min(max(k + 1, 1), cap))


def diagonal_weights(spec: GeneratingSpec, n: int) -> np.ndarray:
    """Diagonal weight matrix ``omega_ii = alpha_i`` for the first ``n`` indices."""
    return np.diag(alpha(spec, np.arange(1, n + 1)))


def gpu_density(spec: GeneratingSpec, weights, u, v):
    """GPU copula density for a finite weight matrix ``weights[i-1, j-1] = omega_ij``.

    Evaluates ``sum_ij omega_ij * beta_i(u) * beta_j(v)`` with the beta kernels
    of ``spec``; indices beyond the matrix are treated as zero weight.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ValueError("weights must be a square matrix")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    uu = np.atleast_1d(_check_unit(u, closed=False))
    vv = np.atleast_1d(_check_unit(v, closed=False, name="v"))
    uu, vv = np.broadcast_arrays(uu, vv)
    idx = np.arange(1, w.shape[0] + 1)
    _check_index(spec, idx)
    fu = np.exp(component_logdensity(spec, idx[None, :], uu.ravel()[:, None]))
    fv = np.exp(component_logdensity(spec, idx[None, :], vv.ravel()[:, None]))
    out = np.einsum("ni,ij,nj->n", fu, w, fv).reshape(uu.shape)
    return _scalar_out(out, u, v)
