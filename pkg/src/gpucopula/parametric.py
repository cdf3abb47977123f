"""One-parameter bivariate copulas used as data generators and LPS baselines.

Families: Frank, Gumbel, Clayton, Joe and Gaussian. A rotated copula is the
survival copula, i.e. the distribution of ``(1 - U, 1 - V)``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate, optimize, special, stats

__all__ = [
    "CopulaFamily",
    "ParametricCopula",
    "sample",
    "logdensity",
    "cdf",
    "param_to_tau",
    "tau_to_param",
    "fit_mle",
    "loglik",
]

_EPS = np.finfo(float).eps
# parameter search ranges for MLE; the upper ends correspond to tau ~ 0.99
_BOUNDS = {
    "clayton": (1e-6, 200.0),
    "gumbel": (1.0, 100.0),
    "joe": (1.0, 150.0),
    "frank": (-400.0, 400.0),
    "gaussian": (-0.9999, 0.9999),
}


class CopulaFamily(str, enum.Enum):
    FRANK = "frank"
    GUMBEL = "gumbel"
    CLAYTON = "clayton"
    JOE = "joe"
    GAUSSIAN = "gaussian"

    @classmethod
    def parse(cls, value) -> "CopulaFamily":
        try:
            return cls(str(getattr(value, "value", value)).strip().lower())
        except ValueError:
            raise ValueError(f"unknown copula family {value!r}") from None


@dataclass(frozen=True)
class ParametricCopula:
    family: CopulaFamily
    param: float
    rotated: bool = False

    def __post_init__(self):
        fam = CopulaFamily.parse(self.family)
        object.__setattr__(self, "family", fam)
        p = float(self.param)
        object.__setattr__(self, "param", p)
        _check_param(fam, p)

    @property
    def tau(self) -> float:
        return param_to_tau(self.family, self.param)

    @property
    def label(self) -> str:
        prefix = "Rot" if self.rotated else ""
        return f"{prefix}{self.family.value.capitalize()}({self.param:.4g})"


def _check_param(family: CopulaFamily, p: float):
    ok = {
        CopulaFamily.CLAYTON: p > 0,
        CopulaFamily.GUMBEL: p >= 1,
        CopulaFamily.JOE: p >= 1,
        CopulaFamily.FRANK: p != 0,
        CopulaFamily.GAUSSIAN: -1 < p < 1,
    }[family]
    if not (ok and math.isfinite(p)):
        raise ValueError(f"parameter {p!r} is invalid for the {family.value} copula")


def _interior(x):
    return np.clip(x, _EPS * 0.5, 1.0 - _EPS * 0.5)


# ---------------------------------------------------------------- sampling

def _log_positive_stable(alpha: float, n: int, rng) -> np.ndarray:
    # log of Kanter's representation; Laplace transform exp(-t**alpha)
    w = rng.uniform(0.0, math.pi, size=n)
    e = rng.exponential(size=n)
    return (
        np.log(np.sin(alpha * w)) - np.log(np.sin(w)) / alpha
        + (1.0 - alpha) / alpha * (np.log(np.sin((1.0 - alpha) * w)) - np.log(e))
    )


def _log_gamma_variate(shape: float, n: int, rng) -> np.ndarray:
    # log G_a = log G_(a+1) + log(U) / a keeps tiny shapes from underflowing
    return np.log(rng.gamma(shape + 1.0, size=n)) + np.log(rng.uniform(size=n)) / shape


def _log_sibuya(alpha: float, n: int, rng) -> np.ndarray:
    """Log of Sibuya(alpha) variates, P(V > k) = 1 / (k B(k, 1 - alpha))."""
    u = rng.uniform(size=n)
    out = np.zeros(n)
    big = u > alpha
    if np.any(big):
        ub = u[big]
        log_g = -(np.log1p(-ub) + special.gammaln(1.0 - alpha)) / alpha
        huge = log_g > math.log(1.0 / _EPS)
        g = np.exp(np.minimum(log_g, math.log(1.0 / _EPS)))
        fg = np.floor(g)
        surv = np.exp(-np.log(np.maximum(fg, 1.0)) - special.betaln(np.maximum(fg, 1.0), 1.0 - alpha))
        val = np.maximum(np.where(1.0 - ub < surv, np.ceil(g), fg), 1.0)
        # beyond 2**52 the integer rounding is below float resolution
        out[big] = np.where(huge, log_g, np.log(val))
    return out


def _log1mexp(lt):
    """log(1 - exp(-t)) from log t, accurate when t underflows."""
    with np.errstate(divide="ignore"):
        return np.where(lt < -40.0, lt, np.log(-np.expm1(-np.exp(np.minimum(lt, 700.0)))))


def _sample_unrotated(copula: ParametricCopula, n: int, rng) -> np.ndarray:
    fam, p = copula.family, copula.param
    if fam is CopulaFamily.GAUSSIAN:
        z1 = rng.standard_normal(n)
        z2 = p * z1 + math.sqrt(1.0 - p * p) * rng.standard_normal(n)
        return np.column_stack([special.ndtr(z1), special.ndtr(z2)])
    if fam is CopulaFamily.FRANK:
        u = rng.uniform(size=n)
        w = rng.uniform(size=n)
        q = abs(p)
        # conditional inversion of dC/du in log space:
        # exp(-q v) = (w e^-q + (1 - w) e^-qu) / (w + (1 - w) e^-qu)
        lw, l1w = np.log(w), np.log1p(-w)
        log_e = np.logaddexp(lw - q, l1w - q * u) - np.logaddexp(lw, l1w - q * u)
        v = -log_e / q
        return np.column_stack([u, v if p > 0 else 1.0 - v])
    le = np.log(rng.exponential(size=(n, 2)))
    if fam is CopulaFamily.CLAYTON:
        # u = (1 + e / V)**(-1/p), V ~ Gamma(1/p)
        lv = _log_gamma_variate(1.0 / p, n, rng)
        return np.exp(-np.logaddexp(0.0, le - lv[:, None]) / p)
    if fam is CopulaFamily.GUMBEL:
        if p == 1.0:
            return rng.uniform(size=(n, 2))
        # u = exp(-(e / S)**(1/p)), S positive stable(1/p)
        ls = _log_positive_stable(1.0 / p, n, rng)
        return np.exp(-np.exp((le - ls[:, None]) / p))
    # Joe: generator 1 - (1 - exp(-t))**(1/p), Sibuya(1/p) frailty
    if p == 1.0:
        return rng.uniform(size=(n, 2))
    lv = _log_sibuya(1.0 / p, n, rng)
    lt = le - lv[:, None]
    # 1 - (1 - exp(-t))**(1/p) computed without cancellation
    return -np.expm1(_log1mexp(lt) / p)


def sample(copula: ParametricCopula, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw ``n`` pairs strictly inside the unit square."""
    if n < 1:
        raise ValueError("n must be positive")
    x = _sample_unrotated(copula, int(n), rng)
    if copula.rotated:
        x = 1.0 - x
    return _interior(x)


# ---------------------------------------------------------------- densities

def _logdens_unrotated(fam: CopulaFamily, p: float, u, v):
    if fam is CopulaFamily.GAUSSIAN:
        x, y = special.ndtri(u), special.ndtri(v)
        r2 = 1.0 - p * p
        return -0.5 * math.log(r2) - (p * p * (x * x + y * y) - 2.0 * p * x * y) / (2.0 * r2)
    if fam is CopulaFamily.CLAYTON:
        lu, lv = np.log(u), np.log(v)
        # log(u**-p + v**-p - 1) via logaddexp for small u, v
        s = np.logaddexp(-p * lu, -p * lv)
        inner = s + np.log1p(-np.exp(-s))
        return math.log1p(p) - (1.0 + p) * (lu + lv) - (2.0 + 1.0 / p) * inner
    if fam is CopulaFamily.FRANK:
        if p < 0:
            # c(u, v; -p) = c(u, 1 - v; p)
            v, p = 1.0 - v, -p
        # evaluate on the half u + v <= 1; the density is radially symmetric
        flip = (u + v > 1.0) | ((u + v == 1.0) & (u > 0.5))
        u, v = np.where(flip, 1.0 - u, u), np.where(flip, 1.0 - v, v)
        # denominator e^-pu (1 - e^-pv) + e^-pv (1 - e^-p(1-v)), both terms positive
        log_den = np.logaddexp(
            -p * u + np.log(-np.expm1(-p * v)),
            -p * v + np.log(-np.expm1(-p * (1.0 - v))),
        )
        return math.log(p) + math.log(-math.expm1(-p)) - p * (u + v) - 2.0 * log_den
    if fam is CopulaFamily.GUMBEL:
        x, y = -np.log(u), -np.log(v)
        lx, ly = np.log(x), np.log(y)
        ls = np.logaddexp(p * lx, p * ly)
        a = np.exp(ls / p)
        return (
            -a + x + y
            + (p - 1.0) * (lx + ly)
            - (2.0 - 1.0 / p) * ls
            + np.log(a + p - 1.0)
        )
    # Joe
    lub, lvb = np.log1p(-u), np.log1p(-v)
    la, lb = p * lub, p * lvb
    # log(a + b - ab) = log(a + b (1 - a)), stays finite when a and b underflow
    ls = np.logaddexp(la, lb + np.log1p(-np.exp(la)))
    return (
        (1.0 / p - 2.0) * ls
        + (p - 1.0) * (lub + lvb)
        + np.log(p - 1.0 + np.exp(ls))
    )


def logdensity(copula: ParametricCopula, u, v):
    """Log copula density at interior points; rotation evaluates at ``(1-u, 1-v)``."""
    uu, vv = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    if not (np.all(np.isfinite(uu)) and np.all(np.isfinite(vv))):
        raise ValueError("u and v must be finite")
    if np.any((uu <= 0) | (uu >= 1) | (vv <= 0) | (vv >= 1)):
        raise ValueError("u and v must lie strictly inside (0, 1)")
    if copula.rotated:
        uu, vv = 1.0 - uu, 1.0 - vv
    out = _logdens_unrotated(copula.family, copula.param, uu, vv)
    if np.ndim(u) == 0 and np.ndim(v) == 0:
        return float(out)
    return out


def cdf(copula: ParametricCopula, u, v):
    """Copula distribution function (unrotated families only need this for tests)."""
    fam, p = copula.family, copula.param
    u, v = np.asarray(u, dtype=float), np.asarray(v, dtype=float)
    if copula.rotated:
        base = ParametricCopula(fam, p)
        return u + v - 1.0 + cdf(base, 1.0 - u, 1.0 - v)
    if fam is CopulaFamily.CLAYTON:
        return (u ** -p + v ** -p - 1.0) ** (-1.0 / p)
    if fam is CopulaFamily.GUMBEL:
        return np.exp(-(((-np.log(u)) ** p + (-np.log(v)) ** p) ** (1.0 / p)))
    if fam is CopulaFamily.FRANK:
        return -np.log1p(np.expm1(-p * u) * np.expm1(-p * v) / np.expm1(-p)) / p
    if fam is CopulaFamily.JOE:
        a, b = (1.0 - u) ** p, (1.0 - v) ** p
        return 1.0 - (a + b - a * b) ** (1.0 / p)
    x, y = special.ndtri(u), special.ndtri(v)
    cov = [[1.0, p], [p, 1.0]]
    pts = np.column_stack([np.ravel(x), np.ravel(y)])
    return stats.multivariate_normal(cov=cov).cdf(pts).reshape(np.shape(x))


def loglik(copula: ParametricCopula, data) -> float:
    x = np.asarray(data, dtype=float)
    return float(np.sum(logdensity(copula, x[:, 0], x[:, 1])))


# ---------------------------------------------------------------- Kendall's tau

def _debye1(x: float) -> float:
    if x == 0:
        return 1.0
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t else 1.0, 0.0, abs(x))
    d = val / abs(x)
    # D1(-x) = D1(x) + x/2
    return d if x > 0 else d + abs(x) / 2.0


def param_to_tau(family, param: float) -> float:
    fam = CopulaFamily.parse(family)
    p = float(param)
    _check_param(fam, p)
    if fam is CopulaFamily.CLAYTON:
        return p / (p + 2.0)
    if fam is CopulaFamily.GUMBEL:
        return 1.0 - 1.0 / p
    if fam is CopulaFamily.GAUSSIAN:
        return 2.0 / math.pi * math.asin(p)
    if fam is CopulaFamily.FRANK:
        return 1.0 + 4.0 * (_debye1(p) - 1.0) / p
    if p == 1.0:
        return 0.0
    if abs(p - 2.0) < 1e-8:
        return 1.0 - special.polygamma(1, 2.0)
    return 1.0 + 2.0 / (2.0 - p) * (special.digamma(2.0) - special.digamma(2.0 / p + 1.0))


def tau_to_param(family, tau: float) -> float:
    """Parameter with Kendall's tau equal to ``tau`` in (0, 1)."""
    fam = CopulaFamily.parse(family)
    tau = float(tau)
    if not 0.0 < tau < 1.0:
        raise ValueError(f"tau must lie in (0, 1), got {tau!r}")
    if fam is CopulaFamily.CLAYTON:
        return 2.0 * tau / (1.0 - tau)
    if fam is CopulaFamily.GUMBEL:
        return 1.0 / (1.0 - tau)
    if fam is CopulaFamily.GAUSSIAN:
        return math.sin(math.pi * tau / 2.0)
    lo = 1e-8 if fam is CopulaFamily.FRANK else 1.0
    hi = 2.0
    while param_to_tau(fam, hi) < tau:
        hi *= 2.0
        if hi > 1e6:
            raise ValueError(f"tau={tau} is out of numerical reach for {fam.value}")
    return optimize.bisect(lambda p: param_to_tau(fam, p) - tau, lo, hi, xtol=1e-13, rtol=1e-15)


# ---------------------------------------------------------------- MLE

def _golden(f, lo: float, hi: float, tol: float = 1e-8, maxiter: int = 200):
    """Golden-section minimisation of a unimodal ``f`` on ``[lo, hi]``."""
    g = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c, d = b - g * (b - a), a + g * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(maxiter):
        if abs(b - a) <= tol * (1.0 + abs(a) + abs(b)):
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - g * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + g * (b - a)
            fd = f(d)
    return (c, fc) if fc < fd else (d, fd)


def _tau_seed(fam: CopulaFamily, tau: float, lo: float, hi: float) -> float:
    if fam is CopulaFamily.GAUSSIAN:
        p = math.sin(math.pi * tau / 2.0)
    elif fam is CopulaFamily.FRANK and tau < 0:
        p = -tau_to_param(fam, min(-tau, 0.99))
    elif tau <= 0:
        p = lo
    else:
        p = tau_to_param(fam, min(tau, 0.99))
    if fam is CopulaFamily.FRANK and abs(p) < 1e-6:
        p = 1e-6
    return min(max(p, lo), hi)


def fit_mle(family, data, rotated: bool = False) -> ParametricCopula:
    """Maximum-likelihood fit of the single copula parameter.

    Golden-section search over the family's parameter range (Frank is searched
    on each side of zero). The Kendall's tau inversion is used as a fallback so
    the result never has lower likelihood than that starting point.
    """
    fam = CopulaFamily.parse(family)
    x = np.asarray(data, dtype=float)
    if x.ndim != 2 or x.shape[1] != 2 or x.shape[0] < 10:
        raise ValueError("fit_mle needs an n x 2 array with n >= 10")
    if np.any((x <= 0) | (x >= 1)):
        raise ValueError("copula data must lie strictly inside (0, 1)")

    def nll(p):
        try:
            val = -loglik(ParametricCopula(fam, p, rotated), x)
        except ValueError:
            return math.inf
        return val if math.isfinite(val) else math.inf

    lo, hi = _BOUNDS[fam.value]
    tau = stats.kendalltau(*(1.0 - x if rotated else x).T).statistic
    seed = _tau_seed(fam, tau, lo, hi)
    candidates = [(seed, nll(seed))]
    if fam is CopulaFamily.FRANK:
        candidates += [_golden(nll, lo, -1e-6), _golden(nll, 1e-6, hi)]
    else:
        candidates.append(_golden(nll, lo, hi))
    best, best_val = min(candidates, key=lambda c: c[1])
    if not math.isfinite(best_val):
        raise ValueError(f"{fam.value} likelihood is not finite anywhere on the search range")
    return ParametricCopula(fam, best, rotated)
