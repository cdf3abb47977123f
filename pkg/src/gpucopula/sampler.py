"""Slice sampler for the stick-breaking random GPU copula.

One sweep updates, in order: stick weights and slice variables, component
atoms, allocations, and the smoothing parameter ``theta``. Atoms and (for the
negative binomial family) ``theta`` are moved with adaptive random-walk
Metropolis-Hastings; adaptation stops at the end of burn-in.

The update functions modify ``state`` in place and return it. Allocations are
stored 0-based. When the configuration is rotated the data are reflected to
``1 - data`` on entry, so all kernels below work on the unrotated model.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import stats
from scipy.special import expit, gammaln, logit, logsumexp

from ._rng import make_rng
from .partition import Family, _cells

__all__ = [
    "ThetaPrior",
    "SamplerConfig",
    "AdaptState",
    "ChainState",
    "PosteriorDraw",
    "ChainResult",
    "SamplerError",
    "adapt_proposal",
    "init_state",
    "update_weights_and_slices",
    "update_atoms",
    "update_allocations",
    "update_theta",
    "sweep",
    "run_chain",
    "stick_weights",
    "cell_loglik",
    "atom_log_acceptance",
    "theta_log_acceptance",
    "binomial_theta_log_target",
]

EMISSION_FLOOR = 1e-12
_EPS = np.finfo(float).eps
_TINY = np.finfo(float).tiny


class SamplerError(RuntimeError):
    """A chain invariant was violated; indicates a bug rather than bad input."""


@dataclass(frozen=True)
class ThetaPrior:
    """Prior on the smoothing parameter.

    Continuous priors (for the negative binomial family): ``gamma:shape,rate``,
    ``lognormal:mu,sigma``, ``flat:lo,hi``. Discrete priors on {1, 2, ...}
    (binomial family): ``geometric:q`` with mass proportional to ``q**theta``
    and ``flat:lo,hi`` on the integers ``lo..hi``.
    """

    name: str
    params: tuple
    discrete: bool = False

    @classmethod
    def parse(cls, text: str, discrete: bool = False) -> "ThetaPrior":
        name, _, rest = text.partition(":")
        params = tuple(float(p) for p in rest.split(",") if p.strip())
        prior = cls(name.strip().lower(), params, discrete)
        prior._validate()
        return prior

    @classmethod
    def default(cls, family) -> "ThetaPrior":
        if Family.parse(family) is Family.BINOMIAL:
            return cls("geometric", (0.95,), True)
        return cls("gamma", (2.0, 0.1), False)

    def __str__(self):
        return f"{self.name}:{','.join(f'{p:g}' for p in self.params)}"

    def _validate(self):
        need = {"gamma": 2, "lognormal": 2, "flat": 2, "geometric": 1}
        if self.name not in need:
            raise ValueError(f"unknown theta prior {self.name!r}")
        if len(self.params) != need[self.name]:
            raise ValueError(f"theta prior {self.name!r} takes {need[self.name]} parameters")
        if self.discrete and self.name not in ("geometric", "flat"):
            raise ValueError(f"{self.name!r} prior is continuous; binomial theta needs geometric or flat")
        if not self.discrete and self.name == "geometric":
            raise ValueError("geometric prior is discrete; negative binomial theta needs a continuous prior")
        a, *b = self.params
        if self.name == "gamma" and not (a > 0 and b[0] > 0):
            raise ValueError("gamma prior needs positive shape and rate")
        if self.name == "lognormal" and not b[0] > 0:
            raise ValueError("lognormal prior needs positive sigma")
        if self.name == "geometric" and not 0 < a < 1:
            raise ValueError("geometric prior needs 0 < q < 1")
        if self.name == "flat":
            lo, hi = a, b[0]
            if not (0 <= lo < hi) or (self.discrete and (lo != int(lo) or hi != int(hi) or lo < 1)):
                raise ValueError("flat prior needs 0 <= lo < hi (integers >= 1 when discrete)")

    def logpdf(self, theta: float) -> float:
        """Log prior density (or mass) up to an additive constant."""
        if theta <= 0:
            return -math.inf
        p = self.params
        if self.discrete and theta != int(theta):
            return -math.inf
        if self.name == "gamma":
            return (p[0] - 1.0) * math.log(theta) - p[1] * theta
        if self.name == "lognormal":
            z = (math.log(theta) - p[0]) / p[1]
            return -0.5 * z * z - math.log(theta)
        if self.name == "geometric":
            return theta * math.log(p[0]) if theta >= 1 else -math.inf
        return 0.0 if p[0] <= theta <= p[1] else -math.inf

    def sample(self, rng: np.random.Generator, size=None):
        p = self.params
        if self.name == "gamma":
            return rng.gamma(p[0], 1.0 / p[1], size=size)
        if self.name == "lognormal":
            return rng.lognormal(p[0], p[1], size=size)
        if self.name == "geometric":
            return np.asarray(rng.geometric(1.0 - p[0], size=size), dtype=float)
        if self.discrete:
            return np.asarray(rng.integers(int(p[0]), int(p[1]) + 1, size=size), dtype=float)
        return rng.uniform(p[0], p[1], size=size)

    def quantiles(self, q):
        """Prior quantiles; used to check prior recovery."""
        p = self.params
        if self.name == "gamma":
            return stats.gamma(p[0], scale=1.0 / p[1]).ppf(q)
        if self.name == "lognormal":
            return stats.lognorm(p[1], scale=math.exp(p[0])).ppf(q)
        if self.name == "geometric":
            return stats.geom(1.0 - p[0]).ppf(q)
        if self.discrete:
            return stats.randint(int(p[0]), int(p[1]) + 1).ppf(q)
        return stats.uniform(p[0], p[1] - p[0]).ppf(q)


@dataclass
class SamplerConfig:
    family: Family = Family.NEGBINOMIAL
    rotated: bool = False
    concentration: float = 1.0
    theta_prior: ThetaPrior | None = None
    iterations: int = 20_000
    burnin: int = 10_000
    thin: int = 1
    seed: int = 0
    target_accept: float = 0.44
    max_adapt_step: float = 0.01
    log_scale_bounds: tuple = (-10.0, 10.0)
    initial_log_scale: float = 0.0
    max_components: int = 1_000_000
    theta_warmup: int | None = None

    def __post_init__(self):
        self.family = Family.parse(self.family)
        if isinstance(self.theta_prior, str):
            self.theta_prior = ThetaPrior.parse(
                self.theta_prior, discrete=self.family is Family.BINOMIAL
            )
        if self.theta_prior is None:
            self.theta_prior = ThetaPrior.default(self.family)
        if self.theta_prior.discrete != (self.family is Family.BINOMIAL):
            raise ValueError("theta prior support does not match the generating family")
        if not self.concentration > 0:
            raise ValueError("concentration M must be positive")
        if self.iterations < 1 or self.thin < 1:
            raise ValueError("iterations and thinning must be positive")
        if not 0 <= self.burnin < self.iterations:
            raise ValueError("burn-in must be non-negative and smaller than iterations")
        if self.theta_warmup is None:
            self.theta_warmup = self.burnin // 10
        if not 0 <= self.theta_warmup <= self.burnin:
            raise ValueError("theta warm-up must lie within burn-in")

    @property
    def n_draws(self) -> int:
        return -(-(self.iterations - self.burnin) // self.thin)

    def as_dict(self) -> dict:
        return {
            "family": self.family.value,
            "rotated": self.rotated,
            "concentration": self.concentration,
            "theta_prior": str(self.theta_prior),
            "iterations": self.iterations,
            "burnin": self.burnin,
            "thin": self.thin,
            "seed": self.seed,
            "target_accept": self.target_accept,
            "max_adapt_step": self.max_adapt_step,
            "log_scale_bounds": list(self.log_scale_bounds),
            "initial_log_scale": self.initial_log_scale,
            "max_components": self.max_components,
            "theta_warmup": self.theta_warmup,
        }


@dataclass
class AdaptState:
    log_scale: float = 0.0
    count: int = 0
    proposed: int = 0
    accepted: float = 0.0

    @property
    def rate(self) -> float:
        return self.accepted / self.proposed if self.proposed else float("nan")


@dataclass
class ChainState:
    config: SamplerConfig
    theta: float
    sticks: np.ndarray
    atoms: np.ndarray
    z: np.ndarray
    slices: np.ndarray
    adapt: dict = field(default_factory=dict)
    adapting: bool = True

    @property
    def weights(self) -> np.ndarray:
        return stick_weights(self.sticks)

    @property
    def n_components(self) -> int:
        return len(self.sticks)

    def occupied(self) -> int:
        return int(np.unique(self.z).size)

    def check(self) -> None:
        """Raise ``SamplerError`` unless every chain invariant holds."""
        rho = self.weights
        if self.atoms.shape != (len(rho), 2):
            raise SamplerError("atoms and sticks disagree in length")
        if np.any((self.atoms <= 0) | (self.atoms >= 1)):
            raise SamplerError("atom outside the open unit square")
        if rho.sum() > 1.0 + 1e-12:
            raise SamplerError("weights sum above one")
        if self.z.size:
            if self.z.max() >= len(rho) or self.z.min() < 0:
                raise SamplerError("allocation points at a missing component")
            if np.any(self.slices >= rho[self.z]):
                raise SamplerError("slice variable not below its component weight")
            if not np.prod(1.0 - self.sticks) < self.slices.min():
                raise SamplerError("retained sticks do not cover the smallest slice")


@dataclass(frozen=True)
class PosteriorDraw:
    """Retained state: ``theta``, component weights and atom pairs."""

    theta: float
    weights: np.ndarray
    atoms: np.ndarray
    iteration: int = 0

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        a = np.asarray(self.atoms, dtype=float).reshape(-1, 2)
        if w.ndim != 1 or a.shape[0] != w.size:
            raise ValueError("weights and atoms must have matching lengths")
        if np.any(w <= 0) or w.sum() > 1.0 + 1e-10:
            raise ValueError("weights must be positive with sum at most one")
        if np.any((a <= 0) | (a >= 1)):
            raise ValueError("atoms must lie strictly inside the unit square")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "atoms", a)
        object.__setattr__(self, "theta", float(self.theta))


@dataclass
class ChainResult:
    draws: list
    config: SamplerConfig
    acceptance: dict
    occupied: np.ndarray
    n_components: np.ndarray
    theta_trace: np.ndarray
    wall_time: float

    def __len__(self):
        return len(self.draws)

    def __iter__(self):
        return iter(self.draws)

    def __getitem__(self, i):
        return self.draws[i]

    def summary(self) -> dict:
        post = slice(self.config.burnin, None)
        return {
            "config": self.config.as_dict(),
            "n_draws": len(self.draws),
            "acceptance": self.acceptance,
            "final_theta": float(self.theta_trace[-1]),
            "posterior_mean_theta": float(self.theta_trace[post].mean()),
            "final_occupied": int(self.occupied[-1]),
            "mean_occupied": float(self.occupied[post].mean()),
            "wall_time_seconds": self.wall_time,
        }


def stick_weights(sticks) -> np.ndarray:
    sticks = np.asarray(sticks, dtype=float)
    left = np.concatenate([[1.0], np.cumprod(1.0 - sticks)[:-1]])
    return sticks * left


def adapt_proposal(count: int, log_scale: float, accept_rate: float,
                   target: float = 0.44, max_step: float = 0.01,
                   bounds=(-10.0, 10.0)) -> float:
    """Robbins-Monro move of a proposal log-scale towards the target rate.

    The step ``min(max_step, count**-0.5)`` shrinks to zero with ``count``.
    """
    gamma = min(max_step, 1.0 / math.sqrt(max(count, 1)))
    new = log_scale + gamma * (accept_rate - target)
    return float(min(max(new, bounds[0]), bounds[1]))


def _adapt(state: ChainState, name: str, accept_prob: float, n: int = 1):
    a = state.adapt[name]
    a.proposed += n
    a.accepted += accept_prob * n
    if state.adapting:
        a.count += 1
        cfg = state.config
        a.log_scale = adapt_proposal(
            a.count, a.log_scale, accept_prob,
            cfg.target_accept, cfg.max_adapt_step, cfg.log_scale_bounds,
        )


class PreparedData:
    """Data in the kernel frame with cached ``log x`` and ``log(1 - x)``."""

    __slots__ = ("x", "lx", "l1x", "rotated", "features")

    def __init__(self, data, rotated: bool):
        x = np.asarray(data, dtype=float).reshape(-1, 2)
        self.x = 1.0 - x if rotated else x
        self.rotated = rotated
        self.lx = np.log(self.x)
        self.l1x = np.log1p(-self.x)
        # columns: log u, log(1-u), log v, log(1-v)
        self.features = np.column_stack([self.lx[:, 0], self.l1x[:, 0], self.lx[:, 1], self.l1x[:, 1]])

    def __len__(self):
        return self.x.shape[0]


def _frame(data, config: SamplerConfig) -> PreparedData:
    if isinstance(data, PreparedData) and data.rotated == config.rotated:
        return data
    if isinstance(data, PreparedData):
        data = 1.0 - data.x if data.rotated else data.x
    return PreparedData(data, config.rotated)


def _kernel_ab(family: Family, theta, j):
    if family is Family.BINOMIAL:
        return j, theta - j + 1.0
    return j, theta + 1.0 + 0.0 * j


def cell_loglik(family, theta, j, count, sum_log, sum_log1m):
    """Summed beta log-density of a group of points under cell ``j``.

    ``count``, ``sum_log`` and ``sum_log1m`` are the group's size and its sums
    of ``log u`` and ``log(1 - u)``.
    """
    a, b = _kernel_ab(family, theta, np.asarray(j, dtype=float))
    lognorm = gammaln(a + b) - gammaln(a) - gammaln(b)
    return count * lognorm + (a - 1.0) * sum_log + (b - 1.0) * sum_log1m


def _group_stats(z, k, lx, l1x):
    counts = np.bincount(z, minlength=k)
    return (
        counts,
        np.bincount(z, weights=lx, minlength=k),
        np.bincount(z, weights=l1x, minlength=k),
    )


def atom_log_acceptance(family, theta, y, y_new, count, sum_log, sum_log1m):
    """Log MH ratio for a logit-scale random-walk move of atom coordinates.

    The target in ``y`` is flat within a partition cell; the last two terms
    are the Jacobian of the logit reparametrisation.
    """
    family = Family.parse(family)
    y, y_new = np.asarray(y, dtype=float), np.asarray(y_new, dtype=float)
    j_old = _cells(family, theta, y)
    j_new = _cells(family, theta, y_new)
    target = np.where(
        j_new == j_old,
        0.0,
        cell_loglik(family, theta, j_new, count, sum_log, sum_log1m)
        - cell_loglik(family, theta, j_old, count, sum_log, sum_log1m),
    )
    jac = np.log(y_new) + np.log1p(-y_new) - np.log(y) - np.log1p(-y)
    return target + jac


def _initial_adapt(config: SamplerConfig) -> dict:
    return {
        "atoms": AdaptState(config.initial_log_scale),
        "theta": AdaptState(config.initial_log_scale),
    }


def init_state(data, config: SamplerConfig, rng: np.random.Generator) -> ChainState:
    """All observations in one component; theta from its prior; atoms uniform.

    Empty data (``n = 0``) are accepted and give a prior-only chain.
    """
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        x = x.reshape(0, 2)
    if x.ndim != 2 or x.shape[1] != 2:
        raise ValueError("data must be an n x 2 array")
    if x.shape[0] == 1:
        raise ValueError("need at least two observations (or none, to sample the prior)")
    if not np.all(np.isfinite(x)) or np.any((x <= 0) | (x >= 1)):
        raise ValueError("copula data must lie strictly inside (0, 1)")
    n = x.shape[0]
    theta = float(config.theta_prior.sample(rng))
    if config.family is Family.BINOMIAL:
        # at theta = 1 every kernel is uniform and atoms carry no information
        hi = config.theta_prior.params[1] if config.theta_prior.name == "flat" else math.inf
        for _ in range(1000):
            if theta >= 2.0 or hi < 2.0:
                break
            theta = float(config.theta_prior.sample(rng))
    state = ChainState(
        config=config,
        theta=theta,
        sticks=np.empty(0),
        atoms=rng.uniform(size=(1, 2)),
        z=np.zeros(n, dtype=np.int64),
        slices=np.empty(n),
        adapt=_initial_adapt(config),
    )
    return update_weights_and_slices(state, x, rng)


def update_weights_and_slices(state: ChainState, data, rng: np.random.Generator) -> ChainState:
    """Resample occupied sticks, draw slices, then extend sticks from the prior."""
    cfg = state.config
    m = cfg.concentration
    z = state.z
    n = z.size
    zstar = int(z.max()) + 1 if n else 0
    counts = np.bincount(z, minlength=zstar)
    beyond = n - np.cumsum(counts)
    sticks = rng.beta(counts + 1.0, beyond + m) if zstar else np.empty(0)
    atoms = state.atoms[:zstar]
    rho = stick_weights(sticks)
    slices = rng.uniform(size=n) * rho[z] if n else np.empty(0)
    smin = slices.min() if n else 1.0

    rest = float(np.prod(1.0 - sticks))
    new_sticks, new_atoms = [], []
    while (rest >= smin and rest > 0.0) or zstar + len(new_sticks) == 0:
        if zstar + len(new_sticks) >= cfg.max_components:
            raise SamplerError(
                f"stick extension exceeded {cfg.max_components} components "
                f"(min slice {smin:.3e}, remaining mass {rest:.3e})"
            )
        eta = rng.beta(1.0, m)
        new_sticks.append(eta)
        new_atoms.append(rng.uniform(size=2))
        rest *= 1.0 - eta
    if new_sticks:
        sticks = np.concatenate([sticks, new_sticks])
        atoms = np.vstack([atoms, np.asarray(new_atoms)])
    state.sticks = sticks
    state.atoms = np.array(atoms, dtype=float)
    state.slices = slices
    return state


def update_atoms(state: ChainState, data, rng: np.random.Generator) -> ChainState:
    """Logit random-walk MH on occupied atoms; fresh uniform draws for empty ones."""
    cfg = state.config
    x = _frame(data, cfg)
    k = state.n_components
    counts = np.bincount(state.z, minlength=k)
    occ = np.flatnonzero(counts > 0)
    empty = np.flatnonzero(counts == 0)
    atoms = state.atoms
    step = math.exp(state.adapt["atoms"].log_scale)
    probs = []
    for c in range(2):
        lx, l1x = x.lx[:, c], x.l1x[:, c]
        _, s_log, s_log1m = _group_stats(state.z, k, lx, l1x)
        atoms[empty, c] = rng.uniform(size=empty.size)
        if occ.size == 0:
            continue
        y = atoms[occ, c]
        y_new = expit(logit(y) + step * rng.standard_normal(occ.size))
        log_u = np.log(rng.uniform(size=occ.size))
        inside = (y_new > 0.0) & (y_new < 1.0)
        y_safe = np.where(inside, y_new, 0.5)
        logr = atom_log_acceptance(
            cfg.family, state.theta, y, y_safe,
            counts[occ], s_log[occ], s_log1m[occ],
        )
        logr = np.where(inside, logr, -np.inf)
        accept = log_u < logr
        atoms[occ[accept], c] = y_new[accept]
        probs.append(np.exp(np.minimum(logr, 0.0)))
    if probs:
        p = np.concatenate(probs)
        _adapt(state, "atoms", float(p.mean()), p.size)
    return state


def _allocation_logdens(state: ChainState, x: PreparedData, cols=None) -> np.ndarray:
    cfg = state.config
    atoms = state.atoms if cols is None else state.atoms[cols]
    coef = np.empty((4, atoms.shape[0]))
    lognorm = 0.0
    for c in range(2):
        j = _cells(cfg.family, state.theta, atoms[:, c])
        a, b = _kernel_ab(cfg.family, state.theta, j)
        lognorm = lognorm + gammaln(a + b) - gammaln(a) - gammaln(b)
        coef[2 * c] = a - 1.0
        coef[2 * c + 1] = b - 1.0
    return x.features @ coef + lognorm


def _allocation_table(state: ChainState, x: PreparedData):
    # components with weight below every slice can never be chosen
    rho = state.weights
    cols = np.flatnonzero(rho > state.slices.min())
    logd = _allocation_logdens(state, x, cols)
    mask = state.slices[:, None] < rho[cols][None, :]
    if not np.all(mask.any(axis=1)):
        raise SamplerError("an observation has no component above its slice")
    logd = np.where(mask, logd, -np.inf)
    logd -= logd.max(axis=1, keepdims=True)
    p = np.exp(logd)
    return cols, p


def allocation_probabilities(state: ChainState, data) -> np.ndarray:
    """Normalised allocation probabilities, shape ``(n, n_components)``."""
    cols, p = _allocation_table(state, _frame(data, state.config))
    out = np.zeros((p.shape[0], state.n_components))
    out[:, cols] = p / p.sum(axis=1, keepdims=True)
    return out


def update_allocations(state: ChainState, data, rng: np.random.Generator) -> ChainState:
    """Draw each allocation from the components whose weight exceeds its slice."""
    if state.z.size == 0:
        return state
    cols, p = _allocation_table(state, _frame(data, state.config))
    cum = np.cumsum(p, axis=1)
    r = rng.uniform(size=p.shape[0]) * cum[:, -1]
    z = (cum > r[:, None]).argmax(axis=1)
    state.z = cols[z].astype(np.int64)
    return state


def _theta_loglik(state: ChainState, x: np.ndarray, theta: float) -> float:
    cfg = state.config
    if state.z.size == 0:
        return 0.0
    k = state.n_components
    total = 0.0
    for c in range(2):
        lx, l1x = x.lx[:, c], x.l1x[:, c]
        counts, s_log, s_log1m = _group_stats(state.z, k, lx, l1x)
        occ = counts > 0
        j = _cells(cfg.family, theta, state.atoms[occ, c])
        total += cell_loglik(cfg.family, theta, j, counts[occ], s_log[occ], s_log1m[occ]).sum()
    return float(total)


def theta_log_acceptance(state: ChainState, data, theta_new: float) -> float:
    """Log MH ratio for moving ``theta`` to ``theta_new`` (log-scale walk when continuous)."""
    cfg = state.config
    x = _frame(data, cfg)
    if theta_new == state.theta:
        return 0.0
    prior_new = cfg.theta_prior.logpdf(theta_new)
    if not math.isfinite(prior_new):
        return -math.inf
    out = (
        prior_new - cfg.theta_prior.logpdf(state.theta)
        + _theta_loglik(state, x, theta_new) - _theta_loglik(state, x, state.theta)
    )
    if cfg.family is Family.NEGBINOMIAL:
        out += math.log(theta_new) - math.log(state.theta)
    return out


def _binomial_cell_table(state: ChainState, x: np.ndarray, theta: float):
    """Per occupied component and coordinate, log(alpha_j) + group log-lik for j = 1..theta."""
    k = state.n_components
    j = np.arange(1.0, theta + 1.0)
    tables = []
    occ = None
    for c in range(2):
        lx, l1x = x.lx[:, c], x.l1x[:, c]
        counts, s_log, s_log1m = _group_stats(state.z, k, lx, l1x)
        occ = np.flatnonzero(counts > 0)
        tab = cell_loglik(
            Family.BINOMIAL, theta, j[None, :],
            counts[occ, None], s_log[occ, None], s_log1m[occ, None],
        )
        tables.append(tab - math.log(theta))
    return occ, tables


def binomial_theta_log_target(state: ChainState, data, theta: float) -> float:
    """Log prior plus atom-marginalised log-likelihood of an integer ``theta``."""
    cfg = state.config
    prior = cfg.theta_prior.logpdf(theta)
    if not math.isfinite(prior):
        return -math.inf
    if state.z.size == 0:
        return prior
    x = _frame(data, cfg)
    _, tables = _binomial_cell_table(state, x, theta)
    return prior + float(sum(logsumexp(t, axis=1).sum() for t in tables))


def _redraw_binomial_atoms(state: ChainState, x: np.ndarray, rng) -> None:
    occ, tables = _binomial_cell_table(state, x, state.theta)
    theta = state.theta
    for c, tab in enumerate(tables):
        p = np.exp(tab - tab.max(axis=1, keepdims=True))
        cum = np.cumsum(p, axis=1)
        r = rng.uniform(size=occ.size) * cum[:, -1]
        j = (cum > r[:, None]).argmax(axis=1) + 1.0
        within = rng.uniform(size=occ.size)
        y = (j - within) / theta
        state.atoms[occ, c] = np.clip(y, _TINY, 1.0 - _EPS)


def update_theta(state: ChainState, data, rng: np.random.Generator) -> ChainState:
    """One MH move of ``theta``; the partition is re-evaluated under the proposal.

    Negative binomial: adaptive log-scale random walk. Binomial: +-1 random
    walk on the target with atoms integrated over their cells (proposals below
    1 are rejected), followed by an exact redraw of the occupied atoms given
    the new ``theta``. Together the two halves form a blocked Gibbs step.
    """
    cfg = state.config
    if cfg.family is Family.BINOMIAL:
        theta_new = state.theta + (1.0 if rng.uniform() < 0.5 else -1.0)
        log_u = math.log(rng.uniform())
        logr = -math.inf
        if theta_new >= 1.0:
            logr = (
                binomial_theta_log_target(state, data, theta_new)
                - binomial_theta_log_target(state, data, state.theta)
            )
        if log_u < logr:
            state.theta = theta_new
        a = state.adapt["theta"]
        a.proposed += 1
        a.accepted += math.exp(min(logr, 0.0))
        if state.z.size:
            _redraw_binomial_atoms(state, _frame(data, cfg), rng)
        return state
    step = math.exp(state.adapt["theta"].log_scale)
    theta_new = state.theta * math.exp(step * rng.standard_normal())
    log_u = math.log(rng.uniform())
    if not (0.0 < theta_new < math.inf):
        logr = -math.inf
    else:
        logr = theta_log_acceptance(state, data, theta_new)
    if log_u < logr:
        state.theta = theta_new
    _adapt(state, "theta", math.exp(min(logr, 0.0)))
    return state


def sweep(state: ChainState, data, rng: np.random.Generator) -> ChainState:
    update_weights_and_slices(state, data, rng)
    update_atoms(state, data, rng)
    update_allocations(state, data, rng)
    update_theta(state, data, rng)
    return state


def snapshot(state: ChainState, iteration: int, floor: float = EMISSION_FLOOR) -> PosteriorDraw:
    rho = state.weights
    keep = rho > floor
    return PosteriorDraw(
        theta=state.theta,
        weights=rho[keep].copy(),
        atoms=state.atoms[keep].copy(),
        iteration=iteration,
    )


def run_chain(data, config: SamplerConfig, progress=None) -> ChainResult:
    """Run the sampler and keep every ``thin``-th post-burn-in state.

    ``theta`` is held at its initial draw for the first ``theta_warmup``
    sweeps so that clusters can form before the partition is allowed to
    coarsen. Fully determined by ``config.seed``. ``progress``, if given, is called as
    ``progress(iteration, state)`` after each sweep.
    """
    raw = np.asarray(data, dtype=float)
    if raw.size == 0:
        raw = raw.reshape(0, 2)
    rng = make_rng(config.seed)
    start = time.perf_counter()
    state = init_state(raw, config, rng)
    x = PreparedData(raw, config.rotated)
    draws = []
    occupied = np.empty(config.iterations, dtype=np.int64)
    n_comp = np.empty(config.iterations, dtype=np.int64)
    thetas = np.empty(config.iterations)
    for it in range(config.iterations):
        state.adapting = it < config.burnin
        if it < config.theta_warmup:
            update_weights_and_slices(state, x, rng)
            update_atoms(state, x, rng)
            update_allocations(state, x, rng)
        else:
            sweep(state, x, rng)
        occupied[it] = state.occupied()
        n_comp[it] = state.n_components
        thetas[it] = state.theta
        if it >= config.burnin and (it - config.burnin) % config.thin == 0:
            draws.append(snapshot(state, it))
        if progress is not None:
            progress(it, state)
    acceptance = {
        name: {"rate": a.rate if a.proposed else None, "log_scale": a.log_scale}
        for name, a in state.adapt.items()
    }
    return ChainResult(
        draws=draws,
        config=config,
        acceptance=acceptance,
        occupied=occupied,
        n_components=n_comp,
        theta_trace=thetas,
        wall_time=time.perf_counter() - start,
    )
