"""Gibbs-sampler drivers built from the discrete and continuous kernels.

* Dirichlet-process normal mixture: allocations updated in one batch by
  :func:`discrete_step`, which never needs the infinite normalising sum.
* Mixture of exponentials with an unknown number of components ``M``.
* Gaussian-process regression by elliptical slice sampling.
* Poisson state-space model and spike-and-slab regression, each updating
  its whole latent vector as one block with the latent slice sampler.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln

from .baselines import EllipseState, EllipticalConfig, elliptical_step
from .discrete import DiscreteTarget, discrete_step
from .errors import InvalidParameterError, InvalidStateError
from .latent import ChainOutput, LatentSliceConfig, LatentState, run_chain, step
from .models import DataSet, GPRegression, SpikeSlab, StateSpace

__all__ = [
    "MDPHyper",
    "StickBreakingState",
    "mdp_initial_state",
    "mdp_gibbs_iteration",
    "mdp_predictive_draw",
    "mdp_run",
    "FiniteMixtureHyper",
    "FiniteMixtureState",
    "candidate_weights",
    "finite_mixture_iteration",
    "finite_mixture_predictive_draw",
    "finite_mixture_run",
    "GPResult",
    "gp_regression_run",
    "StateSpaceResult",
    "state_space_run",
    "spike_slab_run",
]

LOG_2PI = math.log(2.0 * math.pi)


# --- Dirichlet-process mixture of normals --------------------------------------------------


@dataclass(frozen=True)
class MDPHyper:
    """``mu_j ~ N(0, 1/s)``, ``lambda_j ~ Gamma(tau, rate tau)``, ``v_j ~ Beta(1, alpha)``."""

    tau: float = 0.5
    s: float = 1.0
    alpha: float = 2.0


@dataclass
class StickBreakingState:
    """Instantiated sticks ``v``, component means ``mu`` and precisions ``lam``.

    Allocations ``d`` are 1-based. Components beyond ``len(v)`` are not
    instantiated; the drivers keep ``len(v) >= max(d) + k`` so that every
    window the allocation kernel can look at exists.
    """

    v: np.ndarray
    mu: np.ndarray
    lam: np.ndarray
    d: np.ndarray

    @property
    def instantiated_count(self) -> int:
        return self.v.size

    @property
    def w(self) -> np.ndarray:
        rest = np.concatenate([[1.0], np.cumprod(1.0 - self.v)[:-1]])
        return self.v * rest


def _prior_components(n: int, hyper: MDPHyper, rng):
    v = rng.beta(1.0, hyper.alpha, size=n)
    mu = rng.normal(0.0, 1.0 / math.sqrt(hyper.s), size=n)
    lam = rng.gamma(hyper.tau, 1.0 / hyper.tau, size=n)
    return v, mu, lam


def _refresh_tail(state: StickBreakingState, hyper: MDPHyper, k: int, rng) -> StickBreakingState:
    # components above max(d) carry no data, so their full conditional is the prior
    top = int(state.d.max())
    v, mu, lam = _prior_components(k, hyper, rng)
    return StickBreakingState(
        np.concatenate([state.v[:top], v]),
        np.concatenate([state.mu[:top], mu]),
        np.concatenate([state.lam[:top], lam]),
        state.d,
    )


def mdp_initial_state(x, hyper: MDPHyper, k: int, rng) -> StickBreakingState:
    """All observations in component 1; ``k + 1`` components drawn from the prior."""
    d = np.ones(np.size(x), dtype=np.int64)
    v, mu, lam = _prior_components(1 + k, hyper, rng)
    return StickBreakingState(v, mu, lam, d)


def _allocation_target(state: StickBreakingState, x) -> DiscreteTarget:
    logw = np.log(state.w)
    mu, lam = state.mu, state.lam
    J = state.instantiated_count
    xcol = np.asarray(x, dtype=float)[:, None]

    def log_pmf(z):
        idx = np.minimum(z, J) - 1
        m, p = mu[idx], lam[idx]
        out = logw[idx] + 0.5 * (np.log(p) - LOG_2PI) - 0.5 * p * (xcol - m) ** 2
        return np.where(z <= J, out, -np.inf)

    return DiscreteTarget(log_pmf, support_floor=1)


def mdp_gibbs_iteration(state: StickBreakingState, x, hyper: MDPHyper, k: int, rng) -> StickBreakingState:
    """One sweep: component parameters, sticks, then all allocations at once."""
    x = np.asarray(x, dtype=float)
    J = state.instantiated_count
    if int(state.d.max()) + k > J:
        raise InvalidStateError("allocation window reaches beyond the instantiated sticks")
    idx = state.d - 1
    n_j = np.bincount(idx, minlength=J).astype(float)
    S_j = np.bincount(idx, weights=x, minlength=J)

    prec = hyper.s + n_j * state.lam
    mu = rng.normal(state.lam * S_j / prec, 1.0 / np.sqrt(prec))
    SS_j = np.bincount(idx, weights=(x - mu[idx]) ** 2, minlength=J)
    lam = rng.gamma(hyper.tau + 0.5 * n_j, 1.0 / (hyper.tau + 0.5 * SS_j))
    above = np.concatenate([np.cumsum(n_j[::-1])[::-1][1:], [0.0]])
    v = rng.beta(1.0 + n_j, hyper.alpha + above)
    # guard against v == 1 from rounding, which would zero every later weight
    v = np.minimum(v, np.nextafter(1.0, 0.0))

    new = StickBreakingState(v, mu, lam, state.d)
    d = discrete_step(state.d, _allocation_target(new, x), k, rng)
    return _refresh_tail(StickBreakingState(v, mu, lam, d), hyper, k, rng)


def mdp_predictive_draw(state: StickBreakingState, hyper: MDPHyper, rng, tol: float = 1e-10) -> float:
    """Draw ``x_{n+1}``; sticks are extended from the prior until the unassigned mass is below ``tol``."""
    v, mu, lam = state.v, state.mu, state.lam
    w = state.w
    residual = float(np.prod(1.0 - v))
    while residual >= tol:
        v1, mu1, lam1 = _prior_components(8, hyper, rng)
        w1 = residual * v1 * np.concatenate([[1.0], np.cumprod(1.0 - v1)[:-1]])
        residual *= float(np.prod(1.0 - v1))
        w, mu, lam = np.concatenate([w, w1]), np.concatenate([mu, mu1]), np.concatenate([lam, lam1])
    cum = np.cumsum(w)
    j = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), w.size - 1)
    return float(rng.normal(mu[j], 1.0 / math.sqrt(lam[j])))


def mdp_run(x, n_iter: int, burn_in: int, hyper: MDPHyper = MDPHyper(), k: int = 5, rng=None):
    """Run the sampler and take one predictive draw per iteration after ``burn_in``.

    Returns ``(predictive_draws, final_state, n_components_used)`` where the
    last array records ``max(d)`` per iteration.
    """
    if rng is None:
        raise InvalidParameterError("an explicit numpy Generator is required")
    state = mdp_initial_state(x, hyper, k, rng)
    draws = np.empty(max(n_iter - burn_in, 0))
    used = np.empty(n_iter, dtype=np.int64)
    for i in range(1, n_iter + 1):
        state = mdp_gibbs_iteration(state, x, hyper, k, rng)
        used[i - 1] = state.d.max()
        if i > burn_in:
            draws[i - burn_in - 1] = mdp_predictive_draw(state, hyper, rng)
    return draws, state, used


# --- mixture of exponentials with unknown M ------------------------------------------------


@dataclass(frozen=True)
class FiniteMixtureHyper:
    """``M - 1 ~ Poisson(poisson_rate)`` and ``w_M | M ~ Dirichlet(alpha, ..., alpha)``."""

    poisson_rate: float = 1.0
    alpha: float = 1.0


@dataclass
class FiniteMixtureState:
    M: int
    w: np.ndarray
    d: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))


def candidate_weights(w, k: int, rng) -> dict[int, tuple[np.ndarray, float]]:
    """Weight vectors for every ``M'`` with ``|M' - M| < k``, built from ``w = w_M``.

    Upwards, a uniformly chosen weight ``W`` is split into ``u W`` (kept in
    place) and ``(1 - u) W`` (appended). Downwards, the last weight is merged
    into a uniformly chosen other one. Each entry carries the log Jacobian of
    the map from ``w_M`` to ``w_{M'}``: ``+log W`` per split and ``-log W`` per
    merge, with ``W`` the weight that was split or formed.
    """
    w = np.asarray(w, dtype=float)
    M = w.size
    out = {M: (w, 0.0)}
    cur, lj = w, 0.0
    for j in range(M, M + k - 1):
        c = int(rng.integers(j))
        W = cur[c]
        u = rng.random()
        nxt = np.append(cur, (1.0 - u) * W)
        nxt[c] = u * W
        lj += math.log(W)
        cur = nxt
        out[j + 1] = (cur, lj)
    cur, lj = w, 0.0
    for j in range(M, max(1, M - k + 1), -1):
        c = int(rng.integers(j - 1))
        nxt = cur[:-1].copy()
        nxt[c] += cur[-1]
        lj -= math.log(nxt[c])
        cur = nxt
        out[j - 1] = (cur, lj)
    return out


def _log_dirichlet(w, alpha: float) -> float:
    m = w.size
    return float(gammaln(m * alpha) - m * gammaln(alpha) + (alpha - 1.0) * np.log(w).sum())


def _mixture_log_lik(w, x) -> float:
    if x.size == 0:
        return 0.0
    j = np.arange(1, w.size + 1)
    comp = np.log(w * j)[None, :] - np.outer(x, j)
    top = comp.max(axis=1, keepdims=True)
    return float((top[:, 0] + np.log(np.exp(comp - top).sum(axis=1))).sum())


def _log_shifted_poisson(z: int, rate: float) -> float:
    return (z - 1) * math.log(rate) - rate - math.lgamma(z)


def finite_mixture_iteration(state: FiniteMixtureState, x, hyper: FiniteMixtureHyper, k: int, rng) -> FiniteMixtureState:
    """Update ``M`` (allocations integrated out), then ``d``, then ``w_M``."""
    x = np.asarray(x, dtype=float)
    cands = candidate_weights(state.w, k, rng)
    logp = {
        z: _log_shifted_poisson(z, hyper.poisson_rate) + _log_dirichlet(wz, hyper.alpha) + _mixture_log_lik(wz, x) + lj
        for z, (wz, lj) in cands.items()
    }

    def log_pmf(z):
        return np.array([logp.get(int(v), -np.inf) for v in np.ravel(z)]).reshape(np.shape(z))

    M = discrete_step(state.M, DiscreteTarget(log_pmf, support_floor=1), k, rng)
    w = cands[M][0]

    j = np.arange(1, M + 1)
    if x.size:
        lp = np.log(w * j)[None, :] - np.outer(x, j)
        p = np.exp(lp - lp.max(axis=1, keepdims=True))
        cum = np.cumsum(p, axis=1)
        u = rng.random(x.size)[:, None] * cum[:, -1:]
        d = np.minimum((cum <= u).sum(axis=1), M - 1) + 1
    else:
        d = np.empty(0, dtype=np.int64)
    counts = np.bincount(d - 1, minlength=M) if d.size else np.zeros(M)
    g = rng.standard_gamma(hyper.alpha + counts)
    w = g / g.sum()
    return FiniteMixtureState(int(M), w, d.astype(np.int64))


def finite_mixture_predictive_draw(state: FiniteMixtureState, rng) -> float:
    cum = np.cumsum(state.w)
    j = min(int(np.searchsorted(cum, rng.random() * cum[-1], side="right")), state.M - 1) + 1
    return float(rng.exponential(1.0 / j))


def finite_mixture_run(x, n_iter: int, burn_in: int = 0, hyper: FiniteMixtureHyper = FiniteMixtureHyper(), k: int = 5, rng=None, M0: int = 1):
    """Returns ``(M trace, predictive draws after burn_in, final state)``."""
    if rng is None:
        raise InvalidParameterError("an explicit numpy Generator is required")
    state = FiniteMixtureState(M0, np.full(M0, 1.0 / M0))
    Ms = np.empty(n_iter, dtype=np.int64)
    draws = np.empty(max(n_iter - burn_in, 0))
    for i in range(1, n_iter + 1):
        state = finite_mixture_iteration(state, x, hyper, k, rng)
        Ms[i - 1] = state.M
        if i > burn_in:
            draws[i - burn_in - 1] = finite_mixture_predictive_draw(state, rng)
    return Ms, draws, state


# --- Gaussian-process regression -----------------------------------------------------------


@dataclass
class GPResult:
    mean: np.ndarray
    samples: np.ndarray
    n_proposals: np.ndarray
    wall_time: float


def gp_regression_run(
    variant: str,
    data: DataSet,
    n_iter: int,
    rng,
    model: GPRegression = GPRegression(),
    burn_in: int = 0,
    cfg: EllipticalConfig = EllipticalConfig(),
) -> GPResult:
    """Elliptical slice sampling of the latent function values, started at ``f = 0``."""
    L = model.chol(data["x"])

    def log_L(f):
        return model.log_likelihood(f, data)

    f0 = np.zeros(data.n)
    state = EllipseState(f0, log_L(f0))
    samples = np.empty((n_iter, data.n))
    counts = np.empty(n_iter, dtype=np.int64)
    t0 = time.perf_counter()
    for i in range(n_iter):
        state = elliptical_step(state, L, log_L, variant, cfg, rng)
        samples[i] = state.f
        counts[i] = state.n_proposals
    wall = time.perf_counter() - t0
    return GPResult(samples[burn_in:].mean(axis=0), samples, counts, wall)


# --- Poisson state-space model -------------------------------------------------------------


@dataclass
class StateSpaceResult:
    x: np.ndarray
    theta: np.ndarray
    n_proposals: np.ndarray
    wall_time: float


def state_space_run(
    data: DataSet,
    n_iter: int,
    lam: float = 0.1,
    rng=None,
    model: StateSpace = StateSpace(),
    x0=None,
    theta0: float | None = None,
) -> StateSpaceResult:
    """Alternate a block latent slice update of ``x`` with the gamma update of ``theta``.

    By default ``theta`` starts at its prior mean and ``x`` at the mode of
    ``pi(x | theta, y)`` for that ``theta``.
    """
    if rng is None:
        raise InvalidParameterError("an explicit numpy Generator is required")
    cfg = LatentSliceConfig(lam=lam)
    theta = model.prior_shape / model.prior_rate if theta0 is None else float(theta0)
    x = model.conditional_mode(data, theta) if x0 is None else np.array(x0, dtype=float)
    target = model.target(data, theta)
    state = LatentState.initial(target, x, cfg.s_init)
    xs = np.empty((n_iter, data.n))
    thetas = np.empty(n_iter)
    counts = np.empty(n_iter, dtype=np.int64)
    t0 = time.perf_counter()
    for i in range(n_iter):
        state = step(state, target, cfg, rng)
        counts[i] = state.n_proposals
        shape, rate = model.theta_conditional(state.y, data)
        theta = float(rng.gamma(shape, 1.0 / rate))
        target = model.target(data, theta)
        state = LatentState(state.y, state.s, target(state.y))
        xs[i] = state.y
        thetas[i] = theta
    wall = time.perf_counter() - t0
    return StateSpaceResult(xs, thetas, counts, wall)


# --- spike-and-slab regression -------------------------------------------------------------


def spike_slab_run(
    data: DataSet,
    n_iter: int,
    lam: float = 0.1,
    rng=None,
    model: SpikeSlab = SpikeSlab(),
    init=None,
    burn_in: int = 0,
    thin: int = 1,
) -> ChainOutput:
    """Block latent slice sampling of ``beta``, started at zero unless ``init`` is given."""
    beta0 = np.zeros(model.p) if init is None else init
    return run_chain(model.target(data), beta0, LatentSliceConfig(lam=lam), n_iter, burn_in, thin, rng=rng)
