"""Comparison kernels: stepping-out slice sampling and elliptical slice sampling."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, InvalidStateError, ShrinkStallError
from .latent import (
    ChainOutput,
    LogDensity,
    _kept,
    as_log_density,
    sample_latent_location,
    sample_scale_conditional,
    sample_slice_level,
)

__all__ = [
    "SteppingOutConfig",
    "stepping_out",
    "slice_step_1d",
    "gibbs_sweep_slice",
    "run_gibbs_slice",
    "EllipseState",
    "EllipticalConfig",
    "ellipse_point",
    "elliptical_step",
]


@dataclass(frozen=True)
class SteppingOutConfig:
    """Initial bracket width ``k`` and expansion budget ``m`` (in units of ``k``)."""

    k: float = 1.0
    m: int = 10
    max_shrink_iters: int = 10_000

    def __post_init__(self):
        if not self.k > 0:
            raise InvalidParameterError(f"k must be positive, got {self.k}")
        if int(self.m) != self.m or self.m < 1:
            raise InvalidParameterError(f"m must be a positive integer, got {self.m}")


def stepping_out(x: float, log_w: float, log_f, cfg: SteppingOutConfig, rng) -> tuple[float, float]:
    """Randomly placed bracket of width ``k`` around ``x``, then stepped out.

    The left end moves out by ``k`` while it is still inside the slice and
    its budget ``J`` lasts; likewise the right end with ``K = m - 1 - J``.
    """
    k = cfg.k
    U = rng.random()
    L = x - k * (1.0 - U)
    R = x + k * U
    J = int(cfg.m * rng.random())
    K = cfg.m - 1 - J
    while J > 0 and log_f(L) > log_w:
        L -= k
        J -= 1
    while K > 0 and log_f(R) > log_w:
        R += k
        K -= 1
    return L, R


def slice_step_1d(x: float, log_f, cfg: SteppingOutConfig, rng, log_fx: float | None = None):
    """One univariate slice update. Returns ``(x_new, log_f(x_new), n_proposals)``."""
    if log_fx is None:
        log_fx = log_f(x)
    log_w = sample_slice_level(rng, log_fx)
    L, R = stepping_out(x, log_w, log_f, cfg, rng)
    for n in range(1, cfg.max_shrink_iters + 1):
        x1 = L + (R - L) * rng.random()
        lp1 = log_f(x1)
        if lp1 > log_w:
            return x1, lp1, n
        if x1 < x:
            L = x1
        else:
            R = x1
    raise ShrinkStallError(f"univariate shrinkage stalled after {cfg.max_shrink_iters} proposals")


def gibbs_sweep_slice(y, target, cfg: SteppingOutConfig, rng, lp: float | None = None):
    """Update each coordinate in index order by :func:`slice_step_1d`.

    Returns ``(y_new, log_pi(y_new), n_proposals)``.
    """
    target = as_log_density(target, np.size(y))
    y = np.array(y, dtype=float)
    fn = target.fn
    if lp is None:
        lp = float(fn(y))
    total = 0
    for j in range(y.size):
        def cond(t, j=j):
            y[j] = t
            return fn(y)

        xj, lp, n = slice_step_1d(y[j], cond, cfg, rng, log_fx=lp)
        y[j] = xj
        total += n
    return y, lp, total


def run_gibbs_slice(
    target,
    init,
    cfg: SteppingOutConfig,
    n_iter: int,
    burn_in: int = 0,
    thin: int = 1,
    rng=None,
    backend: str = "auto",
) -> ChainOutput:
    """Chain of :func:`gibbs_sweep_slice` sweeps, bookkept like ``latent.run_chain``."""
    target = as_log_density(target, np.size(init))
    n_kept = _kept(n_iter, burn_in, thin)
    y = np.array(init, dtype=float)
    lp = target(y)
    if not lp > -math.inf:
        raise InvalidStateError("initial point is outside the support of the target")
    if backend == "compiled" or (backend == "auto" and target.compiled is not None):
        if target.compiled is None:
            raise InvalidParameterError("compiled backend requested but the target has no compiled twin")
        from ._compiled import run_gibbs_slice_chain

        samples, logps, iters, counts, wall = run_gibbs_slice_chain(
            target.compiled, y, lp, cfg, n_iter, burn_in, thin, cfg.max_shrink_iters, rng
        )
        return ChainOutput(samples, counts, wall, iters, logps, np.full(n_kept, np.nan))

    samples = np.empty((n_kept, y.size))
    logps = np.empty(n_kept)
    iters = np.empty(n_kept, dtype=np.int64)
    counts = np.empty(n_iter, dtype=np.int64)
    j = 0
    t0 = time.perf_counter()
    for i in range(1, n_iter + 1):
        y, lp, counts[i - 1] = gibbs_sweep_slice(y, target, cfg, rng, lp)
        if i > burn_in and (i - burn_in) % thin == 0:
            samples[j] = y
            logps[j] = lp
            iters[j] = i
            j += 1
    wall = time.perf_counter() - t0
    return ChainOutput(samples, counts, wall, iters, logps, np.full(n_kept, np.nan))


@dataclass
class EllipseState:
    """Latent vector ``f`` with cached ``log L(f)``.

    ``s_theta`` is the angle scale carried by the latent-slice variant and
    ``theta`` the last accepted angle, wrapped to ``[-pi, pi)``.
    """

    f: np.ndarray
    log_L_f: float
    s_theta: float = 1.0
    theta: float = 0.0
    n_proposals: int = 0


@dataclass(frozen=True)
class EllipticalConfig:
    lam: float = 0.1
    max_shrink_iters: int = 10_000


def ellipse_point(f, nu, theta: float) -> np.ndarray:
    return f * math.cos(theta) + nu * math.sin(theta)


def _wrap(theta: float) -> float:
    return (theta + math.pi) % (2.0 * math.pi) - math.pi


def elliptical_step(
    state: EllipseState,
    chol_sigma: np.ndarray,
    log_L,
    variant: str = "latent",
    cfg: EllipticalConfig = EllipticalConfig(),
    rng=None,
) -> EllipseState:
    """One elliptical slice update of ``f`` under the prior ``N(0, L L^T)``.

    ``variant="standard"`` brackets the whole ellipse ``[theta - 2 pi, theta]``
    and shrinks towards the current point. ``variant="latent"`` draws the
    angle with the univariate latent slice machinery anchored at
    ``theta = 0`` (the current ``f``), carrying its scale in ``s_theta``.
    """
    if variant not in ("standard", "latent"):
        raise InvalidParameterError(f"unknown elliptical variant {variant!r}")
    f = state.f
    nu = chol_sigma @ rng.standard_normal(f.size)
    log_w = sample_slice_level(rng, state.log_L_f)

    if variant == "standard":
        theta = 2.0 * math.pi * rng.random()
        lo, hi = theta - 2.0 * math.pi, theta
        s_theta = state.s_theta
    else:
        l = sample_latent_location(rng, 0.0, state.s_theta)
        s_theta = sample_scale_conditional(rng, l, 0.0, cfg.lam)
        lo, hi = l - 0.5 * s_theta, l + 0.5 * s_theta
        theta = lo + (hi - lo) * rng.random()

    for n in range(1, cfg.max_shrink_iters + 1):
        f_new = ellipse_point(f, nu, theta)
        ll = float(log_L(f_new))
        if ll > log_w:
            return EllipseState(f_new, ll, s_theta, _wrap(theta), n)
        if theta < 0.0:
            lo = theta
        else:
            hi = theta
        theta = lo + (hi - lo) * rng.random()
    raise ShrinkStallError(f"angle shrinkage stalled after {cfg.max_shrink_iters} proposals")
