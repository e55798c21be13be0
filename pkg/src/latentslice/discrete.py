"""Rejection-free transition kernel for unnormalised pmfs on the integers.

For a window width ``k`` the kernel moves ``x -> y`` with probability

    P(x -> y) = pi(y)/k * sum_{l=max(x,y)}^{min(x,y)+k-1} 1 / sum_{z=max(f, l-k+1)}^{l} pi(z)

for ``|x - y| < k``, where ``f`` is the support floor. It is reversible
with respect to ``pi`` and only needs ``pi`` up to a constant. Sampling is
done in two stages: ``l`` uniform on ``{x, ..., x+k-1}``, then ``y`` drawn
proportionally to ``pi`` on the window ``{max(f, l-k+1), ..., l}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import logsumexp

from .errors import InvalidParameterError, InvalidStateError, InvalidTargetError

__all__ = [
    "DiscreteTarget",
    "discrete_step",
    "transition_probability",
    "transition_matrix",
    "detailed_balance_residual",
]


@dataclass(frozen=True)
class DiscreteTarget:
    """Unnormalised log pmf on ``{support_floor, support_floor + 1, ...}``.

    ``log_pmf`` is called with an integer array of candidate states and must
    return log masses of the same shape (``-inf`` for zero mass). In
    :func:`discrete_step` with an array of current states the candidates
    have shape ``x.shape + (k,)``, so a target may depend on the row, which
    is how a batch of independent conditionals is updated at once.
    """

    log_pmf: Callable[[np.ndarray], np.ndarray]
    support_floor: int = 0

    @classmethod
    def from_pmf(cls, weights, support_floor: int = 0) -> "DiscreteTarget":
        """Target with mass ``weights[i]`` at ``support_floor + i`` and zero beyond."""
        w = np.asarray(weights, dtype=float)
        if w.ndim != 1 or np.any(w < 0) or not w.sum() > 0:
            raise InvalidTargetError("weights must be a non-negative vector with positive sum")
        with np.errstate(divide="ignore"):
            logw = np.log(w)

        def log_pmf(z):
            z = np.asarray(z)
            idx = z - support_floor
            inside = (idx >= 0) & (idx < w.size)
            out = np.full(z.shape, -np.inf)
            out[inside] = logw[idx[inside]]
            return out

        return cls(log_pmf, support_floor)

    def log_mass(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=np.int64)
        out = np.full(z.shape, -np.inf)
        ok = z >= self.support_floor
        if np.any(ok):
            vals = np.asarray(self.log_pmf(np.where(ok, z, self.support_floor)), dtype=float)
            out = np.where(ok, vals, -np.inf)
        return out


def _check_k(k):
    if int(k) != k or k < 1:
        raise InvalidParameterError(f"window width k must be a positive integer, got {k}")
    return int(k)


def discrete_step(x, target: DiscreteTarget, k: int, rng):
    """One transition from ``x`` (an int or an integer array of independent states)."""
    k = _check_k(k)
    scalar = np.ndim(x) == 0
    x = np.atleast_1d(np.asarray(x, dtype=np.int64))
    if np.any(x < target.support_floor):
        raise InvalidStateError("current state below the support floor")
    l = x + rng.integers(0, k, size=x.shape)
    z = l[..., None] - (k - 1) + np.arange(k)
    logp = target.log_mass(z)
    top = logp.max(axis=-1, keepdims=True)
    if not np.all(np.isfinite(top)):
        raise InvalidTargetError("a window has zero total mass")
    p = np.exp(logp - top)
    cum = np.cumsum(p, axis=-1)
    u = rng.random(x.shape)[..., None] * cum[..., -1:]
    idx = np.minimum((cum <= u).sum(axis=-1), k - 1)
    y = np.take_along_axis(z, idx[..., None], axis=-1)[..., 0]
    return int(y[0]) if scalar else y


def _log_window_sum(target: DiscreteTarget, l: int, k: int) -> float:
    z = np.arange(max(target.support_floor, l - k + 1), l + 1)
    return float(logsumexp(target.log_mass(z))) if z.size else -np.inf


def transition_probability(x: int, y: int, target: DiscreteTarget, k: int) -> float:
    """Exact ``P(x -> y)``; zero when ``|x - y| >= k``."""
    k = _check_k(k)
    x, y = int(x), int(y)
    if abs(x - y) >= k or min(x, y) < target.support_floor:
        return 0.0
    log_py = float(target.log_mass(np.array(y)))
    if log_py == -np.inf:
        return 0.0
    ls = range(max(x, y), min(x, y) + k)
    terms = np.array([-_log_window_sum(target, l, k) for l in ls])
    return float(np.exp(log_py - np.log(k) + logsumexp(terms)))


def transition_matrix(target: DiscreteTarget, k: int, upper: int) -> np.ndarray:
    """Kernel restricted to ``{floor, ..., upper}``; entry ``[i, j]`` is ``P(floor+i -> floor+j)``.

    Exact only when the target has no mass above ``upper``.
    """
    k = _check_k(k)
    f = target.support_floor
    states = np.arange(f, upper + 1)
    n = states.size
    logpi = target.log_mass(states)
    # log window sums for window ends l = f .. upper + k - 1
    ends = np.arange(f, upper + k)
    z = ends[:, None] - (k - 1) + np.arange(k)
    lw = target.log_mass(np.clip(z, f, None))
    lw = np.where((z >= f) & (z <= upper), lw, -np.inf)
    c = logpi.max()
    log_s = logsumexp(lw, axis=1) - c
    inv = np.where(np.isfinite(log_s), np.exp(-log_s), 0.0)
    cum = np.concatenate([[0.0], np.cumsum(inv)])  # cum[i] = sum of inv over ends f..f+i-1
    xi = np.arange(n)[:, None]
    yi = np.arange(n)[None, :]
    lo = np.maximum(xi, yi)
    hi = np.minimum(xi, yi) + k - 1
    within = np.abs(xi - yi) < k
    sums = np.where(within, cum[np.minimum(hi + 1, cum.size - 1)] - cum[lo], 0.0)
    pi = np.exp(logpi - c)
    return pi[None, :] / k * sums


def detailed_balance_residual(target: DiscreteTarget, k: int, upper: int) -> float:
    """``max |P(x->y) pi(x) - P(y->x) pi(y)|`` over ``{floor..upper}``, with ``pi`` normalised."""
    P = transition_matrix(target, k, upper)
    logpi = target.log_mass(np.arange(target.support_floor, upper + 1))
    pi = np.exp(logpi - logsumexp(logpi))
    flow = pi[:, None] * P
    return float(np.max(np.abs(flow - flow.T)))
