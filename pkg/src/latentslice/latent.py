"""Latent slice sampler for continuous targets of any dimension.

The chain state is ``(y, s)``: a position and a vector of per-coordinate
interval scales. One transition, starting from ``(y0, s0)``:

1. draw a slice level ``log w = log pi(y0) + log u``, a latent centre
   ``l_j ~ U(y0_j - s0_j/2, y0_j + s0_j/2)`` and a fresh scale
   ``s_j ~ exp(-lam * s) 1(s > 2|l_j - y0_j|)``;
2. set the box ``a = l - s/2``, ``b = l + s/2`` (it always contains ``y0``);
3. draw ``y*`` uniformly in the box; accept it if ``log pi(y*) > log w``,
   otherwise pull every coordinate of the box in towards ``y0`` and retry.

With the scale prior ``p(s) ∝ s exp(-lam s)`` the marginal of ``y`` is the
target and the marginal of each ``s_j`` is Gamma(shape 2, rate ``lam``).
All comparisons are made in log space.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .errors import InvalidParameterError, InvalidStateError, ShrinkStallError
from .rng import shifted_exponential

__all__ = [
    "LogDensity",
    "LatentState",
    "LatentSliceConfig",
    "ChainOutput",
    "sample_slice_level",
    "sample_latent_location",
    "sample_scale_conditional",
    "shrink_sample",
    "step",
    "run_chain",
]


@dataclass(frozen=True)
class LogDensity:
    """Unnormalised log target on ``R**dim``.

    ``fn`` maps a float array of shape ``(dim,)`` to a float and returns
    ``-inf`` outside the support. It must be pure and never return NaN.
    ``compiled`` is an optional numba ``@njit`` twin of ``fn``; when present
    :func:`run_chain` can use the compiled chain kernel.
    """

    dim: int
    fn: Callable[[np.ndarray], float]
    compiled: Any = None

    def __post_init__(self):
        if int(self.dim) < 1:
            raise InvalidParameterError(f"dim must be >= 1, got {self.dim}")

    def __call__(self, y) -> float:
        return float(self.fn(np.asarray(y, dtype=float)))


def as_log_density(target, dim: int | None = None) -> LogDensity:
    if isinstance(target, LogDensity):
        return target
    if dim is None:
        raise InvalidParameterError("dim is required when passing a bare callable")
    return LogDensity(dim, target)


@dataclass(frozen=True)
class LatentSliceConfig:
    lam: float = 0.1
    max_shrink_iters: int = 10_000
    s_init: float = 1.0

    def __post_init__(self):
        if not self.lam > 0:
            raise InvalidParameterError(f"lam must be positive, got {self.lam}")
        if self.max_shrink_iters < 1:
            raise InvalidParameterError("max_shrink_iters must be >= 1")
        if not self.s_init > 0:
            raise InvalidParameterError(f"s_init must be positive, got {self.s_init}")

    @classmethod
    def from_gamma_scale(cls, scale: float, **kw) -> "LatentSliceConfig":
        """Config for a Gamma(shape 2, ``scale``) scale prior, i.e. ``lam = 1/scale``."""
        return cls(lam=1.0 / scale, **kw)


@dataclass
class LatentState:
    """Position ``y``, scales ``s`` and the cached ``log_pi_y = log pi(y)``.

    ``log_w`` and ``n_proposals`` describe the transition that produced the
    state (slice level and number of box proposals); they are ``nan`` / 0
    for an initial state.
    """

    y: np.ndarray
    s: np.ndarray
    log_pi_y: float
    log_w: float = math.nan
    n_proposals: int = 0

    @classmethod
    def initial(cls, target: LogDensity, y, s_init: float = 1.0) -> "LatentState":
        y = np.array(y, dtype=float).reshape(-1)
        if y.size != target.dim:
            raise InvalidStateError(f"initial point has dimension {y.size}, target has {target.dim}")
        lp = target(y)
        if not lp > -math.inf:
            raise InvalidStateError("initial point is outside the support of the target")
        return cls(y, np.full(y.size, float(s_init)), lp)


@dataclass
class ChainOutput:
    samples: np.ndarray
    shrink_counts: np.ndarray
    wall_time: float
    iterations: np.ndarray
    log_density: np.ndarray
    log_levels: np.ndarray
    scales: np.ndarray | None = None
    final_state: LatentState | None = field(default=None, repr=False)

    @property
    def n_kept(self) -> int:
        return self.samples.shape[0]


def sample_slice_level(rng, log_pi_y: float) -> float:
    """Log of ``w ~ U(0, pi(y))``."""
    if not math.isfinite(log_pi_y):
        raise InvalidStateError(f"log density at the current point is {log_pi_y}; chain is outside the support")
    u = rng.random()
    return log_pi_y + math.log(u) if u > 0.0 else -math.inf


def sample_latent_location(rng, y, s):
    """``l ~ U(y - s/2, y + s/2)``, elementwise."""
    y = np.asarray(y, dtype=float)
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise InvalidStateError("scales must be positive")
    out = y - 0.5 * s + rng.random(y.shape) * s
    return float(out) if out.ndim == 0 else out


def sample_scale_conditional(rng, l, y, lam: float):
    """Draw ``s`` with density ∝ ``exp(-lam s)`` on ``s > 2|l - y|``."""
    shift = 2.0 * np.abs(np.asarray(l, dtype=float) - np.asarray(y, dtype=float))
    return shifted_exponential(rng, lam, shift)


def _shrink(rng, a, b, y0, log_f, log_w, max_iters, trace=None):
    a = a.copy()
    b = b.copy()
    for n in range(1, max_iters + 1):
        if trace is not None:
            trace.append((a.copy(), b.copy()))
        y = a + (b - a) * rng.random(a.size)
        lp = log_f(y)
        if lp > log_w:
            return y, float(lp), n
        # y lies in [a, b), so max(a, y) and min(b, y) reduce to y
        below = y < y0
        a = np.where(below, y, a)
        b = np.where(below, b, y)
    raise ShrinkStallError(
        f"no acceptable point after {max_iters} shrink iterations "
        f"(log level {log_w:.6g}, box width {float(np.max(b - a)):.3g})"
    )


def shrink_sample(rng, a, b, y0, in_slice, max_iters: int = 10_000, trace=None):
    """Sample uniformly on ``{y in (a, b): in_slice(y)}`` by shrinkage.

    Requires ``a < y0 < b`` and ``in_slice(y0)``. Each rejected proposal
    replaces, coordinate by coordinate, the bound on the side of ``y0`` where
    it fell. Returns ``(y, n)`` with ``n`` the number of proposals used. If
    ``trace`` is a list, the box ``(a, b)`` before each proposal is appended.
    """
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    if not (np.all(a < y0) and np.all(y0 < b)):
        raise InvalidStateError("y0 must lie strictly inside (a, b)")
    y, _, n = _shrink(rng, a, b, y0, lambda z: 0.0 if in_slice(z) else -math.inf, -1.0, max_iters, trace)
    return y, n


def step(state: LatentState, target: LogDensity, cfg: LatentSliceConfig, rng) -> LatentState:
    """One latent slice transition; see the module docstring."""
    y0 = state.y
    log_w = sample_slice_level(rng, state.log_pi_y)
    l = sample_latent_location(rng, y0, state.s)
    s = sample_scale_conditional(rng, l, y0, cfg.lam)
    half = 0.5 * s
    a = l - half
    b = l + half
    if not (np.all(a < y0) and np.all(y0 < b)):
        raise InvalidStateError("current point escaped the latent box")
    y, lp, n = _shrink(rng, a, b, y0, target.fn, log_w, cfg.max_shrink_iters)
    return LatentState(y, s, lp, log_w, n)


def _kept(n_iter: int, burn_in: int, thin: int) -> int:
    if n_iter <= burn_in or burn_in < 0:
        raise InvalidParameterError(f"need n_iter > burn_in >= 0, got n_iter={n_iter}, burn_in={burn_in}")
    if thin < 1:
        raise InvalidParameterError(f"thin must be >= 1, got {thin}")
    return (n_iter - burn_in) // thin


def run_chain(
    target,
    init,
    cfg: LatentSliceConfig,
    n_iter: int,
    burn_in: int = 0,
    thin: int = 1,
    rng=None,
    keep_scales: bool = False,
    backend: str = "auto",
) -> ChainOutput:
    """Run ``n_iter`` transitions and keep every ``thin``-th state after burn-in.

    Iteration ``i`` (1-based) is kept when ``i > burn_in`` and
    ``(i - burn_in) % thin == 0``, giving ``(n_iter - burn_in) // thin`` rows.

    ``backend`` is ``"python"``, ``"compiled"`` or ``"auto"`` (compiled when
    the target carries a numba twin). Both backends consume the generator in
    the same order.
    """
    target = as_log_density(target, np.size(init))
    n_kept = _kept(n_iter, burn_in, thin)
    state = LatentState.initial(target, init, cfg.s_init)
    if rng is None:
        raise InvalidParameterError("an explicit numpy Generator is required")
    if backend not in ("auto", "python", "compiled"):
        raise InvalidParameterError(f"unknown backend {backend!r}")
    use_compiled = backend == "compiled" or (backend == "auto" and target.compiled is not None)
    if use_compiled:
        if target.compiled is None:
            raise InvalidParameterError("compiled backend requested but the target has no compiled twin")
        from ._compiled import run_latent_chain

        return run_latent_chain(target, state, cfg, n_iter, burn_in, thin, n_kept, rng, keep_scales)

    d = target.dim
    samples = np.empty((n_kept, d))
    scales = np.empty((n_kept, d)) if keep_scales else None
    logp = np.empty(n_kept)
    levels = np.empty(n_kept)
    iters = np.empty(n_kept, dtype=np.int64)
    counts = np.empty(n_iter, dtype=np.int64)
    j = 0
    t0 = time.perf_counter()
    for i in range(1, n_iter + 1):
        state = step(state, target, cfg, rng)
        counts[i - 1] = state.n_proposals
        if i > burn_in and (i - burn_in) % thin == 0:
            samples[j] = state.y
            logp[j] = state.log_pi_y
            levels[j] = state.log_w
            iters[j] = i
            if keep_scales:
                scales[j] = state.s
            j += 1
    wall = time.perf_counter() - t0
    return ChainOutput(samples, counts, wall, iters, logp, levels, scales, state)
