"""numba chain kernels.

These are line-for-line ports of the Python transitions in ``latent`` and
``baselines`` and draw from the same ``numpy.random.Generator`` in the same
order. A compiled run tracks the Python run for the same seed to within
rounding: numpy's vectorised ``log1p`` and libm's scalar one can differ in
the last bit.
"""

from __future__ import annotations

import math
import time

import numpy as np
from numba import njit

from .errors import ShrinkStallError

STATUS_OK = 0
STATUS_STALL = 1
STATUS_CONTAINMENT = 2


@njit(cache=False)
def _latent_chain(fn, y, s, lp, lam, n_iter, burn_in, thin, max_iters, rng, keep_scales):
    d = y.shape[0]
    n_kept = (n_iter - burn_in) // thin
    samples = np.empty((n_kept, d))
    scales = np.empty((n_kept if keep_scales else 0, d))
    logps = np.empty(n_kept)
    levels = np.empty(n_kept)
    iters = np.empty(n_kept, dtype=np.int64)
    counts = np.zeros(n_iter, dtype=np.int64)
    y0 = y.copy()
    s0 = s.copy()
    j = 0
    for i in range(1, n_iter + 1):
        u = rng.random()
        log_w = lp + math.log(u) if u > 0.0 else -np.inf
        l = y0 - 0.5 * s0 + rng.random(d) * s0
        shift = 2.0 * np.abs(l - y0)
        s_new = shift - np.log1p(-rng.random(d)) / lam
        half = 0.5 * s_new
        a = l - half
        b = l + half
        for c in range(d):
            if not (a[c] < y0[c] and y0[c] < b[c]):
                return samples, scales, logps, levels, iters, counts, y0, s0, lp, STATUS_CONTAINMENT, i
        accepted = False
        for n in range(1, max_iters + 1):
            ys = a + (b - a) * rng.random(d)
            lps = fn(ys)
            if lps > log_w:
                accepted = True
                counts[i - 1] = n
                break
            for c in range(d):
                if ys[c] < y0[c]:
                    a[c] = ys[c]
                else:
                    b[c] = ys[c]
        if not accepted:
            return samples, scales, logps, levels, iters, counts, y0, s0, lp, STATUS_STALL, i
        y0 = ys
        s0 = s_new
        lp = lps
        if i > burn_in and (i - burn_in) % thin == 0:
            samples[j] = y0
            logps[j] = lp
            levels[j] = log_w
            iters[j] = i
            if keep_scales:
                scales[j] = s0
            j += 1
    return samples, scales, logps, levels, iters, counts, y0, s0, lp, STATUS_OK, n_iter


def run_latent_chain(target, state, cfg, n_iter, burn_in, thin, n_kept, rng, keep_scales):
    from .errors import InvalidStateError
    from .latent import ChainOutput, LatentState

    t0 = time.perf_counter()
    samples, scales, logps, levels, iters, counts, y_end, s_end, lp_end, status, at = _latent_chain(
        target.compiled, state.y.copy(), state.s.copy(), float(state.log_pi_y), float(cfg.lam),
        int(n_iter), int(burn_in), int(thin), int(cfg.max_shrink_iters), rng, bool(keep_scales),
    )
    wall = time.perf_counter() - t0
    if status == STATUS_STALL:
        raise ShrinkStallError(f"no acceptable point after {cfg.max_shrink_iters} shrink iterations at iteration {at}")
    if status == STATUS_CONTAINMENT:
        raise InvalidStateError(f"current point escaped the latent box at iteration {at}")
    final = LatentState(y_end, s_end, float(lp_end))
    return ChainOutput(samples, counts, wall, iters, logps, levels, scales if keep_scales else None, final)


@njit(cache=False)
def _slice_1d(fn, y, j, lp, k, m, max_iters, rng):
    """Single-coordinate stepping-out + shrinkage update of ``y[j]`` in place."""
    x0 = y[j]
    u = rng.random()
    log_w = lp + math.log(u) if u > 0.0 else -np.inf
    U = rng.random()
    L = x0 - k * (1.0 - U)
    R = x0 + k * U
    J = int(m * rng.random())
    K = m - 1 - J
    while J > 0:
        y[j] = L
        if not fn(y) > log_w:
            break
        L -= k
        J -= 1
    while K > 0:
        y[j] = R
        if not fn(y) > log_w:
            break
        R += k
        K -= 1
    for n in range(1, max_iters + 1):
        x1 = L + (R - L) * rng.random()
        y[j] = x1
        lp1 = fn(y)
        if lp1 > log_w:
            return lp1, n
        if x1 < x0:
            L = x1
        else:
            R = x1
    y[j] = x0
    return lp, -1


@njit(cache=False)
def _gibbs_slice_chain(fn, y, lp, k, m, n_iter, burn_in, thin, max_iters, rng):
    d = y.shape[0]
    n_kept = (n_iter - burn_in) // thin
    samples = np.empty((n_kept, d))
    logps = np.empty(n_kept)
    iters = np.empty(n_kept, dtype=np.int64)
    counts = np.zeros(n_iter, dtype=np.int64)
    y = y.copy()
    jj = 0
    for i in range(1, n_iter + 1):
        total = 0
        for j in range(d):
            lp, n = _slice_1d(fn, y, j, lp, k, m, max_iters, rng)
            if n < 0:
                return samples, logps, iters, counts, STATUS_STALL, i
            total += n
        counts[i - 1] = total
        if i > burn_in and (i - burn_in) % thin == 0:
            samples[jj] = y
            logps[jj] = lp
            iters[jj] = i
            jj += 1
    return samples, logps, iters, counts, STATUS_OK, n_iter


def run_gibbs_slice_chain(compiled_fn, init, lp, cfg, n_iter, burn_in, thin, max_iters, rng):
    t0 = time.perf_counter()
    samples, logps, iters, counts, status, at = _gibbs_slice_chain(
        compiled_fn, np.asarray(init, dtype=float).copy(), float(lp), float(cfg.k), int(cfg.m),
        int(n_iter), int(burn_in), int(thin), int(max_iters), rng,
    )
    wall = time.perf_counter() - t0
    if status == STATUS_STALL:
        raise ShrinkStallError(f"single-variable slice update stalled at sweep {at}")
    return samples, logps, iters, counts, wall
