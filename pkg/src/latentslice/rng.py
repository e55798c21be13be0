"""Seeded random streams and elementary distribution samplers.

Every sampler in the package takes a :class:`numpy.random.Generator`. Streams
are derived from a 64-bit seed with :class:`numpy.random.SeedSequence`:

* ``make_rng(seed)`` is the root stream of ``seed``;
* ``make_rng(seed, stream=i)`` is child ``i`` of that root, identical to
  ``SeedSequence(seed).spawn(n)[i]`` for any ``n > i``.

Children with distinct ``stream`` indices are statistically independent, so
parallel chains use ``stream = chain index``. The bit generator is PCG64,
whose output for a given seed is fixed across platforms.

Normal draws use numpy's ziggurat, gamma draws use Marsaglia-Tsang rejection
(with the ``U**(1/shape)`` boost for ``shape < 1``); both are deterministic
given the stream.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.random import PCG64, Generator, SeedSequence

from .errors import InvalidIntervalError, InvalidParameterError

__all__ = [
    "make_rng",
    "spawn",
    "uniform",
    "shifted_exponential",
    "normal",
    "gamma",
    "beta",
    "dirichlet",
    "categorical",
    "log_categorical",
    "poisson",
]

_MASK64 = (1 << 64) - 1


def make_rng(seed: int, stream: int | None = None) -> Generator:
    """Return the generator for ``seed`` (and optionally child ``stream``)."""
    seed = int(seed)
    if seed < 0 or seed > _MASK64:
        raise InvalidParameterError(f"seed must be a 64-bit unsigned integer, got {seed}")
    if stream is None:
        ss = SeedSequence(seed)
    else:
        if stream < 0:
            raise InvalidParameterError(f"stream index must be >= 0, got {stream}")
        ss = SeedSequence(seed, spawn_key=(int(stream),))
    return Generator(PCG64(ss))


def spawn(seed: int, n: int) -> list[Generator]:
    """Independent generators for ``n`` parallel chains."""
    return [make_rng(seed, stream=i) for i in range(n)]


def uniform(rng, lo: float = 0.0, hi: float = 1.0, size=None):
    """Uniform draw on ``[lo, hi)``."""
    if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
        raise InvalidIntervalError(f"need finite lo < hi, got ({lo}, {hi})")
    return lo + (hi - lo) * rng.random(size)


def shifted_exponential(rng, rate: float, shift=0.0, size=None):
    """Draw from the density proportional to ``exp(-rate * x)`` on ``x > shift``.

    Uses the inverse CDF ``shift - log(1 - u) / rate``. ``shift`` may be an
    array, in which case one draw per element is returned.
    """
    if not rate > 0:
        raise InvalidParameterError(f"rate must be positive, got {rate}")
    shift = np.asarray(shift, dtype=float)
    if np.any(shift < 0):
        raise InvalidParameterError("shift must be non-negative")
    if size is None and shift.ndim:
        size = shift.shape
    u = rng.random(size)
    out = shift - np.log1p(-u) / rate
    return float(out) if np.ndim(out) == 0 else out


def normal(rng, mean=0.0, sd=1.0, size=None):
    if np.any(np.asarray(sd) <= 0):
        raise InvalidParameterError(f"sd must be positive, got {sd}")
    return rng.normal(mean, sd, size)


def gamma(rng, shape, scale=1.0, size=None):
    """Gamma draw parameterised by shape and scale (mean ``shape * scale``)."""
    if np.any(np.asarray(shape) <= 0) or np.any(np.asarray(scale) <= 0):
        raise InvalidParameterError(f"gamma needs shape > 0 and scale > 0, got ({shape}, {scale})")
    return rng.gamma(shape, scale, size)


def beta(rng, a, b, size=None):
    if np.any(np.asarray(a) <= 0) or np.any(np.asarray(b) <= 0):
        raise InvalidParameterError(f"beta needs a > 0 and b > 0, got ({a}, {b})")
    return rng.beta(a, b, size)


def dirichlet(rng, alphas) -> np.ndarray:
    """Dirichlet draw, computed as normalised independent gamma variates."""
    alphas = np.asarray(alphas, dtype=float)
    if alphas.ndim != 1 or alphas.size == 0 or np.any(alphas <= 0):
        raise InvalidParameterError("dirichlet needs a non-empty vector of positive alphas")
    g = rng.standard_gamma(alphas)
    total = g.sum()
    if total == 0.0:
        # every component underflowed (tiny alphas); fall back to a vertex
        out = np.zeros_like(g)
        out[int(np.argmax(alphas))] = 1.0
        return out
    return g / total


def categorical(rng, weights) -> int:
    """Index ``i`` with probability ``weights[i] / sum(weights)`` (0-based)."""
    w = np.asarray(weights, dtype=float)
    if w.ndim != 1 or w.size == 0 or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise InvalidParameterError("categorical needs finite non-negative weights")
    cum = np.cumsum(w)
    if not cum[-1] > 0:
        raise InvalidParameterError("categorical weights sum to zero")
    idx = int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))
    return min(idx, w.size - 1)


def log_categorical(rng, log_weights) -> int:
    """Categorical draw from unnormalised log weights (``-inf`` allowed)."""
    lw = np.asarray(log_weights, dtype=float)
    top = lw.max()
    if not np.isfinite(top):
        raise InvalidParameterError("log_categorical needs at least one finite log weight")
    return categorical(rng, np.exp(lw - top))


def poisson(rng, mean, size=None):
    if np.any(np.asarray(mean) <= 0):
        raise InvalidParameterError(f"poisson mean must be positive, got {mean}")
    return rng.poisson(mean, size)
