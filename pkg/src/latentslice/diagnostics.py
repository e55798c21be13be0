"""Chain diagnostics: autocorrelation, effective sample size, KS distance, mode occupancy."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy import stats
from scipy.signal import find_peaks

__all__ = [
    "autocorrelation",
    "integrated_autocorrelation_time",
    "effective_sample_size",
    "ess_subsample",
    "ks_statistic",
    "ks_critical_value",
    "mode_fraction",
    "mode_switches",
    "silverman_bandwidth",
    "kde",
    "count_modes",
    "l1_distance",
    "ChainSummary",
    "summarize",
    "summarize_chain",
]

MIN_LENGTH = 10


def _series(x) -> np.ndarray:
    x = np.asarray(x, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty series")
    if x.size < MIN_LENGTH:
        raise ValueError(f"series needs at least {MIN_LENGTH} values, got {x.size}")
    return x


def autocorrelation(series, max_lag: int | None = None) -> np.ndarray:
    """Biased sample ACF for lags ``0..max_lag``; all NaN for a constant series."""
    x = _series(series)
    n = x.size
    max_lag = n - 1 if max_lag is None else min(int(max_lag), n - 1)
    xc = x - x.mean()
    var = float(xc @ xc)
    if var == 0.0:
        return np.full(max_lag + 1, np.nan)
    size = 1 << (2 * n - 1).bit_length()
    f = np.fft.rfft(xc, size)
    acov = np.fft.irfft(f * np.conj(f), size)[: max_lag + 1]
    return acov / var


def integrated_autocorrelation_time(series) -> float:
    """``1 + 2 sum rho_t``, summing lags up to (not including) the first with ``rho_t <= 0``."""
    rho = autocorrelation(series)
    if np.isnan(rho[0]):
        return math.nan
    nonpos = np.nonzero(rho[1:] <= 0.0)[0]
    stop = nonpos[0] + 1 if nonpos.size else rho.size
    return float(1.0 + 2.0 * rho[1:stop].sum())


def effective_sample_size(series) -> float:
    n = np.size(series)
    act = integrated_autocorrelation_time(series)
    return n / act if math.isfinite(act) else math.nan


def ess_subsample(series) -> np.ndarray:
    """Every ``ceil(act)``-th value, an approximately independent subsample."""
    x = _series(series)
    act = integrated_autocorrelation_time(x)
    stride = 1 if not math.isfinite(act) else max(1, math.ceil(act))
    return x[::stride]


def ks_statistic(series, cdf) -> float:
    """Sup distance between the empirical CDF of ``series`` and ``cdf``."""
    x = np.asarray(series, dtype=float).ravel()
    if x.size == 0:
        raise ValueError("empty series")
    return float(stats.kstest(x, cdf, method="asymp").statistic)


def ks_critical_value(n: int, alpha: float = 0.01) -> float:
    """Asymptotic one-sample KS critical value ``K_{1-alpha} / sqrt(n)``."""
    return float(stats.kstwobign.ppf(1.0 - alpha) / math.sqrt(n))


def mode_fraction(series, boundaries) -> np.ndarray:
    """Fraction of values in each region cut by the sorted ``boundaries``."""
    x = _series(series)
    idx = np.digitize(x, np.sort(np.atleast_1d(boundaries)))
    return np.bincount(idx, minlength=np.size(boundaries) + 1) / x.size


def mode_switches(series, boundary: float = 0.0) -> int:
    """Number of consecutive pairs lying on opposite sides of ``boundary``."""
    side = _series(series) > boundary
    return int(np.count_nonzero(side[1:] != side[:-1]))


def silverman_bandwidth(samples) -> float:
    """``0.9 min(sd, IQR/1.34) n^(-1/5)``, falling back to sd when the IQR is zero."""
    x = _series(samples)
    sd = x.std(ddof=1)
    iqr = stats.iqr(x) / 1.34
    spread = min(sd, iqr) if iqr > 0 else sd
    return 0.9 * spread * x.size ** -0.2


def kde(samples, grid, bandwidth: float | None = None) -> np.ndarray:
    """Gaussian kernel density estimate on ``grid`` (Silverman bandwidth by default)."""
    x = _series(samples)
    h = silverman_bandwidth(x) if bandwidth is None else float(bandwidth)
    return stats.gaussian_kde(x, bw_method=h / x.std(ddof=1))(np.asarray(grid, dtype=float))


def count_modes(density, threshold: float = 0.0) -> int:
    """Local maxima of a gridded density that rise above ``threshold``."""
    peaks, _ = find_peaks(np.asarray(density, dtype=float), height=threshold)
    return int(peaks.size)


def l1_distance(f, g, grid) -> float:
    return float(np.trapezoid(np.abs(np.asarray(f) - np.asarray(g)), grid))


@dataclass
class ChainSummary:
    mean: float
    sd: float
    q025: float
    q50: float
    q975: float
    ess: float
    act: float
    ks_stat: float | None = None
    mode_fractions: list[float] | None = None

    def to_dict(self) -> dict:
        return {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in asdict(self).items()}


def summarize(series, cdf=None, boundaries=None) -> ChainSummary:
    x = _series(series)
    q = np.quantile(x, [0.025, 0.5, 0.975])
    act = integrated_autocorrelation_time(x)
    return ChainSummary(
        mean=float(x.mean()),
        sd=float(x.std(ddof=1)),
        q025=float(q[0]),
        q50=float(q[1]),
        q975=float(q[2]),
        ess=x.size / act if math.isfinite(act) else math.nan,
        act=act,
        ks_stat=None if cdf is None else ks_statistic(x, cdf),
        mode_fractions=None if boundaries is None else mode_fraction(x, boundaries).tolist(),
    )


def summarize_chain(samples) -> list[ChainSummary]:
    """One summary per column of an ``(n, d)`` sample matrix."""
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    return [summarize(samples[:, j]) for j in range(samples.shape[1])]
