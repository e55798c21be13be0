"""Target densities and synthetic data sets for the demonstration experiments.

Closed-form targets (:class:`BimodalMixture`, :class:`CorrelatedGaussian`,
:class:`IsotropicGaussian`, :class:`Funnel`) return normalised log
densities. Posterior targets (:class:`GPRegression`, :class:`StateSpace`,
:class:`SpikeSlab`) return the unnormalised log posterior and need a
:class:`DataSet`, which they can also simulate.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numba import njit
from scipy.linalg import cho_solve, cholesky, solve_triangular, solveh_banded

from .errors import InvalidParameterError
from .latent import LogDensity

__all__ = [
    "DataSet",
    "BimodalMixture",
    "CorrelatedGaussian",
    "IsotropicGaussian",
    "Funnel",
    "GPRegression",
    "StateSpace",
    "SpikeSlab",
    "NormalMixtureData",
    "ExponentialData",
]

LOG_2PI = math.log(2.0 * math.pi)


def _check_dim(point, dim):
    y = np.asarray(point, dtype=float)
    if y.shape != (dim,):
        raise InvalidParameterError(f"expected a point of shape ({dim},), got {y.shape}")
    return y


@dataclass
class DataSet:
    """Named equal-length numeric columns, stored as CSV.

    The first line is a ``#`` comment naming the data set, followed by a
    header row with one column name per field. Values are written with 17
    significant digits so a round trip is exact.
    """

    name: str
    columns: dict[str, np.ndarray]

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise InvalidParameterError("all data columns must have the same length")
        self.columns = {k: np.asarray(v) for k, v in self.columns.items()}

    def __getitem__(self, key) -> np.ndarray:
        return self.columns[key]

    @property
    def n(self) -> int:
        return len(next(iter(self.columns.values())))

    def matrix(self, prefix: str) -> np.ndarray:
        """Stack the columns ``prefix1, prefix2, ...`` into an ``(n, p)`` array."""
        names = []
        j = 1
        while f"{prefix}{j}" in self.columns:
            names.append(f"{prefix}{j}")
            j += 1
        return np.column_stack([self.columns[c] for c in names])

    def to_csv(self, path) -> None:
        names = list(self.columns)
        with open(path, "w", newline="") as fh:
            fh.write(f"# dataset: {self.name}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(names)
            cols = [self.columns[c] for c in names]
            for row in zip(*cols):
                w.writerow([repr(int(v)) if isinstance(v, (np.integer, int)) else f"{float(v):.17g}" for v in row])

    @classmethod
    def from_csv(cls, path) -> "DataSet":
        with open(path, newline="") as fh:
            first = fh.readline().strip()
            name = first.split(":", 1)[1].strip() if first.startswith("#") else Path(path).stem
            reader = csv.reader(fh)
            header = next(reader)
            rows = list(reader)
        cols = {}
        for j, c in enumerate(header):
            raw = [r[j] for r in rows]
            if all(v.lstrip("-").isdigit() for v in raw):
                cols[c] = np.array([int(v) for v in raw], dtype=np.int64)
            else:
                cols[c] = np.array([float(v) for v in raw])
        return cls(name, cols)


@dataclass(frozen=True)
class BimodalMixture:
    """Equal-weight mixture of ``N(-10, 1)`` and ``N(10, 1)`` (by default)."""

    means: tuple[float, ...] = (-10.0, 10.0)
    sd: float = 1.0
    weights: tuple[float, ...] = (0.5, 0.5)
    dim: int = 1

    def log_density(self, y) -> float:
        x = float(_check_dim(y, 1)[0])
        terms = [math.log(w) - 0.5 * ((x - m) / self.sd) ** 2 - math.log(self.sd) - 0.5 * LOG_2PI
                 for m, w in zip(self.means, self.weights)]
        top = max(terms)
        return top + math.log(sum(math.exp(t - top) for t in terms))

    def target(self) -> LogDensity:
        means = np.array(self.means, dtype=float)
        logw = np.log(np.array(self.weights, dtype=float)) - math.log(self.sd) - 0.5 * LOG_2PI
        sd = float(self.sd)

        def fn(y):
            x = y[0]
            top = -np.inf
            t = np.empty(means.size)
            for i in range(means.size):
                t[i] = logw[i] - 0.5 * ((x - means[i]) / sd) ** 2
                top = max(top, t[i])
            acc = 0.0
            for i in range(means.size):
                acc += math.exp(t[i] - top)
            return top + math.log(acc)

        return LogDensity(1, fn, njit(fn))


@dataclass(frozen=True)
class CorrelatedGaussian:
    """Zero-mean bivariate normal with unit variances and correlation ``rho``."""

    rho: float = 0.95
    dim: int = 2

    @property
    def cov(self) -> np.ndarray:
        return np.array([[1.0, self.rho], [self.rho, 1.0]])

    def log_density(self, y) -> float:
        y1, y2 = _check_dim(y, 2)
        r = self.rho
        q = (y1 * y1 - 2.0 * r * y1 * y2 + y2 * y2) / (1.0 - r * r)
        return -0.5 * q - LOG_2PI - 0.5 * math.log(1.0 - r * r)

    def grad_log_density(self, y) -> np.ndarray:
        y1, y2 = _check_dim(y, 2)
        r = self.rho
        return -np.array([y1 - r * y2, y2 - r * y1]) / (1.0 - r * r)

    def target(self) -> LogDensity:
        r = float(self.rho)
        c = -LOG_2PI - 0.5 * math.log(1.0 - r * r)

        def fn(y):
            return -0.5 * (y[0] * y[0] - 2.0 * r * y[0] * y[1] + y[1] * y[1]) / (1.0 - r * r) + c

        return LogDensity(2, fn, njit(fn))


@dataclass(frozen=True)
class IsotropicGaussian:
    dim: int = 50

    def log_density(self, y) -> float:
        y = _check_dim(y, self.dim)
        return -0.5 * float(y @ y) - 0.5 * self.dim * LOG_2PI

    def target(self) -> LogDensity:
        c = -0.5 * self.dim * LOG_2PI

        def fn(y):
            acc = 0.0
            for v in y:
                acc += v * v
            return -0.5 * acc + c

        return LogDensity(self.dim, fn, njit(fn))


@dataclass(frozen=True)
class Funnel:
    """``v ~ N(0, v_sd**2)`` and ``x_i | v ~ N(0, exp(v))``; the point is ``(v, x_1, ..., x_{dim-1})``."""

    dim: int = 10
    v_sd: float = 3.0

    def log_density(self, y) -> float:
        y = _check_dim(y, self.dim)
        v = float(y[0])
        x = y[1:]
        n = self.dim - 1
        lv = -0.5 * (v / self.v_sd) ** 2 - math.log(self.v_sd) - 0.5 * LOG_2PI
        lx = -0.5 * math.exp(-v) * float(x @ x) - 0.5 * n * v - 0.5 * n * LOG_2PI
        return lv + lx

    def target(self) -> LogDensity:
        vs = float(self.v_sd)
        n = self.dim - 1
        c = -math.log(vs) - 0.5 * (n + 1) * LOG_2PI

        def fn(y):
            v = y[0]
            acc = 0.0
            for i in range(1, y.size):
                acc += y[i] * y[i]
            return -0.5 * (v / vs) ** 2 - 0.5 * math.exp(-v) * acc - 0.5 * n * v + c

        return LogDensity(self.dim, fn, njit(fn))


@dataclass(frozen=True)
class GPRegression:
    """Gaussian-process regression with a squared-exponential kernel.

    Data: ``n`` inputs evenly spaced on ``[0, 1]``, ``y = f(x) + N(0, noise_sd**2)``
    with ``f(x) = sin(4 pi x) + sin(7 pi x)``.
    """

    n: int = 100
    lengthscale: float = 0.1
    signal_sd: float = 1.0
    noise_sd: float = 0.2
    jitter: float = 1e-8

    @staticmethod
    def true_function(x):
        x = np.asarray(x, dtype=float)
        return np.sin(4.0 * np.pi * x) + np.sin(7.0 * np.pi * x)

    def covariance(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d2 = (x[:, None] - x[None, :]) ** 2
        tau2 = self.signal_sd ** 2
        return tau2 * np.exp(-d2 / (2.0 * self.lengthscale ** 2)) + self.jitter * tau2 * np.eye(x.size)

    def chol(self, x) -> np.ndarray:
        return cholesky(self.covariance(x), lower=True)

    def generate_data(self, rng) -> DataSet:
        x = np.linspace(0.0, 1.0, self.n)
        f = self.true_function(x)
        y = f + self.noise_sd * rng.standard_normal(self.n)
        return DataSet("gp", {"x": x, "f_true": f, "y": y})

    def log_likelihood(self, f, data: DataSet) -> float:
        r = data["y"] - f
        return -0.5 * float(r @ r) / self.noise_sd ** 2

    def log_density(self, f, data: DataSet) -> float:
        f = _check_dim(f, data.n)
        L = self.chol(data["x"])
        z = solve_triangular(L, f, lower=True)
        log_prior = -0.5 * float(z @ z) - float(np.log(np.diag(L)).sum()) - 0.5 * f.size * LOG_2PI
        return log_prior + self.log_likelihood(f, data)

    def posterior_mean(self, data: DataSet) -> np.ndarray:
        """Closed-form posterior mean of ``f`` (used as a reference)."""
        K = self.covariance(data["x"])
        A = K + self.noise_sd ** 2 * np.eye(data.n)
        return K @ cho_solve((cholesky(A, lower=True), True), data["y"])


@dataclass(frozen=True)
class StateSpace:
    """Latent AR(1) ``x_i = rho x_{i-1} + sigma z_i`` (``x_0 = 0``) with ``y_i ~ Poisson(theta e^{x_i})``."""

    n: int = 500
    rho: float = 0.8
    sigma: float = 1.0
    theta: float = 1.0
    prior_shape: float = 0.5
    prior_rate: float = 0.5

    def generate_data(self, rng) -> DataSet:
        x = np.empty(self.n)
        prev = 0.0
        for i in range(self.n):
            prev = self.rho * prev + self.sigma * rng.standard_normal()
            x[i] = prev
        y = rng.poisson(self.theta * np.exp(x))
        return DataSet("state-space", {"x_true": x, "y": y.astype(np.int64)})

    def log_density(self, x, data: DataSet, theta: float) -> float:
        """Log of ``pi(x | theta, y)`` up to a constant."""
        x = _check_dim(x, data.n)
        y = data["y"]
        prev = np.concatenate([[0.0], x[:-1]])
        innov = x - self.rho * prev
        return float(x @ y - theta * np.exp(x).sum() - 0.5 * (innov @ innov) / self.sigma ** 2)

    def target(self, data: DataSet, theta: float) -> LogDensity:
        y = np.asarray(data["y"], dtype=float)
        rho = self.rho
        inv_s2 = 1.0 / self.sigma ** 2

        def fn(x):
            innov = x.copy()
            innov[1:] -= rho * x[:-1]
            return float(x @ y - theta * np.exp(x).sum() - 0.5 * inv_s2 * (innov @ innov))

        return LogDensity(data.n, fn)

    def conditional_mode(self, data: DataSet, theta: float, tol: float = 1e-10, max_iter: int = 100) -> np.ndarray:
        """Mode of ``pi(x | theta, y)`` by Newton's method on the tridiagonal Hessian."""
        y = np.asarray(data["y"], dtype=float)
        n = y.size
        r = self.rho
        inv_s2 = 1.0 / self.sigma ** 2
        diag_q = np.full(n, (1.0 + r * r) * inv_s2)
        diag_q[-1] = inv_s2
        x = np.log(y + 0.5) - math.log(theta)
        for _ in range(max_iter):
            qx = diag_q * x
            qx[:-1] -= r * inv_s2 * x[1:]
            qx[1:] -= r * inv_s2 * x[:-1]
            grad = y - theta * np.exp(x) - qx
            bands = np.empty((2, n))
            bands[0, 0] = 0.0
            bands[0, 1:] = -r * inv_s2
            bands[1] = diag_q + theta * np.exp(x)
            dx = solveh_banded(bands, grad)
            x = x + dx
            if np.max(np.abs(dx)) < tol:
                break
        return x

    def theta_conditional(self, x, data: DataSet) -> tuple[float, float]:
        """``(shape, rate)`` of the gamma full conditional of ``theta``."""
        return self.prior_shape + float(np.sum(data["y"])), self.prior_rate + float(np.exp(x).sum())


def _beta_true(p: int) -> np.ndarray:
    b = np.zeros(p)
    b[0] = 1.0
    b[1:5] = 5.0
    return b


@dataclass(frozen=True)
class SpikeSlab:
    """Linear regression ``Y = X beta + N(0, sigma^2 I)`` with a spike-and-slab prior.

    The prior on each coefficient is proportional to
    ``N(b | 0, sigma1^2) + N(b | 0, sigma2^2)`` (equal weights, no intercept).
    """

    n: int = 100
    p: int = 90
    sigma: float = 1.0
    sigma1: float = 0.1
    sigma2: float = 10.0
    beta_true: np.ndarray = field(default=None, compare=False)

    def __post_init__(self):
        if self.beta_true is None:
            object.__setattr__(self, "beta_true", _beta_true(self.p))

    def generate_data(self, rng) -> DataSet:
        X = rng.standard_normal((self.n, self.p))
        Y = X @ self.beta_true + self.sigma * rng.standard_normal(self.n)
        cols = {"y": Y}
        for j in range(self.p):
            cols[f"x{j + 1}"] = X[:, j]
        return DataSet("spike-slab", cols)

    def log_prior(self, beta) -> float:
        b2 = np.asarray(beta, dtype=float) ** 2
        spike = -math.log(self.sigma1) - 0.5 * b2 / self.sigma1 ** 2
        slab = -math.log(self.sigma2) - 0.5 * b2 / self.sigma2 ** 2
        return float(np.logaddexp(spike, slab).sum())

    def log_density(self, beta, data: DataSet) -> float:
        beta = _check_dim(beta, self.p)
        r = data["y"] - data.matrix("x") @ beta
        return -0.5 * float(r @ r) / self.sigma ** 2 + self.log_prior(beta)

    def target(self, data: DataSet) -> LogDensity:
        X = np.ascontiguousarray(data.matrix("x"))
        Y = np.asarray(data["y"], dtype=float)
        inv_s2 = 1.0 / self.sigma ** 2
        c1 = -math.log(self.sigma1)
        c2 = -math.log(self.sigma2)
        h1 = 0.5 / self.sigma1 ** 2
        h2 = 0.5 / self.sigma2 ** 2

        def fn(beta):
            r = Y - X @ beta
            b2 = beta * beta
            return float(-0.5 * inv_s2 * (r @ r) + np.logaddexp(c1 - h1 * b2, c2 - h2 * b2).sum())

        return LogDensity(self.p, fn)


@dataclass(frozen=True)
class NormalMixtureData:
    """``n`` draws from an equal-weight unit-variance normal mixture (means -4, 0, 8)."""

    n: int = 400
    means: tuple[float, ...] = (-4.0, 0.0, 8.0)
    sd: float = 1.0

    def generate_data(self, rng) -> DataSet:
        comp = rng.integers(0, len(self.means), size=self.n)
        x = np.asarray(self.means)[comp] + self.sd * rng.standard_normal(self.n)
        return DataSet("normal-mixture", {"x": x})

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        k = len(self.means)
        return sum(np.exp(-0.5 * ((x - m) / self.sd) ** 2) / (self.sd * math.sqrt(2 * math.pi)) for m in self.means) / k


@dataclass(frozen=True)
class ExponentialData:
    """``n`` draws from an exponential density with the given rate."""

    n: int = 400
    rate: float = 3.0

    def generate_data(self, rng) -> DataSet:
        return DataSet("exponential", {"x": rng.exponential(1.0 / self.rate, size=self.n)})

    def density(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.where(x >= 0, self.rate * np.exp(-self.rate * x), 0.0)
