import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.random import PCG64, Generator, SeedSequence
from scipy import stats

from latentslice import rng as R
from latentslice.errors import InvalidIntervalError, InvalidParameterError


def test_make_rng_is_reproducible():
    a = R.make_rng(123).random(5)
    b = R.make_rng(123).random(5)
    assert np.array_equal(a, b)


def test_stream_matches_seedsequence_spawn():
    children = SeedSequence(99).spawn(4)
    for i, child in enumerate(children):
        expect = Generator(PCG64(child)).random(3)
        assert np.array_equal(R.make_rng(99, stream=i).random(3), expect)


def test_streams_differ():
    assert not np.array_equal(R.make_rng(5, 0).random(4), R.make_rng(5, 1).random(4))


def test_spawn_equals_streams():
    gens = R.spawn(7, 3)
    for i, g in enumerate(gens):
        assert g.random() == R.make_rng(7, i).random()


@pytest.mark.parametrize("seed", [-1, 2 ** 64])
def test_bad_seed(seed):
    with pytest.raises(InvalidParameterError):
        R.make_rng(seed)


def test_bad_stream():
    with pytest.raises(InvalidParameterError):
        R.make_rng(1, stream=-2)


@pytest.mark.parametrize("lo,hi", [(1.0, 1.0), (2.0, 1.0), (0.0, math.inf), (math.nan, 1.0)])
def test_uniform_rejects_bad_interval(lo, hi):
    with pytest.raises(InvalidIntervalError):
        R.uniform(R.make_rng(0), lo, hi)


@given(st.floats(-1e6, 1e6), st.floats(1e-6, 1e6), st.integers(0, 2 ** 32))
@settings(max_examples=200, deadline=None)
def test_uniform_in_half_open_interval(lo, width, seed):
    hi = lo + width
    if not lo < hi:
        return
    x = R.uniform(R.make_rng(seed), lo, hi)
    assert lo <= x <= hi


def test_shifted_exponential_inverse_cdf(scripted):
    # u = 1 - e^{-1} gives exactly one mean above the shift
    u = 1.0 - math.exp(-1.0)
    x = R.shifted_exponential(scripted([u]), rate=0.5, shift=3.0)
    assert x == pytest.approx(3.0 + 2.0, rel=1e-15)


def test_shifted_exponential_vector_shift():
    shift = np.array([0.0, 1.0, 10.0])
    x = R.shifted_exponential(R.make_rng(1), 2.0, shift)
    assert x.shape == (3,) and np.all(x > shift)


def test_shifted_exponential_distribution():
    x = R.shifted_exponential(R.make_rng(2), 0.1, 4.0, size=20000)
    d = stats.kstest(x - 4.0, stats.expon(scale=10.0).cdf).statistic
    assert d < 1.63 / math.sqrt(x.size)


@pytest.mark.parametrize("rate,shift", [(0.0, 0.0), (-1.0, 0.0), (1.0, -0.5)])
def test_shifted_exponential_bad_args(rate, shift):
    with pytest.raises(InvalidParameterError):
        R.shifted_exponential(R.make_rng(0), rate, shift)


def test_gamma_shape_two_mean():
    x = R.gamma(R.make_rng(3), 2.0, 5.0, size=50000)
    assert abs(x.mean() - 10.0) < 4 * math.sqrt(50.0 / 50000)


def test_gamma_small_shape_positive():
    x = R.gamma(R.make_rng(3), 0.3, 1.0, size=1000)
    assert np.all(x >= 0)


@pytest.mark.parametrize("fn,args", [
    (R.gamma, (0.0, 1.0)),
    (R.beta, (1.0, 0.0)),
    (R.normal, (0.0, -1.0)),
    (R.poisson, (0.0,)),
])
def test_parameter_errors(fn, args):
    with pytest.raises(InvalidParameterError):
        fn(R.make_rng(0), *args)


def test_dirichlet_on_simplex():
    w = R.dirichlet(R.make_rng(4), [0.5, 1.0, 2.0])
    assert w.shape == (3,) and np.all(w >= 0) and w.sum() == pytest.approx(1.0)


def test_dirichlet_rejects_empty():
    with pytest.raises(InvalidParameterError):
        R.dirichlet(R.make_rng(0), [])


def test_categorical_scripted(scripted):
    # cumulative weights 1, 3, 6; u * 6 = 2.9 falls in the second bin
    assert R.categorical(scripted([2.9 / 6]), [1.0, 2.0, 3.0]) == 1
    assert R.categorical(scripted([0.0]), [0.0, 2.0]) == 1


def test_categorical_frequencies():
    g = R.make_rng(6)
    w = np.array([0.2, 0.5, 0.3])
    draws = np.array([R.categorical(g, w) for _ in range(20000)])
    freq = np.bincount(draws, minlength=3) / draws.size
    assert np.all(np.abs(freq - w) < 4 * np.sqrt(w * (1 - w) / draws.size))


def test_categorical_errors():
    with pytest.raises(InvalidParameterError):
        R.categorical(R.make_rng(0), [0.0, 0.0])
    with pytest.raises(InvalidParameterError):
        R.categorical(R.make_rng(0), [1.0, -1.0])


def test_log_categorical_handles_neg_inf(scripted):
    assert R.log_categorical(scripted([0.99]), [-np.inf, 1000.0, -np.inf]) == 1
    with pytest.raises(InvalidParameterError):
        R.log_categorical(R.make_rng(0), [-np.inf, -np.inf])
