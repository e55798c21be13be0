import math

import numpy as np
import pytest
from scipy import stats

from latentslice import diagnostics as diag
from latentslice.discrete import DiscreteTarget, detailed_balance_residual
from latentslice.experiments import (
    FiniteMixtureHyper,
    FiniteMixtureState,
    MDPHyper,
    StickBreakingState,
    candidate_weights,
    finite_mixture_iteration,
    finite_mixture_run,
    gp_regression_run,
    mdp_gibbs_iteration,
    mdp_initial_state,
    mdp_predictive_draw,
    spike_slab_run,
    state_space_run,
)
from latentslice.models import DataSet, ExponentialData, GPRegression, NormalMixtureData, SpikeSlab, StateSpace
from latentslice.rng import make_rng

from conftest import ScriptedRng


def _fixed_state(n, lam1=2.0):
    return StickBreakingState(
        v=np.array([0.5, 0.5, 0.5, 0.5]),
        mu=np.array([3.0, 0.0, 0.0, 0.0]),
        lam=np.array([lam1, 1.0, 1.0, 1.0]),
        d=np.ones(n, dtype=np.int64),
    )


def test_mdp_mean_update_conjugate_at_zero_data():
    # x = 0 everywhere and d = 1: mu_1 ~ N(0, 1/(s + n lambda_1))
    n, lam1 = 50, 2.0
    x = np.zeros(n)
    h = MDPHyper()
    draws = np.array([mdp_gibbs_iteration(_fixed_state(n, lam1), x, h, 1, make_rng(i)).mu[0] for i in range(3000)])
    sd = 1.0 / math.sqrt(h.s + n * lam1)
    assert abs(draws.mean()) < 4 * sd / math.sqrt(draws.size)
    assert draws.std() == pytest.approx(sd, rel=0.06)


def test_mdp_k1_allocations_never_move():
    x = NormalMixtureData(n=60).generate_data(make_rng(0))["x"]
    rng = make_rng(1)
    state = mdp_initial_state(x, MDPHyper(), 1, rng)
    for _ in range(30):
        state = mdp_gibbs_iteration(state, x, MDPHyper(), 1, rng)
        assert np.all(state.d == 1)


def test_mdp_sticks_cover_every_window():
    x = NormalMixtureData(n=100).generate_data(make_rng(2))["x"]
    rng = make_rng(3)
    k = 4
    state = mdp_initial_state(x, MDPHyper(), k, rng)
    for _ in range(300):
        state = mdp_gibbs_iteration(state, x, MDPHyper(), k, rng)
        assert state.instantiated_count >= state.d.max() + k
        w = state.w
        assert np.all((w > 0) & (w < 1)) and w.sum() < 1
    assert state.d.max() >= 3


def test_mdp_predictive_single_component():
    state = StickBreakingState(np.array([np.nextafter(1.0, 0.0)]), np.array([2.0]), np.array([4.0]), np.ones(3, dtype=np.int64))
    rng = make_rng(4)
    draws = np.array([mdp_predictive_draw(state, MDPHyper(), rng) for _ in range(5000)])
    assert diag.ks_statistic(draws, stats.norm(2.0, 0.5).cdf) < diag.ks_critical_value(draws.size)


def test_mdp_predictive_extends_sticks_until_residual_small():
    state = StickBreakingState(np.array([0.1]), np.array([0.0]), np.array([1.0]), np.ones(1, dtype=np.int64))
    # draws must come from many components, not only the instantiated one
    rng = make_rng(5)
    draws = np.array([mdp_predictive_draw(state, MDPHyper(), rng) for _ in range(2000)])
    assert draws.std() > 1.0


def test_candidate_weights_by_hand():
    # up: split index 1 (0.8) with u = 0.25 -> [0.2, 0.2, 0.6]; down: merge into index 0 -> [1.0]
    rng = ScriptedRng([0.25], ints=[1, 0])
    c = candidate_weights(np.array([0.2, 0.8]), 2, rng)
    assert sorted(c) == [1, 2, 3]
    assert np.allclose(c[3][0], [0.2, 0.2, 0.6]) and c[3][1] == pytest.approx(math.log(0.8))
    assert np.allclose(c[1][0], [1.0]) and c[1][1] == pytest.approx(0.0)
    assert c[2][1] == 0.0


def test_candidate_weights_are_simplices():
    w = np.array([0.1, 0.2, 0.3, 0.4])
    c = candidate_weights(w, 5, make_rng(6))
    assert sorted(c) == list(range(1, 9))
    for z, (wz, _) in c.items():
        assert wz.size == z and np.all(wz > 0) and wz.sum() == pytest.approx(1.0)


def test_frozen_window_kernel_is_reversible():
    x = ExponentialData(n=50).generate_data(make_rng(7))["x"]
    c = candidate_weights(np.array([0.3, 0.3, 0.4]), 3, make_rng(8))
    logp = np.full(5, -np.inf)
    j = np.arange(1, 6)
    for z, (wz, lj) in c.items():
        comp = np.log(wz * j[:z])[None, :] - np.outer(x, j[:z])
        logp[z - 1] = stats.poisson(1.0).logpmf(z - 1) + stats.dirichlet(np.ones(z)).logpdf(wz) if z > 1 else stats.poisson(1.0).logpmf(0)
        logp[z - 1] += float(np.logaddexp.reduce(comp, axis=1).sum()) + lj
    target = DiscreteTarget.from_pmf(np.exp(logp - logp.max()), support_floor=1)
    assert detailed_balance_residual(target, 3, 5) < 1e-12


def test_finite_mixture_k1_keeps_m():
    x = ExponentialData(n=50).generate_data(make_rng(9))["x"]
    state = FiniteMixtureState(3, np.array([0.2, 0.3, 0.5]))
    rng = make_rng(10)
    for _ in range(50):
        state = finite_mixture_iteration(state, x, FiniteMixtureHyper(), 1, rng)
        assert state.M == 3 and state.w.size == 3
        assert state.d.max() <= 3 and state.w.sum() == pytest.approx(1.0)


def test_finite_mixture_prior_recovery_short():
    Ms, _, _ = finite_mixture_run(np.empty(0), 20000, hyper=FiniteMixtureHyper(), k=3, rng=make_rng(11))
    freq = np.bincount(Ms, minlength=6)[1:6] / Ms.size
    prior = stats.poisson(1.0).pmf(np.arange(5))
    assert np.allclose(freq, prior, atol=0.02)


def test_finite_mixture_exponential_data_favours_rate_three():
    x = ExponentialData().generate_data(make_rng(12))["x"]
    Ms, draws, state = finite_mixture_run(x, 2000, 500, k=5, rng=make_rng(13))
    assert np.bincount(Ms[500:]).argmax() <= 5
    assert np.argmax(state.w) == 2
    assert abs(draws.mean() - 1 / 3) < 0.05


def test_gp_run_shapes_and_fit():
    m = GPRegression()
    data = m.generate_data(make_rng(14))
    res = gp_regression_run("latent", data, 300, make_rng(15), m, burn_in=100)
    assert res.samples.shape == (300, 100) and res.mean.shape == (100,)
    assert np.sqrt(np.mean((res.mean - data["f_true"]) ** 2)) < 0.3


def test_state_space_run_shapes():
    m = StateSpace(n=50)
    data = m.generate_data(make_rng(16))
    res = state_space_run(data, 100, 0.1, make_rng(17), m)
    assert res.x.shape == (100, 50) and res.theta.shape == (100,)
    assert np.all(res.theta > 0)


def test_spike_slab_zero_data_is_prior():
    m = SpikeSlab(n=5, p=3, beta_true=np.zeros(3))
    data = DataSet("zero", {"y": np.zeros(5), "x1": np.zeros(5), "x2": np.zeros(5), "x3": np.zeros(5)})
    out = spike_slab_run(data, 20000, 0.1, make_rng(18), m)
    b = out.samples[:, 0]
    frac = (b > 0).mean()
    se = 0.5 / math.sqrt(diag.effective_sample_size(b > 0))
    assert abs(frac - 0.5) < 4 * se
    # spike and slab carry equal prior mass
    spike = (np.abs(b) < 0.5).mean()
    assert spike == pytest.approx(0.5 + 0.5 * (stats.norm.cdf(0.05) - stats.norm.cdf(-0.05)), abs=0.08)
