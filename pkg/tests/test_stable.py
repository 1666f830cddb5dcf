import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from ecglab import stable
from ecglab.ecg import CircleHarmonic, TreeFull, TreeSubgroup, ecg_estimate
from ecglab.stable import (
    FieldSample,
    SeriesConfig,
    StableParams,
    b_n,
    c_alpha,
    draw_terms,
    frechet_draws,
    frechet_test,
    partial_maxima,
    sample_sas,
    sample_tilted_boundary,
    simulate_field,
    tree_ball_maxima,
)
from ecglab.words import SubgroupSpec

Z = SubgroupSpec.kernel_zk([1, 0])


def test_c_alpha_examples():
    assert c_alpha(1.0) == pytest.approx(2 / math.pi)
    assert c_alpha(0.5) == pytest.approx(0.7978846, abs=1e-7)
    assert c_alpha(1.5) == pytest.approx(0.3989423, abs=1e-7)
    assert c_alpha(1.0 + 1e-6) == pytest.approx(2 / math.pi, rel=1e-5)
    for bad in (0.0, 2.0, -1.0, 2.5):
        with pytest.raises(ValueError):
            c_alpha(bad)


def test_param_validation():
    with pytest.raises(ValueError):
        StableParams(2.0)
    with pytest.raises(ValueError):
        StableParams(1.0, 0.0)
    with pytest.raises(ValueError):
        SeriesConfig(J=49)
    with pytest.raises(ValueError):
        SeriesConfig(R=0)


@pytest.mark.parametrize("alpha", [0.7, 1.0, 1.5])
def test_sas_symmetry(alpha):
    y = sample_sas(StableParams(alpha), np.random.default_rng(2), 40000)
    assert abs(np.mean(np.sign(y))) < 3 / math.sqrt(y.size)


def test_sas_scale():
    rng = np.random.default_rng(3)
    a = sample_sas(StableParams(1.3, 2.0), rng, 100000)
    theta = 0.5
    emp = np.mean(np.cos(theta * a))
    assert abs(emp - math.exp(-((2.0 * theta) ** 1.3))) < 0.02


def test_b_n_examples():
    assert b_n(1.5, 1.0) == 1
    assert b_n(1.5, 3.0 ** 6) == pytest.approx(3 ** (6 / 1.5))
    assert stable.abar_for(TreeFull(2), 6) == 729
    assert stable.abar_for(TreeSubgroup(Z), 0) == 1
    with pytest.raises(ValueError):
        b_n(1.5, 0.0)


def test_b_n_two_routes():
    # abar from the pointwise maxima against the MC mean of the tilted acceptance rate
    model = CircleHarmonic()
    p = ecg_estimate(model, 4.0, 20000, seed=4)
    rng = np.random.default_rng(8)
    draws = sample_tilted_boundary(model, 4.0, 4000, rng)
    rate = draws.rate
    se = math.sqrt(rate * (1 - rate) / draws.proposals)
    assert abs(rate - p.cn) <= 3 * math.hypot(se, p.stderr)


def test_tilted_tree_full_accepts_everything():
    d = sample_tilted_boundary(TreeFull(2), 5, 500, np.random.default_rng(0))
    assert d.rate == 1 and d.points.shape == (500, 5)
    counts = np.bincount(d.points[:, 0], minlength=4) / 500
    assert np.max(np.abs(counts - 0.25)) < 0.08


def test_tilted_n0_always_accepts():
    for model in (TreeSubgroup(Z), CircleHarmonic()):
        assert sample_tilted_boundary(model, 0, 300, np.random.default_rng(1)).rate == 1


def test_partial_maxima_examples():
    assert partial_maxima([-3, 1, 2]) == 3
    assert partial_maxima(FieldSample(["e"], np.array([-0.5]))) == 0.5
    with pytest.raises(ValueError):
        partial_maxima([])


def test_single_term_field():
    model = TreeFull(2)
    cfg = SeriesConfig(J=50, R=1, n=3, seed=0)
    rng = np.random.default_rng(4)
    f = simulate_field(model, cfg, 1.2, rng, retain=True)
    assert len(f) == 53 and np.all(np.isfinite(f.values))
    # J = 1 algebra through the exact trie route
    terms = draw_terms(model, 3, 1, np.random.default_rng(5))
    K = b_n(1.2, 27.0) * c_alpha(1.2) ** (1 / 1.2)
    top = tree_ball_maxima(model, 3, 1.2, terms, K)[-1]
    assert top == pytest.approx(K * terms.gammas[0] ** (-1 / 1.2))


@pytest.mark.parametrize("model", [TreeFull(2), TreeSubgroup(Z), TreeSubgroup(SubgroupSpec.kernel_c2c3([[0], [1]]))])
def test_trie_maxima_match_dense_field(model):
    n, alpha = 5, 1.3
    cfg = SeriesConfig(J=200, R=1, n=n, seed=0)
    for seed in range(4):
        rng = np.random.default_rng(seed)
        terms = draw_terms(model, n, cfg.J, rng)
        K = 1.7
        fast = tree_ball_maxima(model, n, alpha, terms, K)
        coef = terms.eps * terms.gammas ** (-1 / alpha)
        for m in range(n + 1):
            elems = [g for g in model.ball(n) if len(g) <= m]
            log_d = stable._tree_log_rn(model, elems, terms.tilted.points)
            vals = K * (np.exp((log_d - terms.tilted.log_max[None, :]) / alpha) @ coef)
            assert fast[m] == pytest.approx(np.max(np.abs(vals)), rel=1e-10)


def test_nested_maxima_monotone():
    model = TreeSubgroup(Z)
    terms = draw_terms(model, 10, 300, np.random.default_rng(7))
    m = tree_ball_maxima(model, 10, 1.5, terms, 1.0)
    assert np.all(np.diff(m) >= 0)


def test_field_median_symmetric():
    R = 600
    model = TreeFull(2)
    cfg = SeriesConfig(J=100, R=R, n=2, seed=0)
    ye = []
    for r in range(R):
        f = simulate_field(model, cfg, 1.5, np.random.default_rng(r), abar=9.0, elements=[model.ball(0)[0]])
        ye.append(f.values[0])
    ye = np.array(ye)
    iqr = np.subtract(*np.quantile(ye, [0.75, 0.25]))
    assert abs(np.median(ye)) <= 3 * iqr / math.sqrt(R)


def test_circle_field_runs():
    cfg = SeriesConfig(J=60, R=1, n=2, seed=0)
    f = simulate_field(CircleHarmonic(), cfg, 1.5, np.random.default_rng(0), abar=3.0)
    assert np.all(np.isfinite(f.values)) and len(f) > 1


def test_frechet_self_test():
    x = frechet_draws(1.5, 2000, np.random.default_rng(9))
    kappa, ks = frechet_test(x, 1.5)
    assert abs(kappa - 1) < 0.1 and ks < 0.05
    with pytest.raises(ValueError):
        frechet_test(x[:50], 1.5)
    with pytest.raises(stable.DegenerateSample):
        frechet_test(np.zeros(200), 1.5)


def test_frechet_cdf_properties():
    lam = np.array([-1.0, 0.0, 0.5, 1.0, 10.0])
    F = stable.frechet_cdf(lam, 1.2)
    assert F[0] == 0 and F[1] == 0 and np.all(np.diff(F) >= 0) and F[-1] < 1
    med = (c_alpha(1.2) / math.log(2)) ** (1 / 1.2)
    assert stable.frechet_cdf(med, 1.2) == pytest.approx(0.5)


def test_verdicts():
    R = stable.DichotomyRow
    flat = [R(4, 1.0, 0.5, 2, 1), R(6, 0.9, 0.4, 2, 1), R(8, 0.95, 0.5, 2, 1)]
    assert stable.dichotomy_verdict(flat, 400) == "iid-like"
    drop = [R(4, 1.0, 0.5, 2, 1), R(8, 0.3, 0.1, 1, 1)]
    assert stable.dichotomy_verdict(drop, 400) == "degenerate"
    assert stable.dichotomy_verdict(flat[:1], 400) == "inconclusive"


def test_tail_proxy():
    assert stable.tail_proxy(1.5, 1000) == math.inf
    p = stable.tail_proxy(0.5, 1000)
    assert p == pytest.approx(sum(j ** -2.0 for j in range(1001, 200000)), rel=1e-2)
    rep = stable.truncation_report(1.5, 1000, 1.0)
    assert rep.ok is None


@settings(max_examples=50, deadline=None)
@given(st.floats(0.05, 1.95), st.floats(0.1, 10.0))
def test_b_n_power_property(alpha, abar):
    assert b_n(alpha, abar) ** alpha == pytest.approx(abar, rel=1e-9)
    assert c_alpha(alpha) > 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_field_bounded_by_single_term_sum(seed):
    # |Y_g| <= K sum_j Gamma_j^{-1/a} since D_g <= A_n
    model = TreeSubgroup(Z)
    terms = draw_terms(model, 4, 60, np.random.default_rng(seed))
    top = tree_ball_maxima(model, 4, 1.4, terms, 1.0)[-1]
    assert 0 <= top <= np.sum(terms.gammas ** (-1 / 1.4)) * (1 + 1e-12)


def test_sampler_collapse_reported(monkeypatch):
    # no in-cap model collapses at the default rate floor, so raise the floor
    monkeypatch.setattr(stable, "MIN_RATE", 0.9)
    monkeypatch.setattr(stable, "MIN_PROPOSALS", 1000)
    with pytest.raises(stable.SamplerCollapse):
        sample_tilted_boundary(TreeSubgroup(Z, "ambient"), 10, 2000, np.random.default_rng(0))


def test_replicates_thread_invariant():
    model = TreeSubgroup(Z)
    cfg = SeriesConfig(J=100, R=12, n=6, seed=3)
    a = stable.replicate_maxima(model, 6, 1.5, cfg, 10.0, threads=1)
    b = stable.replicate_maxima(model, 6, 1.5, cfg, 10.0, threads=6)
    assert np.array_equal(a, b)


def test_ks_two_sample_marginal_small():
    # small-scale version of the marginal identity
    model = TreeFull(2)
    cfg = SeriesConfig(J=300, R=1, n=3, seed=0)
    e = [model.ball(0)[0]]
    ye = np.array([
        simulate_field(model, cfg, 1.5, np.random.default_rng(100 + r), abar=27.0, elements=e).values[0]
        for r in range(1500)
    ])
    ref = sample_sas(StableParams(1.5), np.random.default_rng(1), 1500)
    assert stats.ks_2samp(ye, ref).statistic < 0.08
