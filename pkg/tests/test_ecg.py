import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecglab import ecg
from ecglab.ecg import (
    CircleHarmonic,
    EcgPoint,
    Thresholds,
    TreeFull,
    TreeSubgroup,
    classify,
    ecg_curve,
    ecg_estimate,
    fexr_integral,
    growth_ratio_series,
    pointwise_max,
    pointwise_max_bruteforce,
)
from ecglab.streams import stream
from ecglab.words import SubgroupSpec, shell_mass

Z = SubgroupSpec.kernel_zk([1, 0])
C23 = SubgroupSpec.kernel_c2c3([[0], [1]])


def test_dimensions():
    assert TreeFull(2).v == pytest.approx(math.log(3))
    assert TreeSubgroup(Z).v == pytest.approx(math.log(3))
    v = TreeSubgroup(C23).v
    assert 0.5 < v < math.log(3)
    assert CircleHarmonic().v == 1.0


def test_pointwise_max_examples():
    rng = np.random.default_rng(0)
    full = TreeFull(2)
    xi = full.sample(rng, 1, 6)[0]
    for n in range(7):
        assert pointwise_max(full, n, xi) == pytest.approx(3.0 ** n)
    assert pointwise_max(TreeSubgroup(Z), 0, xi) == 1
    assert pointwise_max(CircleHarmonic(), 1, 0.0) == pytest.approx(1)
    assert pointwise_max_bruteforce(CircleHarmonic(), 1, 0.0) == pytest.approx(1)


@pytest.mark.parametrize("model", [TreeFull(2, closed_form=False), TreeSubgroup(Z), TreeSubgroup(C23), TreeSubgroup(Z, "ambient")])
def test_tree_max_matches_bruteforce(model):
    rng = np.random.default_rng(5)
    rows = model.sample(rng, 30, 6)
    for row in rows:
        for n in (1, 3, 6):
            assert pointwise_max(model, n, row) == pytest.approx(pointwise_max_bruteforce(model, n, row), rel=1e-12)


def test_circle_max_matches_bruteforce():
    rng = np.random.default_rng(6)
    model = CircleHarmonic()
    for xi in model.sample(rng, 15):
        for n in (1.0, 2.5, 4.0):
            assert pointwise_max(model, n, xi) == pytest.approx(pointwise_max_bruteforce(model, n, xi), rel=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["full", "zk", "c2c3", "circle"]))
def test_max_monotone_and_bounded(seed, which):
    model = {
        "full": TreeFull(2, closed_form=False),
        "zk": TreeSubgroup(Z),
        "c2c3": TreeSubgroup(C23),
        "circle": CircleHarmonic(),
    }[which]
    ns = list(range(0, 7))
    pts = model.sample(np.random.default_rng(seed), 4, max(ns))
    logs = model.log_max(pts, ns)
    assert np.all(np.diff(logs, axis=1) >= -1e-12)
    assert np.all(logs >= -1e-12)
    assert np.all(logs <= model.v * np.asarray(ns) + 1e-9)


def test_tree_full_ecg_exact():
    curve = ecg_curve(TreeFull(2), range(1, 11), 200, seed=1)
    assert all(p.cn == 1 and p.stderr == 0 for p in curve.points)
    assert curve.classification == "nonvanishing"
    p = ecg_estimate(TreeFull(2, closed_form=False), 6, 300, seed=2)
    assert p.cn == 1 and p.stderr == 0


def test_estimate_needs_two_samples():
    with pytest.raises(ValueError):
        ecg_estimate(TreeFull(2), 3, 1)
    with pytest.raises(ValueError):
        ecg_curve(TreeFull(2), [3, 2], 10)


def _pts(cns):
    return [EcgPoint(i + 1, c, 0.0, c, 10) for i, c in enumerate(cns)]


def test_classify_rules():
    assert classify(_pts([0.5])) == "inconclusive"
    assert classify(_pts([1, 1, 1, 1])) == "nonvanishing"
    assert classify(_pts([0.4, 0.3, 0.2, 0.1, 0.05])) == "vanishing"
    assert classify(_pts([0.4, 0.39, 0.38, 0.37])) == "inconclusive"
    # a tiny floor flips a flat curve below it to inconclusive
    assert classify(_pts([0.005] * 4)) == "inconclusive"
    strict = Thresholds(floor=0.5)
    assert classify(_pts([0.4, 0.4, 0.4]), strict) == "inconclusive"


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(1e-6, 1.0), min_size=1, max_size=12))
def test_classify_is_pure(cns):
    pts = _pts(cns)
    assert classify(pts) == classify(list(pts)) in ("nonvanishing", "vanishing", "inconclusive")


def test_curve_seed_determinism_and_threads():
    m = TreeSubgroup(Z)
    a = ecg_curve(m, range(2, 9), 700, seed=11, threads=1)
    b = ecg_curve(m, range(2, 9), 700, seed=11, threads=4)
    assert a.to_csv() == b.to_csv()
    c = ecg_curve(m, range(2, 9), 700, seed=12)
    assert a.to_csv() != c.to_csv()


def test_curve_csv_header():
    text = ecg_curve(TreeFull(2), [1, 2], 4).to_csv()
    assert text.splitlines()[0] == "n,abar,stderr,cn"


def test_shell_mass_link_vanishing():
    for C in (0, 1, 2):
        ms = [shell_mass(Z, r, C) for r in range(6, 16)]
        assert all(b < a for a, b in zip(ms, ms[1:]))
    curve = ecg_curve(TreeSubgroup(Z), range(4, 17), 1500, seed=3)
    assert curve.classification == "vanishing"


def test_fexr_examples():
    assert fexr_integral(TreeFull(2), 7) == 1.0
    assert fexr_integral(TreeSubgroup(Z), 0) == 1.0
    with pytest.raises(ValueError):
        fexr_integral(CircleHarmonic(), 3)


def test_fexr_equals_normalised_max_on_trees():
    # with the same xi sample the two integrands agree pointwise
    model = TreeSubgroup(Z)
    rows = model.sample(stream(9, "t", 0), 200, 6)
    from ecglab.words import distance_to_set, index_letter

    trie = model.trie(6)
    d = np.array([distance_to_set([index_letter(int(x)) for x in r], trie) for r in rows])
    ratio = np.exp(model.log_max(rows, [6])[:, 0] - model.v * 6)
    assert np.allclose(np.exp(-model.v * d), ratio)


def test_growth_ratio_examples():
    full = growth_ratio_series(SubgroupSpec.full(2), [0, 1, 5])
    assert full == [(0, Fraction(1)), (1, Fraction(5, 3)), (5, Fraction(2 * 3 ** 5 - 1, 3 ** 5))]
    zk = dict(growth_ratio_series(Z, range(0, 31)))
    assert zk[0] == 1
    assert zk[2] == Fraction(5, 9)
    tail = [zk[m] for m in range(5, 31)]
    assert all(b <= a for a, b in zip(tail, tail[1:]))
    assert zk[30] < zk[10]


def test_caps():
    from ecglab.words import CapExceeded

    with pytest.raises(CapExceeded):
        TreeSubgroup(Z).ball(ecg.TRIE_RADIUS_CAP + 1)
    with pytest.raises(CapExceeded):
        CircleHarmonic().log_max(np.array([0.0]), [11.0])
