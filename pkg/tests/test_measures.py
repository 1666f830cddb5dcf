from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecglab import mobius
from ecglab.measures import (
    CylinderMeasure,
    InsufficientDepth,
    RnEvaluator,
    TreeBoundarySampler,
    cocycle_check,
    cylinder_mass,
    empirical_patterson,
    exhaustive_conformality,
    integrate_rn,
    pushforward_bruteforce,
    pushforward_cylinder,
    random_word,
    rn_derivative,
    words_to_rows,
)
from ecglab.words import ReducedWord, SubgroupSpec, ball

W = lambda s: ReducedWord.parse(s, 2)  # noqa: E731
Z = SubgroupSpec.kernel_zk([1, 0])


def test_cylinder_masses():
    assert cylinder_mass(2, 0) == 1
    assert cylinder_mass(2, 1) == Fraction(1, 4)
    assert cylinder_mass(2, 3) == Fraction(1, 36)
    m = CylinderMeasure.uniform(2, 5)
    assert m.is_consistent()
    assert m(W("ab")) == Fraction(1, 12)


def test_sampler_cylinder_frequencies():
    rows = TreeBoundarySampler(2, np.random.default_rng(0)).sample(40000, 3)
    assert np.all(rows[:, 1:] != (rows[:, :-1] ^ 1))
    first = np.bincount(rows[:, 0], minlength=4) / rows.shape[0]
    assert np.max(np.abs(first - 0.25)) < 0.01
    depth2 = np.unique(rows[:, :2], axis=0, return_counts=True)[1] / rows.shape[0]
    assert depth2.size == 12 and np.max(np.abs(depth2 - 1 / 12)) < 0.01


def test_rn_examples():
    tree = RnEvaluator.tree(2)
    assert rn_derivative(tree, W("a"), W("ab")) == 3
    assert rn_derivative(tree, W("e"), W("ab")) == 1
    assert rn_derivative(RnEvaluator.circle(), mobius.IDENTITY, 0.3) == 1
    leb = RnEvaluator.circle(lebesgue=True)
    assert rn_derivative(leb, mobius.UnimodularMatrix(1, 0, 1, 1), 2.0) == pytest.approx(1 / 9)
    with pytest.raises(InsufficientDepth):
        rn_derivative(tree, W("ab"), W("a"))


def test_pushforward_examples():
    assert pushforward_cylinder(2, W("a"), W("a")) == Fraction(3, 4)
    assert pushforward_cylinder(2, W("a"), W("b")) == Fraction(1, 12)
    for k, w in enumerate(["a", "ab", "abA"], start=1):
        assert pushforward_cylinder(2, W("e"), W(w)) == Fraction(1, 4 * 3 ** (k - 1))


def test_pushforward_case_analysis_vs_bruteforce():
    for g in ball(2, 3):
        for w in ball(2, 3):
            if len(w):
                assert pushforward_cylinder(2, g, w) == pushforward_bruteforce(2, g, w)


def test_exhaustive_conformality():
    assert exhaustive_conformality(2, 3, 3) == []


def test_total_rn_mass_is_one():
    e = W("e")
    assert all(integrate_rn(2, g, e) == 1 for g in ball(2, 3))


def test_cocycle_identity_cases():
    tree = RnEvaluator.tree(2)
    assert cocycle_check(tree, W("ab"), W("e"), W("abab")) == 0
    with pytest.raises(InsufficientDepth):
        cocycle_check(tree, W("ab"), W("ab"), W("abb"))


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_tree_cocycle_property(seed):
    rng = np.random.default_rng(seed)
    g = random_word(rng, 2, int(rng.integers(0, 6)))
    h = random_word(rng, 2, int(rng.integers(0, 6)))
    xi = random_word(rng, 2, 12)
    assert cocycle_check(RnEvaluator.tree(2), g, h, xi) == 0


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 10 ** 9))
def test_circle_cocycle_property(seed):
    rng = np.random.default_rng(seed)
    g = mobius.random_unimodular(rng, int(rng.integers(0, 8)))
    h = mobius.random_unimodular(rng, int(rng.integers(0, 8)))
    xi = mobius.sample_harmonic(rng)
    assert cocycle_check(RnEvaluator.circle(), g, h, xi) <= 1e-10
    assert cocycle_check(RnEvaluator.circle(lebesgue=True), g, h, xi) <= 1e-10


def test_empirical_patterson():
    m = empirical_patterson(Z, 12, cap=5)
    assert m.weights.sum() == pytest.approx(1)
    # b and B are symmetric, a and A are symmetric, and b-heavy
    wa, wA, wb, wB = (m.weight((x,)) for x in (1, -1, 2, -2))
    assert wa == pytest.approx(wA, abs=1e-14) and wb == pytest.approx(wB, abs=1e-14)
    assert wb > 0.25 > wa
    # refinement: parent = sum of children
    assert m.weight((2,)) == pytest.approx(sum(m.weight((2, y)) for y in (1, -1, 2)))
    full = empirical_patterson(SubgroupSpec.full(2), 10, cap=4)
    assert np.allclose(full.weights, 1 / full.weights.size)


def test_empirical_patterson_sampler():
    m = empirical_patterson(Z, 12, cap=4)
    rows = m.sample(np.random.default_rng(3), 50000, 6)
    first = np.bincount(rows[:, 0], minlength=4) / rows.shape[0]
    want = [m.weight((x,)) for x in (1, -1, 2, -2)]
    assert np.max(np.abs(first - want)) < 0.01
    assert np.all(rows[:, 1:] != (rows[:, :-1] ^ 1))


def test_words_to_rows_roundtrip():
    rows = words_to_rows([W("abA"), W("b")], 3)
    assert rows.tolist() == [[0, 2, 1], [2, -1, -1]]
