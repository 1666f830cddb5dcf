import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ecglab.words import (
    CapExceeded,
    OrbitTrie,
    RankMismatch,
    ReducedWord,
    SubgroupSpec,
    ball,
    ball_size,
    brute_force_ball_count,
    busemann_tree,
    c2c3_normal_form,
    common_prefix,
    distance_to_set,
    gromov_product,
    growth_exponent,
    multiply,
    shell_mass,
    subgroup_ball_count,
    subgroup_ball_elements,
    subgroup_sphere_counts,
)

W = lambda s: ReducedWord.parse(s, 2)  # noqa: E731
Z = SubgroupSpec.kernel_zk([1, 0])
C23 = SubgroupSpec.kernel_c2c3([[0], [1]])

letters2 = st.sampled_from([1, -1, 2, -2])
words2 = st.lists(letters2, max_size=10).map(lambda xs: ReducedWord.from_letters(xs, 2))


def test_parse_and_print():
    assert str(W("abA")) == "a b A"
    assert W("a b A") == W("abA")
    assert str(W("e")) == "e"
    assert W("aA") == ReducedWord.identity(2)


def test_reduced_invariant_enforced():
    with pytest.raises(ValueError):
        ReducedWord((1, -1), 2)
    with pytest.raises(ValueError):
        ReducedWord((3,), 2)


@pytest.mark.parametrize("u,v,out", [("a", "A", "e"), ("ab", "Ba", "aa"), ("ab", "e", "ab")])
def test_multiply_examples(u, v, out):
    assert multiply(W(u), W(v)) == W(out)


def test_multiply_rank_mismatch():
    with pytest.raises(RankMismatch):
        multiply(W("a"), ReducedWord.parse("a", 3))


def test_gromov_examples():
    assert gromov_product(W("abab"), W("abb")) == 2
    assert gromov_product(W("abab"), W("abab")) == 4
    assert gromov_product(W("a"), W("A")) == 0


def test_busemann_examples():
    xi = W("abababab")
    assert busemann_tree(xi, W("ab")) == 2
    assert busemann_tree(xi, W("e")) == 0
    assert busemann_tree(xi, W("aB")) == 0
    with pytest.raises(ValueError):
        busemann_tree(W("a"), W("ab"))


@pytest.mark.parametrize("n,size", [(0, 1), (1, 5), (3, 53)])
def test_ball_examples(n, size):
    elems = list(ball(2, n))
    assert len(elems) == size == ball_size(2, n)
    assert len(set(elems)) == size


def test_ball_closed_form_rank3():
    for n in range(5):
        assert sum(1 for _ in ball(3, n)) == 1 + 6 * (5 ** n - 1) // 4


def test_growth_exponent_examples():
    counts = [2 * 3 ** n - 1 for n in range(1, 21)]
    assert abs(growth_exponent(counts) - math.log(3)) < 0.01
    assert growth_exponent([7, 7, 7, 7, 7]) == 0.0
    c23 = [sum(subgroup_sphere_counts(C23, m)[: m + 1]) for m in range(15)]
    assert growth_exponent(c23) < math.log(3) - 0.05
    with pytest.raises(ValueError):
        growth_exponent([1, 2, 3])


def test_subgroup_counts_examples():
    assert subgroup_ball_count(Z, 2) == 5
    assert subgroup_ball_count(Z, 3) == 11
    full = SubgroupSpec.full(2)
    assert all(subgroup_ball_count(full, m) == ball_size(2, m) for m in range(8))


@pytest.mark.parametrize("spec", [Z, C23, SubgroupSpec.kernel_zk([[1, 0], [0, 1]]), SubgroupSpec.kernel_zk([2, -1])])
def test_dp_matches_bruteforce(spec):
    for m in range(9):
        assert subgroup_ball_count(spec, m) == brute_force_ball_count(spec, m)


def test_c2c3_cap():
    with pytest.raises(CapExceeded):
        subgroup_ball_count(C23, 17)


def test_c2c3_normal_form():
    assert c2c3_normal_form([0, 0]) == ()
    assert c2c3_normal_form([1, 1, 1]) == ()
    assert c2c3_normal_form([1, 2]) == ()
    assert c2c3_normal_form([1, 1]) == (2,)
    with pytest.raises(ValueError):
        c2c3_normal_form([3])


def test_trie_examples():
    t = subgroup_ball_elements(Z, 2)
    assert len(t) == 5
    assert len(subgroup_ball_elements(SubgroupSpec.full(2), 1)) == 5
    assert [str(w) for w in subgroup_ball_elements(Z, 0).words()] == ["e"]
    assert subgroup_ball_elements(Z, 8).count_prefix(()) == subgroup_ball_count(Z, 8)


def test_trie_counts_are_prefix_counts():
    t = subgroup_ball_elements(Z, 6)
    stored = [w.letters for w in t.words()]
    for p in [(), (2,), (1,), (1, 2), (-2, -2)]:
        assert t.count_prefix(p) == sum(1 for w in stored if w[: len(p)] == p)


def test_trie_cap():
    with pytest.raises(CapExceeded):
        subgroup_ball_elements(SubgroupSpec.full(2), 8, cap=100)


def test_distance_examples():
    t3 = subgroup_ball_elements(Z, 3)
    assert distance_to_set(W("abA"), t3) == 0
    assert distance_to_set(W("a"), OrbitTrie(2, [()])) == 1
    # the brute-force minimum over the 11 elements of H cap B_3 is 3
    assert distance_to_set(W("aab"), t3) == 3
    with pytest.raises(ValueError):
        distance_to_set(W("a"), OrbitTrie(2))


@settings(max_examples=60, deadline=None)
@given(st.lists(letters2, min_size=0, max_size=8).map(lambda xs: ReducedWord.from_letters(xs, 2)))
def test_distance_matches_bruteforce(x):
    t = subgroup_ball_elements(Z, 4)
    brute = min(len(x) + len(w) - 2 * common_prefix(x.letters, w.letters) for w in t.words())
    assert distance_to_set(x, t) == brute


def test_shell_mass_examples():
    full = SubgroupSpec.full(2)
    assert shell_mass(full, 5, 0) == 1
    assert all(shell_mass(Z, r, r) == 1 for r in range(1, 6))
    assert shell_mass(Z, 4, 0) == Fraction(11, 54)
    zero = [shell_mass(Z, r, 0) for r in range(4, 12)]
    assert all(b < a for a, b in zip(zero, zero[1:]))
    for r in range(1, 7):
        assert shell_mass(Z, r, 0) == Fraction(subgroup_sphere_counts(Z, r)[r], 4 * 3 ** (r - 1))


def test_shell_mass_bruteforce():
    r, C = 5, 2
    t = subgroup_ball_elements(Z, r)
    sphere = [w for w in ball(2, r) if len(w) == r]
    near = sum(distance_to_set(x, t) <= C for x in sphere)
    assert shell_mass(Z, r, C) == Fraction(near, len(sphere))


@settings(max_examples=200, deadline=None)
@given(words2, words2, words2)
def test_associativity(u, v, w):
    assert (u * v) * w == u * (v * w)


@settings(max_examples=200, deadline=None)
@given(words2, words2)
def test_multiply_length_and_inverse(u, v):
    uv = u * v
    c = (len(u) + len(v) - len(uv)) // 2
    assert len(uv) == len(u) + len(v) - 2 * c
    assert uv * v.inverse() == u
    assert gromov_product(u, v) == common_prefix(u.letters, v.letters)


@settings(max_examples=200, deadline=None)
@given(words2, st.lists(letters2, min_size=12, max_size=12))
def test_busemann_bound_property(g, raw):
    xi = ReducedWord.from_letters(list(g.letters) + raw, 2)
    if len(xi) < len(g):
        return
    b = busemann_tree(xi, g)
    assert -len(g) <= b <= len(g)
    assert (b == len(g)) == (xi.letters[: len(g)] == g.letters)


@settings(max_examples=100, deadline=None)
@given(words2)
def test_membership_is_homomorphic(w):
    assert Z.contains(w) == (sum(1 if x == 1 else -1 if x == -1 else 0 for x in w.letters) == 0)
    assert Z.contains(w * w.inverse())
