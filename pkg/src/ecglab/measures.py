"""Boundary measures and their Radon-Nikodym cocycles.

Convention: ``D_g = d(g_* mu)/d mu`` with ``g_* mu(A) = mu(g^-1 A)``, so the
boundary action is ``phi_g(xi) = g^-1 xi`` and the chain rule reads

    D_{gh}(xi) = D_g(xi) * D_h(g^-1 xi).

On the tree ``D_g(xi) = exp(v * beta_xi(o, g.o))`` with ``beta = 2 cp - |g|``.
"""
from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import mobius
from .words import (
    CapExceeded,
    ReducedWord,
    SubgroupSpec,
    alphabet,
    ball,
    cancellation,
    common_prefix,
    index_letter,
    letter_index,
    letter_name,
)

CYLINDER_CAP = 8


class InsufficientDepth(ValueError):
    pass


def cylinder_mass(rank: int, depth: int) -> Fraction:
    """Uniform Patterson-Sullivan mass of a depth-k cylinder of dF_d."""
    if depth == 0:
        return Fraction(1)
    return Fraction(1, 2 * rank * (2 * rank - 1) ** (depth - 1))


def _words_of_length(rank: int, k: int, prefix: tuple[int, ...] = ()) -> list[tuple[int, ...]]:
    level = [prefix]
    letters = alphabet(rank)
    for _ in range(k):
        level = [w + (x,) for w in level for x in letters if not w or x != -w[-1]]
    return level


@dataclass
class CylinderMeasure:
    """Exact cylinder masses up to a depth cap."""

    rank: int
    depth: int
    masses: dict[tuple[int, ...], Fraction]

    @classmethod
    def uniform(cls, rank: int, depth: int = CYLINDER_CAP) -> "CylinderMeasure":
        masses = {}
        for k in range(depth + 1):
            m = cylinder_mass(rank, k)
            for w in _words_of_length(rank, k):
                masses[w] = m
        return cls(rank, depth, masses)

    def __call__(self, prefix) -> Fraction:
        return self.masses[tuple(prefix)]

    def is_consistent(self) -> bool:
        for k in range(self.depth + 1):
            level = [w for w in self.masses if len(w) == k]
            if sum(self.masses[w] for w in level) != 1:
                return False
        for w, m in self.masses.items():
            if len(w) == self.depth:
                continue
            kids = [w + (x,) for x in alphabet(self.rank) if not w or x != -w[-1]]
            if sum(self.masses[c] for c in kids) != m:
                return False
        return True

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["prefix", "numerator", "denominator"])
        for w in sorted(self.masses, key=lambda w: (len(w), [letter_index(x) for x in w])):
            m = self.masses[w]
            out.writerow(["".join(letter_name(x) for x in w) or "e", m.numerator, m.denominator])
        return buf.getvalue()


# ---------------------------------------------------------------------------
# Samplers over dF_d; points are int arrays of letter indices, one row each


def extend_uniform(rng: np.random.Generator, prefixes: np.ndarray, depth: int, rank: int) -> np.ndarray:
    """Extend each row by uniformly chosen legal letters up to ``depth``."""
    size, k = prefixes.shape
    if k >= depth:
        return prefixes[:, :depth].copy()
    out = np.empty((size, depth), dtype=np.int64)
    out[:, :k] = prefixes
    q = 2 * rank
    for j in range(k, depth):
        if j == 0:
            out[:, 0] = rng.integers(0, q, size)
        else:
            r = rng.integers(0, q - 1, size)
            inv = out[:, j - 1] ^ 1
            out[:, j] = r + (r >= inv)
    return out


class TreeBoundarySampler:
    """Uniform Patterson-Sullivan measure on dF_d, sampled to any prefix depth."""

    def __init__(self, rank: int, rng: np.random.Generator):
        self.rank = rank
        self.rng = rng

    def sample(self, size: int, depth: int) -> np.ndarray:
        return extend_uniform(self.rng, np.zeros((size, 0), dtype=np.int64), depth, self.rank)

    def extend(self, prefixes: np.ndarray, depth: int) -> np.ndarray:
        return extend_uniform(self.rng, prefixes, depth, self.rank)


def rows_to_words(rows: np.ndarray, rank: int) -> list[ReducedWord]:
    return [ReducedWord(tuple(index_letter(int(i)) for i in r if i >= 0), rank) for r in rows]


def words_to_rows(words, depth: int | None = None) -> np.ndarray:
    words = [tuple(w) for w in words]
    depth = max((len(w) for w in words), default=0) if depth is None else depth
    out = np.full((len(words), max(depth, 1)), -1, dtype=np.int64)
    for i, w in enumerate(words):
        for j, x in enumerate(w[:depth]):
            out[i, j] = letter_index(x)
    return out


# ---------------------------------------------------------------------------
# Empirical Patterson measures of kernel subgroups


@lru_cache(maxsize=None)
def _completion_count(spec: SubgroupSpec, image, last: int, t: int) -> int:
    """Reduced continuations of length t from (image, last) that land in H."""
    if t == 0:
        return 1 if spec.contains(()) and spec.is_trivial_image(image) else 0
    total = 0
    for x in alphabet(spec.rank):
        if x != -last:
            total += _completion_count(spec, spec.step(image, x), x, t - 1)
    return total


@dataclass
class EmpiricalPattersonMeasure:
    """Normalised weights w([u]) proportional to sum of exp(-s|h|) over h in
    H cap B_N with prefix u, on cylinders of a fixed cap depth.  Words shorter
    than the cap spread their weight evenly over their cap-depth extensions."""

    spec: SubgroupSpec
    N: int
    s: float
    cap: int
    cylinders: list[tuple[int, ...]]
    weights: np.ndarray
    _rows: np.ndarray = field(repr=False, default=None)
    _cdf: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        self._rows = words_to_rows(self.cylinders, self.cap)
        self._cdf = np.cumsum(self.weights)
        self._cdf /= self._cdf[-1]

    def weight(self, prefix) -> float:
        p = tuple(prefix)
        if len(p) > self.cap:
            raise CapExceeded("prefix deeper than the cylinder cap")
        return float(sum(w for c, w in zip(self.cylinders, self.weights) if c[: len(p)] == p))

    def sample(self, rng: np.random.Generator, size: int, depth: int) -> np.ndarray:
        idx = np.searchsorted(self._cdf, rng.random(size), side="right")
        idx = np.minimum(idx, len(self.cylinders) - 1)
        return extend_uniform(rng, self._rows[idx], depth, self.spec.rank)

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(["prefix", "weight"])
        for c, w in zip(self.cylinders, self.weights):
            out.writerow(["".join(letter_name(x) for x in c) or "e", repr(float(w))])
        return buf.getvalue()


def empirical_patterson(
    spec: SubgroupSpec, N: int, s: float | None = None, cap: int = CYLINDER_CAP
) -> EmpiricalPattersonMeasure:
    if s is None:
        s = math.log(2 * spec.rank - 1)
    d = spec.rank
    cylinders = _words_of_length(d, cap)
    w = defaultdict(float)
    state_weight: dict = {}
    for u in cylinders:
        if N < cap:
            break
        st = (spec.image(u), u[-1] if u else 0)
        if st not in state_weight:
            state_weight[st] = sum(
                _completion_count(spec, st[0], st[1], t) * math.exp(-s * (cap + t))
                for t in range(N - cap + 1)
            )
        w[u] += state_weight[st]
    # shorter orbit points: spread over the cylinders they shadow
    for k in range(min(cap, N + 1)):
        ext = (2 * d - 1) ** (cap - k) if k else len(cylinders)
        for h in _words_of_length(d, k):
            if not spec.contains(h):
                continue
            share = math.exp(-s * k) / ext
            for u in _words_of_length(d, cap - k, h) if k else cylinders:
                w[u] += share
    weights = np.array([w[u] for u in cylinders], dtype=float)
    total = weights.sum()
    if total <= 0:
        raise ValueError("empty intersection of H with the ball")
    return EmpiricalPattersonMeasure(spec, N, s, cap, cylinders, weights / total)


# ---------------------------------------------------------------------------
# Radon-Nikodym evaluators


@dataclass(frozen=True)
class RnEvaluator:
    """Evaluates D_g(xi) for one of the concrete models.

    ``model`` is one of tree-full, tree-subgroup, circle-harmonic, circle-lebesgue.
    """

    model: str
    dimension: float
    rank: int = 2

    @classmethod
    def tree(cls, rank: int = 2, v: float | None = None, subgroup: bool = False) -> "RnEvaluator":
        v = math.log(2 * rank - 1) if v is None else v
        return cls("tree-subgroup" if subgroup else "tree-full", v, rank)

    @classmethod
    def circle(cls, lebesgue: bool = False) -> "RnEvaluator":
        return cls("circle-lebesgue" if lebesgue else "circle-harmonic", 1.0, 0)

    @property
    def is_tree(self) -> bool:
        return self.model.startswith("tree")

    def log_rn(self, g, xi) -> float:
        if self.is_tree:
            xi_letters = tuple(xi)
            if len(xi_letters) < len(g):
                raise InsufficientDepth(f"prefix depth {len(xi_letters)} < |g| = {len(g)}")
            beta = 2 * common_prefix(xi_letters, tuple(g)) - len(g)
            return self.dimension * beta
        if self.model == "circle-harmonic":
            return math.log(mobius.poisson_ratio(g, float(xi)))
        return math.log(mobius.rn_lebesgue(g, float(xi)))

    def __call__(self, g, xi) -> float:
        if self.is_tree:
            beta = tree_busemann(g, xi)
            if math.isclose(self.dimension, math.log(2 * self.rank - 1), rel_tol=1e-15):
                return float(Fraction(2 * self.rank - 1) ** beta)
            return math.exp(self.dimension * beta)
        if self.model == "circle-harmonic":
            return mobius.poisson_ratio(g, float(xi))
        return mobius.rn_lebesgue(g, float(xi))


def rn_derivative(model: RnEvaluator, g, xi) -> float:
    return model(g, xi)


def tree_busemann(g, xi) -> int:
    xi = tuple(xi)
    if len(xi) < len(g):
        raise InsufficientDepth(f"prefix depth {len(xi)} < |g| = {len(g)}")
    return 2 * common_prefix(xi, tuple(g)) - len(g)


def shift_prefix(g: ReducedWord, xi: ReducedWord) -> ReducedWord:
    """Prefix of g^-1 xi computable from a prefix of xi."""
    ginv = g.inverse()
    c = cancellation(ginv.letters, xi.letters)
    if c >= len(xi):
        raise InsufficientDepth("prefix cancelled completely")
    return ReducedWord(ginv.letters[: len(ginv) - c] + xi.letters[c:], g.rank)


def cocycle_check(model: RnEvaluator, g, h, xi) -> float:
    """|log D_gh(xi) - log(RHS)| for the chain rule of the model.

    Measure models (tree, harmonic) use D_gh(xi) = D_g(xi) D_h(g^-1 xi).  The
    Lebesgue formula (c xi + d)^-2 is the derivative of g itself and obeys
    D_gh(xi) = D_g(h xi) D_h(xi).
    """
    if model.is_tree:
        gh = g * h
        if len(xi) < len(g) + len(h):
            raise InsufficientDepth("prefix too short for the shifted point")
        lhs = tree_busemann(gh, xi)
        rhs = tree_busemann(g, xi) + tree_busemann(h, shift_prefix(g, xi))
        return abs(model.dimension * (lhs - rhs))
    if model.model == "circle-harmonic":
        lhs = model.log_rn(g @ h, xi)
        rhs = model.log_rn(g, xi) + model.log_rn(h, mobius.mobius_apply(g.inverse(), float(xi)))
        return abs(lhs - rhs)
    lhs = model.log_rn(g @ h, xi)
    rhs = model.log_rn(g, mobius.mobius_apply(h, float(xi))) + model.log_rn(h, xi)
    return abs(lhs - rhs)


def pushforward_cylinder(rank: int, g: ReducedWord, w: ReducedWord, cap: int = 2 * CYLINDER_CAP) -> Fraction:
    """(g_* mu)([w]) = mu(g^-1 [w]) for uniform mu, by case analysis.

    With u = g^-1 and c the cancellation in u*w: if c < |w| the image is the
    cylinder [uw]; otherwise u = u' w^-1 and the image is the complement of
    [u' x] with x the inverse of the last letter of w.
    """
    if len(g) + len(w) > cap:
        raise CapExceeded("|g| + |w| beyond the depth cap")
    if len(w) == 0:
        return Fraction(1)
    u = g.inverse().letters
    c = cancellation(u, w.letters)
    if c < len(w):
        return cylinder_mass(rank, len(u) + len(w) - 2 * c)
    u_prime = u[: len(u) - len(w)]
    return 1 - cylinder_mass(rank, len(u_prime) + 1)


def pushforward_bruteforce(rank: int, g: ReducedWord, w: ReducedWord) -> Fraction:
    """Same quantity by enumerating every cylinder of depth |g| + |w|."""
    depth = len(g) + len(w)
    total = Fraction(0)
    m = cylinder_mass(rank, depth)
    for z in _words_of_length(rank, depth):
        # g z reduced; at most |g| letters of z cancel so its |w|-prefix is determined
        c = cancellation(g.letters, z)
        gz = g.letters[: len(g) - c] + z[c:]
        if gz[: len(w)] == w.letters:
            total += m
    return total


def integrate_rn(rank: int, g: ReducedWord, w: ReducedWord) -> Fraction:
    """Exact integral of D_g over the cylinder [w] under uniform mu."""
    depth = max(len(w), len(g))
    m = cylinder_mass(rank, depth)
    base = 2 * rank - 1
    total = Fraction(0)
    for z in _words_of_length(rank, depth - len(w), w.letters):
        beta = 2 * common_prefix(z, g.letters) - len(g)
        total += m * Fraction(base) ** beta
    return total


def conformality_check(rank: int, g: ReducedWord, w: ReducedWord, cap: int = 2 * CYLINDER_CAP) -> bool:
    return integrate_rn(rank, g, w) == pushforward_cylinder(rank, g, w, cap)


def exhaustive_conformality(rank: int = 2, max_g: int = 3, max_w: int = 3) -> list[tuple[ReducedWord, ReducedWord]]:
    """All (g, w) pairs in the given balls where the exact identity fails."""
    bad = []
    ws = list(ball(rank, max_w))
    for g in ball(rank, max_g):
        for w in ws:
            if not conformality_check(rank, g, w):
                bad.append((g, w))
    return bad


def random_word(rng: np.random.Generator, rank: int, length: int) -> ReducedWord:
    rows = extend_uniform(rng, np.zeros((1, 0), dtype=np.int64), length, rank)
    return rows_to_words(rows, rank)[0] if length else ReducedWord.identity(rank)

