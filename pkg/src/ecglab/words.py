"""Free groups F_d: reduced words, tree geometry, balls and kernel subgroups.

Letters are signed generator indices: ``+i`` is the i-th generator and ``-i``
its inverse (1-based).  For vectorised work a letter ``x`` is also encoded as
the array index ``2*(|x|-1) + (x < 0)`` so that ``idx ^ 1`` is the inverse.
"""
from __future__ import annotations

import math
from collections import defaultdict, deque
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

import numpy as np

Letters = tuple[int, ...]

# Brute-force style caps; overridable per call.
C2C3_CAP = 16
TRIE_CAP = 5_000_000


class RankMismatch(ValueError):
    pass


class CapExceeded(ValueError):
    pass


def letter_name(x: int) -> str:
    ch = chr(ord("a") + abs(x) - 1)
    return ch if x > 0 else ch.upper()


def parse_letter(s: str) -> int:
    i = ord(s.lower()) - ord("a") + 1
    return i if s.islower() else -i


def letter_index(x: int) -> int:
    return 2 * (abs(x) - 1) + (x < 0)


def index_letter(i: int) -> int:
    g = i // 2 + 1
    return -g if i & 1 else g


def reduce_letters(letters: Iterable[int]) -> Letters:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return tuple(out)


@dataclass(frozen=True)
class ReducedWord:
    """An element of F_d stored as a freely reduced tuple of signed letters."""

    letters: Letters
    rank: int

    def __post_init__(self):
        if self.rank < 1:
            raise ValueError("rank must be positive")
        for i, x in enumerate(self.letters):
            if x == 0 or abs(x) > self.rank:
                raise ValueError(f"letter {x} outside rank {self.rank}")
            if i and self.letters[i - 1] == -x:
                raise ValueError(f"word {self.letters} is not reduced")

    @classmethod
    def identity(cls, rank: int) -> "ReducedWord":
        return cls((), rank)

    @classmethod
    def from_letters(cls, letters: Iterable[int], rank: int) -> "ReducedWord":
        return cls(reduce_letters(letters), rank)

    @classmethod
    def parse(cls, text: str, rank: int) -> "ReducedWord":
        """Parse ``"abA"`` or ``"a b A"``; ``"e"`` or ``""`` is the identity."""
        chars = [c for c in text if not c.isspace()]
        if chars == ["e"]:
            chars = []
        return cls.from_letters((parse_letter(c) for c in chars), rank)

    def __len__(self) -> int:
        return len(self.letters)

    def __iter__(self) -> Iterator[int]:
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __mul__(self, other: "ReducedWord") -> "ReducedWord":
        return multiply(self, other)

    def inverse(self) -> "ReducedWord":
        return ReducedWord(tuple(-x for x in reversed(self.letters)), self.rank)

    def __invert__(self) -> "ReducedWord":
        return self.inverse()

    def __str__(self) -> str:
        return " ".join(letter_name(x) for x in self.letters) or "e"


def _check_rank(u: ReducedWord, v: ReducedWord) -> None:
    if u.rank != v.rank:
        raise RankMismatch(f"rank {u.rank} != rank {v.rank}")


def cancellation(u: Sequence[int], v: Sequence[int]) -> int:
    """Number of letters cancelled when reducing u*v."""
    c = 0
    n = min(len(u), len(v))
    while c < n and u[len(u) - 1 - c] == -v[c]:
        c += 1
    return c


def multiply(u: ReducedWord, v: ReducedWord) -> ReducedWord:
    _check_rank(u, v)
    c = cancellation(u.letters, v.letters)
    return ReducedWord(u.letters[: len(u) - c] + v.letters[c:], u.rank)


def common_prefix(u: Sequence[int], v: Sequence[int]) -> int:
    k = 0
    n = min(len(u), len(v))
    while k < n and u[k] == v[k]:
        k += 1
    return k


def gromov_product(u: ReducedWord, v: ReducedWord) -> int:
    """(|u| + |v| - |u^-1 v|)/2, which on the tree is the common prefix length."""
    _check_rank(u, v)
    return common_prefix(u.letters, v.letters)


def busemann_tree(xi_prefix: ReducedWord, g: ReducedWord) -> int:
    """beta_xi(o, g.o) for a boundary point known through a prefix.

    Exact once the prefix is at least as long as g.
    """
    _check_rank(xi_prefix, g)
    if len(xi_prefix) < len(g):
        raise ValueError(
            f"prefix depth {len(xi_prefix)} too short for |g| = {len(g)}"
        )
    return 2 * common_prefix(xi_prefix.letters, g.letters) - len(g)


def alphabet(rank: int) -> Letters:
    return tuple(x for i in range(1, rank + 1) for x in (i, -i))


def ball(rank: int, n: int) -> Iterator[ReducedWord]:
    """All reduced words of length <= n, breadth first, each exactly once."""
    if n < 0:
        raise ValueError("radius must be nonnegative")
    letters = alphabet(rank)
    level: list[Letters] = [()]
    for k in range(n + 1):
        for w in level:
            yield ReducedWord(w, rank)
        if k < n:
            level = [w + (x,) for w in level for x in letters if not w or x != -w[-1]]


def sphere_size(rank: int, n: int) -> int:
    if n == 0:
        return 1
    return 2 * rank * (2 * rank - 1) ** (n - 1)


def ball_size(rank: int, n: int) -> int:
    return sum(sphere_size(rank, k) for k in range(n + 1))


def ball_array(rank: int, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Ball as an index matrix padded with -1, plus the word lengths."""
    words = [w.letters for w in ball(rank, n)]
    out = np.full((len(words), max(n, 1)), -1, dtype=np.int64)
    lengths = np.zeros(len(words), dtype=np.int64)
    for i, w in enumerate(words):
        lengths[i] = len(w)
        for j, x in enumerate(w):
            out[i, j] = letter_index(x)
    return out, lengths


def growth_exponent(counts: Sequence[float]) -> float:
    """Slope of log(count) against n over the last half of the range."""
    if len(counts) < 4:
        raise ValueError("need at least 4 counts")
    c = np.asarray([float(x) for x in counts])
    if np.any(c <= 0):
        raise ValueError("counts must be positive")
    n = np.arange(len(c), dtype=float)
    tail = slice(len(c) // 2, None)
    slope = np.polyfit(n[tail], np.log(c[tail]), 1)[0]
    return float(slope) if abs(slope) > 1e-12 else 0.0


# ---------------------------------------------------------------------------
# Subgroups given as kernels of homomorphisms


def _c2c3_mul(x: tuple[int, ...], y: tuple[int, ...]) -> tuple[int, ...]:
    # Syllables: 0 is the involution s, 1 and 2 are t and t^2.
    out = list(x)
    for syl in y:
        if out and out[-1] == 0 and syl == 0:
            out.pop()
        elif out and out[-1] != 0 and syl != 0:
            r = (out[-1] + syl) % 3
            if r:
                out[-1] = r
            else:
                out.pop()
        else:
            out.append(syl)
    return tuple(out)


def _c2c3_inv(x: tuple[int, ...]) -> tuple[int, ...]:
    return tuple(0 if s == 0 else 3 - s for s in reversed(x))


def c2c3_normal_form(syllables: Iterable[int]) -> tuple[int, ...]:
    syl = tuple(int(s) for s in syllables)
    if any(s not in (0, 1, 2) for s in syl):
        raise ValueError("syllables are 0 (s), 1 (t) or 2 (t^2)")
    return _c2c3_mul((), syl)


@dataclass(frozen=True)
class SubgroupSpec:
    """H <= F_d: the full group, or the kernel of a map to Z^k or Z/2 * Z/3.

    ``weights[i]`` is the Z^k image of generator i+1.  ``assignment[i]`` is
    the image of generator i+1 in Z/2 * Z/3 as syllables (0 = s, 1 = t, 2 = t^2).
    """

    rank: int
    kind: str = "full"
    weights: tuple[tuple[int, ...], ...] | None = None
    assignment: tuple[tuple[int, ...], ...] | None = None

    def __post_init__(self):
        if self.kind == "full":
            return
        if self.kind == "zk":
            if self.weights is None or len(self.weights) != self.rank:
                raise ValueError("zk kernel needs one weight vector per generator")
            if len({len(w) for w in self.weights}) != 1:
                raise ValueError("weight vectors must share a dimension")
        elif self.kind == "c2c3":
            if self.assignment is None or len(self.assignment) != self.rank:
                raise ValueError("c2c3 kernel needs one image per generator")
        else:
            raise ValueError(f"unknown subgroup kind {self.kind!r}")

    @classmethod
    def full(cls, rank: int) -> "SubgroupSpec":
        return cls(rank, "full")

    @classmethod
    def kernel_zk(cls, weights: Sequence[Sequence[int] | int]) -> "SubgroupSpec":
        w = tuple(
            (int(v),) if np.isscalar(v) else tuple(int(c) for c in v) for v in weights
        )
        return cls(len(w), "zk", weights=w)

    @classmethod
    def kernel_c2c3(cls, assignment: Sequence[Sequence[int]]) -> "SubgroupSpec":
        a = tuple(c2c3_normal_form(x) for x in assignment)
        return cls(len(a), "c2c3", assignment=a)

    @property
    def is_full(self) -> bool:
        return self.kind == "full"

    @property
    def dim(self) -> int:
        return len(self.weights[0]) if self.kind == "zk" else 0

    def identity_image(self):
        if self.kind == "zk":
            return (0,) * self.dim
        return ()

    def letter_image(self, x: int):
        i = abs(x) - 1
        if self.kind == "zk":
            return tuple(c if x > 0 else -c for c in self.weights[i])
        if self.kind == "c2c3":
            a = self.assignment[i]
            return a if x > 0 else _c2c3_inv(a)
        return ()

    def step(self, image, x: int):
        if self.kind == "zk":
            return tuple(a + b for a, b in zip(image, self.letter_image(x)))
        if self.kind == "c2c3":
            return _c2c3_mul(image, self.letter_image(x))
        return ()

    def image(self, word: ReducedWord | Sequence[int]):
        img = self.identity_image()
        for x in word:
            img = self.step(img, x)
        return img

    def is_trivial_image(self, image) -> bool:
        if self.kind == "zk":
            return not any(image)
        return len(image) == 0

    def contains(self, word: ReducedWord | Sequence[int]) -> bool:
        if isinstance(word, ReducedWord) and word.rank != self.rank:
            raise RankMismatch("word and subgroup ranks differ")
        return self.kind == "full" or self.is_trivial_image(self.image(word))

    def label(self) -> str:
        if self.kind == "full":
            return f"F{self.rank}"
        if self.kind == "zk":
            return f"ker(F{self.rank}->Z^{self.dim}, {list(map(list, self.weights))})"
        return f"ker(F{self.rank}->Z2*Z3, {list(map(list, self.assignment))})"


@lru_cache(maxsize=None)
def _completion_bfs(spec: SubgroupSpec, image, last: int, limit: int) -> int | None:
    if spec.is_trivial_image(image):
        return 0
    seen = {(image, last)}
    frontier = [(image, last)]
    for depth in range(1, limit + 1):
        nxt = []
        for img, l in frontier:
            for x in alphabet(spec.rank):
                if x == -l:
                    continue
                s = (spec.step(img, x), x)
                if spec.is_trivial_image(s[0]):
                    return depth
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return None


def completion_length(spec: SubgroupSpec, image, last: int, limit: int) -> int | None:
    """Shortest reduced continuation (not cancelling ``last``) landing in H.

    Returns None when no continuation of length <= limit exists.  ``last`` is 0
    for the empty word.
    """
    if spec.is_full:
        return 0
    if spec.kind == "zk":
        if limit < 0:
            return None
        d = _zk_completion(spec, image, last, max(limit, max(map(abs, image), default=0)))
        return d if d <= limit else None
    return _completion_bfs(spec, image, last, limit)


@lru_cache(maxsize=1 << 20)
def _zk_completion(spec: SubgroupSpec, image, last: int, radius: int) -> int:
    table = zk_table(spec, radius)
    return int(table.lookup(np.asarray([image]), np.asarray([last]))[0])


class CompletionTable:
    """Vectorised completion lengths for a Z^k kernel, images clamped to a box."""

    def __init__(self, spec: SubgroupSpec, radius: int):
        self.spec = spec
        self.radius = radius
        k, d = spec.dim, spec.rank
        step = max(max(abs(c) for w in spec.weights for c in w), 1)
        # room to route around the box edge
        self.box = radius * step + 2 * step
        side = 2 * self.box + 1
        big = np.iinfo(np.int64).max // 4
        # last-letter slot 2d means "no last letter"
        dist = np.full((side,) * k + (2 * d + 1,), big, dtype=np.int64)
        vecs = np.array(
            [spec.letter_image(index_letter(i)) for i in range(2 * d)], dtype=np.int64
        )
        self._vecs = vecs
        origin = (self.box,) * k
        dist[origin] = 0
        queue = deque((origin, s) for s in range(2 * d + 1))
        # reverse BFS: state (img, x) reached from (img - v_x, l) for l != inv(x)
        while queue:
            pos, x = queue.popleft()
            cur = dist[pos + (x,)]
            if x == 2 * d:
                continue
            prev = tuple(p - v for p, v in zip(pos, vecs[x]))
            if any(p < 0 or p >= side for p in prev):
                continue
            for l in range(2 * d + 1):
                if l < 2 * d and l == (x ^ 1):
                    continue
                if dist[prev + (l,)] > cur + 1:
                    dist[prev + (l,)] = cur + 1
                    queue.append((prev, l))
        self.dist = dist

    def lookup(self, images: np.ndarray, last: np.ndarray) -> np.ndarray:
        """``images``: (..., k) integer array; ``last``: signed letters, 0 = none."""
        images = np.asarray(images, dtype=np.int64)
        last = np.asarray(last, dtype=np.int64)
        slot = np.where(
            last == 0, 2 * self.spec.rank, 2 * (np.abs(last) - 1) + (last < 0)
        )
        idx = images + self.box
        if np.any(idx < 0) or np.any(idx >= self.dist.shape[0]):
            raise CapExceeded("image outside completion table")
        return self.dist[tuple(np.moveaxis(idx, -1, 0)) + (slot,)]

    def lookup_index(self, images: np.ndarray, last_index: np.ndarray) -> np.ndarray:
        """Like lookup but with letter indices (-1 = none)."""
        slot = np.where(last_index < 0, 2 * self.spec.rank, last_index)
        idx = np.asarray(images, dtype=np.int64) + self.box
        if np.any(idx < 0) or np.any(idx >= self.dist.shape[0]):
            raise CapExceeded("image outside completion table")
        return self.dist[tuple(np.moveaxis(idx, -1, 0)) + (slot,)]

    @property
    def letter_vectors(self) -> np.ndarray:
        return self._vecs


@lru_cache(maxsize=64)
def _table(spec: SubgroupSpec, radius: int) -> CompletionTable:
    return CompletionTable(spec, radius)


def zk_table(spec: SubgroupSpec, radius: int) -> CompletionTable:
    """Shared completion table covering images of words of length <= radius."""
    if spec.kind != "zk":
        raise ValueError("completion tables exist only for Z^k kernels")
    r = 16
    while r < radius:
        r *= 2
    return _table(spec, r)


# ---------------------------------------------------------------------------
# Counting


def _image_dp_sphere_counts(spec: SubgroupSpec, m: int) -> list[int]:
    """Exact sphere counts |H cap S_k| for k <= m by DP over (image, last)."""
    cur: dict = {(spec.identity_image(), 0): 1}
    out = [1]
    letters = alphabet(spec.rank)
    for _ in range(m):
        nxt: dict = defaultdict(int)
        for (img, last), c in cur.items():
            for x in letters:
                if x != -last:
                    nxt[(spec.step(img, x), x)] += c
        cur = nxt
        out.append(sum(c for (img, _), c in cur.items() if spec.is_trivial_image(img)))
    return out


def subgroup_sphere_counts(spec: SubgroupSpec, m: int, cap: int = C2C3_CAP) -> list[int]:
    if m < 0:
        raise ValueError("radius must be nonnegative")
    if spec.is_full:
        return [sphere_size(spec.rank, k) for k in range(m + 1)]
    if spec.kind == "c2c3" and m > cap:
        raise CapExceeded(f"m = {m} exceeds the Z/2*Z/3 cap {cap}")
    if spec.kind == "zk":
        return _zk_sphere_counts(spec, m)
    return _image_dp_sphere_counts(spec, m)


def _zk_sphere_counts(spec: SubgroupSpec, m: int) -> list[int]:
    # images clamped to [-m*step, m*step]^k; anything further cannot return
    # to zero within m letters, so it is dropped.
    step = max(max(abs(c) for w in spec.weights for c in w), 1)
    bound = m * step
    cur: dict = {(spec.identity_image(), 0): 1}
    out = [1]
    letters = alphabet(spec.rank)
    for k in range(1, m + 1):
        room = (m - k) * step
        nxt: dict = defaultdict(int)
        for (img, last), c in cur.items():
            for x in letters:
                if x == -last:
                    continue
                new = spec.step(img, x)
                if max(map(abs, new), default=0) > min(bound, room):
                    continue
                nxt[(new, x)] += c
        cur = nxt
        out.append(sum(c for (img, _), c in cur.items() if not any(img)))
    return out


def subgroup_ball_count(spec: SubgroupSpec, m: int, cap: int = C2C3_CAP) -> int:
    """V_H(1,1,m) = #{h in H : |h| <= m}, exact."""
    return sum(subgroup_sphere_counts(spec, m, cap))


def brute_force_ball_count(spec: SubgroupSpec, m: int) -> int:
    return sum(1 for w in ball(spec.rank, m) if spec.contains(w))


# ---------------------------------------------------------------------------
# Tries


class _Node:
    __slots__ = ("children", "count", "terminal", "min_len")

    def __init__(self):
        self.children: dict[int, _Node] = {}
        self.count = 0
        self.terminal = False
        self.min_len = math.inf


class OrbitTrie:
    """Prefix tree over a finite set of reduced words.

    ``count`` at a node is the number of stored words with that prefix;
    ``min_len`` is the length of the shortest stored word below it.
    Build once, then treat as read-only.
    """

    def __init__(self, rank: int, words: Iterable[ReducedWord | Sequence[int]] = ()):
        self.rank = rank
        self.root = _Node()
        for w in words:
            self.insert(w)

    def insert(self, word: ReducedWord | Sequence[int]) -> None:
        letters = tuple(word)
        path = [self.root]
        node = self.root
        for x in letters:
            node = node.children.setdefault(x, _Node())
            path.append(node)
        if node.terminal:
            return
        node.terminal = True
        for n in path:
            n.count += 1
            n.min_len = min(n.min_len, len(letters))

    def __len__(self) -> int:
        return self.root.count

    def _find(self, prefix: Sequence[int]) -> _Node | None:
        node = self.root
        for x in prefix:
            node = node.children.get(x)
            if node is None:
                return None
        return node

    def __contains__(self, word) -> bool:
        node = self._find(tuple(word))
        return node is not None and node.terminal

    def count_prefix(self, prefix: ReducedWord | Sequence[int]) -> int:
        node = self._find(tuple(prefix))
        return 0 if node is None else node.count

    def words(self) -> list[ReducedWord]:
        out: list[Letters] = []
        stack: list[tuple[_Node, Letters]] = [(self.root, ())]
        while stack:
            node, w = stack.pop()
            if node.terminal:
                out.append(w)
            for x, child in node.children.items():
                stack.append((child, w + (x,)))
        out.sort(key=lambda w: (len(w), [letter_index(x) for x in w]))
        return [ReducedWord(w, self.rank) for w in out]

    def export_lines(self) -> str:
        return "".join(str(w) + "\n" for w in self.words())

    def best_busemann(self, xi: Sequence[int]) -> int:
        """max over stored s of 2*cp(xi, s) - |s|; xi must be at least as deep
        as the longest stored word."""
        if self.root.count == 0:
            raise ValueError("empty trie")
        best = -math.inf
        node = self.root
        k = 0
        while True:
            nxt = xi[k] if k < len(xi) else None
            if node.terminal:
                best = max(best, k)
            for x, child in node.children.items():
                if x != nxt:
                    best = max(best, 2 * k - child.min_len)
            if nxt is None or nxt not in node.children:
                break
            node = node.children[nxt]
            k += 1
        return int(best)


def subgroup_ball_elements(
    spec: SubgroupSpec, m: int, cap: int = TRIE_CAP
) -> OrbitTrie:
    """Materialise H cap B_m as a trie, pruning branches that cannot re-enter H."""
    trie = OrbitTrie(spec.rank)
    letters = alphabet(spec.rank)
    stack: list[tuple[Letters, object]] = [((), spec.identity_image())]
    while stack:
        w, img = stack.pop()
        last = w[-1] if w else 0
        if spec.is_full or spec.is_trivial_image(img):
            trie.insert(w)
            if len(trie) > cap:
                raise CapExceeded(f"more than {cap} elements")
        if len(w) == m:
            continue
        for x in letters:
            if x == -last:
                continue
            new = spec.step(img, x)
            room = m - len(w) - 1
            if not spec.is_full and completion_length(spec, new, x, room) is None:
                continue
            stack.append((w + (x,), new))
    return trie


def distance_to_set(x: ReducedWord | Sequence[int], S: OrbitTrie) -> int:
    """Tree distance from x to the nearest stored word, exact.

    Walk down the trie along x.  A subtree hanging off the path after k shared
    letters holds words at distance |x| + |w| - 2k, so its bound
    |x| + min_len - 2k is attained; on-path terminals sit at |x| - k.
    """
    if len(S) == 0:
        raise ValueError("empty set")
    x = tuple(x)
    best = math.inf
    node, k = S.root, 0
    while True:
        nxt = x[k] if k < len(x) else None
        if node.terminal:
            best = min(best, len(x) - k)
        for letter, child in node.children.items():
            if letter != nxt:
                best = min(best, len(x) + child.min_len - 2 * k)
        if nxt is None or nxt not in node.children:
            return int(best)
        node = node.children[nxt]
        k += 1


def shell_mass(
    spec: SubgroupSpec, r: int, C: int, cap: int = C2C3_CAP
) -> Fraction:
    """Fraction of the radius-r sphere within tree distance C of (H cap B_r).o.

    For a sphere vertex x the distance is min_k (r - k + D_k) over prefixes
    x_1..x_k, where D_k is the shortest completion of that prefix into H and
    k + D_k <= r.
    """
    if r < 1 or C < 0:
        raise ValueError("need r >= 1 and C >= 0")
    if spec.kind == "c2c3" and r > cap:
        raise CapExceeded(f"r = {r} exceeds cap {cap}")
    if spec.is_full or C >= r:
        return Fraction(1)

    def near(k, img, last):
        d = completion_length(spec, img, last, min(r - k, C - (r - k)))
        return d is not None

    hits = 0
    cur: dict = defaultdict(int)
    cur[(spec.identity_image(), 0)] = 1
    letters = alphabet(spec.rank)
    for k in range(1, r + 1):
        nxt: dict = defaultdict(int)
        for (img, last), c in cur.items():
            for x in letters:
                if x == -last:
                    continue
                nxt[(spec.step(img, x), x)] += c
        cur = defaultdict(int)
        for (img, last), c in nxt.items():
            if r - k <= C and near(k, img, last):
                hits += c * (2 * spec.rank - 1) ** (r - k)
            else:
                cur[(img, last)] += c
    return Fraction(hits, sphere_size(spec.rank, r))
