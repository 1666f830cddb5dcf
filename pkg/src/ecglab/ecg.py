"""Extremal cocycle growth: pointwise maxima A_n, C_n = mean(A_n)/V_n, and
its finite-range classification.

Three concrete models share one interface:

* ``TreeFull``: F_d acting on its Cayley tree with the uniform boundary measure.
* ``TreeSubgroup``: a kernel subgroup H of F_d, boundary points drawn from the
  empirical Patterson measure of H (or the uniform measure), balls H cap B_n.
* ``CircleHarmonic``: PSL(2,Z) on the upper half-plane, harmonic measure from i.

Tree boundary points are int arrays of letter indices (see ``words``); circle
points are floats.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import mobius
from .measures import (
    CYLINDER_CAP,
    InsufficientDepth,
    RnEvaluator,
    empirical_patterson,
    extend_uniform,
    words_to_rows,
)
from .streams import DEFAULT_SEED, batches, ordered_map, stream
from .words import (
    C2C3_CAP,
    CapExceeded,
    ReducedWord,
    SubgroupSpec,
    ball,
    ball_size,
    completion_length,
    distance_to_set,
    growth_exponent,
    index_letter,
    subgroup_ball_count,
    subgroup_ball_elements,
    subgroup_sphere_counts,
    zk_table,
)

TREE_RADIUS_CAP = 24
TRIE_RADIUS_CAP = 14
NEVER = 1 << 30


@lru_cache(maxsize=32)
def _ball_trie(spec: SubgroupSpec, n: int):
    return subgroup_ball_elements(spec, n)


@lru_cache(maxsize=16)
def _patterson(spec: SubgroupSpec, N: int, cap: int, s: float):
    return empirical_patterson(spec, N, s=s, cap=cap)


@lru_cache(maxsize=16)
def subgroup_dimension(spec: SubgroupSpec) -> float:
    """v_H: log(2d-1) for the full group and for kernels onto Z^k (co-amenable);
    otherwise the growth rate of |H cap B_m| fitted up to the counting cap."""
    if spec.is_full or spec.kind == "zk":
        return math.log(2 * spec.rank - 1)
    counts = np.cumsum(subgroup_sphere_counts(spec, C2C3_CAP))
    return growth_exponent(counts)


@lru_cache(maxsize=16)
def _orbit_arrays(n: float):
    return mobius.orbit_point_arrays(n)


def prefix_completions(spec: SubgroupSpec, rows: np.ndarray, depth: int) -> np.ndarray:
    """D[s, k] = shortest completion of the prefix rows[s, :k] into H, for
    k = 0..depth; NEVER when it exceeds depth - k."""
    size = rows.shape[0]
    if rows.shape[1] < depth:
        raise InsufficientDepth(f"need prefixes of depth {depth}")
    if spec.is_full:
        return np.zeros((size, depth + 1), dtype=np.int64)
    if spec.kind == "zk":
        table = zk_table(spec, depth)
        steps = table.letter_vectors[rows[:, :depth]]
        imgs = np.zeros((size, depth + 1, spec.dim), dtype=np.int64)
        np.cumsum(steps, axis=1, out=imgs[:, 1:])
        last = np.full((size, depth + 1), -1, dtype=np.int64)
        last[:, 1:] = rows[:, :depth]
        D = table.lookup_index(imgs, last)
        k = np.arange(depth + 1)
        return np.where(k + D <= depth, D, NEVER)
    out = np.full((size, depth + 1), NEVER, dtype=np.int64)
    for s in range(size):
        img, last = spec.identity_image(), 0
        for k in range(depth + 1):
            if k:
                last = index_letter(int(rows[s, k - 1]))
                img = spec.step(img, last)
            d = completion_length(spec, img, last, depth - k)
            if d is not None:
                out[s, k] = d
    return out


def subgroup_busemann_max(spec: SubgroupSpec, rows: np.ndarray, ns: Sequence[int]) -> np.ndarray:
    """max over h in H cap B_n of 2 cp(xi, h) - |h|, for each row and n.

    Among h sharing exactly the first k letters of xi the best is the shortest
    completion, so the maximum is max_k (k - D_k) subject to k + D_k <= n.
    """
    ns = list(ns)
    top = max(ns)
    D = prefix_completions(spec, rows, top)
    out = np.empty((rows.shape[0], len(ns)), dtype=np.int64)
    k = np.arange(top + 1)
    for i, n in enumerate(ns):
        Dn = D[:, : n + 1]
        val = np.where(k[: n + 1] + Dn <= n, k[: n + 1] - Dn, -NEVER)
        out[:, i] = val.max(axis=1)
    return out


def _as_rows(xi, depth: int) -> np.ndarray:
    # ndarrays carry letter indices (one row or many); other sequences carry letters
    if isinstance(xi, np.ndarray) and xi.ndim == 2:
        rows = xi
    elif isinstance(xi, np.ndarray):
        rows = xi.astype(np.int64).reshape(1, -1)
    else:
        rows = words_to_rows([tuple(xi)])
    if rows.shape[1] < depth or np.any(rows[:, :depth] < 0):
        raise InsufficientDepth(f"boundary prefix shorter than {depth}")
    return rows


@dataclass(frozen=True)
class TreeFull:
    rank: int = 2
    closed_form: bool = True

    is_tree = True

    @property
    def v(self) -> float:
        return math.log(2 * self.rank - 1)

    @property
    def spec(self) -> SubgroupSpec:
        return SubgroupSpec.full(self.rank)

    @property
    def evaluator(self) -> RnEvaluator:
        return RnEvaluator.tree(self.rank)

    @property
    def label(self) -> str:
        return f"tree-full(d={self.rank})"

    def volume(self, n: int) -> float:
        return math.exp(self.v * n)

    def sample(self, rng: np.random.Generator, size: int, depth: int) -> np.ndarray:
        return extend_uniform(rng, np.zeros((size, 0), dtype=np.int64), depth, self.rank)

    def busemann_max(self, rows: np.ndarray, ns: Sequence[int]) -> np.ndarray:
        ns = list(ns)
        if self.closed_form:
            # the length-n prefix of xi is in the ball and attains n
            return np.tile(np.asarray(ns, dtype=np.int64), (rows.shape[0], 1))
        out = np.empty((rows.shape[0], len(ns)), dtype=np.int64)
        for i, n in enumerate(ns):
            trie = _ball_trie(self.spec, n)
            for s in range(rows.shape[0]):
                out[s, i] = trie.best_busemann([index_letter(int(x)) for x in rows[s, :n]])
        return out

    def log_max(self, points: np.ndarray, ns: Sequence[int]) -> np.ndarray:
        return self.v * self.busemann_max(points, ns)

    def ball(self, n: int) -> list[ReducedWord]:
        return list(ball(self.rank, n))

    def ball_size(self, n: int) -> int:
        return ball_size(self.rank, n)


@dataclass(frozen=True)
class TreeSubgroup:
    spec: SubgroupSpec
    measure: str = "patterson"
    N: int = 14
    cap: int = CYLINDER_CAP

    is_tree = True

    def __post_init__(self):
        if self.measure not in ("patterson", "ambient"):
            raise ValueError(f"unknown measure {self.measure!r}")

    @property
    def rank(self) -> int:
        return self.spec.rank

    @property
    def v(self) -> float:
        return subgroup_dimension(self.spec)

    @property
    def evaluator(self) -> RnEvaluator:
        return RnEvaluator.tree(self.rank, self.v, subgroup=not self.spec.is_full)

    @property
    def label(self) -> str:
        return f"tree-subgroup({self.spec.label()}, {self.measure})"

    def volume(self, n: int) -> float:
        return math.exp(self.v * n)

    def sample(self, rng: np.random.Generator, size: int, depth: int) -> np.ndarray:
        if self.measure == "ambient":
            return extend_uniform(rng, np.zeros((size, 0), dtype=np.int64), depth, self.rank)
        return _patterson(self.spec, self.N, self.cap, self.v).sample(rng, size, depth)

    def busemann_max(self, rows: np.ndarray, ns: Sequence[int]) -> np.ndarray:
        if max(ns) > TREE_RADIUS_CAP:
            raise CapExceeded(f"radius above {TREE_RADIUS_CAP}")
        return subgroup_busemann_max(self.spec, rows, ns)

    def log_max(self, points: np.ndarray, ns: Sequence[int]) -> np.ndarray:
        return self.v * self.busemann_max(points, ns)

    def ball(self, n: int) -> list[ReducedWord]:
        if n > TRIE_RADIUS_CAP:
            raise CapExceeded(f"materialised balls stop at radius {TRIE_RADIUS_CAP}")
        return _ball_trie(self.spec, n).words()

    def trie(self, n: int):
        if n > TRIE_RADIUS_CAP:
            raise CapExceeded(f"materialised balls stop at radius {TRIE_RADIUS_CAP}")
        return _ball_trie(self.spec, n)

    def ball_size(self, n: int) -> int:
        return subgroup_ball_count(self.spec, n)


@dataclass(frozen=True)
class CircleHarmonic:
    cap: float = mobius.ENUM_CAP

    is_tree = False
    v = 1.0
    chunk = 1 << 20

    @property
    def evaluator(self) -> RnEvaluator:
        return RnEvaluator.circle()

    @property
    def label(self) -> str:
        return "circle-harmonic(PSL2Z)"

    def volume(self, n: float) -> float:
        return math.exp(n)

    def sample(self, rng: np.random.Generator, size: int, depth: int = 0) -> np.ndarray:
        return mobius.sample_harmonic(rng, size)

    def log_max(self, points: np.ndarray, ns: Sequence[float]) -> np.ndarray:
        xi = np.asarray(points, dtype=float).reshape(-1)
        out = np.empty((xi.size, len(ns)))
        for i, n in enumerate(ns):
            if n > self.cap:
                raise CapExceeded(f"radius {n} exceeds cap {self.cap}")
            x, y = _orbit_arrays(float(n))
            step = max(1, self.chunk // max(x.size, 1))
            for s in range(0, xi.size, step):
                z = xi[s : s + step, None]
                r = np.log(y) + np.log1p(z * z) - np.log((x - z) ** 2 + y * y)
                out[s : s + step, i] = r.max(axis=1)
        return out

    def ball(self, n: float) -> list[mobius.UnimodularMatrix]:
        return mobius.enumerate_ball(n, self.cap)

    def ball_size(self, n: float) -> int:
        return len(self.ball(n))


Model = TreeFull | TreeSubgroup | CircleHarmonic


def _single_point(model, xi, n):
    if model.is_tree:
        return _as_rows(xi, n)
    return np.asarray([float(xi)])


def pointwise_max(model: Model, n, xi) -> float:
    """A_n(xi) = max over the ball B_n of D_g(xi)."""
    if n == 0:
        return 1.0
    return float(np.exp(model.log_max(_single_point(model, xi, n), [n])[0, 0]))


def pointwise_max_bruteforce(model: Model, n, xi) -> float:
    """Same quantity by scanning the materialised ball with the RN evaluator."""
    ev = model.evaluator
    if model.is_tree:
        rows = _as_rows(xi, n)
        prefix = [index_letter(int(x)) for x in rows[0, :n]]
        return max(ev(g, prefix) for g in model.ball(n))
    return max(ev(g, float(xi)) for g in model.ball(n))


# ---------------------------------------------------------------------------
# Monte Carlo estimation


@dataclass(frozen=True)
class Thresholds:
    floor: float = 0.01
    slope: float = 0.02
    decay: float = 2.0


@dataclass(frozen=True)
class EcgPoint:
    n: float
    abar: float
    stderr: float
    cn: float
    samples: int


@dataclass
class EcgCurve:
    model: str
    points: list[EcgPoint]
    classification: str
    thresholds: Thresholds = field(default_factory=Thresholds)
    seed: int = DEFAULT_SEED

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "abar", "stderr", "cn"])
        for p in self.points:
            w.writerow([p.n, repr(p.abar), repr(p.stderr), repr(p.cn)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "model": self.model,
            "classification": self.classification,
            "thresholds": asdict(self.thresholds),
            "seed": self.seed,
            "samples": self.points[0].samples if self.points else 0,
            "n": [p.n for p in self.points],
            "cn": [p.cn for p in self.points],
        }


def ratio_samples(
    model: Model, ns: Sequence, samples: int, seed: int = DEFAULT_SEED, threads: int = 1,
    tag: str = "ecg-xi",
) -> np.ndarray:
    """(samples, len(ns)) array of A_n(xi)/V_n over one shared xi sample."""
    ns = list(ns)
    depth = int(math.ceil(max(ns))) if model.is_tree else 0
    spans = batches(samples)

    def run(b: int) -> np.ndarray:
        start, stop = spans[b]
        pts = model.sample(stream(seed, tag, b), stop - start, depth)
        return np.exp(model.log_max(pts, ns) - model.v * np.asarray(ns, dtype=float))

    return np.concatenate(ordered_map(run, range(len(spans)), threads), axis=0)


def _points(model, ns, ratios) -> list[EcgPoint]:
    out = []
    m = ratios.shape[0]
    for i, n in enumerate(ns):
        col = ratios[:, i]
        V = model.volume(n)
        cn = float(col.mean())
        se = float(col.std(ddof=1) / math.sqrt(m)) if m > 1 else 0.0
        out.append(EcgPoint(n, cn * V, se * V, cn, m))
    return out


def ecg_estimate(model: Model, n, samples: int, seed: int = DEFAULT_SEED, threads: int = 1) -> EcgPoint:
    if samples < 2:
        raise ValueError("need at least two samples")
    return _points(model, [n], ratio_samples(model, [n], samples, seed, threads))[0]


def tail_slope(points: Sequence[EcgPoint]) -> float:
    tail = list(points)[-max(2, math.ceil(len(points) / 2)):]
    ns = np.array([p.n for p in tail], dtype=float)
    logs = np.log(np.array([max(p.cn, 1e-300) for p in tail]))
    return float(np.polyfit(ns, logs, 1)[0])


def classify(points: Sequence[EcgPoint], thresholds: Thresholds = Thresholds()) -> str:
    """nonvanishing / vanishing / inconclusive from a finite C_n curve."""
    points = list(points)
    if len(points) < 2:
        return "inconclusive"
    slope = tail_slope(points)
    tail = points[-max(2, math.ceil(len(points) / 2)):]
    if min(p.cn for p in tail) > thresholds.floor and slope >= -thresholds.slope:
        return "nonvanishing"
    first, last = points[0].cn, points[-1].cn
    if last <= 0 or first / last >= thresholds.decay:
        if slope < 0:
            return "vanishing"
    return "inconclusive"


def ecg_curve(
    model: Model, ns: Sequence, samples: int, seed: int = DEFAULT_SEED,
    thresholds: Thresholds = Thresholds(), threads: int = 1,
) -> EcgCurve:
    ns = list(ns)
    if not ns or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n range must be nonempty and strictly ascending")
    if samples < 2:
        raise ValueError("need at least two samples")
    pts = _points(model, ns, ratio_samples(model, ns, samples, seed, threads))
    return EcgCurve(model.label, pts, classify(pts, thresholds), thresholds, seed)


# ---------------------------------------------------------------------------
# Spherical functional and growth ratios


def fexr_integral(
    model: Model, r: int, samples: int = 1000, seed: int = DEFAULT_SEED, threads: int = 1
) -> float:
    """Mean of exp(-v d(prefix_r(xi), (H cap B_r).o)) with xi from the model
    measure, distances taken in the materialised trie."""
    if not model.is_tree:
        raise ValueError("f_exr is defined here for tree models only")
    if r == 0 or isinstance(model, TreeFull) or model.spec.is_full:
        return 1.0
    trie = model.trie(r)
    spans = batches(samples)

    def run(b: int) -> np.ndarray:
        start, stop = spans[b]
        rows = model.sample(stream(seed, "fexr-xi", b), stop - start, r)
        dist = [distance_to_set([index_letter(int(x)) for x in row], trie) for row in rows]
        return np.exp(-model.v * np.asarray(dist, dtype=float))

    return float(np.concatenate(ordered_map(run, range(len(spans)), threads)).mean())


def growth_ratio_series(spec: SubgroupSpec, m_range: Sequence[int]) -> list[tuple[int, Fraction]]:
    """(m, |H cap B_m| / (2d-1)^m) as exact rationals."""
    base = 2 * spec.rank - 1
    out = []
    for m in m_range:
        if spec.is_full:
            count = 1 if m == 0 else (base ** m * spec.rank - 1) // (spec.rank - 1)
        else:
            count = subgroup_ball_count(spec, m)
        out.append((m, Fraction(count, base ** m)))
    return out
