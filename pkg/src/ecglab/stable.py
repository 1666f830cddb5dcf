"""Stationary SaS fields indexed by a group, via the LePage series

    Y_g = b_n C_a^{1/a} sum_j eps_j Gamma_j^{-1/a} (D_g(U_j) / A_n(U_j))^{1/a},

with U_j drawn from the tilted law A_n dmu / abar_n, plus partial maxima and
the Frechet-versus-degenerate tests.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats
from scipy.special import gamma as gamma_fn

from . import mobius
from .ecg import CircleHarmonic, Model, TreeFull, TreeSubgroup, ecg_estimate
from .measures import words_to_rows
from .streams import DEFAULT_SEED, ordered_map, stream
from .words import CapExceeded, ReducedWord, completion_length, index_letter, zk_table

MIN_RATE = 1e-3
MIN_PROPOSALS = 20_000
TREE_FIELD_CAP = 20
DENSE_CELLS = 1 << 22


class SamplerCollapse(RuntimeError):
    pass


class DegenerateSample(ValueError):
    pass


def _check_alpha(alpha: float) -> None:
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha must lie in (0, 2), got {alpha}")


@dataclass(frozen=True)
class StableParams:
    alpha: float
    sigma: float = 1.0

    def __post_init__(self):
        _check_alpha(self.alpha)
        if not self.sigma > 0:
            raise ValueError("scale must be positive")


@dataclass(frozen=True)
class SeriesConfig:
    J: int = 1000
    R: int = 400
    n: int = 6
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        if self.J < 50:
            raise ValueError("truncation J must be at least 50")
        if self.R < 1:
            raise ValueError("need at least one replicate")
        if self.n < 0:
            raise ValueError("radius must be nonnegative")


def c_alpha(alpha: float) -> float:
    """Tail constant (1 - a) / (Gamma(2 - a) cos(pi a / 2)); 2/pi at a = 1."""
    _check_alpha(alpha)
    if abs(alpha - 1.0) < 1e-9:
        return 2.0 / math.pi
    return (1.0 - alpha) / (gamma_fn(2.0 - alpha) * math.cos(math.pi * alpha / 2.0))


def sample_sas(params: StableParams, rng: np.random.Generator, size=None):
    """Chambers-Mallows-Stuck draws with characteristic function exp(-|s theta|^a)."""
    a = params.alpha
    phi = (rng.random(size) - 0.5) * math.pi
    w = rng.exponential(size=size)
    if abs(a - 1.0) < 1e-12:
        x = np.tan(phi)
    else:
        x = (
            np.sin(a * phi) / np.cos(phi) ** (1.0 / a)
            * (np.cos((1.0 - a) * phi) / w) ** ((1.0 - a) / a)
        )
    x = params.sigma * x
    return float(x) if size is None else x


def b_n(alpha: float, abar: float) -> float:
    """Normalising constant abar_n^{1/a}."""
    _check_alpha(alpha)
    if not abar > 0:
        raise ValueError("abar must be positive")
    return abar ** (1.0 / alpha)


def abar_for(model: Model, n, samples: int = 20_000, seed: int = DEFAULT_SEED, threads: int = 1) -> float:
    """Exact abar_n where known (V_n on the full tree), otherwise Monte Carlo."""
    if n == 0:
        return 1.0
    if isinstance(model, TreeFull):
        return float((2 * model.rank - 1) ** n)
    return ecg_estimate(model, n, samples, seed, threads).abar


# ---------------------------------------------------------------------------
# Tilted boundary law


@dataclass
class TiltedDraws:
    points: np.ndarray
    log_max: np.ndarray  # log A_n at each accepted point
    proposals: int
    accepted: int

    @property
    def rate(self) -> float:
        return self.accepted / self.proposals if self.proposals else 1.0


def sample_tilted_boundary(model: Model, n, size: int, rng: np.random.Generator) -> TiltedDraws:
    """Rejection sampling: propose xi ~ mu, accept with probability A_n(xi)/V_n."""
    depth = int(math.ceil(n)) if model.is_tree else 0
    if n == 0 or isinstance(model, TreeFull):
        pts = model.sample(rng, size, depth)
        lm = np.full(size, model.v * n) if n else np.zeros(size)
        return TiltedDraws(pts, lm, size, size)
    kept_pts, kept_lm = [], []
    got = proposals = 0
    chunk = max(256, 2 * size)
    while got < size:
        pts = model.sample(rng, chunk, depth)
        lm = model.log_max(pts, [n])[:, 0]
        u = rng.random(chunk)
        ok = u < np.exp(lm - model.v * n)
        proposals += chunk
        kept_pts.append(pts[ok])
        kept_lm.append(lm[ok])
        got += int(ok.sum())
        if proposals >= MIN_PROPOSALS and got / proposals < MIN_RATE:
            raise SamplerCollapse(f"acceptance rate {got / proposals:.2e} below {MIN_RATE}")
    pts = np.concatenate(kept_pts)[:size]
    lm = np.concatenate(kept_lm)[:size]
    return TiltedDraws(pts, lm, proposals, got)


# ---------------------------------------------------------------------------
# Series terms and dense fields


@dataclass
class SeriesTerms:
    eps: np.ndarray
    gammas: np.ndarray
    tilted: TiltedDraws

    @property
    def J(self) -> int:
        return self.gammas.size


def draw_terms(model: Model, n, J: int, rng: np.random.Generator) -> SeriesTerms:
    gammas = np.cumsum(rng.exponential(size=J))
    eps = np.where(rng.random(J) < 0.5, -1.0, 1.0)
    return SeriesTerms(eps, gammas, sample_tilted_boundary(model, n, J, rng))


def _coefficients(model: Model, terms: SeriesTerms, alpha: float) -> np.ndarray:
    """eps_j Gamma_j^{-1/a} A_n(U_j)^{-1/a}."""
    return terms.eps * terms.gammas ** (-1.0 / alpha) * np.exp(-terms.tilted.log_max / alpha)


@dataclass
class FieldSample:
    elements: list
    values: np.ndarray
    terms: SeriesTerms | None = None

    def __len__(self) -> int:
        return self.values.size


def _tree_log_rn(model, words: Sequence[ReducedWord], rows: np.ndarray) -> np.ndarray:
    """(G, J) matrix of log D_g(U_j) for tree models."""
    depth = rows.shape[1]
    G = words_to_rows(words, depth)
    lens = np.array([len(w) for w in words])
    out = np.empty((len(words), rows.shape[0]))
    step = max(1, DENSE_CELLS // max(rows.shape[0] * depth, 1))
    for s in range(0, len(words), step):
        eq = G[s : s + step, None, :] == rows[None, :, :]
        cp = np.cumprod(eq, axis=2).sum(axis=2)
        out[s : s + step] = model.v * (2 * cp - lens[s : s + step, None])
    return out


def simulate_field(
    model: Model, config: SeriesConfig, alpha: float, rng: np.random.Generator,
    abar: float | None = None, elements: Sequence | None = None, retain: bool = False,
) -> FieldSample:
    """Dense field over the ball B_n (or over ``elements``, a subset of it).

    Circle elements are orbit points (x, y); the field depends on g only
    through g.i.
    """
    _check_alpha(alpha)
    n = config.n
    abar = abar_for(model, n, seed=config.seed) if abar is None else abar
    K = b_n(alpha, abar) * c_alpha(alpha) ** (1.0 / alpha)
    terms = draw_terms(model, n, config.J, rng)
    coef = terms.eps * terms.gammas ** (-1.0 / alpha)
    if model.is_tree:
        if elements is None:
            elements = model.ball(n)
        if any(len(g) > n for g in elements):
            raise ValueError("elements must lie in the ball")
        log_d = _tree_log_rn(model, elements, terms.tilted.points)
    else:
        if elements is None:
            pts = mobius.orbit_points(model.ball(n))
            elements = [(float(x), float(y)) for x, y in pts]
        x = np.array([e[0] for e in elements])[:, None]
        y = np.array([e[1] for e in elements])[:, None]
        u = terms.tilted.points[None, :]
        log_d = np.log(y) + np.log1p(u * u) - np.log((x - u) ** 2 + y * y)
    ratio = np.exp((log_d - terms.tilted.log_max[None, :]) / alpha)
    values = K * (ratio @ coef)
    return FieldSample(list(elements), values, terms if retain else None)


def partial_maxima(field: FieldSample | Sequence[float]) -> float:
    vals = field.values if isinstance(field, FieldSample) else np.asarray(field, dtype=float)
    if vals.size == 0:
        raise ValueError("empty field")
    return float(np.max(np.abs(vals)))


# ---------------------------------------------------------------------------
# Exact ball maxima on trees without materialising the ball


def tree_ball_maxima(
    model: TreeFull | TreeSubgroup, n: int, alpha: float, terms: SeriesTerms, K: float
) -> np.ndarray:
    """max over g in (H cap) B_m of |Y_g| for every m = 0..n, from one series.

    U-prefixes form a trie.  With a = v/alpha and R(node) = S(node) e^{-2a l},
    where S(node) = sum_j c_j e^{2a cp(node, U_j)}:
      * a trie node h at depth l has |Y_h| = K e^{a l} |R(h)|;
      * a word leaving the trie after node p (depth l) and of length L has
        |Y_g| = K e^{a(2l - L)} |R(p)|, best at the shortest L in H.
    R obeys R(child) = R(parent) e^{-2a} + sub(child) (1 - e^{-2a}).
    """
    if n > TREE_FIELD_CAP:
        raise CapExceeded(f"radius above {TREE_FIELD_CAP}")
    spec = model.spec
    d2 = 2 * model.rank
    a = model.v / alpha
    q2 = math.exp(-2.0 * a)
    c = _coefficients(model, terms, alpha)
    rows = terms.tilted.points[:, :n]
    order = np.lexsort(rows[:, ::-1].T) if n else np.arange(rows.shape[0])
    srt = rows[order]
    cs = c[order]
    J = srt.shape[0]
    best = np.full(n + 1, -np.inf)

    # depth-0 node (the identity, always in H)
    R_prev = np.array([cs.sum()])
    best[0] = K * abs(R_prev[0])
    starts_prev = np.array([0])
    gid_prev = np.zeros(J, dtype=np.int64)
    zk = spec.kind == "zk"
    table = zk_table(spec, n) if zk else None
    vecs = table.letter_vectors if zk else None
    img_prev = np.zeros((1, spec.dim), dtype=np.int64) if zk else [spec.identity_image()]
    last_prev = np.array([-1])
    diff = np.zeros(J, dtype=bool)
    diff[0] = True

    for depth in range(1, n + 2):
        if depth <= n:
            col = srt[:, depth - 1]
            diff[1:] |= col[1:] != col[:-1]
            starts = np.flatnonzero(diff)
            gid = np.cumsum(diff) - 1
            parent = gid_prev[starts]
            letter = col[starts]
        else:
            starts = parent = letter = np.empty(0, dtype=np.int64)

        # words leaving the trie below the previous level
        l = depth - 1
        if l < n:
            npar = starts_prev.size
            has = np.zeros((npar, d2), dtype=bool)
            has[parent, letter] = True
            if l > 0:
                has[np.arange(npar), last_prev ^ 1] = True
            pi, xi = np.nonzero(~has)
            if pi.size:
                if spec.is_full:
                    D = np.zeros(pi.size, dtype=np.int64)
                elif zk:
                    D = table.lookup_index(img_prev[pi] + vecs[xi], xi)
                else:
                    D = np.array([
                        _or_never(completion_length(
                            spec, spec.step(img_prev[p], index_letter(int(x))),
                            index_letter(int(x)), n - l - 1,
                        ))
                        for p, x in zip(pi, xi)
                    ])
                L = l + 1 + D
                ok = L <= n
                vals = K * np.exp(a * (2 * l - L[ok])) * np.abs(R_prev[pi[ok]])
                np.maximum.at(best, L[ok], vals)
        if depth > n:
            break

        sub = np.add.reduceat(cs, starts)
        R = R_prev[parent] * q2 + sub * (1.0 - q2)
        if zk:
            img = img_prev[parent] + vecs[letter]
            inH = ~img.any(axis=1)
        elif spec.is_full:
            img = None
            inH = np.ones(starts.size, dtype=bool)
        else:
            img = [spec.step(img_prev[p], index_letter(int(x))) for p, x in zip(parent, letter)]
            inH = np.array([spec.is_trivial_image(i) for i in img], dtype=bool)
        if inH.any():
            best[depth] = max(best[depth], float(np.max(K * math.exp(a * depth) * np.abs(R[inH]))))
        R_prev, starts_prev, gid_prev, img_prev, last_prev = R, starts, gid, img, letter

    return np.maximum.accumulate(np.where(np.isfinite(best), best, 0.0))


def _or_never(d):
    return 1 << 30 if d is None else d


# ---------------------------------------------------------------------------
# Maxima samples and the Frechet test


@dataclass
class MaximaSample:
    n: float
    alpha: float
    values: np.ndarray
    volume: float
    bn: float

    def __post_init__(self):
        if np.any(self.values < 0):
            raise ValueError("maxima are nonnegative")

    @property
    def by_volume(self) -> np.ndarray:
        return self.values / self.volume ** (1.0 / self.alpha)

    @property
    def by_bn(self) -> np.ndarray:
        return self.values / self.bn

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["replicate", "m_n", "m_n_over_v_n", "m_n_over_b_n"])
        for i, (m, x, y) in enumerate(zip(self.values, self.by_volume, self.by_bn)):
            w.writerow([i, repr(float(m)), repr(float(x)), repr(float(y))])
        return buf.getvalue()


def replicate_maxima(
    model: Model, n, alpha: float, config: SeriesConfig, abar: float, threads: int = 1,
    method: str = "auto", tag: str = "field",
) -> np.ndarray:
    """(R, n+1) array of nested-ball maxima for trees; (R, 1) for the circle."""
    K = b_n(alpha, abar) * c_alpha(alpha) ** (1.0 / alpha)
    fast = model.is_tree and method in ("auto", "trie")
    cfg = SeriesConfig(config.J, config.R, n, config.seed)

    def run(r: int) -> np.ndarray:
        rng = stream(config.seed, f"{tag}-n{n}", r)
        if fast:
            return tree_ball_maxima(model, n, alpha, draw_terms(model, n, config.J, rng), K)
        f = simulate_field(model, cfg, alpha, rng, abar=abar)
        return np.array([partial_maxima(f)])

    return np.vstack(ordered_map(run, range(config.R), threads))


def maxima_sample(
    model: Model, n, alpha: float, config: SeriesConfig, threads: int = 1,
    abar: float | None = None, method: str = "auto",
) -> MaximaSample:
    abar = abar_for(model, n, seed=config.seed, threads=threads) if abar is None else abar
    vals = replicate_maxima(model, n, alpha, config, abar, threads, method)[:, -1]
    return MaximaSample(n, alpha, vals, model.volume(n), b_n(alpha, abar))


def frechet_cdf(lam, alpha: float):
    lam = np.asarray(lam, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.where(lam > 0, np.exp(-c_alpha(alpha) * np.where(lam > 0, lam, 1.0) ** (-alpha)), 0.0)
    return out


def frechet_draws(alpha: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exact draws from exp(-C_a lam^-a) by inversion."""
    u = rng.random(size)
    return (c_alpha(alpha) / -np.log(u)) ** (1.0 / alpha)


def frechet_test(maxima: MaximaSample | Sequence[float], alpha: float, min_size: int = 100) -> tuple[float, float]:
    """Fit kappa by the median, then KS distance to exp(-C_a lam^-a)."""
    x = maxima.by_bn if isinstance(maxima, MaximaSample) else np.asarray(maxima, dtype=float)
    if x.size < min_size:
        raise ValueError(f"need at least {min_size} replicates")
    med = float(np.median(x))
    if med <= 0:
        raise DegenerateSample("median of the normalised maxima is zero")
    kappa = med / (c_alpha(alpha) / math.log(2.0)) ** (1.0 / alpha)
    ks = stats.kstest(x / kappa, lambda t: frechet_cdf(t, alpha)).statistic
    return kappa, float(ks)


# ---------------------------------------------------------------------------
# Dichotomy experiment


@dataclass
class DichotomyRow:
    n: float
    median: float
    q1: float
    q3: float
    bn_median: float


@dataclass
class DichotomyReport:
    model: str
    alpha: float
    rows: list[DichotomyRow]
    verdict: str
    samples: dict = field(default_factory=dict)
    kappa: float | None = None
    ks: float | None = None

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "median", "q1", "q3", "median_over_bn"])
        for r in self.rows:
            w.writerow([r.n, repr(r.median), repr(r.q1), repr(r.q3), repr(r.bn_median)])
        return buf.getvalue()

    def summary(self) -> dict:
        return {
            "model": self.model,
            "alpha": self.alpha,
            "verdict": self.verdict,
            "medians": [r.median for r in self.rows],
            "n": [r.n for r in self.rows],
            "kappa": self.kappa,
            "ks": self.ks,
        }


def dichotomy_verdict(rows: Sequence[DichotomyRow], replicates: int, decay: float = 2.0, band: float = 2.0) -> str:
    if replicates < 2 or len(rows) < 2:
        return "inconclusive"
    meds = [r.median for r in rows]
    if meds[-1] * decay <= meds[0]:
        return "degenerate"
    if min(r.q1 for r in rows) > 0 and max(meds) <= band * min(meds) and min(meds) >= 0.1 * meds[0]:
        return "iid-like"
    return "inconclusive"


def dichotomy_experiment(
    model: Model, ns: Sequence, alpha: float, config: SeriesConfig, threads: int = 1,
    decay: float = 2.0, band: float = 2.0, abar_samples: int = 20_000,
) -> DichotomyReport:
    _check_alpha(alpha)
    rows, samples = [], {}
    for n in ns:
        abar = abar_for(model, n, abar_samples, config.seed, threads)
        ms = maxima_sample(model, n, alpha, config, threads, abar=abar)
        samples[n] = ms
        x = ms.by_volume
        q1, med, q3 = (float(v) for v in np.quantile(x, [0.25, 0.5, 0.75]))
        rows.append(DichotomyRow(n, med, q1, q3, float(np.median(ms.by_bn))))
    report = DichotomyReport(model.label, alpha, rows, dichotomy_verdict(rows, config.R, decay, band), samples)
    last = samples[ns[-1]]
    if last.values.size >= 100 and np.median(last.values) > 0:
        report.kappa, report.ks = frechet_test(last, alpha)
    return report


# ---------------------------------------------------------------------------
# Truncation diagnostics


@dataclass(frozen=True)
class TruncationReport:
    alpha: float
    J: int
    tail_proxy: float
    gamma_ratio: float
    gamma_flag: bool
    ok: bool | None
    note: str


def tail_proxy(alpha: float, J: int) -> float:
    """sum_{j > J} j^{-1/a}, finite for a < 1 (Euler-Maclaurin closed form)."""
    p = 1.0 / alpha
    if p <= 1.0:
        return math.inf
    return J ** (1.0 - p) / (p - 1.0) - 0.5 * J ** (-p)


def truncation_report(alpha: float, J: int, typical_scale: float, gammas: np.ndarray | None = None) -> TruncationReport:
    ratio = float(gammas[-1] / gammas.size) if gammas is not None and gammas.size else 1.0
    flag = gammas is not None and gammas.size >= 500 and abs(ratio - 1.0) >= 0.2
    if alpha < 1.0:
        proxy = tail_proxy(alpha, J)
        ok = proxy < 1e-3 * typical_scale
        note = "tail proxy against 1e-3 of the typical maximum"
    else:
        proxy = math.inf
        ok = None
        note = "symmetric series: rely on the J-doubling check"
    return TruncationReport(alpha, J, proxy, ratio, flag, ok, note)


def j_doubling_check(
    model: Model, n, alpha: float, config: SeriesConfig, threads: int = 1, tol: float = 0.05,
    abar: float | None = None,
) -> tuple[float, bool]:
    """Relative change of the median maximum when J doubles."""
    abar = abar_for(model, n, seed=config.seed, threads=threads) if abar is None else abar
    m1 = np.median(replicate_maxima(model, n, alpha, config, abar, threads)[:, -1])
    cfg2 = SeriesConfig(2 * config.J, config.R, config.n, config.seed)
    m2 = np.median(replicate_maxima(model, n, alpha, cfg2, abar, threads)[:, -1])
    change = float(abs(m2 - m1) / m1)
    return change, change < tol
