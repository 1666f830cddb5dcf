"""Experiment dispatch: config in, output bundle out."""
from __future__ import annotations

import csv
import io
import math
from fractions import Fraction

import numpy as np

from . import ecg, mobius, stable, validation
from .config import ExperimentConfig
from .plots import Series, line_plot
from .records import OutputBundle


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def build_model(cfg: ExperimentConfig):
    if cfg.model == "tree-full":
        return ecg.TreeFull(cfg.d)
    if cfg.model == "circle-harmonic":
        return ecg.CircleHarmonic()
    return ecg.TreeSubgroup(cfg.subgroup_spec(), cfg.measure, cfg.patterson_n)


def run_ecg(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    model = build_model(cfg)
    th = ecg.Thresholds(cfg.floor, cfg.slope, cfg.decay)
    curve = ecg.ecg_curve(model, range(cfg.n_min, cfg.n_max + 1), cfg.samples, cfg.seed, th, cfg.threads)
    b = OutputBundle("ecg", {"curve": curve.to_csv()}, {"experiment": "ecg", "config": cfg.snapshot(), **curve.summary()})
    if cfg.plots:
        ns = [p.n for p in curve.points]
        b.plots["curve"] = line_plot(
            [Series("C_n", ns, [p.cn for p in curve.points])],
            f"Extremal cocycle growth, {model.label}", "n", "C_n", logy=True,
        )
    return b, None


def run_growth(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    spec = cfg.subgroup_spec()
    series = ecg.growth_ratio_series(spec, range(cfg.m_min, cfg.m_max + 1))
    base = 2 * spec.rank - 1
    rows = [(m, r * base ** m, str(r), repr(float(r))) for m, r in series]
    ratios = [r for _, r in series]
    tail = [r for m, r in series if m >= 5]
    summary = {
        "experiment": "growth",
        "config": cfg.snapshot(),
        "subgroup": spec.label(),
        "non_increasing_from_5": all(b <= a for a, b in zip(tail, tail[1:])),
        "first_ratio": float(ratios[0]),
        "last_ratio": float(ratios[-1]),
    }
    b = OutputBundle("growth", {"ratios": _csv(["m", "count", "ratio_exact", "ratio"], rows)}, summary)
    if cfg.plots:
        b.plots["ratios"] = line_plot(
            [Series("V_H(m) / (2d-1)^m", [m for m, _ in series], [float(r) for r in ratios])],
            f"Subgroup growth, {spec.label()}", "m", "ratio",
        )
    return b, None


def run_maxima(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    model = build_model(cfg)
    scfg = stable.SeriesConfig(cfg.truncation, cfg.replicates, max(cfg.radii), cfg.seed)
    rep = stable.dichotomy_experiment(model, list(cfg.radii), cfg.alpha, scfg, cfg.threads)
    reps = [
        (n, i, repr(float(m)), repr(float(x)), repr(float(y)))
        for n, ms in rep.samples.items()
        for i, (m, x, y) in enumerate(zip(ms.values, ms.by_volume, ms.by_bn))
    ]
    tables = {
        "dichotomy": rep.to_csv(),
        "replicates": _csv(["n", "replicate", "m_n", "m_n_over_v_n", "m_n_over_b_n"], reps),
    }
    summary = {"experiment": "maxima", "config": cfg.snapshot(), **rep.summary()}
    b = OutputBundle("maxima", tables, summary)
    if cfg.plots and rep.kappa is not None:
        last = rep.samples[cfg.radii[-1]]
        x = np.sort(last.by_bn / rep.kappa)
        emp = np.arange(1, x.size + 1) / x.size
        grid = np.linspace(x[0], min(x[-1], float(np.quantile(x, 0.98))), 200)
        b.plots["cdf"] = line_plot(
            [
                Series("empirical", x.tolist(), emp.tolist(), step=True),
                Series("exp(-C lam^-a)", grid.tolist(), stable.frechet_cdf(grid, cfg.alpha).tolist()),
            ],
            f"Normalised maxima, n = {cfg.radii[-1]}", "M_n / (b_n kappa)", "CDF",
        )
    return b, None


def run_sl2z(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    radius = math.log(3)
    ball = mobius.enumerate_ball(radius)
    pts = mobius.orbit_points(ball)
    xi = Fraction(2)

    def leb(g):
        den = g.c * xi + g.d
        return None if den == 0 else Fraction(1) / den ** 2

    rn_rows = []
    for g in ball:
        v = leb(g)
        rn_rows.append((*g.entries, "inf" if v is None else str(v), repr(mobius.poisson_ratio(g, 2.0))))
    a_leb = max(leb(g) for g in ball if leb(g) is not None)
    a_harm = max(mobius.poisson_ratio(g, 2.0) for g in ball)
    tables = {
        "ball": mobius.ball_csv(ball),
        "orbit_points": _csv(["re", "im", "re_float", "im_float"], [(str(x), str(y), repr(float(x)), repr(float(y))) for x, y in pts]),
        "rn_at_2": _csv(["a", "b", "c", "d", "rn_lebesgue", "poisson_ratio"], rn_rows),
    }
    summary = {
        "experiment": "sl2z-example",
        "config": cfg.snapshot(),
        "radius": "log 3",
        "ball_size": len(ball),
        "orbit_point_count": len(pts),
        "orbit_points": [f"{x} + {y} i" for x, y in pts],
        "a_log3_at_2_lebesgue": str(a_leb),
        "a_log3_at_2_harmonic": a_harm,
    }
    return OutputBundle("sl2z", tables, summary), None


def run_validate(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    results = validation.run_suite(cfg.seed, cfg.alpha)
    ok = all(r.passed for r in results if r.fatal)
    summary = {
        "experiment": "validate",
        "config": cfg.snapshot(),
        "passed": ok,
        "failed": [r.name for r in results if not r.passed and r.fatal],
        "flagged": [r.name for r in results if not r.passed and not r.fatal],
        "checks": len(results),
    }
    return OutputBundle("validate", {"checks": validation.results_csv(results)}, summary), ok


DISPATCH = {
    "ecg": run_ecg,
    "growth": run_growth,
    "maxima": run_maxima,
    "sl2z-example": run_sl2z,
    "validate": run_validate,
}


def run(cfg: ExperimentConfig) -> tuple[OutputBundle, bool | None]:
    return DISPATCH[cfg.kind](cfg)
