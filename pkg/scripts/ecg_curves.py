"""Normalised extremal cocycle curves C_n for the three concrete models.

    python scripts/ecg_curves.py --out results/ecg --samples 4000
"""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from pathlib import Path

from ecglab.ecg import CircleHarmonic, TreeFull, TreeSubgroup, ecg_curve
from ecglab.plots import Series, line_plot
from ecglab.records import OutputBundle, record_run, write_bundle
from ecglab.streams import DEFAULT_SEED
from ecglab.words import SubgroupSpec


@dataclass(frozen=True)
class CurvesConfig:
    samples: int = 4000
    seed: int = DEFAULT_SEED
    threads: int = 1
    tree_n: tuple[int, int] = (4, 20)
    circle_n: tuple[int, int] = (2, 8)


def main(cfg: CurvesConfig, out: Path) -> None:
    models = {
        "tree_full": (TreeFull(2), cfg.tree_n),
        "z_kernel": (TreeSubgroup(SubgroupSpec.kernel_zk([1, 0])), cfg.tree_n),
        "c2c3_kernel": (TreeSubgroup(SubgroupSpec.kernel_c2c3([[0], [1]])), cfg.tree_n),
        "circle": (CircleHarmonic(), cfg.circle_n),
    }
    bundle = OutputBundle("curves")
    series = []
    for name, (model, (lo, hi)) in models.items():
        curve = ecg_curve(model, range(lo, hi + 1), cfg.samples, cfg.seed, threads=cfg.threads)
        bundle.tables[name] = curve.to_csv()
        bundle.summary[name] = curve.summary()
        series.append(Series(name, [p.n for p in curve.points], [p.cn for p in curve.points]))
        print(f"{model.label:45s} {curve.classification:13s} " + " ".join(f"{p.cn:.3f}" for p in curve.points))
    bundle.plots["all"] = line_plot(series, "C_n by model", "n", "C_n", logy=True)
    manifest = write_bundle(bundle, out)
    record_run({"script": "ecg_curves", **cfg.__dict__}, manifest, out, 0.0)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/ecg"))
    ap.add_argument("--samples", type=int, default=CurvesConfig.samples)
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--threads", type=int, default=1)
    a = ap.parse_args()
    main(CurvesConfig(a.samples, a.seed, a.threads), a.out)
