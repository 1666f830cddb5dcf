"""Exact subgroup growth ratios |H cap B_m| / 3^m for the kernel examples.

The sqrt(m)-rescaled column shows the Z-kernel ratio decaying like m^{-1/2}.
"""
from __future__ import annotations

import argparse
import math
from dataclasses import dataclass
from pathlib import Path

from ecglab.ecg import growth_ratio_series
from ecglab.plots import Series, line_plot
from ecglab.records import OutputBundle, record_run, write_bundle
from ecglab.words import C2C3_CAP, SubgroupSpec


@dataclass(frozen=True)
class GrowthConfig:
    m_max: int = 60


def main(cfg: GrowthConfig, out: Path) -> None:
    zk = growth_ratio_series(SubgroupSpec.kernel_zk([1, 0]), range(1, cfg.m_max + 1))
    c23 = growth_ratio_series(SubgroupSpec.kernel_c2c3([[0], [1]]), range(1, C2C3_CAP + 1))
    rows = ["m,z_kernel_ratio,z_kernel_ratio_times_sqrt_m"]
    for m, r in zk:
        rows.append(f"{m},{float(r)!r},{float(r) * math.sqrt(m)!r}")
    c_rows = ["m,c2c3_ratio"] + [f"{m},{float(r)!r}" for m, r in c23]
    z = dict(zk)
    print(f"ratio(30)/ratio(10) = {float(z[30] / z[10]):.6f}   sqrt(10/30) = {math.sqrt(1 / 3):.6f}")
    bundle = OutputBundle(
        "growth_ratios",
        {"z_kernel": "\n".join(rows) + "\n", "c2c3": "\n".join(c_rows) + "\n"},
        {"ratio_30_over_10": float(z[30] / z[10])},
        {"ratios": line_plot(
            [Series("Z kernel", [m for m, _ in zk], [float(r) for _, r in zk]),
             Series("C2*C3 kernel", [m for m, _ in c23], [float(r) for _, r in c23])],
            "Subgroup ball counts over 3^m", "m", "ratio", logy=True,
        )},
    )
    manifest = write_bundle(bundle, out)
    record_run({"script": "growth_ratios", **cfg.__dict__}, manifest, out, 0.0)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", type=Path, default=Path("results/growth"))
    ap.add_argument("--m-max", type=int, default=60)
    a = ap.parse_args()
    main(GrowthConfig(a.m_max), a.out)
