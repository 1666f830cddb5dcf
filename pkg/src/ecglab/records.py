"""Output bundles, checksummed run records and the append-only runs index."""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__

INDEX_NAME = "runs.jsonl"


def _finite(x):
    # RFC 8259 has no NaN or Infinity
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {str(k): _finite(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_finite(v) for v in x]
    if hasattr(x, "item") and not isinstance(x, (str, bytes)):
        return _finite(x.item())
    return x


def dump_json(obj) -> str:
    return json.dumps(_finite(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


@dataclass
class OutputBundle:
    """CSV tables by stem, a JSON summary and optional SVG plots."""

    prefix: str
    tables: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    plots: dict[str, str] = field(default_factory=dict)

    def files(self) -> dict[str, str]:
        out = {f"{self.prefix}_{k}.csv": v for k, v in self.tables.items()}
        summary = dict(self.summary)
        summary["tables"] = {k: f"{self.prefix}_{k}.csv" for k in self.tables}
        out[f"{self.prefix}_summary.json"] = dump_json(summary)
        out.update({f"{self.prefix}_{k}.svg": v for k, v in self.plots.items()})
        return out


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunRecord:
    config: dict
    tool_version: str
    started: str
    wall_clock: float
    outputs: dict[str, str]

    def to_json(self) -> str:
        return json.dumps(_finite(asdict(self)), sort_keys=True, allow_nan=False)


def write_bundle(bundle: OutputBundle, out_dir: str | Path) -> dict[str, str]:
    """Write every file under ``out_dir``; returns name -> sha256."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {}
    for name, text in sorted(bundle.files().items()):
        target = out / name
        if target.resolve().parent != out.resolve():
            raise ValueError(f"refusing to write outside {out}: {name}")
        with target.open("w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        manifest[name] = sha256_text(text)
    return manifest


def record_run(config: dict, manifest: dict[str, str], out_dir: str | Path, wall_clock: float) -> RunRecord:
    rec = RunRecord(
        config=config,
        tool_version=__version__,
        started=datetime.now(timezone.utc).isoformat(timespec="seconds"),
        wall_clock=round(wall_clock, 6),
        outputs=dict(sorted(manifest.items())),
    )
    with (Path(out_dir) / INDEX_NAME).open("a", encoding="utf-8") as fh:
        fh.write(rec.to_json() + "\n")
    return rec


def read_index(out_dir: str | Path) -> list[dict]:
    p = Path(out_dir) / INDEX_NAME
    if not p.exists():
        return []
    return [json.loads(line) for line in p.read_text(encoding="utf-8").splitlines() if line.strip()]
