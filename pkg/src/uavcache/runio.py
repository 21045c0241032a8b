"""Run-directory artifacts: resolved-config snapshots, CSVs, JSON summaries.

Every CSV starts with a ``# config_hash=...`` comment naming the resolved
configuration it came from, then a header row. Numbers are written with
shortest-round-trip formatting and no timestamps, so identical resolved
configs and seeds reproduce every artifact byte for byte.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

from .config import ScenarioConfig, canonical_json, config_hash


def ensure_run_dir(path: str | Path) -> Path:
    run_dir = Path(path)
    run_dir.mkdir(parents=True, exist_ok=True)
    return run_dir


def write_resolved_config(config: ScenarioConfig, run_dir: Path) -> str:
    """Snapshot the fully resolved config; returns its hash."""
    (run_dir / "resolved_config.json").write_text(canonical_json(config.to_dict()) + "\n")
    return config_hash(config)


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: Path, header: list[str], rows: list[dict], cfg_hash: str) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={cfg_hash}\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(row[name]) for name in header])


def write_json(path: Path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def read_csv(path: Path) -> tuple[str, list[dict]]:
    """Read back a run CSV; returns the embedded config hash and the rows."""
    with open(path) as fh:
        first = fh.readline().strip()
        cfg_hash = first.removeprefix("# config_hash=")
        reader = csv.DictReader(fh)
        return cfg_hash, list(reader)
