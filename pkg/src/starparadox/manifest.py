"""Run manifests and deterministic CSV/JSON emission.

Every CLI command records a manifest: the command name, its full parameter
set, the prior spec (when one is involved), the seed, the tool version,
start/end timestamps and a SHA-256 digest per output file.  Replaying a
manifest reruns the command with the stored parameters; because all
randomness flows through counter-derived substreams, the regenerated CSV
files are byte-identical (timestamps live only in the manifest itself).

CSV files are UTF-8 with a header row, '.' decimal separator, LF line
endings and floats rendered with repr-faithful '%.17g'; rows are flushed
as they are written so partial results survive interruption.
"""

from __future__ import annotations

import csv
import hashlib
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

__all__ = ["RunManifest", "write_csv_rows", "format_value", "sha256_file"]


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv_rows(path, header, rows) -> None:
    """Write rows (iterables) under a header; flush after every row."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
            fh.flush()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


@dataclass
class RunManifest:
    command: str
    params: dict
    seed: int
    version: str
    prior: dict | None = None
    started: str = field(default_factory=_now)
    finished: str | None = None
    outputs: dict = field(default_factory=dict)

    def add_output(self, path) -> None:
        path = Path(path)
        self.outputs[path.name] = sha256_file(path)

    def finish(self) -> None:
        self.finished = _now()

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": self.params,
            "prior": self.prior,
            "seed": self.seed,
            "version": self.version,
            "started": self.started,
            "finished": self.finished,
            "outputs": self.outputs,
        }

    def write(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path, "r", encoding="utf-8") as fh:
            obj = json.load(fh)
        m = cls(
            command=obj["command"],
            params=obj["params"],
            seed=obj["seed"],
            version=obj["version"],
            prior=obj.get("prior"),
        )
        m.started = obj.get("started", m.started)
        m.finished = obj.get("finished")
        m.outputs = obj.get("outputs", {})
        return m
