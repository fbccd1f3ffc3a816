"""Readers for the gcmchaos CSV outputs.

Files start with the '# gcmchaos-csv v1' marker, optional '# ...' comment
lines, then a header row.  A reader checks the expected column set and, when a
'*.manifest.json' next to the input lists the file, verifies its sha256 before
returning anything, so stale or edited inputs fail loudly.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

VERSION_LINE = "# gcmchaos-csv v1"


class SchemaError(Exception):
    """Input file does not match the expected gcmchaos schema."""


@dataclass(frozen=True)
class Table:
    path: Path
    comments: tuple[str, ...]
    columns: dict[str, np.ndarray]

    @property
    def n_rows(self) -> int:
        return next(iter(self.columns.values())).size if self.columns else 0

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]


def verify_manifest_checksum(path: Path):
    """If a sibling manifest lists this file, its checksum must match."""
    for manifest_path in sorted(path.parent.glob("*.manifest.json")):
        try:
            manifest = json.loads(manifest_path.read_text())
        except (OSError, json.JSONDecodeError):
            continue
        recorded = manifest.get("files", {}).get(path.name)
        if recorded is None:
            continue
        actual = hashlib.sha256(path.read_bytes()).hexdigest()
        if actual != recorded:
            raise SchemaError(
                f"{path.name}: checksum {actual[:12]}... does not match the "
                f"manifest entry {recorded[:12]}... in {manifest_path.name}"
            )


def read_table(path: Path, expected_columns: tuple[str, ...]) -> Table:
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"input file not found: {path}")
    verify_manifest_checksum(path)
    lines = path.read_text().splitlines()
    if not lines or lines[0] != VERSION_LINE:
        raise SchemaError(f"{path.name}: missing '{VERSION_LINE}' marker line")
    comments = []
    i = 1
    while i < len(lines) and lines[i].startswith("#"):
        comments.append(lines[i][1:].strip())
        i += 1
    if i >= len(lines):
        raise SchemaError(f"{path.name}: no header row")
    header = tuple(lines[i].split(","))
    if header != expected_columns:
        missing = set(expected_columns) - set(header)
        extra = set(header) - set(expected_columns)
        raise SchemaError(
            f"{path.name}: column mismatch; expected {list(expected_columns)}, "
            f"found {list(header)} (missing: {sorted(missing) or 'none'}, "
            f"unexpected: {sorted(extra) or 'none'})"
        )
    rows = [l for l in lines[i + 1:] if l]
    if not rows:
        raise SchemaError(f"{path.name}: no data rows")
    try:
        data = np.array([[float(v) for v in r.split(",")] for r in rows])
    except ValueError as exc:
        raise SchemaError(f"{path.name}: non-numeric cell ({exc})") from exc
    if data.shape[1] != len(header):
        raise SchemaError(
            f"{path.name}: ragged rows ({data.shape[1]} cells vs "
            f"{len(header)} columns)"
        )
    columns = {name: data[:, k] for k, name in enumerate(header)}
    return Table(path, tuple(comments), columns)


def as_grid(table: Table, xname: str, yname: str, vname: str):
    """Reshape long-format (x, y, value) rows onto their rectangular grid."""
    x = np.unique(table[xname])
    y = np.unique(table[yname])
    if x.size * y.size != table.n_rows:
        raise SchemaError(
            f"{table.path.name}: rows do not fill a {x.size}x{y.size} grid"
        )
    order = np.lexsort((table[xname], table[yname]))
    values = table[vname][order].reshape(y.size, x.size)
    return x, y, values
