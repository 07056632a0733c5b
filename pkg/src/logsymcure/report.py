"""Machine-readable run reports and delimited-file IO for the CLI."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .likelihood import SurvivalDataset

__all__ = ["SCHEMA_VERSION", "RunReport", "read_survival_csv", "write_survival_csv", "InputError"]

SCHEMA_VERSION = "1"


class InputError(ValueError):
    """Malformed user input; maps to exit code 2."""


@dataclass
class RunReport:
    """Versioned, deterministic JSON report for one CLI invocation.

    Wall-clock time is intentionally reported on the console only, so that a
    fixed seed yields byte-identical files.
    """

    command: str
    args: dict
    seed: int | None
    results: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    def to_json(self) -> str:
        payload = {
            "schema_version": self.schema_version,
            "command": self.command,
            "args": self.args,
            "seed": self.seed,
            "results": self.results,
        }
        return json.dumps(payload, indent=2, sort_keys=True, allow_nan=True) + "\n"

    def write(self, path: Path) -> None:
        Path(path).write_text(self.to_json())

    @staticmethod
    def load(path: Path) -> dict:
        return json.loads(Path(path).read_text())


def read_survival_csv(path) -> SurvivalDataset:
    """Read a dataset CSV: header 'time,status,<covariates...>'.

    Comma-separated, '.' decimal, UTF-8; status strictly 0/1 with 1 = event.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = [r for r in csv.reader(text.splitlines()) if r and any(c.strip() for c in r)]
    if not rows:
        raise InputError("no records")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2 or header[0] != "time" or header[1] != "status":
        raise InputError("header must start with 'time,status'")
    cov_names = header[2:]
    body = rows[1:]
    if not body:
        raise InputError("no records")
    try:
        values = np.array([[float(c) for c in r] for r in body], dtype=float)
    except ValueError as exc:
        raise InputError(f"non-numeric value in {path.name}: {exc}") from exc
    if values.shape[1] != len(header):
        raise InputError("row length does not match header")
    y = values[:, 0]
    delta = values[:, 1]
    if np.any(y <= 0):
        raise InputError("times must be positive")
    if not np.all(np.isin(delta, (0.0, 1.0))):
        raise InputError("status must be 0 or 1")
    X = np.column_stack([np.ones(values.shape[0]), values[:, 2:]])
    try:
        return SurvivalDataset(y=y, delta=delta, X=X, covariate_names=tuple(cov_names))
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def write_survival_csv(data: SurvivalDataset, path) -> None:
    path = Path(path)
    names = list(data.covariate_names) or [
        f"x{j}" for j in range(1, data.X.shape[1])
    ]
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "status"] + names)
        for i in range(data.n):
            writer.writerow(
                [repr(float(data.y[i])), int(data.delta[i])]
                + [repr(float(v)) for v in data.X[i, 1:]]
            )


def write_table_csv(path, header: list[str], rows) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
