"""Reader for the simulator's result CSVs.

The contract (shared with the producer): UTF-8, LF endings, '.' decimals,
exact header below, empty fields for axes a scenario does not use.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

HEADER = [
    "scenario",
    "nt",
    "nr",
    "k",
    "m",
    "n_chips",
    "detector",
    "modulation",
    "snr_db",
    "bits",
    "errors",
    "ber",
    "ci95_low",
    "ci95_high",
    "avg_steps_per_bit",
    "seed",
]

_INT = {"nt", "nr", "k", "m", "n_chips", "bits", "errors", "seed"}
_FLOAT = {"snr_db", "ber", "ci95_low", "ci95_high", "avg_steps_per_bit"}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class Row:
    scenario: str
    nt: int | None
    nr: int | None
    k: int | None
    m: int | None
    n_chips: int | None
    detector: str
    modulation: str | None
    snr_db: float
    bits: int | None
    errors: int | None
    ber: float | None
    ci95_low: float | None
    ci95_high: float | None
    avg_steps_per_bit: float | None
    seed: int


def load_rows(paths) -> list[Row]:
    rows: list[Row] = []
    for path in paths:
        with open(path, encoding="utf-8", newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header != HEADER:
                raise SchemaError(f"{path}: header does not match the result schema")
            for lineno, rec in enumerate(reader, 2):
                if len(rec) != len(HEADER):
                    raise SchemaError(f"{path}:{lineno}: expected {len(HEADER)} fields")
                kwargs = {}
                for name, raw in zip(HEADER, rec):
                    if raw == "":
                        kwargs[name] = None
                    elif name in _INT:
                        kwargs[name] = int(raw)
                    elif name in _FLOAT:
                        kwargs[name] = float(raw)
                    else:
                        kwargs[name] = raw
                rows.append(Row(**kwargs))
    if not rows:
        raise SchemaError(f"no data rows found in {', '.join(str(p) for p in paths)}")
    return rows
