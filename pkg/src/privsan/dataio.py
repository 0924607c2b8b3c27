"""Tabular dataset ingestion with schema-driven preprocessing.

The interchange format is plain CSV: comma separated, UTF-8, one header
row, ``.`` decimal point, no quoting of numerics.  A schema (JSON) names
every column and declares its kind: ``numeric`` (kept as is),
``binary-categorical`` (mapped to numbers through an explicit value
map), or ``drop``.  Private columns are flagged in the schema and turn
into private index positions on the loaded tuples.

The reference clinical dataset this loader was written for is not
redistributable; :func:`generate_lookalike` writes a synthetic stand-in
with the same shape (50 retained columns, mixed binary and numeric,
age/sex/length-of-stay private) so the pipeline can be exercised end to
end.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import EmptyDataset, ParseError, SchemaMismatch
from .rng import Rng
from .sanitize import DataTuple

KINDS = ("numeric", "binary-categorical", "drop")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str = "numeric"
    private: bool = False
    value_map: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatch(f"unknown column kind {self.kind!r} for {self.name!r}")
        if self.kind == "binary-categorical" and not self.value_map:
            raise SchemaMismatch(f"column {self.name!r} needs a value_map")


@dataclass(frozen=True)
class DatasetSchema:
    columns: list[ColumnSpec]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate column names in schema")

    @property
    def retained(self) -> list[ColumnSpec]:
        return [c for c in self.columns if c.kind != "drop"]

    @property
    def private_positions(self) -> frozenset[int]:
        return frozenset(i for i, c in enumerate(self.retained) if c.private)

    def as_numeric(self) -> "DatasetSchema":
        """Schema describing this schema's already-preprocessed output."""
        return DatasetSchema([ColumnSpec(c.name, "numeric", c.private)
                              for c in self.retained])

    @classmethod
    def from_json(cls, path: str | Path) -> "DatasetSchema":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if not isinstance(raw, list):
            raise SchemaMismatch("schema file must hold a list of column entries")
        cols = []
        for entry in raw:
            cols.append(ColumnSpec(
                name=str(entry["name"]),
                kind=str(entry.get("kind", "numeric")),
                private=bool(entry.get("private", False)),
                value_map={str(k): float(v)
                           for k, v in entry.get("value_map", {}).items()},
            ))
        return cls(cols)

    def to_json(self, path: str | Path) -> None:
        rows = []
        for c in self.columns:
            entry: dict = {"name": c.name, "kind": c.kind, "private": c.private}
            if c.value_map:
                entry["value_map"] = c.value_map
            rows.append(entry)
        Path(path).write_text(json.dumps(rows, indent=2) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class LoadResult:
    tuples: list[DataTuple]
    schema: DatasetSchema
    column_shifts: np.ndarray  # per retained column, 0 when nothing was shifted


@dataclass(frozen=True)
class DatasetSummary:
    count: int
    column_names: list[str]
    minima: np.ndarray
    maxima: np.ndarray
    means: np.ndarray
    max_tuple_norm: float


def load_csv(path: str | Path, schema: DatasetSchema,
             shift_nonnegative: bool = True) -> LoadResult:
    """Load and preprocess a CSV file.

    Row k of the file becomes tuple k.  Retained cells that fail to
    parse raise :class:`ParseError` with their 1-based data row number.
    By default each retained column with negative values is shifted up
    to be nonnegative; the applied shifts are returned.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(str(path))
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaMismatch("file has no header row") from None
        expected = [c.name for c in schema.columns]
        if header != expected:
            raise SchemaMismatch(f"header {header!r} does not match schema {expected!r}")
        keep = [(i, c) for i, c in enumerate(schema.columns) if c.kind != "drop"]
        rows = []
        for rownum, row in enumerate(reader, start=1):
            if len(row) != len(schema.columns):
                raise ParseError(rownum, "<row>", f"expected {len(schema.columns)} cells")
            vals = []
            for i, col in keep:
                cell = row[i].strip()
                if col.kind == "binary-categorical":
                    if cell not in col.value_map:
                        raise ParseError(rownum, col.name, f"unmapped value {cell!r}")
                    vals.append(col.value_map[cell])
                else:
                    try:
                        vals.append(float(cell))
                    except ValueError:
                        raise ParseError(rownum, col.name,
                                         f"not a number: {cell!r}") from None
            rows.append(vals)
    if not rows:
        raise EmptyDataset(f"{path} holds no data rows")
    values = np.asarray(rows, dtype=float)
    shifts = np.zeros(values.shape[1])
    if shift_nonnegative:
        minima = values.min(axis=0)
        shifts = np.where(minima < 0, -minima, 0.0)
        values = values + shifts
    private = schema.private_positions
    tuples = [DataTuple(values[k], private, f"r{k:05d}") for k in range(values.shape[0])]
    return LoadResult(tuples, schema, shifts)


def summarize(tuples: list[DataTuple],
              column_names: list[str] | None = None) -> DatasetSummary:
    """Per-column minima, maxima and means plus the largest tuple norm
    (the certificate input alpha)."""
    if not tuples:
        raise EmptyDataset("no tuples to summarize")
    x = np.stack([t.values for t in tuples])
    names = column_names or [f"c{j}" for j in range(x.shape[1])]
    return DatasetSummary(
        count=x.shape[0],
        column_names=list(names),
        minima=x.min(axis=0),
        maxima=x.max(axis=0),
        means=x.mean(axis=0),
        max_tuple_norm=float(np.linalg.norm(x, axis=1).max()),
    )


def write_csv(tuples: list[DataTuple], path: str | Path,
              column_names: list[str]) -> None:
    """Write tuples with 17-significant-digit formatting, which
    round-trips float64 exactly."""
    x = np.stack([t.values for t in tuples])
    if x.shape[1] != len(column_names):
        raise ValueError("column_names length does not match tuple dimension")
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(column_names) + "\n")
        for row in x:
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")


def generate_lookalike(csv_path: str | Path, schema_path: str | Path,
                       rows: int = 400, seed: int = 0) -> DatasetSchema:
    """Write a synthetic clinical-style dataset and its schema.

    Shape: one dropped id column, 50 retained columns (two of them
    binary categoricals), private columns age, sex and stay_days.
    """
    rng = Rng(seed).generator
    head = [
        ColumnSpec("record_id", "drop"),
        ColumnSpec("age", "numeric", private=True),
        ColumnSpec("sex", "binary-categorical", private=True,
                   value_map={"M": 0.0, "F": 1.0}),
        ColumnSpec("stay_days", "numeric", private=True),
        ColumnSpec("alcoholism", "binary-categorical",
                   value_map={"no": 0.0, "yes": 1.0}),
        ColumnSpec("glucose", "numeric"),
        ColumnSpec("platelets", "numeric"),
    ]
    labs = [ColumnSpec(f"lab_{j:02d}", "numeric") for j in range(44)]
    schema = DatasetSchema(head + labs)

    age = rng.integers(18, 95, rows)
    sex = rng.choice(["M", "F"], rows)
    stay = rng.integers(1, 60, rows)
    alco = rng.choice(["no", "yes"], rows, p=[0.8, 0.2])
    glucose = np.round(rng.normal(5.5, 1.2, rows), 2)
    platelets = np.round(rng.normal(250.0, 60.0, rows), 1)
    lab_vals = np.round(rng.normal(0.0, 1.0, (rows, 44)) + rng.uniform(1.0, 9.0, 44), 3)

    with Path(csv_path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(c.name for c in schema.columns) + "\n")
        for k in range(rows):
            cells = [f"p{k:05d}", str(int(age[k])), str(sex[k]), str(int(stay[k])),
                     str(alco[k]), f"{glucose[k]:.17g}", f"{platelets[k]:.17g}"]
            cells += [f"{v:.17g}" for v in lab_vals[k]]
            fh.write(",".join(cells) + "\n")
    schema.to_json(schema_path)
    return schema
