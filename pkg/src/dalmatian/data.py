"""Typed tabular data: loading, one-hot expansion, column injection.

Datasets are immutable after construction; every transformation returns a
new Dataset.  Numeric columns are float64 arrays with a boolean missing
mask (masked cells hold NaN), boolean columns are bool arrays with a mask,
categorical columns are string object arrays.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ParseError, SchemaError

NUMERIC = "numeric"
BOOLEAN = "boolean"
CATEGORICAL = "categorical"

_BOOL_TRUE = {"true", "1"}
_BOOL_FALSE = {"false", "0"}


@dataclass(frozen=True, eq=False)
class Column:
    name: str
    kind: str
    values: np.ndarray
    missing: np.ndarray

    @property
    def missing_fraction(self) -> float:
        n = len(self.missing)
        return float(self.missing.sum()) / n if n else 0.0


@dataclass(frozen=True, eq=False)
class Dataset:
    columns: tuple[Column, ...]
    target: str | None = None
    _index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaError("duplicate column names")
        object.__setattr__(self, "_index", {n: i for i, n in enumerate(names)})

    @property
    def n_rows(self) -> int:
        return len(self.columns[0].values) if self.columns else 0

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def column(self, name: str) -> Column:
        try:
            return self.columns[self._index[name]]
        except KeyError:
            raise SchemaError(f"no column named {name!r}") from None

    def has_column(self, name: str) -> bool:
        return name in self._index

    def numeric_names(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == NUMERIC]

    def boolean_names(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == BOOLEAN]

    def missing_fraction(self, name: str) -> float:
        return self.column(name).missing_fraction

    def with_target(self, target: str | None) -> "Dataset":
        if target is not None:
            self.column(target)
        return Dataset(self.columns, target)

    def take(self, rows) -> "Dataset":
        """Row subset (indices or boolean mask), preserving column order."""
        rows = np.asarray(rows)
        cols = tuple(
            Column(c.name, c.kind, c.values[rows], c.missing[rows]) for c in self.columns
        )
        return Dataset(cols, self.target)

    def head(self, n: int) -> "Dataset":
        return self.take(np.arange(min(n, self.n_rows)))

    def append_columns(self, new: Iterable[Column]) -> "Dataset":
        return Dataset(self.columns + tuple(new), self.target)


def _parse_number(text: str) -> float | None:
    try:
        v = float(text)
    except ValueError:
        return None
    return v


def _build_numeric(name: str, cells: list[str | None]) -> Column:
    n = len(cells)
    values = np.full(n, np.nan)
    missing = np.zeros(n, dtype=bool)
    for i, cell in enumerate(cells):
        if cell is None:
            missing[i] = True
        else:
            values[i] = float(cell)
    return Column(name, NUMERIC, values, missing)


def _build_boolean(name: str, cells: list[str | None], true_tokens, false_tokens) -> Column:
    n = len(cells)
    values = np.zeros(n, dtype=bool)
    missing = np.zeros(n, dtype=bool)
    for i, cell in enumerate(cells):
        if cell is None:
            missing[i] = True
        elif cell.lower() in true_tokens:
            values[i] = True
        elif cell.lower() in false_tokens:
            values[i] = False
        else:
            raise ParseError(f"column {name!r}: cannot read {cell!r} as boolean")
    return Column(name, BOOLEAN, values, missing)


def _build_categorical(name: str, cells: list[str | None]) -> Column:
    values = np.array([c if c is not None else "" for c in cells], dtype=object)
    missing = np.array([c is None for c in cells], dtype=bool)
    return Column(name, CATEGORICAL, values, missing)


def load_csv(path, hints: dict | None = None, target: str | None = None) -> Dataset:
    """Load an RFC-4180-style CSV with a header row.

    Empty cells and literal ``NaN`` are missing.  Untyped columns are
    inferred: all cells parseable as numbers -> numeric; cells within
    {true, false, 0, 1} (any case) -> boolean; anything else categorical.
    ``hints`` maps column names to a kind, or to ``("boolean", trues,
    falses)`` with explicit token sets.
    """
    hints = hints or {}
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file") from None
        if len(set(header)) != len(header):
            raise SchemaError(f"{path}: duplicate header names")
        raw: list[list[str | None]] = [[] for _ in header]
        for rownum, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: row {rownum} has {len(row)} cells, expected {len(header)}"
                )
            for j, cell in enumerate(row):
                cell = cell.strip()
                raw[j].append(None if cell == "" or cell == "NaN" else cell)

    columns = []
    for name, cells in zip(header, raw):
        hint = hints.get(name)
        if isinstance(hint, tuple) and hint[0] == BOOLEAN:
            trues = {t.lower() for t in hint[1]}
            falses = {t.lower() for t in hint[2]}
            columns.append(_build_boolean(name, cells, trues, falses))
            continue
        if hint == NUMERIC:
            columns.append(_build_numeric(name, cells))
            continue
        if hint == BOOLEAN:
            columns.append(_build_boolean(name, cells, _BOOL_TRUE, _BOOL_FALSE))
            continue
        if hint == CATEGORICAL:
            columns.append(_build_categorical(name, cells))
            continue
        present = [c for c in cells if c is not None]
        if present and all(_parse_number(c) is not None for c in present):
            # {0,1}-only columns stay numeric unless hinted: 0/1 data is
            # routinely a count, and bounds on counts are useful.
            columns.append(_build_numeric(name, cells))
        elif present and all(c.lower() in _BOOL_TRUE | _BOOL_FALSE for c in present):
            columns.append(_build_boolean(name, cells, _BOOL_TRUE, _BOOL_FALSE))
        else:
            columns.append(_build_categorical(name, cells))
    return Dataset(tuple(columns), target)


def load_whitespace(path, target_last: bool = True) -> Dataset:
    """Whitespace-separated numeric table, one example per line, no header.

    Columns are named x1..xN; with ``target_last`` the final column is the
    designated target.
    """
    rows: list[list[float]] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            try:
                vals = [float(p) for p in parts]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}") from None
            if rows and len(vals) != len(rows[0]):
                raise ParseError(
                    f"{path}: line {lineno} has {len(vals)} fields, expected {len(rows[0])}"
                )
            rows.append(vals)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    arr = np.array(rows)
    n, k = arr.shape
    cols = tuple(
        Column(f"x{j + 1}", NUMERIC, arr[:, j].copy(), np.zeros(n, dtype=bool))
        for j in range(k)
    )
    return Dataset(cols, f"x{k}" if target_last else None)


def save_csv(dataset: Dataset, path) -> None:
    """Write a dataset back out; numeric cells use shortest round-trip repr
    so a load/save/load cycle is bit-exact."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(dataset.names)
        for i in range(dataset.n_rows):
            row = []
            for col in dataset.columns:
                if col.missing[i]:
                    row.append("")
                elif col.kind == NUMERIC:
                    row.append(repr(float(col.values[i])))
                elif col.kind == BOOLEAN:
                    row.append("true" if col.values[i] else "false")
                else:
                    row.append(str(col.values[i]))
            writer.writerow(row)


def one_hot(dataset: Dataset, name: str) -> Dataset:
    """Expand a categorical column into one boolean column per observed
    level (first-appearance order), named ``<col>__<level>``."""
    col = dataset.column(name)
    if col.kind != CATEGORICAL:
        raise SchemaError(f"one_hot requires a categorical column, {name!r} is {col.kind}")
    levels: list[str] = []
    for v, m in zip(col.values, col.missing):
        if not m and v not in levels:
            levels.append(v)
    derived = []
    for level in levels:
        values = np.array([(not m) and v == level for v, m in zip(col.values, col.missing)])
        derived.append(Column(f"{name}__{level}", BOOLEAN, values, col.missing.copy()))
    pos = dataset._index[name]
    cols = dataset.columns[:pos] + tuple(derived) + dataset.columns[pos + 1 :]
    target = dataset.target if dataset.target != name else None
    return Dataset(cols, target)


# ---------------------------------------------------------------------------
# column injection
# ---------------------------------------------------------------------------

_DERIVED_FNS = {
    "square": lambda x: x * x,
    "cube": lambda x: (x * x) * x,
    "pow4": lambda x: (x * x) * (x * x),
    "pow5": lambda x: ((x * x) * (x * x)) * x,
    "pow6": lambda x: ((x * x) * x) * ((x * x) * x),
    "sin": np.sin,
    "cos": np.cos,
    "sqrt": np.sqrt,
}


@dataclass(frozen=True)
class DerivedColumn:
    name: str
    source: str
    kind: str  # key into _DERIVED_FNS

    def __post_init__(self):
        if self.kind not in _DERIVED_FNS:
            raise SchemaError(
                f"unknown derived-column kind {self.kind!r}; "
                f"valid kinds: {', '.join(sorted(_DERIVED_FNS))}"
            )


@dataclass(frozen=True)
class ConstantColumn:
    name: str
    value: float


@dataclass(frozen=True)
class AugmentationSpec:
    derived: tuple[DerivedColumn, ...] = ()
    constants: tuple[ConstantColumn, ...] = ()

    @staticmethod
    def from_dict(d: dict) -> "AugmentationSpec":
        return AugmentationSpec(
            tuple(DerivedColumn(e["name"], e["source"], e["kind"]) for e in d.get("derived", [])),
            tuple(ConstantColumn(e["name"], float(e["value"])) for e in d.get("constants", [])),
        )


def inject(dataset: Dataset, spec: AugmentationSpec) -> Dataset:
    """Append derived and constant numeric columns.

    A domain violation in a derived cell (sqrt of a negative, say) becomes
    a missing cell, not an undefined one: the column simply has a hole.
    """
    n = dataset.n_rows
    new_cols = []
    for d in spec.derived:
        src = dataset.column(d.source)
        if src.kind != NUMERIC:
            raise SchemaError(f"derived column source {d.source!r} is not numeric")
        with np.errstate(all="ignore"):
            vals = np.asarray(_DERIVED_FNS[d.kind](src.values), dtype=float)
        missing = src.missing | ~np.isfinite(vals)
        vals = np.where(missing, np.nan, vals)
        new_cols.append(Column(d.name, NUMERIC, vals, missing))
    for c in spec.constants:
        if not math.isfinite(c.value):
            raise SchemaError(f"constant column {c.name!r} must be finite")
        new_cols.append(
            Column(c.name, NUMERIC, np.full(n, float(c.value)), np.zeros(n, dtype=bool))
        )
    return dataset.append_columns(new_cols)


def eligible_invariants(dataset: Dataset, target: str, skips: float) -> list[str]:
    """Numeric columns usable as leaves: not the target, and with a missing
    fraction no greater than ``skips`` (strictly-above is excluded)."""
    out = []
    for c in dataset.columns:
        if c.kind != NUMERIC or c.name == target:
            continue
        if c.missing_fraction > skips:
            continue
        out.append(c.name)
    return out
