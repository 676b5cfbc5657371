"""Long-format observation tables: loading, typing, partitioning.

Cells are kept as their raw strings so serialization round-trips exactly;
numeric views are parsed on demand. A column is numeric iff every cell is an
integer or plain decimal literal (no exponent forms). Missing-value markers
are rejected at load time because the analysis scope is complete data only.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyTable, MissingCell, MissingColumn, ParseError, UnknownDataset

_NUMERIC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)$")
_MISSING_MARKERS = {"", "NA", "NaN", "nan", "N/A", "NAN", "null", "NULL"}


@dataclass(frozen=True)
class Dataset:
    """Immutable rectangular table; one observation per row."""

    names: tuple[str, ...]
    cells: tuple[tuple[str, ...], ...]  # row-major raw strings
    numeric_columns: frozenset[str] = field(default_factory=frozenset)

    @property
    def n_rows(self) -> int:
        return len(self.cells)

    def has_column(self, name: str) -> bool:
        return name in self.names

    def column(self, name: str) -> tuple[str, ...]:
        if name not in self.names:
            raise MissingColumn(f"column '{name}' not present", column=name)
        idx = self.names.index(name)
        return tuple(row[idx] for row in self.cells)

    def is_numeric(self, name: str) -> bool:
        if name not in self.names:
            raise MissingColumn(f"column '{name}' not present", column=name)
        return name in self.numeric_columns

    def numeric(self, name: str) -> np.ndarray:
        """Parsed float view of a numeric column."""
        if not self.is_numeric(name):
            raise MissingColumn(f"column '{name}' is not numeric", column=name)
        return np.array([float(v) for v in self.column(name)], dtype=float)

    def levels(self, name: str) -> tuple[str, ...]:
        """Distinct values of a column in first-appearance order."""
        seen: dict[str, None] = {}
        for v in self.column(name):
            if v not in seen:
                seen[v] = None
        return tuple(seen)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.names)
        for row in self.cells:
            w.writerow(row)
        return buf.getvalue()


@dataclass(frozen=True)
class GroupPartition:
    """Disjoint, exhaustive split of a Dataset by group-factor levels."""

    group_factors: tuple[str, ...]
    keys: tuple[tuple[str, ...], ...]
    subsets: tuple[Dataset, ...]

    def items(self):
        return zip(self.keys, self.subsets)

    def key_label(self, key: tuple[str, ...]) -> str:
        if not self.group_factors:
            return "all"
        return ", ".join(f"{f}={v}" for f, v in zip(self.group_factors, key))


def _classify_columns(names, rows) -> frozenset[str]:
    numeric = set()
    for j, name in enumerate(names):
        if all(_NUMERIC_RE.match(row[j]) for row in rows):
            numeric.add(name)
    return frozenset(numeric)


def load_table(source: str | bytes) -> Dataset:
    """Parse comma-delimited UTF-8 text with a mandatory header row.

    Raises ParseError with the offending 1-based row on column-count
    mismatches, MissingCell on empty/NA-marker cells, EmptyTable when there
    are no data rows.
    """
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"input is not valid UTF-8: {exc}") from None
    reader = csv.reader(io.StringIO(source))
    try:
        records = [(i + 1, [c.strip() for c in row]) for i, row in enumerate(reader)
                   if row and any(c.strip() for c in row)]
    except csv.Error as exc:
        raise ParseError(f"malformed delimited text: {exc}") from None
    if not records:
        raise EmptyTable("no header row found")
    header_no, header = records[0]
    if any(not h for h in header):
        raise ParseError("header contains an empty column name", row=header_no)
    if len(set(header)) != len(header):
        raise ParseError("header contains duplicate column names", row=header_no)
    body = records[1:]
    if not body:
        raise EmptyTable("no data rows after header")
    rows = []
    for row_no, row in body:
        if len(row) != len(header):
            raise ParseError(
                f"row {row_no} has {len(row)} fields, expected {len(header)}",
                row=row_no)
        for j, cell in enumerate(row):
            if cell in _MISSING_MARKERS:
                raise MissingCell(
                    f"missing value at row {row_no}, column '{header[j]}'",
                    row=row_no, column=header[j])
        rows.append(tuple(row))
    return Dataset(tuple(header), tuple(rows), _classify_columns(header, rows))


def from_columns(names: list[str], columns: list[list]) -> Dataset:
    """Build a Dataset from parallel columns (used by fixture builders).

    Floats are rendered with their shortest round-tripping representation so
    to_csv/load_table reproduces them exactly.
    """
    n = len(columns[0])
    rows = []
    for i in range(n):
        row = []
        for col in columns:
            v = col[i]
            if isinstance(v, float):
                row.append(str(int(v)) if v.is_integer() else repr(v))
            else:
                row.append(str(v))
        rows.append(tuple(row))
    return Dataset(tuple(names), tuple(rows), _classify_columns(names, rows))


def partition(data: Dataset, group_factors: list[str] | tuple[str, ...]) -> GroupPartition:
    """Split into one subset per observed group-level combination.

    Keys appear in first-appearance order; an empty factor list yields a
    single subset containing the whole table.
    """
    group_factors = tuple(group_factors)
    for f in group_factors:
        if not data.has_column(f):
            raise MissingColumn(f"group factor '{f}' not present", column=f)
    if not group_factors:
        return GroupPartition((), ((),), (data,))
    idx = [data.names.index(f) for f in group_factors]
    key_rows: dict[tuple[str, ...], list[tuple[str, ...]]] = {}
    for row in data.cells:
        key = tuple(row[j] for j in idx)
        key_rows.setdefault(key, []).append(row)
    keys = tuple(key_rows)
    subsets = tuple(
        Dataset(data.names, tuple(key_rows[k]),
                _classify_columns(data.names, key_rows[k]))
        for k in keys)
    return GroupPartition(group_factors, keys, subsets)


BUILTIN_NAMES = ("crd", "rcbd", "factorial", "split_plot", "lmm", "gxe")


def builtin_dataset(name: str) -> Dataset:
    """Return one of the bundled tutorial fixtures by name."""
    if name not in BUILTIN_NAMES:
        raise UnknownDataset(
            f"unknown dataset '{name}' (available: {', '.join(BUILTIN_NAMES)})",
            name=name)
    from . import fixtures

    return fixtures.build(name)
