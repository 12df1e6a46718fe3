"""The CSV source type: parsing, row enumeration, cell selection, casting.

CSV files are parsed with the standard library's RFC 4180 reader: quoted
fields, embedded separators and newlines, and both LF and CRLF line ends
are handled.  A header row is mandatory; header names must be non-empty
and unique, and every data row must have exactly as many fields as the
header (ragged rows are an error that names the offending row).

Selection is per-column: selecting a column from a row yields a singleton
list with the cell (the empty string is a legitimate cell), or the empty
list when the column does not exist.  Casting never fails: every cell
becomes a plain ``xsd:string`` literal.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

from .errors import CsvError, StructuralError
from .rdf import Literal

CSV_KIND = "csv"
ROWS_QUERY = "rows"

Row = tuple[str, ...]


@dataclass(frozen=True)
class CsvTable:
    header: tuple[str, ...]
    rows: tuple[Row, ...]
    _index: dict[str, int] = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        seen: dict[str, int] = {}
        for i, name in enumerate(self.header):
            if name == "":
                raise CsvError(f"empty header name at column {i + 1}")
            if name in seen:
                raise CsvError(f"duplicate header name: {name!r}")
            seen[name] = i
        object.__setattr__(self, "_index", seen)
        width = len(self.header)
        for i, row in enumerate(self.rows):
            if len(row) != width:
                raise CsvError(f"row {i + 2}: expected {width} fields, found {len(row)}")

    def column_index(self, name: str) -> int | None:
        return self._index.get(name)


def parse_csv(data: bytes | str) -> CsvTable:
    """Parse CSV bytes or text into a table; header row required."""
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise CsvError(f"not valid UTF-8: {exc}") from None
    else:
        text = data.lstrip("﻿")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        records = [tuple(rec) for rec in reader]
    except csv.Error as exc:
        raise CsvError(f"malformed CSV: {exc}") from None
    if not records:
        raise CsvError("missing header row")
    header = records[0]
    if header == ("",) or not header:
        raise CsvError("missing header row")
    width = len(header)
    for i, rec in enumerate(records[1:], start=2):
        if len(rec) != width:
            raise CsvError(f"row {i}: expected {width} fields, found {len(rec)}")
    return CsvTable(header=header, rows=tuple(records[1:]))


def enumerate_rows(table: CsvTable, query: str) -> tuple[Row, ...]:
    """The components of a table under an iterator query; only ``rows`` exists."""
    if query != ROWS_QUERY:
        raise StructuralError(f"unknown CSV iterator query: {query!r} (only {ROWS_QUERY!r} exists)")
    return table.rows


def select_values(table: CsvTable, row: Row, column: str) -> list[str]:
    """The cell of *row* under *column* as a singleton, or [] if absent."""
    i = table.column_index(column)
    if i is None:
        return []
    return [row[i]]


def cast_value(value: str) -> Literal:
    """Cast a raw cell to a term; for CSV this is always an xsd:string literal."""
    return Literal(value)


class CsvSource:
    """Adapter bundling the CSV operations behind the source-type interface."""

    kind = CSV_KIND

    parse = staticmethod(parse_csv)
    enumerate = staticmethod(enumerate_rows)
    select = staticmethod(select_values)
    cast = staticmethod(cast_value)
