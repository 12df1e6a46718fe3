"""CSV parsing and the row/selector/cast source interface."""

import pytest

from rmlprune.csvsource import (
    CSV_KIND,
    ROWS_QUERY,
    CsvSource,
    cast_value,
    enumerate_rows,
    parse_csv,
    select_values,
)
from rmlprune.errors import CsvError, StructuralError
from rmlprune.rdf import XSD_STRING, Literal


def test_parse_simple():
    table = parse_csv("a,b\n1,2\n3,4\n")
    assert table.header == ("a", "b")
    assert table.rows == (("1", "2"), ("3", "4"))


def test_parse_bytes_with_bom():
    table = parse_csv("﻿a,b\n1,2\n".encode("utf-8"))
    assert table.header == ("a", "b")


def test_parse_quoted_fields():
    table = parse_csv('a,b\n"x,y","line\nbreak"\n"he said ""hi""",z\n')
    assert table.rows == (("x,y", "line\nbreak"), ('he said "hi"', "z"))


def test_parse_header_only():
    table = parse_csv("a,b\n")
    assert table.rows == ()


def test_parse_missing_header():
    with pytest.raises(CsvError, match="header"):
        parse_csv("")


def test_parse_duplicate_header():
    with pytest.raises(CsvError, match="[Dd]uplicate"):
        parse_csv("a,a\n1,2\n")


def test_parse_empty_header_name():
    with pytest.raises(CsvError):
        parse_csv("a,\n1,2\n")


def test_parse_ragged_row_reports_record_number():
    with pytest.raises(CsvError, match="row 3"):
        parse_csv("a,b\n1,2\n1\n")


def test_enumerate_rows_only_supports_rows_query():
    table = parse_csv("a\n1\n2\n")
    assert enumerate_rows(table, ROWS_QUERY) == (("1",), ("2",))
    with pytest.raises(StructuralError):
        enumerate_rows(table, "columns")


def test_select_values_singleton_or_empty():
    table = parse_csv("a,b\nx,y\n")
    row = table.rows[0]
    assert select_values(table, row, "a") == ["x"]
    assert select_values(table, row, "b") == ["y"]
    assert select_values(table, row, "missing") == []


def test_select_preserves_empty_cells():
    table = parse_csv("a,b\n,y\n")
    assert select_values(table, table.rows[0], "a") == [""]


def test_cast_always_builds_string_literals():
    assert cast_value("42") == Literal("42", XSD_STRING)
    assert cast_value("") == Literal("")


def test_source_adapter():
    assert CsvSource.kind == CSV_KIND
    table = CsvSource.parse("a\nv\n")
    rows = CsvSource.enumerate(table, ROWS_QUERY)
    assert CsvSource.select(table, rows[0], "a") == ["v"]
    assert CsvSource.cast("v") == Literal("v")
