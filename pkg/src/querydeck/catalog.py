"""Dataset catalog: CSV ingestion, semantic typing, domains, SQL execution.

Tables live in an embedded SQLite database.  Column semantics are inferred
at ingest time (quantitative / temporal / geographic / categorical) and
drive visualization choice downstream.  The SPS convenience function
``today()`` is rewritten to a quoted ISO date from the injected clock
before any statement reaches the engine, so date arithmetic is
deterministic under a pinned clock.
"""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
import sqlite3
import threading
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from typing import Callable, Iterable

from .errors import EmptyCatalog, EmptyTable, MalformedCsv, SqlError, UnknownColumn

NUMERIC_SHARE = 0.95
TEMPORAL_SHARE = 0.95
GEOGRAPHIC_SHARE = 0.80

_IDENT_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
_TODAY_RE = re.compile(r"\btoday\s*\(\s*\)", re.IGNORECASE)
_AGGREGATE_RE = re.compile(r"^\s*(\w+)\s*\(\s*(distinct\s+)?([\w.*]+)\s*\)\s*$", re.IGNORECASE)

Clock = Callable[[], dt.date]


def fixed_clock(iso_date: str) -> Clock:
    """Clock pinned to one ISO date, for reproducible runs."""
    pinned = dt.date.fromisoformat(iso_date)
    return lambda: pinned


class StorageType(Enum):
    TEXT = "text"
    INTEGER = "integer"
    REAL = "real"
    DATE = "date"


class SemanticType(Enum):
    CATEGORICAL = "categorical"
    QUANTITATIVE = "quantitative"
    TEMPORAL = "temporal"
    GEOGRAPHIC = "geographic"


@dataclass
class ColumnInfo:
    name: str
    storage_type: StorageType
    semantic_type: SemanticType


@dataclass
class TableSchema:
    name: str
    columns: list[ColumnInfo]
    row_count: int

    def column(self, name: str) -> ColumnInfo:
        want = name.lower()
        for col in self.columns:
            if col.name.lower() == want:
                return col
        raise UnknownColumn(f"{self.name}.{name}")


@dataclass
class ResultColumn:
    name: str
    semantic_type: SemanticType


@dataclass
class ResultTable:
    columns: list[ResultColumn]
    rows: list[tuple]

    @property
    def column_names(self) -> list[str]:
        return [c.name for c in self.columns]


def default_region_names() -> list[str]:
    """US state names, the default geographic signal."""
    text = resources.files("querydeck.data").joinpath("us_states.txt").read_text()
    return [line.strip() for line in text.splitlines() if line.strip()]


def load_region_names(path: str) -> list[str]:
    with open(path, encoding="utf-8") as f:
        return [line.strip() for line in f if line.strip()]


def _parse_number(value: str) -> float | None:
    try:
        return float(value)
    except ValueError:
        return None


def _parse_iso_date(value: str) -> dt.date | None:
    if not re.match(r"^\d{4}-\d{2}-\d{2}$", value):
        return None
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        return None


def rewrite_today(sql: str, clock: Clock) -> str:
    """Replace ``today()`` calls (outside string literals) with a quoted ISO date."""
    from .sps_grammar import mask_quoted

    masked = mask_quoted(sql)
    out = []
    pos = 0
    for m in _TODAY_RE.finditer(masked):
        out.append(sql[pos:m.start()])
        out.append(f"'{clock().isoformat()}'")
        pos = m.end()
    out.append(sql[pos:])
    return "".join(out)


class DatasetCatalog:
    """Ingested tables plus an embedded SQL execution surface.

    Engine access is serialized behind one lock; ingest additionally
    invalidates the table's cached domains.  The clock is read-only shared
    state injected at construction.
    """

    def __init__(self, clock: Clock | None = None, region_names: Iterable[str] | None = None):
        self._conn = sqlite3.connect(":memory:", check_same_thread=False)
        self._lock = threading.RLock()
        self.clock: Clock = clock or dt.date.today
        regions = list(region_names) if region_names is not None else default_region_names()
        self._regions = {r.lower() for r in regions}
        self._schemas: dict[str, TableSchema] = {}
        self._domain_cache: dict[tuple[str, str], list] = {}

    # -- schema access -----------------------------------------------------

    @property
    def tables(self) -> list[TableSchema]:
        return [self._schemas[name] for name in sorted(self._schemas)]

    def table(self, name: str) -> TableSchema:
        try:
            return self._schemas[name]
        except KeyError:
            raise UnknownColumn(f"unknown table {name!r}") from None

    def has_table(self, name: str) -> bool:
        return name in self._schemas

    # -- ingestion ---------------------------------------------------------

    def ingest_csv(self, name: str, payload: bytes | str) -> TableSchema:
        """Create or replace a table from an RFC-4180 CSV payload.

        Semantic types: quantitative when >=95% of non-null values parse
        numeric; temporal when >=95% parse as ISO dates; geographic when
        categorical and >=80% of distinct values match the region list;
        categorical otherwise.
        """
        if not _IDENT_RE.match(name):
            raise ValueError(f"invalid table name {name!r}")
        text = payload.decode("utf-8-sig") if isinstance(payload, bytes) else payload
        try:
            reader = csv.reader(io.StringIO(text))
            records = list(reader)
        except csv.Error as exc:
            raise MalformedCsv(getattr(reader, "line_num", 0), str(exc)) from exc
        if not records or not any(h.strip() for h in records[0]):
            raise EmptyTable("missing header row")
        header = [h.strip() for h in records[0]]
        if any(not h for h in header) or len(set(header)) != len(header):
            raise MalformedCsv(1, "blank or duplicate column names")
        rows = records[1:]
        if not rows:
            raise EmptyTable(f"table {name!r} has no data rows")
        for i, row in enumerate(rows, start=2):
            if len(row) != len(header):
                raise MalformedCsv(i, f"expected {len(header)} fields, got {len(row)}")

        columns = [
            self._infer_column(header[j], [row[j] for row in rows])
            for j in range(len(header))
        ]
        schema = TableSchema(name=name, columns=columns, row_count=len(rows))
        with self._lock:
            self._create_table(schema, rows)
            self._schemas[name] = schema
            self._invalidate_domains(name)
        return schema

    def _infer_column(self, name: str, values: list[str]) -> ColumnInfo:
        non_null = [v for v in values if v != ""]
        if not non_null:
            return ColumnInfo(name, StorageType.TEXT, SemanticType.CATEGORICAL)
        numbers = [_parse_number(v) for v in non_null]
        numeric = [n for n in numbers if n is not None]
        if len(numeric) >= NUMERIC_SHARE * len(non_null):
            all_int = all(n == int(n) and "." not in v and "e" not in v.lower()
                          for n, v in zip(numbers, non_null) if n is not None)
            storage = StorageType.INTEGER if all_int else StorageType.REAL
            return ColumnInfo(name, storage, SemanticType.QUANTITATIVE)
        dates = [v for v in non_null if _parse_iso_date(v) is not None]
        if len(dates) >= TEMPORAL_SHARE * len(non_null):
            return ColumnInfo(name, StorageType.DATE, SemanticType.TEMPORAL)
        distinct = {v.lower() for v in non_null}
        matches = sum(1 for v in distinct if v in self._regions)
        if distinct and matches >= GEOGRAPHIC_SHARE * len(distinct):
            return ColumnInfo(name, StorageType.TEXT, SemanticType.GEOGRAPHIC)
        return ColumnInfo(name, StorageType.TEXT, SemanticType.CATEGORICAL)

    def _create_table(self, schema: TableSchema, rows: list[list[str]]):
        ddl_types = {
            StorageType.TEXT: "TEXT",
            StorageType.DATE: "TEXT",
            StorageType.INTEGER: "INTEGER",
            StorageType.REAL: "REAL",
        }
        cols = ", ".join(f'"{c.name}" {ddl_types[c.storage_type]}' for c in schema.columns)
        cur = self._conn.cursor()
        cur.execute(f'DROP TABLE IF EXISTS "{schema.name}"')
        cur.execute(f'CREATE TABLE "{schema.name}" ({cols})')
        placeholders = ", ".join("?" for _ in schema.columns)
        converted = [
            tuple(
                self._convert(cell, col.storage_type)
                for cell, col in zip(row, schema.columns)
            )
            for row in rows
        ]
        cur.executemany(f'INSERT INTO "{schema.name}" VALUES ({placeholders})', converted)
        self._conn.commit()

    @staticmethod
    def _convert(cell: str, storage: StorageType):
        if cell == "":
            return None
        if storage is StorageType.INTEGER:
            try:
                return int(cell)
            except ValueError:
                return cell
        if storage is StorageType.REAL:
            try:
                return float(cell)
            except ValueError:
                return cell
        return cell

    def _invalidate_domains(self, table: str):
        for key in [k for k in self._domain_cache if k[0] == table]:
            del self._domain_cache[key]

    # -- domains -----------------------------------------------------------

    def attribute_domain(self, table: str, column: str) -> list:
        """Distinct non-null values of a column, ascending, cached until re-ingest."""
        schema = self.table(table)
        col = schema.column(column)
        key = (table, col.name)
        if key not in self._domain_cache:
            with self._lock:
                cur = self._conn.execute(
                    f'SELECT DISTINCT "{col.name}" FROM "{table}" '
                    f'WHERE "{col.name}" IS NOT NULL ORDER BY "{col.name}"'
                )
                self._domain_cache[key] = [row[0] for row in cur.fetchall()]
        return list(self._domain_cache[key])

    # -- execution ---------------------------------------------------------

    def execute_sql(self, sql: str) -> ResultTable:
        """Run one concrete SQL statement and propagate semantic types.

        Aggregates over quantitative columns stay quantitative; group-by
        keys keep their source semantic type; anything unrecognized is
        inferred from the result values.
        """
        rewritten = rewrite_today(sql, self.clock)
        with self._lock:
            try:
                cur = self._conn.execute(rewritten)
                rows = [tuple(row) for row in cur.fetchall()]
                names = [d[0] for d in cur.description] if cur.description else []
            except sqlite3.Error as exc:
                raise SqlError(str(exc)) from exc
        columns = [
            ResultColumn(name, self._result_semantic_type(name, [r[i] for r in rows], sql))
            for i, name in enumerate(names)
        ]
        return ResultTable(columns=columns, rows=rows)

    def _result_semantic_type(self, name: str, values: list, sql: str) -> SemanticType:
        direct = self._lookup_column(name, sql)
        if direct is not None:
            return direct.semantic_type
        m = _AGGREGATE_RE.match(name)
        if m:
            func, inner = m.group(1).lower(), m.group(3)
            if func in ("count", "sum", "avg", "total"):
                return SemanticType.QUANTITATIVE
            if func in ("min", "max"):
                inner_col = self._lookup_column(inner, sql)
                if inner_col is not None:
                    return inner_col.semantic_type
        return self._infer_from_values(values)

    def _lookup_column(self, name: str, sql: str) -> ColumnInfo | None:
        from .sps_grammar import mask_quoted

        masked = mask_quoted(sql).lower()
        ordered = []
        for table in self.tables:
            m = re.search(rf"\b{re.escape(table.name.lower())}\b", masked)
            if m:
                ordered.append((m.start(), table))
        for _, table in sorted(ordered, key=lambda p: p[0]):
            for col in table.columns:
                if col.name.lower() == name.lower():
                    return col
        for table in self.tables:
            for col in table.columns:
                if col.name.lower() == name.lower():
                    return col
        return None

    def _infer_from_values(self, values: list) -> SemanticType:
        non_null = [v for v in values if v is not None]
        if not non_null:
            return SemanticType.CATEGORICAL
        if all(isinstance(v, (int, float)) for v in non_null):
            return SemanticType.QUANTITATIVE
        strings = [str(v) for v in non_null]
        if sum(1 for v in strings if _parse_iso_date(v)) >= TEMPORAL_SHARE * len(strings):
            return SemanticType.TEMPORAL
        distinct = {v.lower() for v in strings}
        if sum(1 for v in distinct if v in self._regions) >= GEOGRAPHIC_SHARE * len(distinct):
            return SemanticType.GEOGRAPHIC
        return SemanticType.CATEGORICAL

    # -- prompting ---------------------------------------------------------

    def schema_text(self) -> str:
        """One line per table, ``table(col:type, ...)``, in table-name order."""
        if not self._schemas:
            raise EmptyCatalog("no tables ingested")
        render = {
            StorageType.TEXT: "text",
            StorageType.INTEGER: "int",
            StorageType.REAL: "real",
            StorageType.DATE: "date",
        }
        lines = []
        for schema in self.tables:
            cols = ", ".join(f"{c.name}:{render[c.storage_type]}" for c in schema.columns)
            lines.append(f"{schema.name}({cols})")
        return "\n".join(lines)
