"""Exception types shared across the querydeck modules."""

from __future__ import annotations


class QuerydeckError(Exception):
    """Base class for all querydeck errors."""


class SpsSyntaxError(QuerydeckError):
    """Raised when SPS source text cannot be parsed.

    Carries the byte offset of the failure and a short description of what
    was expected there.
    """

    def __init__(self, message: str, position: int, expected: str | None = None):
        self.position = position
        self.expected = expected
        super().__init__(f"{message} at offset {position}")


class MalformedCsv(QuerydeckError):
    """CSV payload violates RFC-4180 framing (line number is 1-based)."""

    def __init__(self, line: int, message: str = "malformed CSV"):
        self.line = line
        super().__init__(f"{message} at line {line}")


class EmptyTable(QuerydeckError):
    """CSV payload contains a header but no data rows."""


class EmptyCatalog(QuerydeckError):
    """Operation requires at least one ingested table."""


class UnknownColumn(QuerydeckError):
    """Referenced table or column does not exist in the catalog."""


class SqlError(QuerydeckError):
    """The embedded engine rejected a concrete SQL statement."""


class EmptyDomain(QuerydeckError):
    """A domain reference resolved to a column with no non-null values."""

    def __init__(self, node_id: int, attribute: str):
        self.node_id = node_id
        self.attribute = attribute
        super().__init__(f"empty domain for &{attribute} (node {node_id})")


class IncompleteAssignment(QuerydeckError):
    """A reachable choice node has no selection."""

    def __init__(self, node_id: int):
        self.node_id = node_id
        super().__init__(f"no selection for reachable node {node_id}")


class SelectionOutOfRange(QuerydeckError):
    """A selection does not fit its node (bad index, value, or variant)."""

    def __init__(self, node_id: int, message: str):
        self.node_id = node_id
        super().__init__(f"node {node_id}: {message}")


class EmptyBank(QuerydeckError):
    """The example bank has no entries."""


class BankParseError(QuerydeckError):
    """An example-bank file is malformed or contains an unparseable SPS."""

    def __init__(self, entry_index: int, message: str):
        self.entry_index = entry_index
        super().__init__(f"bank entry {entry_index}: {message}")


class BackendUnavailable(QuerydeckError):
    """The configured LLM backend could not be reached."""


class TranslationFailed(QuerydeckError):
    """Every query in a translation batch exhausted its attempts."""

    def __init__(self, nl: str, diagnostics: list):
        self.nl = nl
        self.diagnostics = diagnostics
        super().__init__(f"translation failed for {nl!r}")
