"""Parser, printer, and structural analysis for SPS (structurally parameterized SQL).

SPS is plain SQL text extended with three kinds of choice nodes:

    ANY{c1,..,ck}        choose one of k fragments
    ANY{num1-num2}       choose a numeric value in [num1, num2]
    ANY{&attr}           choose one distinct value of column attr
    SUBSET[sep]{c1,..,ck} choose a non-empty subset, joined by sep
    SUBSET[sep]{&attr}   choose a non-empty subset of attr's distinct values
    OPT{t}               include t or omit it

Choice-node keywords are case-sensitive uppercase and are ignored inside
SQL string literals.  Literal braces and ampersands are written ``\\{``,
``\\}``, ``\\&``.  Fragments may nest further choice nodes.

Templates parse into a tree of literal text segments and choice nodes whose
spans tile the source exactly, so printing a parsed template reproduces its
source byte-for-byte.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import SpsSyntaxError

Span = tuple[int, int]

_DOMAIN_REF_RE = re.compile(r"^\s*&([A-Za-z_][A-Za-z0-9_]*)\s*$")
_NUMERIC_RANGE_RE = re.compile(r"^\s*(-?\d+(?:\.\d+)?)\s*-\s*(-?\d+(?:\.\d+)?)\s*$")
_SELECT_RE = re.compile(r"^\s*select\b", re.IGNORECASE)
_CLAUSE_KEYWORD_RE = re.compile(
    r"\b(select|from|join|on|where|having|group|order|limit)\b", re.IGNORECASE
)


class ChoiceKind(Enum):
    ANY = "any"
    SUBSET = "subset"
    OPT = "opt"


class SqlKind(Enum):
    SELECT_QUERY = "select_query"


class ClauseContext(Enum):
    """Clause a node sits in, per the nearest preceding clause keyword."""

    PROJECTION = "projection"
    PREDICATE = "predicate"
    GROUP_BY = "group_by"
    ORDER_BY = "order_by"
    LIMIT = "limit"
    OTHER = "other"


_KEYWORD_CONTEXT = {
    "select": ClauseContext.PROJECTION,
    "where": ClauseContext.PREDICATE,
    "having": ClauseContext.PREDICATE,
    "on": ClauseContext.PREDICATE,
    "group": ClauseContext.GROUP_BY,
    "order": ClauseContext.ORDER_BY,
    "limit": ClauseContext.LIMIT,
    "from": ClauseContext.OTHER,
    "join": ClauseContext.OTHER,
}


@dataclass
class Literal:
    """A run of raw SQL text (escapes preserved)."""

    text: str
    span: Span


@dataclass
class NodeRef:
    """Placeholder for a choice node within a segment list."""

    node_id: int


Segment = Literal | NodeRef


@dataclass
class Fragments:
    """An explicit list of choice fragments, each a segment list."""

    fragments: list[list[Segment]]


@dataclass
class NumericRange:
    """A continuous numeric choice between lo and hi (inclusive)."""

    lo: float
    hi: float
    raw: str


@dataclass
class DomainRef:
    """A reference to all distinct values of a catalog column."""

    attribute: str
    raw: str


ChoiceBody = Fragments | NumericRange | DomainRef


@dataclass
class ChoiceNode:
    id: int
    kind: ChoiceKind
    body: ChoiceBody
    span: Span
    depth: int
    parent: int | None
    separator: str | None = None  # SUBSET only, non-empty


@dataclass
class SpsTemplate:
    """A parsed SPS program: literal segments interleaved with choice nodes.

    ``root`` holds the top-level segments; ``nodes`` is indexed by node id.
    Ids are dense, assigned in source order with outer nodes before inner.
    Templates are immutable after parse and safe to share between threads.
    """

    source: str
    root: list[Segment] = field(default_factory=list)
    nodes: list[ChoiceNode] = field(default_factory=list)
    sql_kind: SqlKind = SqlKind.SELECT_QUERY

    def node(self, node_id: int) -> ChoiceNode:
        return self.nodes[node_id]


@dataclass
class NodePosition:
    node_id: int
    context: ClauseContext


@dataclass
class Diagnostic:
    """A validation finding (never raised; collected and returned)."""

    kind: str  # unresolved_domain_ref | empty_domain | execution_error
    message: str
    node_id: int | None = None
    sql: str | None = None


class _Scanner:
    """Single-pass recursive scanner over SPS source text.

    Tracks quote state and bracket depth so commas split fragments only at
    the top level of a body, and choice keywords inside string literals stay
    literal text.
    """

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.nodes: list[ChoiceNode] = []

    def fail(self, message: str, position: int | None = None, expected: str | None = None):
        raise SpsSyntaxError(message, self.pos if position is None else position, expected)

    def at_choice_token(self) -> ChoiceKind | None:
        t, i = self.text, self.pos
        if t.startswith("ANY{", i):
            return ChoiceKind.ANY
        if t.startswith("SUBSET[", i):
            return ChoiceKind.SUBSET
        if t.startswith("OPT{", i):
            return ChoiceKind.OPT
        return None

    def parse_fragments(
        self, terminator: str | None, split_commas: bool, depth: int, parent: int | None
    ) -> list[list[Segment]]:
        """Scan segments until ``terminator`` at local bracket depth 0.

        Returns one fragment per top-level comma when ``split_commas``,
        otherwise a single fragment.  Consumes the terminator.
        """
        t = self.text
        fragments: list[list[Segment]] = [[]]
        lit_start = self.pos
        body_start = self.pos
        round_d = square_d = brace_d = 0
        quote: str | None = None

        def flush():
            if self.pos > lit_start:
                fragments[-1].append(Literal(t[lit_start:self.pos], (lit_start, self.pos)))

        while self.pos < len(t):
            ch = t[self.pos]
            if quote is not None:
                if ch == quote:
                    quote = None
                self.pos += 1
                continue
            if ch == "\\" and self.pos + 1 < len(t) and t[self.pos + 1] in "{}&":
                self.pos += 2
                continue
            if ch in "'\"":
                quote = ch
                self.pos += 1
                continue
            kind = self.at_choice_token()
            if kind is not None:
                flush()
                node = self.parse_node(kind, depth, parent)
                fragments[-1].append(NodeRef(node.id))
                lit_start = self.pos
                continue
            if round_d == square_d == brace_d == 0:
                if terminator is not None and ch == terminator:
                    flush()
                    self.pos += 1
                    return fragments
                if split_commas and ch == ",":
                    flush()
                    self.pos += 1
                    fragments.append([])
                    lit_start = self.pos
                    continue
            if ch == "(":
                round_d += 1
            elif ch == ")":
                round_d = max(0, round_d - 1)
            elif ch == "[":
                square_d += 1
            elif ch == "]":
                square_d = max(0, square_d - 1)
            elif ch == "{":
                brace_d += 1
            elif ch == "}":
                if brace_d == 0:
                    self.fail("unbalanced '}'", self.pos)
                brace_d -= 1
            self.pos += 1

        if terminator is not None:
            self.fail("unbalanced choice node", body_start, expected=terminator)
        if quote is not None:
            self.fail("unterminated string literal", body_start)
        if brace_d > 0:
            self.fail("unbalanced '{'", body_start)
        flush()
        return fragments

    def parse_node(self, kind: ChoiceKind, depth: int, parent: int | None) -> ChoiceNode:
        start = self.pos
        node_id = len(self.nodes)
        # Reserve the id before descending so outer nodes number before inner.
        placeholder = ChoiceNode(node_id, kind, Fragments([]), (start, start), depth, parent)
        self.nodes.append(placeholder)

        separator: str | None = None
        if kind is ChoiceKind.ANY:
            self.pos += len("ANY{")
        elif kind is ChoiceKind.OPT:
            self.pos += len("OPT{")
        else:
            self.pos += len("SUBSET[")
            sep_start = self.pos
            end = self.text.find("]", self.pos)
            if end < 0:
                self.fail("unterminated SUBSET separator", sep_start, expected="]")
            separator = self.text[sep_start:end]
            if not separator:
                self.fail("missing SUBSET separator", sep_start)
            self.pos = end + 1
            if self.pos >= len(self.text) or self.text[self.pos] != "{":
                self.fail("expected '{' after SUBSET separator", self.pos, expected="{")
            self.pos += 1

        body_start = self.pos
        split = kind is not ChoiceKind.OPT
        fragments = self.parse_fragments("}", split, depth + 1, node_id)
        body = self._classify_body(kind, fragments, body_start)

        placeholder.body = body
        placeholder.separator = separator
        placeholder.span = (start, self.pos)
        return placeholder

    def _classify_body(
        self, kind: ChoiceKind, fragments: list[list[Segment]], body_start: int
    ) -> ChoiceBody:
        if len(fragments) == 1 and not fragments[0]:
            self.fail(f"empty {kind.name} body", body_start)
        for frag in fragments:
            if not any(isinstance(s, NodeRef) for s in frag):
                raw = "".join(s.text for s in frag if isinstance(s, Literal))
                if not raw.strip():
                    self.fail(f"empty choice in {kind.name} body", body_start)

        if len(fragments) == 1 and all(isinstance(s, Literal) for s in fragments[0]):
            raw = "".join(s.text for s in fragments[0])
            m = _DOMAIN_REF_RE.match(raw)
            if m and kind is not ChoiceKind.OPT:
                return DomainRef(attribute=m.group(1), raw=raw)
            if kind is ChoiceKind.ANY:
                m = _NUMERIC_RANGE_RE.match(raw)
                if m:
                    lo, hi = float(m.group(1)), float(m.group(2))
                    if lo > hi:
                        self.fail(f"malformed range: {lo} > {hi}", body_start)
                    return NumericRange(lo=lo, hi=hi, raw=raw)
        return Fragments(fragments)


def parse_sps(text: str) -> SpsTemplate:
    """Parse SPS source text into a template.

    Raises SpsSyntaxError (with a byte offset) on unbalanced braces, empty
    choice bodies, a missing SUBSET separator, or a malformed numeric range.
    """
    if not text:
        raise SpsSyntaxError("empty SPS source", 0)
    if not _SELECT_RE.match(text) and not text.lstrip().startswith(("ANY{", "SUBSET[", "OPT{")):
        offset = len(text) - len(text.lstrip())
        raise SpsSyntaxError("expected a select query", offset, expected="select")
    scanner = _Scanner(text)
    fragments = scanner.parse_fragments(None, split_commas=False, depth=0, parent=None)
    return SpsTemplate(source=text, root=fragments[0], nodes=scanner.nodes)


def print_sps(template: SpsTemplate) -> str:
    """Render a template back to SPS text.

    For templates produced by parse_sps the output equals the original
    source byte-for-byte.
    """
    return print_segments(template, template.root)


def print_segments(template: SpsTemplate, segments: list[Segment]) -> str:
    parts = []
    for seg in segments:
        if isinstance(seg, Literal):
            parts.append(seg.text)
        else:
            parts.append(_print_node(template, template.node(seg.node_id)))
    return "".join(parts)


def _print_node(template: SpsTemplate, node: ChoiceNode) -> str:
    body = node.body
    if isinstance(body, Fragments):
        inner = ",".join(print_segments(template, frag) for frag in body.fragments)
    else:
        inner = body.raw
    if node.kind is ChoiceKind.ANY:
        return f"ANY{{{inner}}}"
    if node.kind is ChoiceKind.OPT:
        return f"OPT{{{inner}}}"
    return f"SUBSET[{node.separator}]{{{inner}}}"


def mask_quoted(text: str) -> str:
    """Replace the contents of string literals with spaces (length-preserving)."""
    out = list(text)
    quote: str | None = None
    for i, ch in enumerate(text):
        if quote is not None:
            if ch == quote:
                quote = None
            else:
                out[i] = " "
        elif ch in "'\"":
            quote = ch
    return "".join(out)


def iter_literals(template: SpsTemplate) -> list[Literal]:
    """All literal segments anywhere in the template, in source order."""
    found: list[Literal] = []

    def walk(segments: list[Segment]):
        for seg in segments:
            if isinstance(seg, Literal):
                found.append(seg)
            else:
                body = template.node(seg.node_id).body
                if isinstance(body, Fragments):
                    for frag in body.fragments:
                        walk(frag)

    walk(template.root)
    found.sort(key=lambda lit: lit.span[0])
    return found


def node_context(template: SpsTemplate, node: ChoiceNode) -> ClauseContext:
    """Clause context from the last clause keyword preceding the node's span."""
    prefix = "".join(
        lit.text for lit in iter_literals(template) if lit.span[0] < node.span[0]
    )
    last = None
    for m in _CLAUSE_KEYWORD_RE.finditer(mask_quoted(prefix)):
        last = m.group(1).lower()
    if last is None:
        return ClauseContext.OTHER
    return _KEYWORD_CONTEXT[last]


def list_choice_nodes(template: SpsTemplate) -> list[tuple[ChoiceNode, NodePosition]]:
    """All choice nodes in source order, with their clause positions."""
    return [
        (node, NodePosition(node.id, node_context(template, node)))
        for node in template.nodes
    ]


def parent_fragment_map(template: SpsTemplate) -> dict[int, tuple[int, int]]:
    """Map child node id -> (parent node id, index of the parent fragment holding it)."""
    out: dict[int, tuple[int, int]] = {}
    for node in template.nodes:
        if isinstance(node.body, Fragments):
            for frag_idx, frag in enumerate(node.body.fragments):
                for seg in frag:
                    if isinstance(seg, NodeRef):
                        out[seg.node_id] = (node.id, frag_idx)
    return out


def fragment_plain_text(template: SpsTemplate, fragment: list[Segment]) -> str:
    """Raw text of one fragment with nested nodes rendered back to SPS syntax."""
    return print_segments(template, fragment)


def fragment_label(template: SpsTemplate, fragment: list[Segment]) -> str:
    """Trimmed fragment text, used for widget option labels."""
    return fragment_plain_text(template, fragment).strip()


def check_span_partition(template: SpsTemplate) -> bool:
    """True when literal and node spans tile the source with no gaps or overlaps."""

    def covers(segments: list[Segment], start: int, end: int) -> bool:
        pos = start
        for seg in segments:
            span = (
                seg.span if isinstance(seg, Literal) else template.node(seg.node_id).span
            )
            if span[0] != pos:
                return False
            if isinstance(seg, NodeRef):
                node = template.node(seg.node_id)
                if isinstance(node.body, Fragments):
                    for frag in node.body.fragments:
                        if frag and not _frag_contiguous(template, frag):
                            return False
            pos = span[1]
        return pos == end

    def _frag_contiguous(tmpl: SpsTemplate, frag: list[Segment]) -> bool:
        spans = [
            seg.span if isinstance(seg, Literal) else tmpl.node(seg.node_id).span
            for seg in frag
        ]
        return all(spans[i][1] == spans[i + 1][0] for i in range(len(spans) - 1))

    return covers(template.root, 0, len(template.source))


def resolve_domain_ref(
    template: SpsTemplate, attribute: str, catalog
) -> tuple[str, str] | None:
    """Resolve a ``&attr`` reference to a (table, column) pair.

    Tables mentioned in the template text are preferred, in order of
    appearance; remaining catalog tables are tried in name order.  Matching
    is case-insensitive; the catalog's own spelling is returned.
    """
    masked = mask_quoted(template.source).lower()
    mentioned: list[tuple[int, str]] = []
    for table in catalog.tables:
        m = re.search(rf"\b{re.escape(table.name.lower())}\b", masked)
        if m:
            mentioned.append((m.start(), table.name))
    ordered = [name for _, name in sorted(mentioned)]
    ordered += sorted(t.name for t in catalog.tables if t.name not in ordered)
    want = attribute.lower()
    for table_name in ordered:
        schema = catalog.table(table_name)
        for col in schema.columns:
            if col.name.lower() == want:
                return table_name, col.name
    return None


def validate_template(template: SpsTemplate, catalog, cap: int = 200) -> list[Diagnostic]:
    """Check a template against a catalog without raising.

    Empty iff every domain reference resolves and every enumerated concrete
    query (up to ``cap`` assignments) executes on the catalog's engine.
    """
    from . import instantiator  # deferred: instantiator imports this module

    from .errors import EmptyDomain, SqlError

    diagnostics: list[Diagnostic] = []
    for node in template.nodes:
        if isinstance(node.body, DomainRef):
            resolved = resolve_domain_ref(template, node.body.attribute, catalog)
            if resolved is None:
                diagnostics.append(
                    Diagnostic(
                        kind="unresolved_domain_ref",
                        message=f"&{node.body.attribute} does not match any catalog column",
                        node_id=node.id,
                    )
                )
    if diagnostics:
        return diagnostics

    try:
        for assignment in instantiator.enumerate_assignments(template, catalog, cap):
            sql = instantiator.instantiate(template, assignment, catalog)
            try:
                catalog.execute_sql(sql)
            except SqlError as exc:
                diagnostics.append(
                    Diagnostic(
                        kind="execution_error",
                        message=f"assignment {assignment.describe()}: {exc}",
                        sql=sql,
                    )
                )
    except EmptyDomain as exc:
        diagnostics.append(
            Diagnostic(kind="empty_domain", message=str(exc), node_id=exc.node_id)
        )
    return diagnostics
