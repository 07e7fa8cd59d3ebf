"""Turn (template, assignment) pairs into concrete SQL and size the query space.

An assignment maps node ids to selections for every *reachable* node: a node
is reachable when each ancestor Opt is on and each ancestor Any/Subset has
selected the fragment holding it.  Instantiation substitutes selections,
trims substituted fragments, prunes dangling AND/OR (or commas, in list
contexts) left behind by omitted Opt fragments, deletes WHERE/HAVING
keywords whose clause became empty, and rewrites today() per the catalog
clock.  All functions here are pure over immutable inputs.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .catalog import DatasetCatalog, StorageType, rewrite_today
from .errors import EmptyDomain, IncompleteAssignment, SelectionOutOfRange
from .sps_grammar import (
    ChoiceKind,
    ChoiceNode,
    ClauseContext,
    DomainRef,
    Fragments,
    Literal,
    NodeRef,
    NumericRange,
    Segment,
    SpsTemplate,
    mask_quoted,
    node_context,
    parent_fragment_map,
    resolve_domain_ref,
)


@dataclass(frozen=True)
class Index:
    """Pick fragment i of an ANY node."""

    index: int


@dataclass(frozen=True)
class Value:
    """Pick one domain value of an ANY node with a &attr body."""

    value: object


@dataclass(frozen=True)
class Number:
    """Pick a number within an ANY numeric range."""

    number: float


@dataclass(frozen=True)
class IndexSet:
    """Pick a non-empty set of fragment indices of a SUBSET node."""

    indices: tuple[int, ...]


@dataclass(frozen=True)
class ValueSet:
    """Pick a non-empty set of domain values of a SUBSET node."""

    values: tuple


@dataclass(frozen=True)
class OptSwitch:
    """Turn an OPT node on or off."""

    on: bool


Selection = Index | Value | Number | IndexSet | ValueSet | OptSwitch


@dataclass
class ChoiceAssignment:
    """Total selection map over the reachable nodes of one template."""

    selections: dict[int, Selection]

    def describe(self) -> str:
        parts = []
        for nid in sorted(self.selections):
            sel = self.selections[nid]
            parts.append(f"{nid}={_describe_selection(sel)}")
        return "{" + ", ".join(parts) + "}"


def _describe_selection(sel: Selection) -> str:
    if isinstance(sel, Index):
        return f"index:{sel.index}"
    if isinstance(sel, Value):
        return f"value:{sel.value!r}"
    if isinstance(sel, Number):
        return f"number:{sel.number}"
    if isinstance(sel, IndexSet):
        return f"indices:{list(sel.indices)}"
    if isinstance(sel, ValueSet):
        return f"values:{list(sel.values)}"
    return "on" if sel.on else "off"


@dataclass
class QuerySpaceSize:
    """Number of concrete queries a template represents."""

    count: int | None
    continuous: bool = False


def node_domain(template: SpsTemplate, node: ChoiceNode, catalog: DatasetCatalog) -> list:
    """Resolved attribute domain for a &attr node body."""
    body = node.body
    assert isinstance(body, DomainRef)
    resolved = resolve_domain_ref(template, body.attribute, catalog)
    if resolved is None:
        raise EmptyDomain(node.id, body.attribute)
    return catalog.attribute_domain(*resolved)


def domain_storage_type(
    template: SpsTemplate, node: ChoiceNode, catalog: DatasetCatalog
) -> StorageType:
    body = node.body
    assert isinstance(body, DomainRef)
    resolved = resolve_domain_ref(template, body.attribute, catalog)
    if resolved is None:
        raise EmptyDomain(node.id, body.attribute)
    table, column = resolved
    return catalog.table(table).column(column).storage_type


def is_reachable(
    node_id: int,
    selections: dict[int, Selection],
    template: SpsTemplate,
    pmap: dict[int, tuple[int, int]] | None = None,
) -> bool:
    """True when every ancestor of the node selects the branch holding it."""
    if pmap is None:
        pmap = parent_fragment_map(template)
    link = pmap.get(node_id)
    while link is not None:
        parent_id, frag_idx = link
        parent = template.node(parent_id)
        sel = selections.get(parent_id)
        if parent.kind is ChoiceKind.OPT:
            if not (isinstance(sel, OptSwitch) and sel.on):
                return False
        elif parent.kind is ChoiceKind.ANY:
            if not (isinstance(sel, Index) and sel.index == frag_idx):
                return False
        else:
            if not (isinstance(sel, IndexSet) and frag_idx in sel.indices):
                return False
        link = pmap.get(parent_id)
    return True


def _coerce_to_domain(value, domain: list):
    """Find the domain element a wire value refers to, tolerating str/number casts."""
    for d in domain:
        if d == value:
            return d
    for d in domain:
        if str(d) == str(value):
            return d
    return None


def _default_selection(
    template: SpsTemplate, node: ChoiceNode, catalog: DatasetCatalog
) -> Selection:
    body = node.body
    if node.kind is ChoiceKind.OPT:
        return OptSwitch(False)
    if isinstance(body, NumericRange):
        return Number(body.lo)
    if isinstance(body, DomainRef):
        domain = node_domain(template, node, catalog)
        if not domain:
            raise EmptyDomain(node.id, body.attribute)
        if node.kind is ChoiceKind.ANY:
            return Value(domain[0])
        return ValueSet((domain[0],))
    if node.kind is ChoiceKind.ANY:
        return Index(0)
    return IndexSet((0,))


def default_assignment(template: SpsTemplate, catalog: DatasetCatalog) -> ChoiceAssignment:
    """First choice / domain minimum / range low for Any, first-only for
    Subset, Off for Opt; nodes made unreachable by an Off Opt stay unassigned."""
    pmap = parent_fragment_map(template)
    selections: dict[int, Selection] = {}
    for node in template.nodes:
        if is_reachable(node.id, selections, template, pmap):
            selections[node.id] = _default_selection(template, node, catalog)
    return ChoiceAssignment(selections)


def _validate_selection(
    template: SpsTemplate, node: ChoiceNode, sel: Selection, catalog: DatasetCatalog
) -> Selection:
    """Check a selection against its node, returning a normalized copy."""
    body = node.body
    if node.kind is ChoiceKind.OPT:
        if not isinstance(sel, OptSwitch):
            raise SelectionOutOfRange(node.id, f"OPT node takes on/off, got {sel!r}")
        return sel
    if node.kind is ChoiceKind.ANY:
        if isinstance(body, Fragments):
            if not isinstance(sel, Index):
                raise SelectionOutOfRange(node.id, f"ANY list takes an index, got {sel!r}")
            if not 0 <= sel.index < len(body.fragments):
                raise SelectionOutOfRange(
                    node.id, f"index {sel.index} outside 0..{len(body.fragments) - 1}"
                )
            return sel
        if isinstance(body, NumericRange):
            if not isinstance(sel, Number):
                raise SelectionOutOfRange(node.id, f"numeric ANY takes a number, got {sel!r}")
            if not body.lo <= sel.number <= body.hi:
                raise SelectionOutOfRange(
                    node.id, f"{sel.number} outside [{body.lo}, {body.hi}]"
                )
            return sel
        if not isinstance(sel, Value):
            raise SelectionOutOfRange(node.id, f"&attr ANY takes a value, got {sel!r}")
        domain = node_domain(template, node, catalog)
        coerced = _coerce_to_domain(sel.value, domain)
        if coerced is None:
            raise SelectionOutOfRange(node.id, f"{sel.value!r} not in domain")
        return Value(coerced)
    # SUBSET
    if isinstance(body, Fragments):
        if not isinstance(sel, IndexSet):
            raise SelectionOutOfRange(node.id, f"SUBSET list takes indices, got {sel!r}")
        indices = tuple(sorted(set(sel.indices)))
        if not indices:
            raise SelectionOutOfRange(node.id, "SUBSET selection must be non-empty")
        if indices[0] < 0 or indices[-1] >= len(body.fragments):
            raise SelectionOutOfRange(
                node.id, f"indices {list(indices)} outside 0..{len(body.fragments) - 1}"
            )
        return IndexSet(indices)
    if not isinstance(sel, ValueSet):
        raise SelectionOutOfRange(node.id, f"&attr SUBSET takes values, got {sel!r}")
    if not sel.values:
        raise SelectionOutOfRange(node.id, "SUBSET selection must be non-empty")
    domain = node_domain(template, node, catalog)
    coerced = []
    for v in sel.values:
        c = _coerce_to_domain(v, domain)
        if c is None:
            raise SelectionOutOfRange(node.id, f"{v!r} not in domain")
        coerced.append(c)
    ordered = [d for d in domain if d in coerced]
    return ValueSet(tuple(ordered))


# -- instantiation ---------------------------------------------------------

_SENTINEL = "\x00{}\x00"
_RIGHT_CONJ_RE = re.compile(r"\s*(and|or)\b\s*", re.IGNORECASE)
_LEFT_CONJ_RE = re.compile(r"\b(and|or)\s*$", re.IGNORECASE)
_RIGHT_COMMA_RE = re.compile(r"\s*,\s*")
_LEFT_COMMA_RE = re.compile(r",\s*$")
# a removed site is at the end of its list when only a clause keyword, a
# closing paren, or the end of the statement follows it
_LIST_END_RE = re.compile(
    r"\s*(?:(?:from|where|group|order|limit|having|union|on)\b|\)|\Z)", re.IGNORECASE
)
# ... and at the start of its list slot when a clause opener or another
# separator (not ordinary content) directly precedes it
_BOOL_ANCHOR_RE = re.compile(r"(?:\bwhere|\bhaving|\bon|\band|\bor|\(|\A)\s*\Z", re.IGNORECASE)
_LIST_ANCHOR_RE = re.compile(r"(?:\bselect|\bby|,|\()\s*\Z", re.IGNORECASE)
_CLAUSE_BOUNDARY_RE = re.compile(r"\b(where|having|group|order|limit|union)\b", re.IGNORECASE)
_WHERE_HAVING_RE = re.compile(r"\b(where|having)\b", re.IGNORECASE)


def _unescape(text: str) -> str:
    """Resolve \\{ \\} \\& escapes outside string literals."""
    out = []
    quote: str | None = None
    i = 0
    while i < len(text):
        ch = text[i]
        if quote is not None:
            if ch == quote:
                quote = None
            out.append(ch)
        elif ch == "\\" and i + 1 < len(text) and text[i + 1] in "{}&":
            out.append(text[i + 1])
            i += 1
        else:
            if ch in "'\"":
                quote = ch
            out.append(ch)
        i += 1
    return "".join(out)


def _quote_value(value, storage: StorageType) -> str:
    if storage in (StorageType.INTEGER, StorageType.REAL) and isinstance(value, (int, float)):
        return str(value)
    text = str(value).replace("'", "''")
    return f"'{text}'"


def _format_number(x: float) -> str:
    return str(int(x)) if float(x) == int(x) else str(x)


def _splice(left: str, right: str) -> str:
    if left and right and (left[-1].isalnum() or left[-1] == "_") and (
        right[0].isalnum() or right[0] == "_"
    ):
        return left + " " + right
    return left + right


class _Renderer:
    def __init__(self, template: SpsTemplate, assignment: ChoiceAssignment, catalog: DatasetCatalog):
        self.template = template
        self.selections = assignment.selections
        self.catalog = catalog
        self.off_nodes: list[ChoiceNode] = []

    def render(self, segments: list[Segment]) -> str:
        parts = []
        for seg in segments:
            if isinstance(seg, Literal):
                parts.append(_unescape(seg.text))
            else:
                parts.append(self.render_node(self.template.node(seg.node_id)))
        return "".join(parts)

    def render_fragment(self, fragment: list[Segment]) -> str:
        return self.render(fragment).strip()

    def render_node(self, node: ChoiceNode) -> str:
        sel = self.selections.get(node.id)
        if sel is None:
            raise IncompleteAssignment(node.id)
        sel = _validate_selection(self.template, node, sel, self.catalog)
        body = node.body
        if node.kind is ChoiceKind.OPT:
            assert isinstance(sel, OptSwitch) and isinstance(body, Fragments)
            if not sel.on:
                self.off_nodes.append(node)
                return _SENTINEL.format(node.id)
            return self.render_fragment(body.fragments[0])
        if isinstance(sel, Index):
            assert isinstance(body, Fragments)
            return self.render_fragment(body.fragments[sel.index])
        if isinstance(sel, Number):
            return _format_number(sel.number)
        if isinstance(sel, Value):
            storage = domain_storage_type(self.template, node, self.catalog)
            return _quote_value(sel.value, storage)
        if isinstance(sel, IndexSet):
            assert isinstance(body, Fragments) and node.separator is not None
            return node.separator.join(
                self.render_fragment(body.fragments[i]) for i in sel.indices
            )
        assert isinstance(sel, ValueSet) and node.separator is not None
        storage = domain_storage_type(self.template, node, self.catalog)
        return node.separator.join(_quote_value(v, storage) for v in sel.values)


def _prune_site(out: str, pos: int, context: ClauseContext) -> str:
    """Delete the separator a removed Opt fragment left dangling.

    The separator to the right is always safe to take; the one to the left
    belongs to the previous list item and only dangles when nothing else
    follows the site in its list.
    """
    left, right = out[:pos], out[pos:]
    if context in (ClauseContext.PREDICATE, ClauseContext.OTHER):
        if _BOOL_ANCHOR_RE.search(left):
            m = _RIGHT_CONJ_RE.match(right)
            if m:
                return _splice(left, right[m.end():])
        if _LIST_END_RE.match(right):
            m = _LEFT_CONJ_RE.search(left)
            if m:
                return _splice(left[:m.start()], right)
    elif context in (ClauseContext.PROJECTION, ClauseContext.GROUP_BY, ClauseContext.ORDER_BY):
        if _LIST_ANCHOR_RE.search(left):
            m = _RIGHT_COMMA_RE.match(right)
            if m:
                return _splice(left, right[m.end():])
        if _LIST_END_RE.match(right):
            m = _LEFT_COMMA_RE.search(left)
            if m:
                return _splice(left[:m.start()], right)
    return out


def _drop_empty_where_having(sql: str) -> str:
    """Delete WHERE/HAVING keywords whose clause body pruned down to whitespace."""
    masked = mask_quoted(sql)
    depth = []
    d = 0
    for ch in masked:
        if ch == "(":
            d += 1
        elif ch == ")":
            d = max(0, d - 1)
        depth.append(d)

    deletions = []
    for m in _WHERE_HAVING_RE.finditer(masked):
        start, end = m.start(), m.end()
        d0 = depth[start]
        limit = len(masked)
        boundary = limit
        for b in _CLAUSE_BOUNDARY_RE.finditer(masked, end):
            if depth[b.start()] == d0:
                boundary = b.start()
                break
        for i in range(end, boundary):
            if masked[i] == ")" and depth[i] < d0:
                boundary = i
                break
        if masked[end:boundary].strip() == "":
            deletions.append((start, end))
    for start, end in reversed(deletions):
        sql = _splice(sql[:start], sql[end:])
    return sql


def instantiate(
    template: SpsTemplate, assignment: ChoiceAssignment, catalog: DatasetCatalog
) -> str:
    """Produce concrete SQL for one assignment.

    The output contains no choice tokens; on valid inputs it executes on the
    catalog engine without error.
    """
    renderer = _Renderer(template, assignment, catalog)
    out = renderer.render(template.root)
    for node in renderer.off_nodes:
        sentinel = _SENTINEL.format(node.id)
        pos = out.find(sentinel)
        if pos < 0:
            continue  # nested under another omitted fragment
        out = out[:pos] + out[pos + len(sentinel):]
        out = _prune_site(out, pos, node_context(template, node))
    out = _drop_empty_where_having(out)
    return rewrite_today(out, catalog.clock)


# -- enumeration and counting ----------------------------------------------


def _node_options(template: SpsTemplate, node: ChoiceNode, catalog: DatasetCatalog):
    body = node.body
    if node.kind is ChoiceKind.OPT:
        yield OptSwitch(False)
        yield OptSwitch(True)
    elif node.kind is ChoiceKind.ANY:
        if isinstance(body, Fragments):
            for i in range(len(body.fragments)):
                yield Index(i)
        elif isinstance(body, NumericRange):
            seen = []
            for x in (body.lo, (body.lo + body.hi) / 2, body.hi):
                if x not in seen:
                    seen.append(x)
                    yield Number(x)
        else:
            for v in node_domain(template, node, catalog):
                yield Value(v)
    else:
        if isinstance(body, Fragments):
            k = len(body.fragments)
            for mask in range(1, 1 << k):
                yield IndexSet(tuple(i for i in range(k) if mask >> i & 1))
        else:
            domain = node_domain(template, node, catalog)
            for mask in range(1, 1 << len(domain)):
                yield ValueSet(tuple(v for i, v in enumerate(domain) if mask >> i & 1))


def enumerate_assignments(template: SpsTemplate, catalog: DatasetCatalog, cap: int):
    """Yield valid assignments in lexicographic node-id order, up to ``cap``.

    Numeric ranges are sampled at {lo, mid, hi}; nodes unreachable under the
    partial assignment are skipped, so every yielded assignment is total
    over exactly its reachable nodes.
    """
    if cap < 1:
        raise ValueError("cap must be >= 1")
    nodes = template.nodes
    pmap = parent_fragment_map(template)
    emitted = 0

    def rec(i: int, selections: dict[int, Selection]):
        nonlocal emitted
        if emitted >= cap:
            return
        if i == len(nodes):
            emitted += 1
            yield ChoiceAssignment(dict(selections))
            return
        node = nodes[i]
        if not is_reachable(node.id, selections, template, pmap):
            yield from rec(i + 1, selections)
            return
        for sel in _node_options(template, node, catalog):
            if emitted >= cap:
                return
            selections[node.id] = sel
            yield from rec(i + 1, selections)
            del selections[node.id]

    yield from rec(0, {})


def count_concrete_queries(
    template: SpsTemplate, catalog: DatasetCatalog
) -> QuerySpaceSize:
    """Product-rule size of the query space.

    Any over k fragments sums each fragment's subtree count; &attr counts
    the domain; Subset multiplies (1 + fragment count) over fragments minus
    the empty set; Opt adds the off branch.  Any numeric range makes the
    space continuous.
    """
    if any(isinstance(n.body, NumericRange) for n in template.nodes):
        return QuerySpaceSize(count=None, continuous=True)

    def count_fragment(fragment: list[Segment]) -> int:
        total = 1
        for seg in fragment:
            if isinstance(seg, NodeRef):
                total *= count_node(template.node(seg.node_id))
        return total

    def count_node(node: ChoiceNode) -> int:
        body = node.body
        if node.kind is ChoiceKind.OPT:
            assert isinstance(body, Fragments)
            return 1 + count_fragment(body.fragments[0])
        if node.kind is ChoiceKind.ANY:
            if isinstance(body, DomainRef):
                return len(node_domain(template, node, catalog))
            assert isinstance(body, Fragments)
            return sum(count_fragment(f) for f in body.fragments)
        if isinstance(body, DomainRef):
            return (1 << len(node_domain(template, node, catalog))) - 1
        assert isinstance(body, Fragments)
        product = 1
        for f in body.fragments:
            product *= 1 + count_fragment(f)
        return product - 1

    return QuerySpaceSize(count=count_fragment(template.root), continuous=False)


def apply_delta(
    assignment: ChoiceAssignment,
    delta: dict[int, Selection],
    template: SpsTemplate,
    catalog: DatasetCatalog,
) -> ChoiceAssignment:
    """Merge a partial selection map into an assignment and re-normalize.

    Nodes that become reachable are filled from the default rules; nodes
    that become unreachable lose their selections.  Applying the same delta
    twice equals applying it once.
    """
    merged = dict(assignment.selections)
    for node_id, sel in delta.items():
        if not 0 <= node_id < len(template.nodes):
            raise SelectionOutOfRange(node_id, "unknown node id")
        merged[node_id] = _validate_selection(
            template, template.node(node_id), sel, catalog
        )
    pmap = parent_fragment_map(template)
    normalized: dict[int, Selection] = {}
    for node in template.nodes:
        if is_reachable(node.id, normalized, template, pmap):
            if node.id in merged:
                normalized[node.id] = merged[node.id]
            else:
                normalized[node.id] = _default_selection(template, node, catalog)
    return ChoiceAssignment(normalized)
