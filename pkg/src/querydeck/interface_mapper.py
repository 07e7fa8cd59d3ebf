"""Compile a set of templates into an interactive multi-view interface spec.

Each template becomes one view: its default instantiation is executed to
learn the result shape, a visualization is picked by the first matching
rule, and every choice node gets either a control widget or, when a
cross-view binding covers it, a click interaction on another view.  A cost
model scores complete interfaces; the search is exhaustive when the
alternative space is small enough and greedy otherwise.
"""

from __future__ import annotations

import enum
import itertools
import json
import re
from dataclasses import dataclass, field
from importlib import resources

from .catalog import DatasetCatalog, ResultColumn, ResultTable, SemanticType
from .errors import EmptyDomain
from .instantiator import ChoiceAssignment, default_assignment, instantiate, node_domain
from .sps_grammar import (
    ChoiceKind,
    ChoiceNode,
    ClauseContext,
    DomainRef,
    Fragments,
    Literal as SpsLiteral,
    NodeRef,
    NumericRange,
    SpsTemplate,
    node_context,
    parent_fragment_map,
)


class VisKind(enum.Enum):
    CHOROPLETH = "choropleth"
    LINE = "line"
    BAR = "bar"
    SCATTER = "scatter"
    SINGLE_VALUE = "single_value"
    TABLE = "table"


class WidgetKind(enum.Enum):
    TOGGLE = "toggle"
    BUTTON_SET = "button_set"
    DROPDOWN = "dropdown"
    CHECKBOX_GROUP = "checkbox_group"
    MULTISELECT = "multiselect"
    SLIDER = "slider"


BAR_CATEGORY_LIMIT = 30
SMALL_ANY_LIMIT = 4
SMALL_SUBSET_LIMIT = 6
EXHAUSTIVE_ALTERNATIVE_LIMIT = 4096

_DEFAULT_PARAMS_FILE = "cost_params.json"


@dataclass(frozen=True)
class CostParams:
    """Weights and layout constants for the interface cost model."""

    widget_costs: dict[str, float]
    interaction_cost: float
    overflow_penalty: float
    screen_space_cost: float
    screen_width: int
    screen_height: int
    view_height: int
    widget_height: int

    @classmethod
    def default(cls) -> CostParams:
        text = (
            resources.files("querydeck.data").joinpath(_DEFAULT_PARAMS_FILE).read_text("utf-8")
        )
        return cls.from_dict(json.loads(text))

    @classmethod
    def from_dict(cls, raw: dict) -> CostParams:
        base = {
            "widget_costs": dict(_BUILTIN_WIDGET_COSTS),
            "interaction_cost": 0.5,
            "overflow_penalty": 10.0,
            "screen_space_cost": 0.2,
            "screen_width": 1280,
            "screen_height": 800,
            "view_height": 320,
            "widget_height": 48,
        }
        for key, value in raw.items():
            if key not in base:
                raise ValueError(f"unknown cost parameter {key!r}")
            if key == "widget_costs":
                base["widget_costs"].update(value)
            else:
                base[key] = value
        return cls(**base)

    def widget_cost(self, kind: WidgetKind) -> float:
        return self.widget_costs[kind.value]


_BUILTIN_WIDGET_COSTS = {
    "toggle": 1.0,
    "button_set": 1.0,
    "dropdown": 2.0,
    "checkbox_group": 1.5,
    "multiselect": 2.5,
    "slider": 1.5,
}


@dataclass
class WidgetSpec:
    widget_id: str
    kind: WidgetKind
    node_id: int
    label: str
    options: dict


@dataclass
class ViewSpec:
    view_id: str
    template_source: str
    default_sql: str
    visualization: VisKind
    columns: list[ResultColumn]
    widgets: list[WidgetSpec]


@dataclass
class InteractionSpec:
    interaction_id: str
    event: str
    source_view: str
    column: str
    target_view: str
    value_node: int
    opt_node: int | None
    on_deselect: str


@dataclass
class InterfaceSpec:
    views: list[ViewSpec]
    interactions: list[InteractionSpec]
    params: CostParams
    cost: float = 0.0

    def view(self, view_id: str) -> ViewSpec:
        for v in self.views:
            if v.view_id == view_id:
                return v
        raise KeyError(view_id)


def choose_visualization(result: ResultTable) -> VisKind:
    """First matching rule over the result shape wins."""
    cols = result.columns
    if len(cols) == 2:
        first, second = cols[0].semantic_type, cols[1].semantic_type
        if second is SemanticType.QUANTITATIVE:
            if first is SemanticType.GEOGRAPHIC:
                return VisKind.CHOROPLETH
            if first is SemanticType.TEMPORAL:
                return VisKind.LINE
            if first is SemanticType.CATEGORICAL:
                distinct = len({row[0] for row in result.rows})
                if distinct <= BAR_CATEGORY_LIMIT:
                    return VisKind.BAR
            if first is SemanticType.QUANTITATIVE:
                return VisKind.SCATTER
    if len(cols) == 1 and len(result.rows) == 1:
        return VisKind.SINGLE_VALUE
    return VisKind.TABLE


def widget_candidates(
    node: ChoiceNode, template: SpsTemplate, catalog: DatasetCatalog
) -> list[WidgetKind]:
    """Ranked widget kinds able to drive one choice node."""
    body = node.body
    if node.kind is ChoiceKind.OPT:
        return [WidgetKind.TOGGLE]
    if node.kind is ChoiceKind.ANY:
        if isinstance(body, NumericRange):
            return [WidgetKind.SLIDER]
        if isinstance(body, DomainRef):
            return [WidgetKind.DROPDOWN, WidgetKind.BUTTON_SET]
        assert isinstance(body, Fragments)
        if len(body.fragments) <= SMALL_ANY_LIMIT:
            return [WidgetKind.BUTTON_SET, WidgetKind.DROPDOWN]
        return [WidgetKind.DROPDOWN, WidgetKind.BUTTON_SET]
    # SUBSET
    if isinstance(body, DomainRef):
        k = len(node_domain(template, node, catalog))
    else:
        assert isinstance(body, Fragments)
        k = len(body.fragments)
    if k <= SMALL_SUBSET_LIMIT:
        return [WidgetKind.CHECKBOX_GROUP, WidgetKind.MULTISELECT]
    return [WidgetKind.MULTISELECT]


@dataclass(frozen=True)
class CrossViewBinding:
    """Click on source view's column drives the target view's &attr node."""

    source_view: int
    column: str
    target_view: int
    value_node: int
    opt_node: int | None


_EQ_PREFIX_RE = re.compile(r"([A-Za-z_][A-Za-z0-9_]*)\s*=\s*$")


def _bindable_nodes(template: SpsTemplate) -> list[tuple[str, int, int | None]]:
    """(column, any_node_id, opt_node_id) for predicates shaped col = ANY{&col}."""
    out = []
    pmap = parent_fragment_map(template)
    for node in template.nodes:
        if node.kind is not ChoiceKind.ANY or not isinstance(node.body, DomainRef):
            continue
        if node_context(template, node) is not ClauseContext.PREDICATE:
            continue
        link = pmap.get(node.id)
        if link is None:
            fragment = template.root
        else:
            parent = template.node(link[0])
            assert isinstance(parent.body, Fragments)
            fragment = parent.body.fragments[link[1]]
        # the literal immediately before the node must end with "col ="
        prefix = None
        for i, seg in enumerate(fragment):
            if isinstance(seg, NodeRef) and seg.node_id == node.id:
                prefix = fragment[i - 1] if i > 0 else None
                break
        if not isinstance(prefix, SpsLiteral):
            continue
        m = _EQ_PREFIX_RE.search(prefix.text)
        if m is None or m.group(1).lower() != node.body.attribute.lower():
            continue
        opt_node: int | None = None
        if link is not None:
            parent = template.node(link[0])
            if parent.kind is ChoiceKind.OPT:
                opt_node = parent.id
        out.append((node.body.attribute, node.id, opt_node))
    return out


def detect_cross_view_bindings(
    templates: list[SpsTemplate], results: list[ResultTable]
) -> list[CrossViewBinding]:
    """Pair each col = ANY{&col} predicate with other views exposing ``col``."""
    bindings = []
    for ti, template in enumerate(templates):
        for column, value_node, opt_node in _bindable_nodes(template):
            for si, result in enumerate(results):
                if si == ti:
                    continue
                names = [c.name.lower() for c in result.columns]
                if column.lower() in names:
                    bindings.append(
                        CrossViewBinding(si, column, ti, value_node, opt_node)
                    )
    return bindings


def _collapse_ws(text: str) -> str:
    return " ".join(text.split())


def node_label(template: SpsTemplate, node: ChoiceNode) -> str:
    body = node.body
    if isinstance(body, DomainRef):
        return body.attribute
    if isinstance(body, NumericRange):
        return body.raw.strip()
    text = _collapse_ws(template.source[node.span[0]:node.span[1]])
    inner = text[text.index("{") + 1:-1].strip()
    if len(inner) > 40:
        inner = inner[:37] + "..."
    return inner


def _widget_options(
    template: SpsTemplate, node: ChoiceNode, catalog: DatasetCatalog
) -> dict:
    from .sps_grammar import fragment_label

    body = node.body
    if node.kind is ChoiceKind.OPT:
        return {}
    if isinstance(body, NumericRange):
        return {"lo": body.lo, "hi": body.hi}
    if isinstance(body, DomainRef):
        return {"attribute": body.attribute, "choices": node_domain(template, node, catalog)}
    assert isinstance(body, Fragments)
    return {"choices": [fragment_label(template, f) for f in body.fragments]}


def cell_height(view: ViewSpec, params: CostParams) -> int:
    return params.view_height + params.widget_height * len(view.widgets)


def interface_cost(spec: InterfaceSpec, params: CostParams) -> float:
    """Widget costs + interaction costs + overflow and screen-space penalties."""
    total = 0.0
    n_widgets = 0
    for view in spec.views:
        for widget in view.widgets:
            total += params.widget_cost(widget.kind)
            n_widgets += 1
    total += params.interaction_cost * len(spec.interactions)
    bottom = 0
    for view in spec.views:
        bottom += cell_height(view, params)
        if bottom > params.screen_height:
            total += params.overflow_penalty
    total += params.screen_space_cost * n_widgets
    return total


@dataclass
class _ViewInputs:
    template: SpsTemplate
    assignment: ChoiceAssignment
    sql: str
    result: ResultTable
    visualization: VisKind
    candidates: dict[int, list[WidgetKind]] = field(default_factory=dict)


def _prepare_views(
    templates: list[SpsTemplate], catalog: DatasetCatalog
) -> list[_ViewInputs]:
    prepared = []
    for template in templates:
        assignment = default_assignment(template, catalog)
        sql = instantiate(template, assignment, catalog)
        result = catalog.execute_sql(sql)
        vis = choose_visualization(result)
        inputs = _ViewInputs(template, assignment, sql, result, vis)
        for node in template.nodes:
            inputs.candidates[node.id] = widget_candidates(node, template, catalog)
        prepared.append(inputs)
    return prepared


def _build_interface(
    prepared: list[_ViewInputs],
    bindings: list[CrossViewBinding],
    picks: dict[tuple[int, int], WidgetKind],
    catalog: DatasetCatalog,
    params: CostParams,
) -> InterfaceSpec:
    bound: set[tuple[int, int]] = set()
    for b in bindings:
        bound.add((b.target_view, b.value_node))
        if b.opt_node is not None:
            bound.add((b.target_view, b.opt_node))
    views = []
    for vi, inputs in enumerate(prepared):
        view_id = f"view_{vi}"
        widgets = []
        for node in inputs.template.nodes:
            if (vi, node.id) in bound:
                continue
            kind = picks[(vi, node.id)]
            widgets.append(
                WidgetSpec(
                    widget_id=f"{view_id}_n{node.id}",
                    kind=kind,
                    node_id=node.id,
                    label=node_label(inputs.template, node),
                    options=_widget_options(inputs.template, node, catalog),
                )
            )
        views.append(
            ViewSpec(
                view_id=view_id,
                template_source=inputs.template.source,
                default_sql=inputs.sql,
                visualization=inputs.visualization,
                columns=inputs.result.columns,
                widgets=widgets,
            )
        )
    interactions = []
    for bi, b in enumerate(bindings):
        interactions.append(
            InteractionSpec(
                interaction_id=f"interaction_{bi}",
                event="click",
                source_view=f"view_{b.source_view}",
                column=b.column,
                target_view=f"view_{b.target_view}",
                value_node=b.value_node,
                opt_node=b.opt_node,
                on_deselect="opt_off" if b.opt_node is not None else "restore_default",
            )
        )
    spec = InterfaceSpec(views=views, interactions=interactions, params=params)
    spec.cost = interface_cost(spec, params)
    return spec


def _alternative_count(
    prepared: list[_ViewInputs], all_bindings: list[CrossViewBinding]
) -> int:
    total = 0
    for mask in range(1 << len(all_bindings)):
        chosen = [b for i, b in enumerate(all_bindings) if mask >> i & 1]
        bound = set()
        for b in chosen:
            bound.add((b.target_view, b.value_node))
            if b.opt_node is not None:
                bound.add((b.target_view, b.opt_node))
        combos = 1
        for vi, inputs in enumerate(prepared):
            for node in inputs.template.nodes:
                if (vi, node.id) not in bound:
                    combos *= len(inputs.candidates[node.id])
        total += combos
        if total > EXHAUSTIVE_ALTERNATIVE_LIMIT:
            return total
    return total


def generate_interface(
    templates: list[SpsTemplate],
    catalog: DatasetCatalog,
    params: CostParams | None = None,
) -> InterfaceSpec:
    """Lowest-cost interface over the templates.

    Exhaustive over (binding subsets x widget choices) when that space has
    at most 4096 alternatives, greedy otherwise; ties break toward fewer
    widgets, then earlier widget candidates.
    """
    if not templates:
        raise ValueError("at least one template is required")
    if params is None:
        params = CostParams.default()
    prepared = _prepare_views(templates, catalog)
    all_bindings = detect_cross_view_bindings(
        [p.template for p in prepared], [p.result for p in prepared]
    )

    if _alternative_count(prepared, all_bindings) <= EXHAUSTIVE_ALTERNATIVE_LIMIT:
        best: InterfaceSpec | None = None
        best_key: tuple | None = None
        for mask in range(1 << len(all_bindings)):
            chosen = [b for i, b in enumerate(all_bindings) if mask >> i & 1]
            bound = set()
            for b in chosen:
                bound.add((b.target_view, b.value_node))
                if b.opt_node is not None:
                    bound.add((b.target_view, b.opt_node))
            free: list[tuple[int, int]] = []
            for vi, inputs in enumerate(prepared):
                for node in inputs.template.nodes:
                    if (vi, node.id) not in bound:
                        free.append((vi, node.id))
            option_lists = [
                prepared[vi].candidates[nid] for vi, nid in free
            ]
            for combo in itertools.product(*option_lists):
                picks = dict(zip(free, combo))
                spec = _build_interface(prepared, chosen, picks, catalog, params)
                n_widgets = sum(len(v.widgets) for v in spec.views)
                key = (spec.cost, n_widgets)
                if best_key is None or key < best_key:
                    best, best_key = spec, key
        assert best is not None
        return best

    # greedy: take every binding, first candidate everywhere else
    bound = set()
    for b in all_bindings:
        bound.add((b.target_view, b.value_node))
        if b.opt_node is not None:
            bound.add((b.target_view, b.opt_node))
    picks = {}
    for vi, inputs in enumerate(prepared):
        for node in inputs.template.nodes:
            if (vi, node.id) not in bound:
                picks[(vi, node.id)] = inputs.candidates[node.id][0]
    return _build_interface(prepared, all_bindings, picks, catalog, params)


# -- serialization ----------------------------------------------------------

SPEC_VERSION = 1


def interface_to_dict(spec: InterfaceSpec) -> dict:
    params = spec.params
    views = []
    offset = 0
    cells = []
    for view in spec.views:
        height = cell_height(view, params)
        cells.append({"view": view.view_id, "y": offset, "height": height})
        offset += height
        views.append(
            {
                "view_id": view.view_id,
                "template": view.template_source,
                "default_sql": view.default_sql,
                "visualization": view.visualization.value,
                "columns": [
                    {"name": c.name, "semantic_type": c.semantic_type.value}
                    for c in view.columns
                ],
                "widgets": [
                    {
                        "widget_id": w.widget_id,
                        "kind": w.kind.value,
                        "node_id": w.node_id,
                        "label": w.label,
                        "options": w.options,
                    }
                    for w in view.widgets
                ],
            }
        )
    interactions = [
        {
            "interaction_id": x.interaction_id,
            "event": x.event,
            "source_view": x.source_view,
            "column": x.column,
            "target_view": x.target_view,
            "value_node": x.value_node,
            "opt_node": x.opt_node,
            "on_deselect": x.on_deselect,
        }
        for x in spec.interactions
    ]
    return {
        "spec_version": SPEC_VERSION,
        "screen": {"width": params.screen_width, "height": params.screen_height},
        "layout": {"kind": "vertical_stack", "cells": cells},
        "views": views,
        "interactions": interactions,
        "cost": round(spec.cost, 4),
    }


def serialize_interface(spec: InterfaceSpec) -> str:
    """Canonical JSON bytes; identical inputs serialize identically."""
    return json.dumps(interface_to_dict(spec), indent=2, ensure_ascii=True) + "\n"
