"""HTTP facade: datasets in, templates and interactive interface state out.

All state lives in the app instance (catalog tables, interface sessions),
so two processes fed the same request sequence with the same clock return
byte-identical responses: ids are assigned from a per-app counter and every
response dict is built in a fixed key order.
"""

from __future__ import annotations

import pathlib

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .catalog import Clock, DatasetCatalog
from .errors import (
    EmptyCatalog,
    EmptyDomain,
    EmptyTable,
    IncompleteAssignment,
    MalformedCsv,
    SelectionOutOfRange,
    SpsSyntaxError,
    SqlError,
)
from .instantiator import (
    ChoiceAssignment,
    Index,
    IndexSet,
    Number,
    OptSwitch,
    Selection,
    Value,
    ValueSet,
    apply_delta,
    default_assignment,
    instantiate,
)
from .interface_mapper import (
    CostParams,
    InterfaceSpec,
    generate_interface,
    interface_to_dict,
)
from .nl_translator import MockBackend, TranslationBackend, translate_all
from .sps_grammar import SpsTemplate, parse_sps, validate_template


def selection_to_wire(sel: Selection) -> dict:
    if isinstance(sel, Index):
        return {"kind": "index", "index": sel.index}
    if isinstance(sel, Value):
        return {"kind": "value", "value": sel.value}
    if isinstance(sel, Number):
        return {"kind": "number", "number": sel.number}
    if isinstance(sel, IndexSet):
        return {"kind": "index_set", "indices": list(sel.indices)}
    if isinstance(sel, ValueSet):
        return {"kind": "value_set", "values": list(sel.values)}
    return {"kind": "opt", "on": sel.on}


def selection_from_wire(raw: dict) -> Selection:
    kind = raw.get("kind")
    try:
        if kind == "index":
            return Index(int(raw["index"]))
        if kind == "value":
            return Value(raw["value"])
        if kind == "number":
            return Number(float(raw["number"]))
        if kind == "index_set":
            return IndexSet(tuple(int(i) for i in raw["indices"]))
        if kind == "value_set":
            return ValueSet(tuple(raw["values"]))
        if kind == "opt":
            return OptSwitch(bool(raw["on"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise HTTPException(400, f"malformed selection {raw!r}: {exc}") from exc
    raise HTTPException(400, f"unknown selection kind {kind!r}")


class DatasetRequest(BaseModel):
    name: str
    csv: str


class TranslateRequest(BaseModel):
    questions: list[str] = Field(min_length=1)


class InterfaceRequest(BaseModel):
    templates: list[str] = Field(min_length=1)


class StateRequest(BaseModel):
    view_id: str
    delta: dict[str, dict]


class _InterfaceSession:
    """One created interface plus its per-view assignment state."""

    def __init__(self, templates: list[SpsTemplate], spec: InterfaceSpec, catalog: DatasetCatalog):
        self.templates = templates
        self.spec = spec
        self.assignments: dict[str, ChoiceAssignment] = {}
        for view, template in zip(spec.views, templates):
            self.assignments[view.view_id] = default_assignment(template, catalog)

    def template_for(self, view_id: str) -> SpsTemplate:
        for view, template in zip(self.spec.views, self.templates):
            if view.view_id == view_id:
                return template
        raise HTTPException(404, f"unknown view {view_id!r}")


def _assignment_wire(assignment: ChoiceAssignment) -> dict:
    return {
        str(nid): selection_to_wire(assignment.selections[nid])
        for nid in sorted(assignment.selections)
    }


def _view_state(
    session: _InterfaceSession,
    view_id: str,
    catalog: DatasetCatalog,
    assignment: ChoiceAssignment | None = None,
) -> dict:
    template = session.template_for(view_id)
    if assignment is None:
        assignment = session.assignments[view_id]
    sql = instantiate(template, assignment, catalog)
    result = catalog.execute_sql(sql)
    return {
        "view_id": view_id,
        "assignment": _assignment_wire(assignment),
        "sql": sql,
        "columns": [
            {"name": c.name, "semantic_type": c.semantic_type.value}
            for c in result.columns
        ],
        "rows": [list(row) for row in result.rows],
    }


def create_app(
    clock: Clock | None = None,
    region_names: list[str] | None = None,
    backend: TranslationBackend | None = None,
    cost_params: CostParams | None = None,
    data_dir: str | None = None,
) -> FastAPI:
    app = FastAPI(title="querydeck")
    catalog = DatasetCatalog(clock=clock, region_names=region_names)
    app.state.catalog = catalog
    app.state.backend = backend if backend is not None else MockBackend.default()
    app.state.cost_params = cost_params if cost_params is not None else CostParams.default()
    app.state.interfaces: dict[str, _InterfaceSession] = {}
    app.state.counter = 0
    app.state.data_dir = pathlib.Path(data_dir) if data_dir else None

    if app.state.data_dir is not None and app.state.data_dir.is_dir():
        for path in sorted(app.state.data_dir.glob("*.csv")):
            catalog.ingest_csv(path.stem, path.read_bytes())

    @app.post("/datasets")
    def upload_dataset(req: DatasetRequest) -> dict:
        try:
            schema = catalog.ingest_csv(req.name, req.csv)
        except (MalformedCsv, EmptyTable, ValueError) as exc:
            raise HTTPException(400, str(exc)) from exc
        if app.state.data_dir is not None:
            app.state.data_dir.mkdir(parents=True, exist_ok=True)
            (app.state.data_dir / f"{req.name}.csv").write_text(req.csv, encoding="utf-8")
        count = catalog.execute_sql(f'select count(*) from "{schema.name}"').rows[0][0]
        return {
            "table": schema.name,
            "columns": [
                {
                    "name": c.name,
                    "storage_type": c.storage_type.value,
                    "semantic_type": c.semantic_type.value,
                }
                for c in schema.columns
            ],
            "row_count": count,
        }

    @app.post("/translate")
    def translate(req: TranslateRequest) -> dict:
        try:
            catalog.schema_text()
        except EmptyCatalog as exc:
            raise HTTPException(400, str(exc)) from exc
        results = translate_all(req.questions, catalog, app.state.backend)
        if all(not r.ok for r in results):
            raise HTTPException(422, "no question could be translated")
        return {
            "results": [
                {
                    "nl": r.nl,
                    "sps": r.template.source if r.template else None,
                    "attempts": r.attempts,
                    "errors": [f"{d.kind}: {d.message}" for d in r.diagnostics],
                }
                for r in results
            ]
        }

    @app.post("/interfaces")
    def create_interface(req: InterfaceRequest) -> dict:
        templates = []
        for i, source in enumerate(req.templates):
            try:
                template = parse_sps(source)
            except SpsSyntaxError as exc:
                raise HTTPException(400, f"template {i}: {exc}") from exc
            diagnostics = validate_template(template, catalog)
            if diagnostics:
                detail = "; ".join(f"{d.kind}: {d.message}" for d in diagnostics)
                raise HTTPException(400, f"template {i}: {detail}")
            templates.append(template)
        try:
            spec = generate_interface(templates, catalog, app.state.cost_params)
        except (EmptyDomain, SqlError) as exc:
            raise HTTPException(400, str(exc)) from exc
        interface_id = f"interface_{app.state.counter}"
        app.state.counter += 1
        session = _InterfaceSession(templates, spec, catalog)
        app.state.interfaces[interface_id] = session
        return {
            "interface_id": interface_id,
            "interface": interface_to_dict(spec),
            "state": {
                view.view_id: _view_state(session, view.view_id, catalog)
                for view in spec.views
            },
        }

    def _session(interface_id: str) -> _InterfaceSession:
        session = app.state.interfaces.get(interface_id)
        if session is None:
            raise HTTPException(404, f"unknown interface {interface_id!r}")
        return session

    @app.post("/interfaces/{interface_id}/state")
    def update_state(interface_id: str, req: StateRequest) -> dict:
        session = _session(interface_id)
        template = session.template_for(req.view_id)
        try:
            delta = {int(k): selection_from_wire(v) for k, v in req.delta.items()}
        except ValueError as exc:
            raise HTTPException(400, f"node ids must be integers: {exc}") from exc
        try:
            updated = apply_delta(
                session.assignments[req.view_id], delta, template, catalog
            )
            state = _view_state(session, req.view_id, catalog, updated)
        except (SelectionOutOfRange, IncompleteAssignment, EmptyDomain, SqlError) as exc:
            raise HTTPException(400, str(exc)) from exc
        session.assignments[req.view_id] = updated
        return state

    @app.get("/interfaces/{interface_id}")
    def get_interface(interface_id: str) -> dict:
        session = _session(interface_id)
        return {
            "interface_id": interface_id,
            "interface": interface_to_dict(session.spec),
            "state": {
                view.view_id: _view_state(session, view.view_id, catalog)
                for view in session.spec.views
            },
        }

    return app
