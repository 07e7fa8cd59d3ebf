from __future__ import annotations

import json

import pytest
from fastapi import HTTPException
from fastapi.testclient import TestClient

from querydeck import (
    Index,
    IndexSet,
    MockBackend,
    Number,
    OptSwitch,
    Value,
    ValueSet,
    create_app,
    selection_from_wire,
    selection_to_wire,
)
from querydeck.catalog import fixed_clock

from .conftest import CLOCK_DATE, FIXTURES, LISTING_ONE, LISTING_TWO

COVID_CSV = (FIXTURES / "covid.csv").read_text()


def make_client(**kwargs) -> TestClient:
    kwargs.setdefault("clock", fixed_clock(CLOCK_DATE))
    return TestClient(create_app(**kwargs))


@pytest.fixture()
def client() -> TestClient:
    c = make_client()
    resp = c.post("/datasets", json={"name": "covid", "csv": COVID_CSV})
    assert resp.status_code == 200
    return c


class TestSelectionWire:
    @pytest.mark.parametrize(
        "selection",
        [
            Index(2),
            Value("Texas"),
            Value(12),
            Number(3.5),
            IndexSet((0, 2)),
            ValueSet(("Ohio", "Utah")),
            OptSwitch(True),
            OptSwitch(False),
        ],
    )
    def test_round_trip(self, selection):
        assert selection_from_wire(selection_to_wire(selection)) == selection

    def test_unknown_kind_rejected(self):
        with pytest.raises(HTTPException) as err:
            selection_from_wire({"kind": "mystery"})
        assert err.value.status_code == 400

    def test_missing_field_rejected(self):
        with pytest.raises(HTTPException) as err:
            selection_from_wire({"kind": "index"})
        assert err.value.status_code == 400


class TestDatasets:
    def test_upload_reports_schema(self):
        client = make_client()
        resp = client.post("/datasets", json={"name": "covid", "csv": COVID_CSV})
        assert resp.status_code == 200
        body = resp.json()
        assert body["table"] == "covid"
        assert body["row_count"] == 18
        got = {c["name"]: (c["storage_type"], c["semantic_type"]) for c in body["columns"]}
        assert got == {
            "date": ("date", "temporal"),
            "state": ("text", "geographic"),
            "cases": ("integer", "quantitative"),
            "deaths": ("integer", "quantitative"),
        }

    @pytest.mark.parametrize(
        "name,csv",
        [
            ("covid", "a,b\n1\n"),  # ragged row
            ("covid", ""),  # no header
            ("covid", "a,b\n"),  # no data rows
            ("bad name", "a\n1\n"),
        ],
    )
    def test_bad_uploads_rejected(self, name, csv):
        client = make_client()
        resp = client.post("/datasets", json={"name": name, "csv": csv})
        assert resp.status_code == 400

    def test_datasets_persist_in_data_dir(self, tmp_path):
        first = make_client(data_dir=str(tmp_path))
        first.post("/datasets", json={"name": "covid", "csv": COVID_CSV})
        assert (tmp_path / "covid.csv").exists()

        second = make_client(data_dir=str(tmp_path))
        resp = second.post("/translate", json={"questions": [
            "Show total cases or deaths by state"
        ]})
        assert resp.status_code == 200  # table reloaded at startup


class TestTranslate:
    def test_empty_catalog_rejected(self):
        client = make_client()
        resp = client.post("/translate", json={"questions": ["anything"]})
        assert resp.status_code == 400

    def test_demo_questions(self, client):
        resp = client.post(
            "/translate",
            json={
                "questions": [
                    "Show total cases or deaths by state",
                    "How are daily cases trending, overall or for one state, over recent windows?",
                ]
            },
        )
        assert resp.status_code == 200
        results = resp.json()["results"]
        assert results[0]["sps"] == LISTING_ONE
        assert results[0]["attempts"] == 1
        assert results[0]["errors"] == []
        assert "OPT{state = ANY{&state}}" in results[1]["sps"]

    def test_all_failures_give_422(self, client):
        resp = client.post("/translate", json={"questions": ["nobody knows this"]})
        assert resp.status_code == 422

    def test_partial_failure_reported_inline(self):
        backend = MockBackend({"good": LISTING_ONE})
        client = make_client(backend=backend)
        client.post("/datasets", json={"name": "covid", "csv": COVID_CSV})
        resp = client.post("/translate", json={"questions": ["good", "bad"]})
        assert resp.status_code == 200
        results = resp.json()["results"]
        assert results[0]["sps"] == LISTING_ONE
        assert results[1]["sps"] is None
        assert results[1]["errors"]

    def test_empty_question_list_rejected(self, client):
        resp = client.post("/translate", json={"questions": []})
        assert resp.status_code == 422


class TestCreateInterface:
    def test_covid_pair(self, client):
        resp = client.post(
            "/interfaces", json={"templates": [LISTING_ONE, LISTING_TWO]}
        )
        assert resp.status_code == 200
        body = resp.json()
        assert body["interface_id"] == "interface_0"
        assert body["interface"]["spec_version"] == 1
        assert len(body["interface"]["views"]) == 2
        state = body["state"]
        assert set(state) == {"view_0", "view_1"}
        assert state["view_1"]["assignment"] == {
            "0": {"kind": "opt", "on": False},
            "2": {"kind": "opt", "on": False},
        }
        assert "Texas" not in state["view_1"]["sql"]

    def test_ids_increment(self, client):
        a = client.post("/interfaces", json={"templates": [LISTING_ONE]}).json()
        b = client.post("/interfaces", json={"templates": [LISTING_ONE]}).json()
        assert (a["interface_id"], b["interface_id"]) == ("interface_0", "interface_1")

    def test_syntax_error_names_offending_template(self, client):
        resp = client.post(
            "/interfaces", json={"templates": [LISTING_ONE, "select ANY{"]}
        )
        assert resp.status_code == 400
        assert "template 1" in resp.json()["detail"]

    def test_validation_failure_rejected(self, client):
        resp = client.post(
            "/interfaces", json={"templates": ["select missing_col from covid"]}
        )
        assert resp.status_code == 400

    def test_empty_template_list_rejected(self, client):
        resp = client.post("/interfaces", json={"templates": []})
        assert resp.status_code == 422


TEXAS_DELTA = {
    "view_id": "view_1",
    "delta": {
        "0": {"kind": "opt", "on": True},
        "1": {"kind": "value", "value": "Texas"},
    },
}


@pytest.fixture()
def interface_client(client) -> TestClient:
    resp = client.post("/interfaces", json={"templates": [LISTING_ONE, LISTING_TWO]})
    assert resp.json()["interface_id"] == "interface_0"
    return client


class TestUpdateState:
    def test_texas_filter(self, interface_client):
        resp = interface_client.post("/interfaces/interface_0/state", json=TEXAS_DELTA)
        assert resp.status_code == 200
        state = resp.json()
        assert state["view_id"] == "view_1"
        assert "state = 'Texas'" in state["sql"]
        assert state["assignment"]["1"] == {"kind": "value", "value": "Texas"}
        # row values come straight from executing the shown sql
        direct = (
            "select date, sum(cases) from covid "
            "where state = 'Texas' group by date"
        )
        rows = [list(r) for r in make_catalog_rows(direct)]
        assert state["rows"] == rows

    def test_delta_is_idempotent(self, interface_client):
        first = interface_client.post(
            "/interfaces/interface_0/state", json=TEXAS_DELTA
        ).json()
        second = interface_client.post(
            "/interfaces/interface_0/state", json=TEXAS_DELTA
        ).json()
        assert first == second

    def test_turning_opt_off_drops_dependents(self, interface_client):
        interface_client.post("/interfaces/interface_0/state", json=TEXAS_DELTA)
        resp = interface_client.post(
            "/interfaces/interface_0/state",
            json={"view_id": "view_1", "delta": {"0": {"kind": "opt", "on": False}}},
        )
        state = resp.json()
        assert "1" not in state["assignment"]
        assert "Texas" not in state["sql"]

    def test_updates_are_per_view(self, interface_client):
        interface_client.post("/interfaces/interface_0/state", json=TEXAS_DELTA)
        full = interface_client.get("/interfaces/interface_0").json()
        assert "Texas" in full["state"]["view_1"]["sql"]
        assert "Texas" not in full["state"]["view_0"]["sql"]

    def test_unknown_interface_404(self, interface_client):
        resp = interface_client.post("/interfaces/interface_9/state", json=TEXAS_DELTA)
        assert resp.status_code == 404

    def test_unknown_view_404(self, interface_client):
        resp = interface_client.post(
            "/interfaces/interface_0/state",
            json={"view_id": "view_7", "delta": {}},
        )
        assert resp.status_code == 404

    def test_non_integer_node_id_400(self, interface_client):
        resp = interface_client.post(
            "/interfaces/interface_0/state",
            json={"view_id": "view_1", "delta": {"zero": {"kind": "opt", "on": True}}},
        )
        assert resp.status_code == 400

    def test_rejected_delta_leaves_state_unchanged(self, interface_client):
        before = interface_client.get("/interfaces/interface_0").json()["state"]
        resp = interface_client.post(
            "/interfaces/interface_0/state",
            json={
                "view_id": "view_1",
                "delta": {
                    "0": {"kind": "opt", "on": True},
                    "1": {"kind": "value", "value": "Narnia"},
                },
            },
        )
        assert resp.status_code == 400
        after = interface_client.get("/interfaces/interface_0").json()["state"]
        assert after == before


class TestGetInterface:
    def test_round_trip(self, interface_client):
        body = interface_client.get("/interfaces/interface_0").json()
        assert body["interface_id"] == "interface_0"
        assert set(body["state"]) == {"view_0", "view_1"}

    def test_unknown_interface_404(self, interface_client):
        assert interface_client.get("/interfaces/interface_9").status_code == 404


class TestReplayDeterminism:
    def _drive(self) -> list[bytes]:
        client = make_client()
        out = []
        out.append(client.post("/datasets", json={"name": "covid", "csv": COVID_CSV}).content)
        out.append(
            client.post(
                "/translate",
                json={
                    "questions": [
                        "Show total cases or deaths by state",
                        "How are daily cases trending, overall or for one state, over recent windows?",
                    ]
                },
            ).content
        )
        sps = [r["sps"] for r in json.loads(out[-1])["results"]]
        out.append(client.post("/interfaces", json={"templates": sps}).content)
        out.append(client.post("/interfaces/interface_0/state", json=TEXAS_DELTA).content)
        out.append(client.get("/interfaces/interface_0").content)
        return out

    def test_two_fresh_runs_agree_byte_for_byte(self):
        assert self._drive() == self._drive()


def make_catalog_rows(sql: str):
    from querydeck import DatasetCatalog

    catalog = DatasetCatalog(clock=fixed_clock(CLOCK_DATE))
    catalog.ingest_csv("covid", COVID_CSV)
    return catalog.execute_sql(sql).rows
