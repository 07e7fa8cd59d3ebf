from __future__ import annotations

import datetime as dt

import pytest

from querydeck import (
    DatasetCatalog,
    EmptyCatalog,
    EmptyTable,
    MalformedCsv,
    SemanticType,
    SqlError,
    StorageType,
    UnknownColumn,
    fixed_clock,
)
from querydeck.catalog import rewrite_today


def _column(catalog: DatasetCatalog, table: str, name: str):
    return catalog.table(table).column(name)


class TestIngest:
    def test_covid_schema(self, covid_catalog):
        schema = covid_catalog.table("covid")
        got = [(c.name, c.storage_type, c.semantic_type) for c in schema.columns]
        assert got == [
            ("date", StorageType.DATE, SemanticType.TEMPORAL),
            ("state", StorageType.TEXT, SemanticType.GEOGRAPHIC),
            ("cases", StorageType.INTEGER, SemanticType.QUANTITATIVE),
            ("deaths", StorageType.INTEGER, SemanticType.QUANTITATIVE),
        ]
        assert schema.row_count == 18

    def test_reingest_replaces(self, covid_catalog):
        covid_catalog.ingest_csv("covid", "date,state,cases,deaths\n2022-01-01,Ohio,1,0\n")
        assert covid_catalog.table("covid").row_count == 1
        result = covid_catalog.execute_sql("select count(*) from covid")
        assert result.rows == [(1,)]

    def test_bad_table_name(self):
        catalog = DatasetCatalog()
        with pytest.raises(ValueError):
            catalog.ingest_csv("not a name", "a\n1\n")

    def test_empty_payload(self):
        with pytest.raises(EmptyTable):
            DatasetCatalog().ingest_csv("t", "")

    def test_header_only(self):
        with pytest.raises(EmptyTable):
            DatasetCatalog().ingest_csv("t", "a,b\n")

    def test_duplicate_header(self):
        with pytest.raises(MalformedCsv):
            DatasetCatalog().ingest_csv("t", "a,a\n1,2\n")

    def test_ragged_row_reports_line(self):
        with pytest.raises(MalformedCsv) as err:
            DatasetCatalog().ingest_csv("t", "a,b\n1,2\n3\n")
        assert err.value.line == 3

    def test_quoted_fields_and_embedded_commas(self):
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", 'a,b\n"x, y",2\n"line\nbreak",3\n')
        result = catalog.execute_sql("select a from t order by b")
        assert result.rows == [("x, y",), ("line\nbreak",)]

    def test_utf8_bom_is_stripped(self):
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", b"\xef\xbb\xbfa,b\n1,2\n")
        assert catalog.table("t").columns[0].name == "a"


class TestTypeInference:
    def _ingest_single(self, values: list[str]) -> DatasetCatalog:
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", "v\n" + "\n".join(values) + "\n")
        return catalog

    def test_numeric_share_at_threshold(self):
        # 19 of 20 numeric = exactly 95%
        catalog = self._ingest_single([str(i) for i in range(19)] + ["oops"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.QUANTITATIVE

    def test_numeric_share_below_threshold(self):
        catalog = self._ingest_single([str(i) for i in range(18)] + ["oops", "nope"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.CATEGORICAL

    def test_temporal_share_at_threshold(self):
        dates = [(dt.date(2022, 1, 1) + dt.timedelta(days=i)).isoformat() for i in range(19)]
        catalog = self._ingest_single(dates + ["oops"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.TEMPORAL

    def test_temporal_share_below_threshold(self):
        dates = [(dt.date(2022, 1, 1) + dt.timedelta(days=i)).isoformat() for i in range(18)]
        catalog = self._ingest_single(dates + ["oops", "nope"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.CATEGORICAL

    def test_numeric_wins_over_temporal_order(self):
        # all-numeric column never reaches the date check
        catalog = self._ingest_single(["1", "2", "3"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.QUANTITATIVE

    def test_geographic_at_threshold(self):
        # 4 of 5 distinct values are region names = exactly 80%
        values = ["Ohio", "Texas", "Utah", "Maine", "Atlantis"] * 2
        catalog = self._ingest_single(values)
        assert _column(catalog, "t", "v").semantic_type is SemanticType.GEOGRAPHIC

    def test_geographic_below_threshold(self):
        values = ["Ohio", "Texas", "Utah", "Gotham", "Atlantis"]
        catalog = self._ingest_single(values)
        assert _column(catalog, "t", "v").semantic_type is SemanticType.CATEGORICAL

    def test_geographic_matching_is_case_insensitive(self):
        catalog = self._ingest_single(["ohio", "TEXAS", "utah"])
        assert _column(catalog, "t", "v").semantic_type is SemanticType.GEOGRAPHIC

    def test_custom_region_list(self):
        catalog = DatasetCatalog(region_names=["North", "South"])
        catalog.ingest_csv("t", "v\nNorth\nSouth\n")
        assert _column(catalog, "t", "v").semantic_type is SemanticType.GEOGRAPHIC

    def test_integer_vs_real_storage(self):
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", "i,r,e\n1,1.5,1e3\n2,2.5,2e3\n")
        assert _column(catalog, "t", "i").storage_type is StorageType.INTEGER
        assert _column(catalog, "t", "r").storage_type is StorageType.REAL
        assert _column(catalog, "t", "e").storage_type is StorageType.REAL

    def test_nulls_excluded_from_shares(self):
        # empty fields do not count against the numeric share
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", "v,w\n1,x\n2,x\n,x\n,x\n3,x\n")
        col = _column(catalog, "t", "v")
        assert col.semantic_type is SemanticType.QUANTITATIVE

    def test_all_null_column_is_categorical_text(self):
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", "v,w\n,1\n,2\n")
        col = _column(catalog, "t", "v")
        assert col.storage_type is StorageType.TEXT
        assert col.semantic_type is SemanticType.CATEGORICAL


class TestDomains:
    def test_domain_sorted_distinct_non_null(self):
        catalog = DatasetCatalog()
        catalog.ingest_csv("t", "v,w\nb,1\na,1\nb,1\n,1\na,1\n")
        assert catalog.attribute_domain("t", "v") == ["a", "b"]

    def test_domain_cache_invalidated_on_reingest(self, covid_catalog):
        assert covid_catalog.attribute_domain("covid", "state") == ["Ohio", "Texas", "Utah"]
        covid_catalog.ingest_csv("covid", "date,state,cases,deaths\n2022-01-01,Iowa,1,0\n")
        assert covid_catalog.attribute_domain("covid", "state") == ["Iowa"]

    def test_domain_returns_copy(self, covid_catalog):
        first = covid_catalog.attribute_domain("covid", "state")
        first.append("Zzz")
        assert covid_catalog.attribute_domain("covid", "state") == ["Ohio", "Texas", "Utah"]

    def test_numeric_domain_keeps_native_types(self, covid_catalog):
        domain = covid_catalog.attribute_domain("covid", "deaths")
        assert all(isinstance(v, int) for v in domain)
        assert domain == sorted(domain)

    def test_unknown_column(self, covid_catalog):
        with pytest.raises(UnknownColumn):
            covid_catalog.attribute_domain("covid", "nope")


class TestTodayRewrite:
    def test_rewrites_to_pinned_date(self):
        clock = fixed_clock("2022-10-01")
        assert rewrite_today("select today()", clock) == "select '2022-10-01'"

    def test_case_and_spacing(self):
        clock = fixed_clock("2022-10-01")
        assert rewrite_today("select TODAY ( )", clock) == "select '2022-10-01'"

    def test_quoted_today_untouched(self):
        clock = fixed_clock("2022-10-01")
        assert rewrite_today("select 'today()'", clock) == "select 'today()'"

    def test_execute_applies_rewrite(self, covid_catalog):
        result = covid_catalog.execute_sql("select date(today(), '-7 days')")
        assert result.rows == [("2022-09-24",)]


class TestExecution:
    def test_semantic_propagation(self, covid_catalog):
        result = covid_catalog.execute_sql(
            "select state, date, sum(cases), min(date), count(*) from covid group by state, date"
        )
        types = [c.semantic_type for c in result.columns]
        assert types == [
            SemanticType.GEOGRAPHIC,
            SemanticType.TEMPORAL,
            SemanticType.QUANTITATIVE,
            SemanticType.TEMPORAL,
            SemanticType.QUANTITATIVE,
        ]

    def test_expression_type_from_values(self, covid_catalog):
        result = covid_catalog.execute_sql("select cases * 2 from covid")
        assert result.columns[0].semantic_type is SemanticType.QUANTITATIVE

    def test_sql_error(self, covid_catalog):
        with pytest.raises(SqlError):
            covid_catalog.execute_sql("select nonsense from nowhere")

    def test_rows_are_plain_tuples(self, covid_catalog):
        result = covid_catalog.execute_sql("select state from covid limit 1")
        assert result.rows == [("Ohio",)]


class TestSchemaText:
    def test_format_and_table_order(self, covid_catalog):
        covid_catalog.ingest_csv("aux", "k,x\na,1.5\nb,2.5\n")
        assert covid_catalog.schema_text() == (
            "aux(k:text, x:real)\n"
            "covid(date:date, state:text, cases:int, deaths:int)"
        )

    def test_empty_catalog_raises(self):
        with pytest.raises(EmptyCatalog):
            DatasetCatalog().schema_text()
