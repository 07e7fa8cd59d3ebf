from __future__ import annotations

import pathlib

import pytest

from querydeck import DatasetCatalog, fixed_clock

FIXTURES = pathlib.Path(__file__).parent / "fixtures"
CLOCK_DATE = "2022-10-01"

LISTING_ONE = "select state, sum(ANY{cases, deaths}) from covid group by state"
LISTING_ONE_Q1 = "select state, sum(cases) from covid group by state"
LISTING_ONE_Q2 = "select state, sum(deaths) from covid group by state"

LISTING_TWO = """select date, sum(cases)
from covid
where OPT{state = ANY{&state}}
and OPT{date > date(today(), ANY{'-7 days', '-30 days'})}
group by date"""


@pytest.fixture
def covid_catalog() -> DatasetCatalog:
    catalog = DatasetCatalog(clock=fixed_clock(CLOCK_DATE))
    catalog.ingest_csv("covid", (FIXTURES / "covid.csv").read_bytes())
    return catalog
