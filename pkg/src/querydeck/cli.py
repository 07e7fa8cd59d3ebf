"""Command line entry point: configure and serve the HTTP app."""

from __future__ import annotations

import json

import click
import uvicorn

from .catalog import fixed_clock, load_region_names
from .interface_mapper import CostParams
from .nl_translator import LiveBackend, MockBackend
from .service import create_app


@click.command()
@click.option("--host", default="127.0.0.1", show_default=True, help="Bind address.")
@click.option("--port", default=8000, show_default=True, type=int, help="Bind port.")
@click.option(
    "--data-dir",
    default=None,
    type=click.Path(file_okay=False),
    help="Directory for persisting uploaded CSVs; existing *.csv files are loaded at startup.",
)
@click.option(
    "--llm-backend",
    default="mock",
    show_default=True,
    type=click.Choice(["mock", "live"]),
    help="Translation backend; live reads QUERYDECK_LLM_URL / _MODEL / _KEY.",
)
@click.option("--clock", default=None, help="Pin today() to an ISO date (YYYY-MM-DD).")
@click.option(
    "--cost-config",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="JSON file overriding interface cost parameters.",
)
@click.option(
    "--regions",
    default=None,
    type=click.Path(exists=True, dir_okay=False),
    help="Region name list (one per line) for geographic type inference.",
)
def main(
    host: str,
    port: int,
    data_dir: str | None,
    llm_backend: str,
    clock: str | None,
    cost_config: str | None,
    regions: str | None,
) -> None:
    backend = LiveBackend() if llm_backend == "live" else MockBackend.default()
    params = None
    if cost_config:
        with open(cost_config, encoding="utf-8") as fh:
            params = CostParams.from_dict(json.load(fh))
    app = create_app(
        clock=fixed_clock(clock) if clock else None,
        region_names=load_region_names(regions) if regions else None,
        backend=backend,
        cost_params=params,
        data_dir=data_dir,
    )
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
