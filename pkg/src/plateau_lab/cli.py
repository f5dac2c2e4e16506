"""Thin CLI client for the experiment service.

Each experiment kind is a subcommand; the request is built from an INI
config plus flag overrides and sent over HTTP to a running service
(--server) or, by default, to the in-process app through an ASGI transport,
so the wire format is identical either way.  Exit codes: 0 success,
1 acceptance-criterion failure, 2 configuration error.
"""

from __future__ import annotations

import json
import os
import sys

import click
import httpx

from .errors import ConfigError
from .experiments.config import KINDS, parse_config_file
from .experiments.tables import write_atomic


def _request(path: str, payload: dict, server: str | None) -> httpx.Response:
    """POST to a remote service, or to the in-process app over ASGI."""
    if server:
        with httpx.Client(base_url=server, timeout=None) as client:
            return client.post(path, json=payload)

    import asyncio

    from .service import create_app

    async def go() -> httpx.Response:
        transport = httpx.ASGITransport(app=create_app())
        async with httpx.AsyncClient(transport=transport, base_url="http://plateau-lab.local", timeout=None) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _run_kind(kind: str, config_path: str, seed, out, threads, quadrature_order, server) -> None:
    overrides = {"seed": seed, "out": out, "threads": threads, "quadrature_order": quadrature_order}
    try:
        config = parse_config_file(config_path, {k: v for k, v in overrides.items() if v is not None})
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)
    if config.kind != kind:
        click.echo(f"config error: experiment.kind = {config.kind!r} but the subcommand is {kind!r}", err=True)
        sys.exit(2)
    payload = {
        "kind": config.kind,
        "seed": config.seed,
        "group": config.group,
        "params": config.params,
        "threads": config.threads,
        "quadrature_order": config.quadrature_order,
    }
    response = _request("/experiments/run", payload, server)
    if response.status_code == 422:
        click.echo(f"config error: {response.json().get('detail')}", err=True)
        sys.exit(2)
    if response.status_code != 200:
        click.echo(f"service error: {response.text}", err=True)
        sys.exit(1)
    body = response.json()
    out_dir = out or config.out or "."
    base = os.path.join(out_dir, f"{kind}-{body['provenance']['config_hash']}")
    write_atomic(base + ".csv", body["csv"])
    write_atomic(
        base + ".json",
        json.dumps(
            {
                "provenance": body["provenance"],
                "summary": body["summary"],
                "aggregates": body["aggregates"],
                "columns": body["columns"],
            },
            indent=2,
            sort_keys=True,
            default=str,
        ),
    )
    click.echo(f"wrote {base}.csv and {base}.json")
    for key, value in body["summary"].items():
        click.echo(f"  {key} = {value}")


def _common_options(fn):
    fn = click.option("--config", "config_path", required=True, type=click.Path(exists=True), help="INI config")(fn)
    fn = click.option("--seed", type=int, default=None, help="override the config seed")(fn)
    fn = click.option("--out", type=click.Path(), default=None, help="output directory")(fn)
    fn = click.option("--threads", type=int, default=None, help="internal parallelism bound")(fn)
    fn = click.option("--quadrature-order", type=int, default=None, help="simplex quadrature order")(fn)
    fn = click.option("--server", type=str, default=None, help="base URL of a running service; in-process if omitted")(fn)
    return fn


@click.group()
def main() -> None:
    """Numerical laboratory for the l2 spherical Plateau problem."""


def _register(kind: str) -> None:
    @main.command(name=kind)
    @_common_options
    def _cmd(config_path, seed, out, threads, quadrature_order, server, _kind=kind):
        _run_kind(_kind, config_path, seed, out, threads, quadrature_order, server)

    _cmd.__doc__ = f"Run the {kind} experiment from an INI config."


for _kind in KINDS:
    _register(_kind)


@main.command()
@click.option("--config-dir", type=click.Path(), default=None, help="directory of acceptance criterion fixtures")
@click.option("--criteria", type=str, default=None, help="comma-separated criterion numbers, e.g. 1,5,9")
@click.option("--out", type=click.Path(), default=None, help="write the report here as text + JSON")
@click.option("--server", type=str, default=None, help="base URL of a running service; in-process if omitted")
def acceptance(config_dir, criteria, out, server) -> None:
    """Run the acceptance suite; nonzero exit on any criterion failure."""
    numbers = [int(tok) for tok in criteria.split(",")] if criteria else None
    payload = {"criteria": numbers, "config_dir": config_dir}
    response = _request("/acceptance", payload, server)
    if response.status_code == 404:
        click.echo(f"missing fixture: {response.json().get('detail')}", err=True)
        sys.exit(2)
    if response.status_code != 200:
        click.echo(f"service error: {response.text}", err=True)
        sys.exit(1)
    body = response.json()
    click.echo(body["text"])
    if out:
        write_atomic(os.path.join(out, "acceptance.txt"), body["text"])
        write_atomic(os.path.join(out, "acceptance.json"), json.dumps(body, indent=2, default=str))
    sys.exit(0 if body["passed"] else 1)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port) -> None:
    """Serve the experiment API over HTTP."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
