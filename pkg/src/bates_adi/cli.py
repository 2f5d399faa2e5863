"""Command-line client for the pricing service.

Every subcommand builds a request, sends it through the HTTP layer and
formats the response. By default the service app runs in-process; point
``--server`` (or BATES_ADI_SERVER) at a running instance to go remote.
``serve`` starts the service under uvicorn.
"""

from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click
import httpx

from .service.app import create_app
from .service.schemas import ConfigDocument


class ServiceClient:
    """Sends requests either to a remote server or to the in-process app."""

    def __init__(self, server: str | None):
        self.server = server

    def request(self, method: str, path: str, payload: dict | None = None) -> httpx.Response:
        if self.server:
            with httpx.Client(base_url=self.server, timeout=None) as client:
                return client.request(method, path, json=payload)

        async def go() -> httpx.Response:
            transport = httpx.ASGITransport(app=create_app())
            async with httpx.AsyncClient(
                transport=transport, base_url="http://bates-adi", timeout=None
            ) as client:
                return await client.request(method, path, json=payload)

        return asyncio.run(go())

    def call(self, method: str, path: str, payload: dict | None = None) -> dict:
        response = self.request(method, path, payload)
        if response.status_code >= 400:
            try:
                detail = response.json().get("detail", response.text)
            except Exception:
                detail = response.text
            click.echo(f"error ({response.status_code}): {detail}", err=True)
            sys.exit(1)
        return response.json()


def _load_config(path: str | None) -> ConfigDocument:
    if path is None:
        return ConfigDocument()
    try:
        raw = json.loads(Path(path).read_text())
        return ConfigDocument.model_validate(raw)
    except Exception as exc:
        click.echo(f"error: invalid config file {path}: {exc}", err=True)
        sys.exit(1)


def _selector(config: ConfigDocument, case: str | None) -> dict:
    if case is not None:
        return {"case": case, "model": None}
    if config.case is not None:
        return {"case": config.case, "model": None}
    if config.model is not None:
        return {"case": None, "model": config.model.model_dump(by_alias=True)}
    return {"case": "I", "model": None}


def _grid_payload(config: ConfigDocument, m1: int | None, m2: int | None) -> dict:
    grid = config.grid.model_dump()
    if m1 is not None:
        grid["m1"] = m1
    if m2 is not None:
        grid["m2"] = m2
    return grid


def _scheme_payload(
    config: ConfigDocument, adaptation: int | None, family: str | None, theta: float | None
) -> dict:
    scheme = config.scheme.model_dump()
    if adaptation is not None:
        scheme["adaptation"] = adaptation
    if family is not None:
        scheme["family"] = family
    if theta is not None:
        scheme["theta"] = theta
    return scheme


def _write_out(out: str | None, text: str) -> None:
    if out is None:
        click.echo(text, nl=False)
    else:
        Path(out).write_text(text)
        click.echo(f"wrote {out}")


@click.group()
@click.option("--server", envvar="BATES_ADI_SERVER", default=None,
              help="Base URL of a running service; defaults to in-process.")
@click.pass_context
def main(ctx: click.Context, server: str | None):
    """Price European puts under the Bates model with ADI time stepping."""
    ctx.obj = ServiceClient(server)


@main.command()
@click.option("--out", default=None, help="Write the case table as JSON.")
@click.pass_obj
def cases(client: ServiceClient, out: str | None):
    """List the named benchmark parameter sets."""
    data = client.call("GET", "/cases")
    if out is not None:
        _write_out(out, json.dumps(data, indent=2) + "\n")
        return
    for case in data["cases"]:
        p = case["params"]
        flags = []
        if case["stiff_jump"]:
            flags.append("stiff-jump")
        if case["feller_violated"]:
            flags.append("feller-violated")
        suffix = f"  [{', '.join(flags)}]" if flags else ""
        click.echo(
            f"case {case['name']}: kappa={p['kappa']} eta={p['eta']} sigma={p['sigma']} "
            f"rho={p['rho']} r={p['r']} lambda={p['lambda']} gamma={p['gamma']} "
            f"delta={p['delta']} T={p['T']} K={p['K']}  lambda*T={case['lambda_t']}{suffix}"
        )


@main.command()
@click.option("--case", "case_name", default=None, help="Named case (I..IV).")
@click.option("--config", "config_path", default=None, help="JSON config file.")
@click.option("--m1", type=int, default=None)
@click.option("--m2", type=int, default=None)
@click.option("--theta", type=float, default=None)
@click.option("--adaptation", type=click.IntRange(1, 3), default=None)
@click.option("--family", type=click.Choice(["mcs", "do"]), default=None)
@click.option("--n", type=int, default=200, help="Number of time steps.")
@click.option("--query", "queries", multiple=True, required=True,
              help="Query point 's,v'; repeatable.")
@click.option("--out", default=None, help="Write values as CSV.")
@click.pass_obj
def price(client, case_name, config_path, m1, m2, theta, adaptation, family, n, queries, out):
    """Price the put at one or more (s, v) points."""
    config = _load_config(config_path)
    points = []
    for q in queries:
        try:
            s_str, v_str = q.split(",")
            points.append((float(s_str), float(v_str)))
        except ValueError:
            click.echo(f"error: bad query point {q!r}; expected 's,v'", err=True)
            sys.exit(1)
    payload = {
        **_selector(config, case_name),
        "grid": _grid_payload(config, m1, m2),
        "scheme": _scheme_payload(config, adaptation, family, theta),
        "n": n,
        "query_points": points,
    }
    data = client.call("POST", "/price", payload)
    lines = ["s,v,value"]
    for (s_q, v_q), value in zip(data["query_points"], data["values"]):
        lines.append(f"{s_q!r},{v_q!r},{value!r}")
    text = "\n".join(lines) + "\n"
    if out is None:
        for (s_q, v_q), value in zip(data["query_points"], data["values"]):
            click.echo(f"u({s_q}, {v_q}) = {value}")
    else:
        _write_out(out, text)


@main.command()
@click.option("--case", "case_name", default=None)
@click.option("--config", "config_path", default=None)
@click.option("--m1", type=int, default=None)
@click.option("--m2", type=int, default=None)
@click.option("--theta", multiple=True, type=float, help="Scheme theta; repeatable.")
@click.option("--adaptation", multiple=True, type=click.IntRange(1, 3))
@click.option("--family", multiple=True, type=click.Choice(["mcs", "do"]))
@click.option("--n", "n_values", multiple=True, type=int,
              help="Step count; repeatable. Default: 20 log-spaced in [10, 1000].")
@click.option("--n-ref", type=int, default=None, help="Reference step count.")
@click.option("--threads", type=int, default=None)
@click.option("--out", default=None, help="Write the sweep CSV here.")
@click.pass_obj
def sweep(client, case_name, config_path, m1, m2, theta, adaptation, family,
          n_values, n_ref, threads, out):
    """Temporal-error sweep over schemes and step counts."""
    config = _load_config(config_path)
    section = config.sweep
    schemes: list[dict] | None = None
    if adaptation or family or theta:
        adaptations = list(adaptation) or [1, 2, 3]
        families = list(family) or ["mcs"]
        thetas = list(theta) or [1.0 / 3.0]
        schemes = [
            {"adaptation": a, "family": f, "theta": t}
            for a in adaptations for f in families for t in thetas
        ]
    elif section is not None and section.schemes is not None:
        schemes = [s.model_dump() for s in section.schemes]
    if schemes is None:
        # default matrix: every adaptation with MCS theta=1/3, 1/2 and Do 1/2
        schemes = [
            {"adaptation": a, "family": f, "theta": t}
            for a in (1, 2, 3)
            for (f, t) in (("mcs", 1.0 / 3.0), ("mcs", 0.5), ("do", 0.5))
        ]
    payload = {
        **_selector(config, case_name),
        "grid": _grid_payload(config, m1, m2),
        "schemes": schemes,
        "n_values": list(n_values) or (section.n_values if section else None),
        "n_ref": n_ref if n_ref is not None else (section.n_ref if section else 10_000),
        "threads": threads if threads is not None else (section.threads if section else 1),
    }
    data = client.call("POST", "/sweep", payload)
    out_path = out or (config.output.out if config.output else None)
    _write_out(out_path, data["csv"])


@main.command()
@click.option("--case", "case_name", default=None)
@click.option("--config", "config_path", default=None)
@click.option("--m1", type=int, default=None)
@click.option("--m2", type=int, default=None)
@click.option("--out", default=None, help="Write the eigenvalue CSV here.")
@click.pass_obj
def eigenvalues(client, case_name, config_path, m1, m2, out):
    """Eigenvalue cloud of the jump quadrature matrix."""
    config = _load_config(config_path)
    payload = {
        **_selector(config, case_name),
        "grid": _grid_payload(config, m1, m2),
    }
    data = client.call("POST", "/eigenvalues", payload)
    click.echo(
        f"case {data['case']} ({data['m1']}x{data['m2']}): {len(data['eigenvalues'])} "
        f"eigenvalues, max|nu| = {data['max_abs']:.12f}, max|Im nu| = {data['max_imag']:.3e}",
        err=True,
    )
    _write_out(out, data["csv"])


@main.command()
@click.option("--theorem", required=True, help="One of the verification ids, e.g. T1a.")
@click.option("--theta", type=float, default=1.0 / 3.0)
@click.option("--samples", type=int, default=100_000)
@click.option("--seed", type=int, default=0)
@click.option("--out", default=None, help="Write the report text here.")
@click.option("--shards-csv", default=None, help="Write per-shard maxima as CSV.")
@click.pass_obj
def stability(client, theorem, theta, samples, seed, out, shards_csv):
    """Run one sampled stability-theory verification."""
    payload = {"theorem": theorem, "theta": theta, "samples": samples, "seed": seed}
    data = client.call("POST", "/stability", payload)
    _write_out(out, data["text"])
    if shards_csv is not None:
        Path(shards_csv).write_text(data["shard_csv"])
        click.echo(f"wrote {shards_csv}")
    if not data["passed"]:
        sys.exit(2)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8000)
def serve(host: str, port: int):
    """Run the pricing service under uvicorn."""
    import uvicorn

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
