"""Command-line front end: a thin client of the HTTP service.

Without ``--server`` the commands run against an in-process instance of the
FastAPI app (no socket); with ``--server URL`` they talk to a remote one.
Exit codes: 0 success (integration events included), 2 config error,
3 numeric failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

from .errors import ConfigError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=False)


def _load_config_dict(path: str, tol_overrides, seed) -> dict:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config is not valid JSON: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("config root must be a JSON object")
    if tol_overrides:
        tols = dict(raw.get("tolerances", {}))
        for item in tol_overrides:
            if "=" not in item:
                raise ConfigError(f"--tol expects name=value, got {item!r}")
            name, _, val = item.partition("=")
            try:
                tols[name.strip()] = float(val)
            except ValueError as exc:
                raise ConfigError(f"--tol {name}: {val!r} is not a number") from exc
        raw["tolerances"] = tols
    if seed is not None:
        raw["seed"] = seed
    return raw


def _post(client: httpx.Client, path: str, payload: dict) -> dict:
    resp = client.post(path, json=payload)
    if resp.status_code in (400, 422):
        detail = resp.json().get("detail", resp.text)
        click.echo(f"config error: {detail}", err=True)
        sys.exit(EXIT_CONFIG)
    if resp.status_code >= 500:
        try:
            detail = resp.json().get("detail", resp.text)
        except Exception:
            detail = resp.text
        click.echo(f"numeric failure: {detail}", err=True)
        sys.exit(EXIT_NUMERIC)
    resp.raise_for_status()
    return resp.json()


@click.group()
def main():
    """Phase-space geometry runs and audits."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--server", default=None, help="URL of a running service; default is in-process")
@click.option("--tol", "tols", multiple=True, help="tolerance override name=value")
@click.option("--seed", type=int, default=None)
def integrate(config_path, out_dir, server, tols, seed):
    """Integrate configured initial points; write CSV per trajectory + JSON summary."""
    try:
        payload = _load_config_dict(config_path, tols, seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with _client(server) as client:
        body = _post(client, "/integrate", payload)
    for traj in body["trajectories"]:
        (out / f"{traj['name']}.csv").write_text(traj["csv"], encoding="utf-8")
    summary = dict(body["summary"])
    summary["status"] = body["status"]
    (out / "summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    for row in summary["trajectories"]:
        click.echo(f"{row['name']}: {row['samples']} samples, termination={row['termination']}, "
                   f"max drift={row['max_drift']:.3e}")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--server", default=None)
@click.option("--tol", "tols", multiple=True)
@click.option("--seed", type=int, default=None)
def audit(config_path, out_path, server, tols, seed):
    """Run the structure audit; write the JSON report."""
    try:
        payload = _load_config_dict(config_path, tols, seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    with _client(server) as client:
        body = _post(client, "/audit", payload)
    report = body["report"]
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    verdict = "PASS" if report.get("pass") else "FAIL"
    click.echo(f"audit {verdict} ({len(report.get('failures', []))} failing sections)")
    sys.exit(EXIT_OK)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8000, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    uvicorn.run("jetphase.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
