"""Command-line client for the campaign service.

``simulate`` is a thin client: it validates the config locally, submits the
campaign over the service API, polls until completion and downloads the
output files. By default the service runs in-process (no network involved);
``--server`` points it at a remote instance instead.

Exit codes: 0 success, 2 configuration error, 3 campaign failure.
"""

import json
import sys
import time
from pathlib import Path

import click
import httpx

from . import __version__
from .config import load_config, parse_config
from .errors import ConfigError
from .service import OUTPUT_FILES


def _in_process_client():
    # the starlette test client is a full sync HTTP client over ASGI; it lets
    # the CLI exercise the exact service code path without a socket
    import warnings
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*httpx.*", category=Warning)
        from starlette.testclient import TestClient

    from .service import app
    return TestClient(app, raise_server_exceptions=False)


def _apply_overrides(cfg, seed, realizations, algorithms, alpha, pt_dbm):
    data = json.loads(cfg.model_dump_json())
    if seed is not None:
        data["master_seed"] = seed
    if realizations is not None:
        data["n_realizations"] = realizations
    if algorithms is not None:
        data["optimizer"]["algorithms"] = [a.strip() for a in algorithms.split(",") if a.strip()]
    if alpha is not None:
        entries = []
        for item in (a.strip() for a in alpha.split(",") if a.strip()):
            try:
                entries.append(float(item))
            except ValueError:
                entries.append(item)  # "maxmin" and friends; schema validates
        data["fairness"] = entries
    if pt_dbm is not None:
        try:
            data["p_t_dbm"] = [float(p) for p in pt_dbm.split(",") if p.strip()]
        except ValueError as exc:
            raise ConfigError(f"--pt-dbm entries must be numbers: {exc}") from exc
    return parse_config(data)


@click.group()
@click.version_option(__version__)
def main():
    """Alpha-fair hybrid precoding simulator."""


@main.command()
@click.option("--config", "config_path", required=True,
              type=click.Path(dir_okay=False), help="JSON scenario file.")
@click.option("--out", "out_dir", default="results", show_default=True,
              type=click.Path(file_okay=False), help="Directory for the output files.")
@click.option("--seed", type=int, default=None, help="Override the master seed.")
@click.option("--realizations", type=int, default=None,
              help="Override the number of network realizations.")
@click.option("--algorithms", default=None,
              help="Comma-separated optimizers, e.g. pso,gwo,aco,cs,fa.")
@click.option("--alpha", default=None,
              help="Comma-separated fairness levels; numbers or 'maxmin'.")
@click.option("--pt-dbm", default=None, help="Comma-separated transmit powers (dBm).")
@click.option("--workers", type=int, default=1, show_default=True,
              help="Worker threads for the campaign.")
@click.option("--server", default=None,
              help="Base URL of a running service; default executes in-process.")
@click.option("--poll-interval", type=float, default=0.2, show_default=True,
              help="Seconds between job status polls.")
def simulate(config_path, out_dir, seed, realizations, algorithms, alpha,
             pt_dbm, workers, server, poll_interval):
    """Run a Monte-Carlo campaign and download records, traces and summary."""
    try:
        cfg = load_config(config_path)
        cfg = _apply_overrides(cfg, seed, realizations, algorithms, alpha, pt_dbm)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(2)

    client = httpx.Client(base_url=server, timeout=30.0) if server \
        else _in_process_client()
    with client:
        payload = {"config": json.loads(cfg.model_dump_json()), "workers": workers}
        resp = client.post("/campaigns", json=payload)
        if resp.status_code in (400, 422):
            click.echo(f"config rejected by service: {resp.text}", err=True)
            sys.exit(2)
        if resp.status_code not in (200, 202):
            click.echo(f"submission failed: HTTP {resp.status_code} {resp.text}", err=True)
            sys.exit(3)
        job_id = resp.json()["job_id"]
        click.echo(f"submitted campaign {job_id} "
                   f"({cfg.n_realizations} realizations, seed {cfg.master_seed})")

        while True:
            status = client.get(f"/campaigns/{job_id}").json()
            if status["state"] in ("done", "failed"):
                break
            time.sleep(poll_interval)
        if status["state"] == "failed":
            click.echo(f"campaign failed: {status['error']}", err=True)
            sys.exit(3)

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        for name in OUTPUT_FILES:
            resp = client.get(f"/campaigns/{job_id}/files/{name}")
            if resp.status_code != 200:
                click.echo(f"download of {name} failed: HTTP {resp.status_code}", err=True)
                sys.exit(3)
            (out / name).write_bytes(resp.content)
        click.echo(f"wrote {status['n_records']} records to {out}")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Start the campaign service."""
    import uvicorn

    from .service import app
    uvicorn.run(app, host=host, port=port)


# console-script alias so `simulate --config ...` works without the group prefix
simulate_entry = simulate

if __name__ == "__main__":
    main()
