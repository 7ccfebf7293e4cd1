"""Command-line entry point: serve the control plane, run agents, manage
channels and subscriptions, inspect inventory, and drive simulations.

Exit codes: 0 success, 1 domain error (API errors, failed scenarios),
2 usage or configuration errors. In --output json mode, command output is
the API response body verbatim.
"""

from __future__ import annotations

import json
import signal
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import click
import requests

from .agent.client import HttpClient
from .agent.config import load_agent_config
from .agent.node import ClusterNode
from .artifacts import FileArtifactStore, MemoryArtifactStore
from .control_plane.api import ApiRouter
from .control_plane.config import load_server_config
from .control_plane.core import ControlPlane, Credentials
from .control_plane.server import ControlPlaneServer
from .conventions import HEADER_API_KEY, HEADER_ORG_KEY, HEADER_RESOURCE_NAME, HEADER_USER_ID
from .errors import HorizonExceeded
from .sim.config import SimConfig, load_sim_config
from .sim.figures import render_comparison_figure, render_report_figure
from .sim.harness import compare_models, run_pull_rollout, run_push_rollout
from .sim.reporting import SimReport
from .sim.scenarios import SCENARIO_NAMES, run_e2e_scenario


@dataclass
class CliContext:
    url: str
    api_key: str
    user_id: str
    org_key: str
    output: str


def format_table(headers: list[str], rows: list[list[str]]) -> str:
    table = [headers] + [[str(c) for c in row] for row in rows]
    widths = [max(len(row[i]) for row in table) for i in range(len(headers))]
    return "\n".join(
        "  ".join(cell.ljust(widths[i]) for i, cell in enumerate(row)) for row in table
    )


@click.group()
@click.option("--url", default="http://127.0.0.1:8080", show_default=True)
@click.option("--api-key", default="api-key-dev")
@click.option("--user-id", default="admin")
@click.option("--org-key", default="org-key-dev")
@click.option("--output", type=click.Choice(["text", "json"]), default="text", show_default=True)
@click.pass_context
def main(ctx, url, api_key, user_id, org_key, output):
    """Pull-based continuous deployment control plane, agent, and simulator."""
    import os

    # RAZORCD_* environment variables take precedence over flags.
    ctx.obj = CliContext(
        url=os.environ.get("RAZORCD_URL") or url,
        api_key=os.environ.get("RAZORCD_API_KEY") or api_key,
        user_id=os.environ.get("RAZORCD_USER_ID") or user_id,
        org_key=os.environ.get("RAZORCD_ORG_KEY") or org_key,
        output=output,
    )


# -- shared HTTP helpers -------------------------------------------------------


def _request(obj: CliContext, method: str, path: str, *, admin=True, org=False,
             json_body=None, data=None, params=None, extra_headers=None) -> requests.Response:
    headers = {}
    if admin:
        headers[HEADER_API_KEY] = obj.api_key
        headers[HEADER_USER_ID] = obj.user_id
    if org:
        headers[HEADER_ORG_KEY] = obj.org_key
    if extra_headers:
        headers.update(extra_headers)
    try:
        return requests.request(
            method, obj.url.rstrip("/") + path,
            headers=headers, json=json_body, data=data, params=params, timeout=30,
        )
    except requests.RequestException as exc:
        click.echo(f"error: control plane unreachable: {exc}", err=True)
        sys.exit(1)


def _fail_if_error(obj: CliContext, response: requests.Response) -> None:
    if response.status_code < 400:
        return
    if obj.output == "json":
        click.echo(response.text)
    else:
        try:
            err = response.json()
            click.echo(f"error [{err.get('code')}]: {err.get('message')}", err=True)
        except ValueError:
            click.echo(f"error: HTTP {response.status_code}", err=True)
    sys.exit(1)


def _emit(obj: CliContext, response: requests.Response, text: str) -> None:
    _fail_if_error(obj, response)
    if obj.output == "json":
        click.echo(response.text)
    else:
        click.echo(text)


# -- serve ---------------------------------------------------------------------


@main.command()
@click.option("--config", "config_path", type=str, default=None, help="Server config file (YAML/JSON).")
def serve(config_path):
    """Run the control plane until interrupted."""
    if config_path is not None and not Path(config_path).exists():
        raise click.UsageError(f"config file not found: {config_path}")
    try:
        cfg = load_server_config(config_path)
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad config: {exc}")
    store = FileArtifactStore(cfg.store_dir) if cfg.store_dir != ":memory:" else MemoryArtifactStore()
    cp = ControlPlane(Credentials(cfg.org_key, cfg.api_key, cfg.user_id), store)
    try:
        server = ControlPlaneServer(ApiRouter(cp), cfg.host, cfg.port)
    except OSError as exc:
        click.echo(f"error: cannot listen on {cfg.listen}: {exc}", err=True)
        sys.exit(1)
    click.echo(f"control plane listening on {server.url} (artifacts: {store.label})")
    signal.signal(signal.SIGTERM, lambda *a: sys.exit(0))
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass


# -- channel -------------------------------------------------------------------


@main.group()
def channel():
    """Manage channels and their versions."""


@channel.command("create")
@click.argument("name")
@click.pass_obj
def channel_create(obj, name):
    response = _request(obj, "POST", "/api/v1/channels", json_body={"name": name})
    _emit(obj, response, f"channel {name} created")


@channel.command("list")
@click.pass_obj
def channel_list(obj):
    response = _request(obj, "GET", "/api/v1/channels")
    _fail_if_error(obj, response)
    if obj.output == "json":
        click.echo(response.text)
        return
    channels = response.json()["channels"]
    rows = [[c["name"], c["version_count"], c["latest"] or "-"] for c in channels]
    click.echo(format_table(["NAME", "VERSIONS", "LATEST"], rows))


@channel.command("upload")
@click.argument("channel_name")
@click.option("--version", "-v", "version_name", required=True, help="Version name (resource-name header).")
@click.option("--file", "-f", "bundle_path", required=True, type=click.Path(exists=True))
@click.pass_obj
def channel_upload(obj, channel_name, version_name, bundle_path):
    payload = Path(bundle_path).read_bytes()
    response = _request(
        obj, "POST", f"/api/v1/channels/{channel_name}/version",
        org=True, data=payload,
        extra_headers={"content-type": "text/yaml", HEADER_RESOURCE_NAME: version_name},
    )
    _fail_if_error(obj, response)
    click.echo(response.text)


# -- subscription ----------------------------------------------------------------


@main.group()
def subscription():
    """Manage subscriptions (the rollout levers)."""


@subscription.command("create")
@click.argument("name")
@click.argument("channel_name")
@click.argument("version_name")
@click.option("--tag", "tags", multiple=True, required=True)
@click.pass_obj
def subscription_create(obj, name, channel_name, version_name, tags):
    response = _request(
        obj, "POST", "/api/v1/subscriptions",
        json_body={"name": name, "channel": channel_name, "version": version_name, "tags": list(tags)},
    )
    _emit(obj, response, f"subscription {name} created")


@subscription.command("list")
@click.pass_obj
def subscription_list(obj):
    response = _request(obj, "GET", "/api/v1/subscriptions")
    _fail_if_error(obj, response)
    if obj.output == "json":
        click.echo(response.text)
        return
    subs = response.json()["subscriptions"]
    rows = [
        [s["name"], s["channel"], s["version"], ",".join(s["tags"]), s["revision"], s["id"]]
        for s in subs
    ]
    click.echo(format_table(["NAME", "CHANNEL", "VERSION", "TAGS", "REV", "ID"], rows))


@subscription.command("set-version")
@click.argument("name")
@click.argument("version_name")
@click.pass_obj
def subscription_set_version(obj, name, version_name):
    listing = _request(obj, "GET", "/api/v1/subscriptions")
    _fail_if_error(obj, listing)
    matches = [s for s in listing.json()["subscriptions"] if s["name"] == name or s["id"] == name]
    if not matches:
        click.echo(f"error: no subscription named {name!r}", err=True)
        sys.exit(1)
    sub_id = matches[0]["id"]
    response = _request(
        obj, "PATCH", f"/api/v1/subscriptions/{sub_id}/version",
        json_body={"version": version_name},
    )
    _emit(obj, response, f"subscription {name} now serves {version_name}")


# -- cluster ----------------------------------------------------------------------


@main.group()
def cluster():
    """Inspect the cluster inventory and reported resources."""


@cluster.command("list")
@click.pass_obj
def cluster_list(obj):
    response = _request(obj, "GET", "/api/v1/clusters")
    _fail_if_error(obj, response)
    if obj.output == "json":
        click.echo(response.text)
        return
    clusters = response.json()["clusters"]
    rows = [
        [c["cluster_id"], ",".join(c["tags"]), c["last_seen"], c["resource_count"]]
        for c in clusters
    ]
    click.echo(format_table(["CLUSTER", "TAGS", "LAST_SEEN", "RESOURCES"], rows))


@cluster.command("resources")
@click.argument("cluster_id")
@click.option("--kind", default=None)
@click.option("--label", default=None, help="key=value filter on reported labels")
@click.pass_obj
def cluster_resources(obj, cluster_id, kind, label):
    params = {}
    if kind:
        params["kind"] = kind
    if label:
        params["label"] = label
    response = _request(obj, "GET", f"/api/v1/clusters/{cluster_id}/resources", params=params)
    _fail_if_error(obj, response)
    if obj.output == "json":
        click.echo(response.text)
        return
    resources = response.json()["resources"]
    rows = []
    for r in resources:
        key = r["resource_key"]
        phase = r["payload"].get("status", {}).get("phase", "-")
        rows.append([key["kind"], key["namespace"], key["name"], r["level"], phase, r["observed_at"]])
    click.echo(format_table(["KIND", "NAMESPACE", "NAME", "LEVEL", "PHASE", "OBSERVED"], rows))


# -- agent ------------------------------------------------------------------------


@main.command("agent")
@click.option("--config", "config_path", required=True, type=str)
@click.option("--max-ticks", type=int, default=None, help="Stop after N logical ticks (default: run forever).")
@click.option("--tick-seconds", type=float, default=1.0, show_default=True,
              help="Wall seconds per logical tick; 0 runs ticks back to back.")
@click.pass_obj
def agent_run(obj, config_path, max_ticks, tick_seconds):
    """Run one cluster agent against a control plane."""
    if not Path(config_path).exists():
        raise click.UsageError(f"config file not found: {config_path}")
    try:
        cfg = load_agent_config(config_path)
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad agent config: {exc}")
    url = cfg.control_plane_url or obj.url
    client = HttpClient(url, cfg.org_key or obj.org_key)
    node = ClusterNode(cfg, client)
    click.echo(f"agent {cfg.cluster_id} polling {url} (tags: {','.join(sorted(cfg.tags)) or '-'})")
    now = 0
    try:
        while max_ticks is None or now < max_ticks:
            summary = node.step(now)
            if summary.synced and summary.sync_result is not None:
                result = summary.sync_result
                if result.error_code == "unauthorized":
                    click.echo(f"error: unauthorized: {result.error}", err=True)
                    sys.exit(1)
                if result.error:
                    click.echo(f"t={now} sync failed: {result.error}", err=True)
                else:
                    click.echo(
                        f"t={now} sync ok created={result.created} "
                        f"updated={result.updated} pruned={result.pruned}"
                    )
            if summary.scanned:
                click.echo(f"t={now} reported {summary.reports_sent} resources")
            now += 1
            if tick_seconds > 0:
                time.sleep(tick_seconds)
    except KeyboardInterrupt:
        pass
    click.echo(f"agent {cfg.cluster_id} stopped after {now} ticks")


# -- sim --------------------------------------------------------------------------


def _load_sim_config(config_path: str | None) -> SimConfig:
    if config_path is None:
        return SimConfig()
    if not Path(config_path).exists():
        raise click.UsageError(f"config file not found: {config_path}")
    try:
        return load_sim_config(config_path)
    except (ValueError, OSError) as exc:
        raise click.UsageError(f"bad sim config: {exc}")


def _write_report_files(report: SimReport, out_dir: str, stem: str) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    json_path = out / f"{stem}.json"
    json_path.write_text(json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n")
    text_path = out / f"{stem}.txt"
    text_path.write_text(report.to_text() + "\n")
    figure_path = render_report_figure(report, out / f"{stem}.png")
    return [json_path, text_path, figure_path]


@main.group()
def sim():
    """Deterministic rollout simulations."""


@sim.command("run")
@click.option("--config", "config_path", default=None, type=str)
@click.option("--model", type=click.Choice(["pull", "push"]), default="pull", show_default=True)
@click.option("--out-dir", default=None, type=str, help="Write report JSON/text and a figure here.")
@click.pass_obj
def sim_run(obj, config_path, model, out_dir):
    cfg = _load_sim_config(config_path)
    try:
        report = run_pull_rollout(cfg) if model == "pull" else run_push_rollout(cfg)
    except HorizonExceeded as exc:
        click.echo(f"error: {exc}", err=True)
        if exc.report is not None and out_dir:
            _write_report_files(exc.report, out_dir, f"{model}-report")
        sys.exit(1)
    if obj.output == "json":
        click.echo(json.dumps(report.to_dict(), sort_keys=True))
    else:
        click.echo(report.to_text())
    if out_dir:
        for path in _write_report_files(report, out_dir, f"{model}-report"):
            click.echo(f"wrote {path}", err=True)


@sim.command("compare")
@click.option("--config", "config_path", default=None, type=str)
@click.option("--out-dir", default=None, type=str)
@click.pass_obj
def sim_compare(obj, config_path, out_dir):
    """Sweep cluster counts and compare pull vs push convergence."""
    cfg = _load_sim_config(config_path)
    table = compare_models(cfg)
    if obj.output == "json":
        click.echo(json.dumps(table.to_dict(), sort_keys=True))
    else:
        click.echo(table.to_text())
    if out_dir:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "comparison.json").write_text(
            json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n"
        )
        (out / "comparison.txt").write_text(table.to_text() + "\n")
        render_comparison_figure(table, out / "comparison.png")
        for name in ("comparison.json", "comparison.txt", "comparison.png"):
            click.echo(f"wrote {out / name}", err=True)


@sim.command("scenario")
@click.argument("name", type=click.Choice(SCENARIO_NAMES))
@click.pass_obj
def sim_scenario(obj, name):
    """Run one scripted end-to-end scenario."""
    result = run_e2e_scenario(name)
    if obj.output == "json":
        click.echo(json.dumps(result.to_dict(), sort_keys=True))
    else:
        click.echo(f"scenario {result.name}: {'PASS' if result.passed else 'FAIL'}")
        for failure in result.failures:
            click.echo(f"  - {failure}")
    sys.exit(0 if result.passed else 1)


if __name__ == "__main__":
    main()
