"""Command-line interface.

Exit codes: 0 on success with no violations, 2 when a check or experiment
reports violations, 1 on errors.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from ..contracts.cryptolist import CryptoListError
from ..mapping.engine import MappingError
from ..pm.io import save_pm
from .session import (
    SessionError,
    canonical_dumps,
    create_session,
    list_sessions,
    load_corpus,
    load_session,
)

VIOLATIONS_EXIT = 2


def _echo_json(obj) -> None:
    click.echo(canonical_dumps(obj), nl=False)


def _fail(message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(1)


@click.group()
def main() -> None:
    """Design-to-code security compliance workbench."""


@main.command()
@click.argument("corpus")
@click.option("-o", "--output", default="pm.json", show_default=True)
def extract(corpus: str, output: str) -> None:
    """Extract a program model from a corpus file or directory."""
    try:
        pm = load_corpus(corpus)
    except (SessionError, ValueError) as exc:
        _fail(str(exc))
    Path(output).write_bytes(save_pm(pm))
    click.echo(f"wrote {output}: {len(pm.definitions)} definitions, "
               f"{len(pm.flows)} flows")


@main.group()
def session() -> None:
    """Session management."""


@session.command("new")
@click.argument("corpus")
@click.argument("models", nargs=-1, required=True)
@click.option("--crypto", default=None, help="crypto signature list file")
@click.option("--sources", default=None, help="default taint sources file")
@click.option("--sinks", default=None, help="default taint sinks file")
@click.option("--id", "session_id", default=None, help="explicit session id")
def session_new(corpus, models, crypto, sources, sinks, session_id) -> None:
    """Create a session: extract, map, run the first iteration."""
    try:
        s = create_session(corpus, list(models), crypto_path=crypto,
                           sources_path=sources, sinks_path=sinks,
                           session_id=session_id)
    except (SessionError, CryptoListError, ValueError, OSError) as exc:
        _fail(str(exc))
    click.echo(f"session {s.id}: {len(s.suggested_ids)} suggestions")


@session.command("list")
def session_list() -> None:
    for sid in list_sessions():
        click.echo(sid)


@main.command()
@click.argument("session_id")
def suggest(session_id: str) -> None:
    """Print the current suggestion list."""
    try:
        s = load_session(session_id)
    except SessionError as exc:
        _fail(str(exc))
    _echo_json({"iteration": s.state.iteration, "suggestions": s.suggestion_view()})


@main.command()
@click.argument("session_id")
@click.argument("entry_id")
@click.argument("decision", type=click.Choice(["accept", "reject", "tolerate"]))
def decide(session_id: str, entry_id: str, decision: str) -> None:
    """Record a user decision on a suggested mapping entry."""
    try:
        s = load_session(session_id)
        s.apply_decision(entry_id, decision)
    except (SessionError, MappingError) as exc:
        _fail(str(exc))
    click.echo(f"{decision}: {entry_id}")


@main.command("map")
@click.argument("session_id")
@click.argument("dfd_ref")
@click.argument("pm_ref")
def map_cmd(session_id: str, dfd_ref: str, pm_ref: str) -> None:
    """Define a manual mapping between a DFD element and a PM element."""
    try:
        s = load_session(session_id)
        entry = s.apply_manual(dfd_ref, pm_ref)
    except (SessionError, MappingError) as exc:
        _fail(str(exc))
    click.echo(f"mapped: {entry.id}")


@main.command()
@click.argument("session_id")
def iterate(session_id: str) -> None:
    """Run another mapping iteration."""
    try:
        s = load_session(session_id)
        out = s.iterate()
    except SessionError as exc:
        _fail(str(exc))
    click.echo(f"iteration {s.state.iteration}: {len(out)} suggestions")


@main.command()
@click.argument("session_id")
@click.argument("kind", type=click.Choice(["contracts", "crypto", "design", "taint"]))
@click.option("--mode", type=click.Choice(["plain", "partly", "fully"]),
              default="fully", show_default=True, help="taint analysis mode")
def check(session_id: str, kind: str, mode: str) -> None:
    """Run a compliance check and print the report."""
    try:
        s = load_session(session_id)
        report = s.run_check(kind, mode)
    except (SessionError, ValueError) as exc:
        _fail(str(exc))
    _echo_json(report)
    if report.get("violations"):
        sys.exit(VIOLATIONS_EXIT)


@main.command("eval")
@click.argument("session_id")
@click.option("--ground-truth", "ground_truth", required=True,
              help="ground truth .gt.json file")
def eval_cmd(session_id: str, ground_truth: str) -> None:
    """Score the mapping against a ground truth file."""
    try:
        s = load_session(session_id)
        records = json.loads(Path(ground_truth).read_text())
        result = s.evaluate(records)
    except (SessionError, OSError, json.JSONDecodeError) as exc:
        _fail(str(exc))
    _echo_json(result)


@main.command()
@click.argument("session_id")
@click.option("--kinds", default="enc,dec,fwd,join", show_default=True,
              help="comma-separated contract kinds to inject")
def inject(session_id: str, kinds: str) -> None:
    """Run the contract-injection evaluation experiment."""
    kind_list = [k.strip() for k in kinds.split(",") if k.strip()]
    try:
        s = load_session(session_id)
        result = s.run_injection(kind_list)
    except (SessionError, KeyError, ValueError) as exc:
        _fail(str(exc))
    _echo_json(result)
    if result["fn"] or result["fp"]:
        sys.exit(VIOLATIONS_EXIT)


@main.command()
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(port: int, host: str) -> None:
    """Start the HTTP API server."""
    import uvicorn
    from .api import create_app
    uvicorn.run(create_app(), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
