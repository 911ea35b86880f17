"""Command-line client.

Subcommands mirror the API endpoints and share their request/response
models; ``--server`` switches from in-process execution to a remote
service. Exit codes: 0 success, 1 validation error, 2 provider or store
failure.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import httpx
import pydantic

from .config import ServiceConfig, build_deps, load_config, open_store
from .errors import (
    AnswerGenerationError,
    ConfigurationError,
    LitragError,
    ProviderError,
    StoreError,
    ValidationError,
)
from .evaluation import (
    ModelSpec,
    format_report,
    load_testset,
    load_trial_log,
    refine_testset,
    run_trials,
    score,
)
from .ingest import ingest_corpus
from .models import QARequest, QAResponse, ResearchReport, ResearchRequest
from .providers import HttpTextProvider
from .qa import answer_query
from .research import run_research
from .stubs import ConstantChoiceProvider, RandomChoiceProvider

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_UNAVAILABLE = 2


class CliFailure(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code


def _load_runtime(ctx: click.Context) -> tuple[ServiceConfig, object]:
    config = load_config(ctx.obj.get("config_path"))
    if ctx.obj.get("store_path"):
        config = config.model_copy(update={"store_path": ctx.obj["store_path"]})
    deps = build_deps(config, open_store(config))
    return config, deps


def _remote_post(server: str, path: str, payload: dict) -> dict:
    try:
        response = httpx.post(f"{server.rstrip('/')}{path}", json=payload, timeout=300.0)
    except httpx.HTTPError as exc:
        raise CliFailure(EXIT_UNAVAILABLE, f"cannot reach server: {exc}") from exc
    if response.status_code >= 400:
        try:
            error = response.json().get("error", {})
        except ValueError:
            error = {}
        code = error.get("code", "internal")
        message = error.get("message", response.text)
        exit_code = EXIT_VALIDATION if code == "bad_request" else EXIT_UNAVAILABLE
        raise CliFailure(exit_code, f"{code}: {message}")
    return response.json()


@click.group()
@click.option("--config", "config_path", type=click.Path(exists=True), default=None,
              help="Path to the JSON config file.")
@click.option("--store", "store_path", type=click.Path(), default=None,
              help="Override the configured store path.")
@click.option("--verbose", is_flag=True, help="Enable debug logging.")
@click.pass_context
def cli(ctx: click.Context, config_path: str | None, store_path: str | None, verbose: bool):
    """Literature-grounded retrieval-augmented question answering."""
    logging.basicConfig(level=logging.DEBUG if verbose else logging.WARNING)
    ctx.ensure_object(dict)
    ctx.obj["config_path"] = config_path
    ctx.obj["store_path"] = store_path


@cli.command()
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--server", default=None, help="Ingest through a running service instead.")
@click.pass_context
def ingest(ctx: click.Context, manifest: str, server: str | None):
    """Ingest the documents listed in MANIFEST into the store."""
    if server:
        body = _remote_post(server, "/api/ingest", {"manifest_path": manifest})
        documents, chunks, questions = body["documents"], body["chunks"], body["questions"]
        warnings = body.get("warnings", [])
    else:
        config, deps = _load_runtime(ctx)
        report = ingest_corpus(
            manifest,
            deps.store,
            deps.text_provider,
            deps.embedding_provider,
            min_chunk_chars=config.min_chunk_chars,
            max_questions=config.max_questions,
            clean=config.clean_chunks,
            relevance_screen=config.relevance_screen,
            screen_topic=config.screen_topic,
        )
        deps.store.persist(config.store_path)
        documents, chunks, questions = report.documents, report.chunks, report.questions
        warnings = report.warnings
    click.echo(f"documents: {documents}")
    click.echo(f"chunks: {chunks}")
    click.echo(f"questions: {questions}")
    for warning in warnings:
        click.echo(f"warning: {warning}", err=True)


def _print_qa(response: QAResponse) -> None:
    """Print a response in its event order: molecules, citations, answer."""
    for event in response.events:
        if event.type == "molecules":
            click.echo("molecules:")
            for record in event.molecules:
                suffix = f" ({record.detail_url})" if record.detail_url else ""
                click.echo(f"  {record.name}: {record.smiles}{suffix}")
        elif event.type == "citations":
            click.echo("citations:")
            for citation in event.citations:
                click.echo(f"  [{citation.ref_index}] {citation.formatted}")
        elif event.type == "answer":
            click.echo("answer:")
            click.echo(event.text)


@cli.command()
@click.argument("text")
@click.option("--session", default=None, help="Echo-only session id.")
@click.option("--server", default=None, help="Query a running service instead.")
@click.option("--json", "as_json", is_flag=True, help="Print the raw response JSON.")
@click.pass_context
def query(ctx: click.Context, text: str, session: str | None, server: str | None, as_json: bool):
    """Ask the expert Q&A pipeline one question."""
    try:
        request = QARequest(query=text, session_id=session)
    except pydantic.ValidationError as exc:
        raise CliFailure(EXIT_VALIDATION, f"invalid query: {exc}") from exc
    if server:
        response = QAResponse(**_remote_post(server, "/api/qa", request.model_dump()))
    else:
        _, deps = _load_runtime(ctx)
        response = answer_query(request, deps)
    if as_json:
        click.echo(response.model_dump_json(indent=2))
    else:
        _print_qa(response)


@cli.command()
@click.argument("topic")
@click.option("--max-subquestions", default=None, type=int)
@click.option("--server", default=None, help="Run against a running service instead.")
@click.option("--json", "as_json", is_flag=True, help="Print the raw report JSON.")
@click.pass_context
def research(
    ctx: click.Context,
    topic: str,
    max_subquestions: int | None,
    server: str | None,
    as_json: bool,
):
    """Run the research flow on TOPIC."""
    config, deps = (None, None)
    if not server:
        config, deps = _load_runtime(ctx)
    try:
        request = ResearchRequest(
            topic=topic,
            max_subquestions=max_subquestions
            or (config.max_subquestions if config else 5),
        )
    except pydantic.ValidationError as exc:
        raise CliFailure(EXIT_VALIDATION, f"invalid request: {exc}") from exc
    if server:
        report = ResearchReport(**_remote_post(server, "/api/research", request.model_dump()))
    else:
        report = run_research(request, deps)
    if as_json:
        click.echo(report.model_dump_json(indent=2))
        return
    click.echo(f"topic: {report.topic}")
    if report.overview:
        click.echo(f"overview: {report.overview}")
    for i, sub in enumerate(report.sub_answers, start=1):
        click.echo(f"--- sub-question {i}: {sub.question}")
        _print_qa(sub.response)
    click.echo("synthesis:")
    click.echo(report.synthesis)
    click.echo("bibliography:")
    for citation in report.bibliography:
        click.echo(f"  [{citation.ref_index}] {citation.formatted}")


@cli.command()
@click.option("--host", default=None)
@click.option("--port", default=None, type=int)
@click.pass_context
def serve(ctx: click.Context, host: str | None, port: int | None):
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    config, deps = _load_runtime(ctx)
    app = create_app(config, deps)
    uvicorn.run(app, host=host or config.host, port=port or config.port)


@cli.group(name="eval")
def eval_group():
    """Benchmark harness: run trials, refine the set, score accuracy."""


def _build_model(spec: str, config: ServiceConfig) -> ModelSpec:
    """Parse NAME=KIND[:ARG] into a ModelSpec.

    Kinds: random[:seed] (uniform choice), const:X (always X),
    http:MODEL (config text endpoint with the given model name).
    """
    name, _, kind_spec = spec.partition("=")
    if not kind_spec:
        raise CliFailure(EXIT_VALIDATION, f"model spec {spec!r} must look like name=kind[:arg]")
    kind, _, arg = kind_spec.partition(":")
    if kind == "random":
        return ModelSpec(name, RandomChoiceProvider(seed=int(arg) if arg else 0))
    if kind == "const":
        return ModelSpec(name, ConstantChoiceProvider(arg or "A"))
    if kind == "http":
        base = config.text_provider
        if not base.endpoint:
            raise CliFailure(EXIT_VALIDATION, "http eval models need a configured text endpoint")
        return ModelSpec(name, HttpTextProvider(base.endpoint, arg or base.model, base.api_key_env))
    raise CliFailure(EXIT_VALIDATION, f"unknown eval model kind {kind!r}")


@eval_group.command(name="run")
@click.option("--testset", required=True, type=click.Path(exists=True))
@click.option("--model", "model_specs", multiple=True, required=True,
              help="NAME=KIND[:ARG]; repeatable.")
@click.option("--trials", default=None, type=int)
@click.option("--mode", type=click.Choice(["baseline", "rag"]), default="baseline")
@click.option("--log", "log_path", required=True, type=click.Path())
@click.pass_context
def eval_run(ctx, testset, model_specs, trials, mode, log_path):
    """Answer every question with every model, persisting trial results."""
    config, deps = _load_runtime(ctx)
    questions = load_testset(testset)
    models = [_build_model(spec, config) for spec in model_specs]
    results = run_trials(
        models,
        questions,
        n_trials=trials or config.eval_trials,
        mode=mode,
        deps=deps if mode == "rag" else None,
        log_path=log_path,
    )
    click.echo(f"trials: {len(results)}")
    click.echo(f"parse failures: {sum(1 for r in results if r.parse_failed)}")


@eval_group.command(name="refine")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
def eval_refine(log_path):
    """Print the discriminative question ids in a persisted trial log."""
    results = load_trial_log(log_path)
    models = sorted({r.model_id for r in results})
    refined = refine_testset(results, models)
    for qid in sorted(refined):
        click.echo(qid)


@eval_group.command(name="score")
@click.option("--log", "log_path", required=True, type=click.Path(exists=True))
@click.option("--no-refine", is_flag=True, help="Score all questions, skip refinement.")
@click.option("--out", "out_path", default=None, type=click.Path(),
              help="Also write the report as JSON.")
def eval_score(log_path, no_refine, out_path):
    """Score a persisted trial log."""
    results = load_trial_log(log_path)
    if not results:
        raise CliFailure(EXIT_VALIDATION, f"trial log {log_path} is empty")
    if no_refine:
        refined = {r.qid for r in results}
    else:
        models = sorted({r.model_id for r in results})
        refined = refine_testset(results, models)
    report = score(results, refined)
    click.echo(format_report(report))
    if out_path:
        Path(out_path).write_text(report.model_dump_json(indent=2), encoding="utf-8")


def main(argv: list[str] | None = None) -> int:
    """Entry point with the documented exit-code contract."""
    try:
        cli.main(args=argv, standalone_mode=False, obj={})
        return EXIT_OK
    except click.UsageError as exc:
        if exc.ctx is not None:
            click.echo(exc.ctx.get_usage(), err=True)
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_VALIDATION
    except click.ClickException as exc:
        exc.show()
        return EXIT_VALIDATION
    except click.exceptions.Abort:
        return EXIT_VALIDATION
    except CliFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except (ValidationError, ConfigurationError, pydantic.ValidationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_VALIDATION
    except (ProviderError, StoreError, AnswerGenerationError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNAVAILABLE
    except LitragError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_UNAVAILABLE


if __name__ == "__main__":
    sys.exit(main())
