"""Command-line client for the engine.

Subcommands: ``run`` (one image), ``batch`` (manifest -> JSONL records),
``eval`` (records -> metrics report), ``lexicon check`` (validate lexicon
files), ``serve`` (start the HTTP service). Every flag mirrors a config
key and overrides its config-file counterpart.

Exit codes: 0 success, 1 usage error, 2 I/O or parse error, 3 backend or
protocol error, 4 all images failed.
"""

from __future__ import annotations

import json
import sys

import click
import httpx
from pydantic import ValidationError

from . import __version__
from .errors import (
    BackendError,
    CmsgError,
    LexiconParseError,
    ProtocolError,
)
from .evaluate import build_report
from .lexicon import load_sentiment_lexicon
from .pipeline import (
    PipelineConfig,
    RunRecord,
    load_records,
    resolve_image,
    run_batch,
    run_single,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_BACKEND = 3
EXIT_ALL_FAILED = 4

_CONFIG_FLAGS = [
    click.option("--config", "config_path", type=click.Path(), default=None,
                 help="JSON config file; flags override its keys."),
    click.option("--backend", "backend_url", default=None,
                 help="Model backend base URL, or 'fake:' for the in-process fake."),
    click.option("--tau", type=float, default=None),
    click.option("--n-cons", type=int, default=None),
    click.option("--t1", type=int, default=None),
    click.option("--t2", type=int, default=None),
    click.option("--k-max", type=int, default=None),
    click.option("--clip-weight", type=float, default=None),
    click.option("--use-consequence/--no-use-consequence", default=None),
    click.option("--use-tags/--no-use-tags", default=None),
    click.option("--rank-sarcasticness/--no-rank-sarcasticness", default=None),
    click.option("--rank-grammar-and-relation/--no-rank-grammar-and-relation", default=None),
    click.option("--desired-sentiment",
                 type=click.Choice(["positive", "negative", "neutral", "unknown"]),
                 default=None),
    click.option("--workers", type=int, default=None),
    click.option("--sentiwordnet", "sentiwordnet_path", type=click.Path(), default=None),
    click.option("--antonyms", "antonyms_path", type=click.Path(), default=None),
]


def _with_config_flags(command):
    for flag in reversed(_CONFIG_FLAGS):
        command = flag(command)
    return command


def _build_config(config_path: str | None, backend_url: str | None,
                  **overrides) -> PipelineConfig:
    try:
        base = PipelineConfig.from_file(config_path) if config_path else PipelineConfig()
    except json.JSONDecodeError as exc:
        raise click.ClickException(f"config file is not valid JSON: {exc}") from exc
    except ValidationError as exc:
        raise click.UsageError(f"invalid config file: {exc}") from exc
    if backend_url:
        overrides["backend"] = {"base_url": backend_url}
    try:
        return base.merged(overrides)
    except ValidationError as exc:
        raise click.UsageError(f"invalid configuration: {exc}") from exc


@click.group()
@click.version_option(version=__version__, prog_name="cmsg")
def cli() -> None:
    """Generate a sarcastic caption for an image and rank the candidates."""


@cli.command("run")
@click.option("--image", "image_ref", required=True,
              help="Image file path or backend/fixture image id.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the full run record as JSON to this file.")
@click.option("--engine-url", default=None,
              help="POST the run to a remote engine service instead of running in-process.")
@_with_config_flags
def run_command(image_ref: str, out_path: str | None, engine_url: str | None,
                config_path: str | None, backend_url: str | None, **overrides) -> None:
    """Run one image end to end and print the selected text."""
    config = _build_config(config_path, backend_url, **overrides)
    if engine_url:
        record = _remote_run(engine_url, image_ref, config)
    else:
        record = run_single(resolve_image(image_ref), config)
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(record.model_dump_json(indent=2) + "\n")
    selected = record.selected_candidate
    click.echo(selected.full_text)
    click.echo(
        f"[{record.image_id}] candidates={len(record.candidates)} "
        f"selected={record.selected_index} "
        f"composite={record.selected_score.composite:.6g}",
        err=True,
    )


def _remote_run(engine_url: str, image_ref: str, config: PipelineConfig) -> RunRecord:
    payload = {"image_id": image_ref, "config": config.model_dump(mode="json")}
    try:
        response = httpx.post(engine_url.rstrip("/") + "/v1/run", json=payload,
                              timeout=config.backend.timeout_ms / 1000.0)
    except httpx.TransportError as exc:
        raise BackendError(f"engine service unreachable: {exc}") from exc
    if response.status_code >= 300:
        raise BackendError(f"engine service returned {response.status_code}: "
                           f"{response.text[:200]}")
    return RunRecord.model_validate(response.json())


@cli.command("batch")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(),
              help="File with one image path or image id per line.")
@click.option("--out", "out_path", required=True, type=click.Path(),
              help="Output file; one run record JSON per line.")
@_with_config_flags
def batch_command(manifest_path: str, out_path: str,
                  config_path: str | None, backend_url: str | None, **overrides) -> None:
    """Run every manifest entry; failures are recorded, not fatal."""
    config = _build_config(config_path, backend_url, **overrides)
    records = run_batch(manifest_path, config, out_path)
    failed = sum(1 for r in records if r.status == "failed")
    click.echo(f"wrote {len(records)} records to {out_path} ({failed} failed)", err=True)
    if records and failed == len(records):
        raise AllImagesFailed(f"all {failed} images failed")


@cli.command("eval")
@click.option("--runs", "runs_path", required=True, type=click.Path(),
              help="Run-record JSONL file produced by batch.")
@click.option("--report", "report_path", required=True, type=click.Path(),
              help="Where to write the metrics report JSON.")
def eval_command(runs_path: str, report_path: str) -> None:
    """Compute total-length and relation-score means over run records."""
    records = load_records(runs_path)
    try:
        report = build_report(records)
    except CmsgError as exc:
        raise AllImagesFailed(str(exc)) from exc
    with open(report_path, "w", encoding="utf-8") as fh:
        fh.write(report.model_dump_json(indent=2) + "\n")
    click.echo(f"images={report.n_images} failed={report.n_failed} "
               f"tl_mean={report.tl_mean:.4g} "
               f"relation_mean={report.relation_mean:.4g} "
               f"(x10 {report.relation_mean_x10:.4g})")


@cli.group("lexicon")
def lexicon_group() -> None:
    """Lexicon file utilities."""


@lexicon_group.command("check")
@click.option("--sentiwordnet", "sentiwordnet_path", required=True, type=click.Path())
@click.option("--antonyms", "antonyms_path", required=True, type=click.Path())
def lexicon_check(sentiwordnet_path: str, antonyms_path: str) -> None:
    """Parse both lexicon files and report their row counts."""
    lexicon = load_sentiment_lexicon(sentiwordnet_path, antonyms_path)
    click.echo(f"sentiment entries: {len(lexicon)}")
    click.echo(f"antonym rows: {len(lexicon.antonym_rows)}")


@cli.command("serve")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8008)
@_with_config_flags
def serve_command(host: str, port: int, config_path: str | None,
                  backend_url: str | None, **overrides) -> None:
    """Start the HTTP service (engine + fake model endpoints)."""
    import uvicorn

    from .service.app import create_app

    config = _build_config(config_path, backend_url, **overrides)
    uvicorn.run(create_app(config), host=host, port=port)


class AllImagesFailed(CmsgError):
    code = "all_images_failed"


def entry(argv: list[str] | None = None) -> int:
    """Invoke the CLI, mapping exceptions onto documented exit codes."""
    try:
        cli.main(args=argv, standalone_mode=False)
        return EXIT_OK
    except click.exceptions.Exit as exc:  # --help / --version
        return int(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_IO
    except LexiconParseError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except (BackendError, ProtocolError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_BACKEND
    except AllImagesFailed as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ALL_FAILED
    except CmsgError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_ALL_FAILED
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    except click.Abort:
        return EXIT_USAGE


def main() -> None:
    sys.exit(entry())


if __name__ == "__main__":
    main()
