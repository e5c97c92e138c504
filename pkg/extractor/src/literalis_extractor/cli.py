"""Command-line entry point for the extraction adapter.

Exit codes match the scoring package's CLI: 0 success, 1 domain error
(bad bitext, unavailable backend, failed self-check), 2 I/O error,
64 usage error.  Log verbosity comes from the ``LITERALIS_LOG``
environment variable.
"""

from __future__ import annotations

import logging
import os
import sys
from pathlib import Path

import click

from .backends import BackendConfig, BackendUnavailableError
from .pipeline import ExtractionJob, ExtractorError, extract, verify

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_USAGE = 64

_ENV_LOG = "LITERALIS_LOG"

logger = logging.getLogger("literalis_extractor")


def _configure_logging() -> None:
    level_name = os.environ.get(_ENV_LOG, "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("literalis_extractor").setLevel(level)


@click.command(name="literalis-extract")
@click.option("--in", "in_path", required=True,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Bitext JSONL: one {id, lp, src, hyp, system, ...} per line.")
@click.option("--out", "out_path", required=True,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Feature-record JSONL destination.")
@click.option("--config", "config_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Backend config JSON; defaults to the built-in stubs.")
@click.option("--vectors-out", "vectors_path", default=None,
              type=click.Path(dir_okay=False, path_type=Path),
              help="Sidecar JSONL with the raw unit vectors per record.")
@click.option("--self-check", is_flag=True,
              help="After writing, recompute all cosines from the sidecar.")
@click.option("--tolerance", default=1e-6, show_default=True,
              help="Largest |delta| the self-check accepts.")
def cli(in_path: Path, out_path: Path, config_path: Path | None,
        vectors_path: Path | None, self_check: bool, tolerance: float) -> None:
    """Annotate raw bitext into scoring-ready feature records."""
    if self_check and vectors_path is None:
        raise click.UsageError("--self-check requires --vectors-out")
    config = BackendConfig.load(config_path) if config_path else BackendConfig()
    summary = extract(ExtractionJob(in_path=in_path, out_path=out_path,
                                    config=config, vectors_path=vectors_path))
    for diagnostic in summary.skipped:
        click.echo(f"skipped {diagnostic}", err=True)
    if summary.written == 0:
        raise ExtractorError("no records extracted")
    click.echo(f"wrote {summary.written} records to {out_path}"
               + (f" ({len(summary.skipped)} skipped)" if summary.skipped else ""))
    if self_check:
        report = verify(out_path, vectors_path, tolerance=tolerance)
        peak = "none" if report.max_abs_delta is None \
            else f"{report.max_abs_delta:.3e}"
        click.echo(f"self-check: {report.n_cosines} cosines over "
                   f"{report.n_records} records, max |delta| = {peak}")
        if not report.ok:
            raise ExtractorError(
                f"self-check failed: {len(report.flagged)} cosines deviate "
                f"by more than {tolerance}")


def main(argv: list[str] | None = None) -> int:
    """Entry point mapping exceptions to the documented exit codes."""
    _configure_logging()
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_DOMAIN
    except (ExtractorError, BackendUnavailableError) as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DOMAIN
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
