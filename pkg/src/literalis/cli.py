"""Command-line interface.

Subcommands cover the full pipeline: schema validation, signal scoring,
index fitting and application, the analysis suite, and mixture
augmentation.  Every subcommand is a pure function of its inputs, flags
and seed; outputs are byte-identical across reruns and across ``--jobs``
settings.

Exit codes: 0 success, 1 domain or schema error, 2 I/O error, 64 usage
error (bad flags or arguments).  Log verbosity comes from the
``LITERALIS_LOG`` environment variable (DEBUG, INFO, WARNING, ERROR).
"""

from __future__ import annotations

import json
import logging
import multiprocessing
import os
import re
import sys
from functools import partial
from pathlib import Path
from typing import Any, Iterator, TextIO

import click
import numpy as np

from . import corpus, dynamics, reports, stats, validation
from .sli import Normalizer, SliConfig, SliModel, fit_normalizers
from .corpus import (CorpusFilter, LiteralisError, ProvenanceHeader, SchemaError,
                     parse_line)
from .signals import SIGNAL_NAMES, SignalVector, score_record

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_IO = 2
EXIT_USAGE = 64

_ENV_LOG = "LITERALIS_LOG"

logger = logging.getLogger("literalis")


class AnalysisNameError(LiteralisError, ValueError):
    """Requested analysis does not exist."""


def _configure_logging() -> None:
    level_name = os.environ.get(_ENV_LOG, "WARNING").upper()
    level = getattr(logging, level_name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger("literalis").setLevel(level)


# ---------------------------------------------------------------------------
# scoring helpers


_METADATA_FIELDS = ("id", "lp", "system", "task", "position", "domain")


def _score_payload(payload: tuple[int, str], flt: CorpusFilter) -> tuple[str, bool] | None:
    """Parse, filter and score one input line; None when skipped."""
    number, line = payload
    parsed = parse_line(line, number)
    if isinstance(parsed, ProvenanceHeader):
        return None
    if not flt.matches(parsed):
        return None
    vec = score_record(parsed)
    out: dict[str, Any] = {
        "id": parsed.id,
        "lp": parsed.lp,
        "system": parsed.system,
        "task": parsed.task,
        "position": parsed.position,
        "domain": parsed.domain,
    }
    out.update(vec.to_obj())
    return json.dumps(out, ensure_ascii=False), vec.density_clamped


def _iter_scored(path: str, flt: CorpusFilter, jobs: int) -> Iterator[tuple[str, bool]]:
    payloads = list(corpus.iter_lines(path))
    if jobs <= 1:
        for payload in payloads:
            result = _score_payload(payload, flt)
            if result is not None:
                yield result
        return
    worker = partial(_score_payload, flt=flt)
    with multiprocessing.Pool(jobs) as pool:
        for result in pool.imap(worker, payloads, chunksize=256):
            if result is not None:
                yield result


def _signal_row(obj: Any, number: int) -> tuple[dict[str, Any], SignalVector]:
    if not isinstance(obj, dict):
        raise SchemaError("signal row is not a JSON object", line_number=number,
                          field_name="record")
    for key in ("id", "lp"):
        if not isinstance(obj.get(key), str) or not obj[key]:
            raise SchemaError("missing or empty field", line_number=number,
                              field_name=key)
    values: dict[str, Any] = {}
    for name in SIGNAL_NAMES:
        value = obj.get(name)
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"expected number or null, got {type(value).__name__}",
                              line_number=number, field_name=name)
        values[name] = value
    return obj, SignalVector(**values)


def _iter_signal_rows(path: str | Path) -> Iterator[tuple[dict[str, Any], SignalVector]]:
    for number, line in corpus.iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}",
                              line_number=number) from exc
        yield _signal_row(obj, number)


def _load_sli_rows(path: str | Path) -> list[dict[str, Any]]:
    rows: list[dict[str, Any]] = []
    for number, line in corpus.iter_lines(path):
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"malformed JSON: {exc.msg}",
                              line_number=number) from exc
        if not isinstance(obj, dict):
            raise SchemaError("index row is not a JSON object",
                              line_number=number, field_name="record")
        for key in ("id", "sli"):
            if key not in obj:
                raise SchemaError("missing mandatory field",
                                  line_number=number, field_name=key)
        value = obj["sli"]
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError("expected number", line_number=number,
                              field_name="sli")
        rows.append(obj)
    return rows


def _open_out(path: str) -> TextIO:
    if path == "-":
        return sys.stdout
    return open(path, "w", encoding="utf-8")


def _pair_seed(seed: int, index: int) -> int:
    # Stable per-comparison substream; independent of job scheduling.
    state = np.random.SeedSequence(entropy=seed, spawn_key=(index,))
    return int(state.generate_state(1, np.uint64)[0])


# ---------------------------------------------------------------------------
# command tree


class _AnalyzeGroup(click.Group):
    """Rejects unknown analysis names as domain errors, not usage errors."""

    def resolve_command(self, ctx: click.Context, args: list[str]):
        name = args[0] if args else ""
        if name and not name.startswith("-") and name not in self.commands:
            raise AnalysisNameError(
                f"unknown analysis {name!r}; expected one of "
                f"{', '.join(sorted(self.commands))}")
        return super().resolve_command(ctx, args)


@click.group()
def cli() -> None:
    """Literality scoring and analysis for machine translation corpora."""


@cli.command("validate")
@click.argument("paths", nargs=-1, required=True,
                type=click.Path(exists=False, dir_okay=False))
def cmd_validate(paths: tuple[str, ...]) -> None:
    """Check feature-record JSONL files against the corpus schema."""
    failed = False
    for path in paths:
        errors = corpus.validate_file(path)
        if errors:
            failed = True
            for message in errors:
                click.echo(f"{path}: {message}", err=True)
        else:
            count = sum(1 for _ in corpus.read_records(path))
            click.echo(f"{path}: OK ({count} records)")
    if failed:
        raise LiteralisError("validation failed")


@cli.command("score")
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--max-quality", type=float, default=None,
              help="Keep records with quality strictly below this value.")
@click.option("--quality-inclusive", is_flag=True,
              help="Keep records at the quality threshold too.")
@click.option("--task", "tasks", multiple=True)
@click.option("--system", "systems", multiple=True)
@click.option("--lp", "lps", multiple=True)
@click.option("--domain", "domains", multiple=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Worker processes; never changes output bytes.")
def cmd_score(in_path: str, out_path: str, max_quality: float | None,
              quality_inclusive: bool, tasks: tuple[str, ...],
              systems: tuple[str, ...], lps: tuple[str, ...],
              domains: tuple[str, ...], jobs: int) -> None:
    """Compute the seven signals for every record passing the filter."""
    if jobs < 1:
        raise click.UsageError("--jobs must be >= 1")
    flt = CorpusFilter(
        max_quality=max_quality,
        tasks=frozenset(tasks) if tasks else None,
        systems=frozenset(systems) if systems else None,
        lps=frozenset(lps) if lps else None,
        domains=frozenset(domains) if domains else None,
        quality_inclusive=quality_inclusive,
    )
    clamped = 0
    count = 0
    handle = _open_out(out_path)
    try:
        for line, was_clamped in _iter_scored(in_path, flt, jobs):
            handle.write(line)
            handle.write("\n")
            count += 1
            if was_clamped:
                clamped += 1
    finally:
        if handle is not sys.stdout:
            handle.close()
    if clamped:
        logger.warning("alignment density clamped to 1 for %d of %d records",
                       clamped, count)
    logger.info("scored %d records", count)


@cli.group("sli")
def cmd_sli() -> None:
    """Fit normalizers and apply the literality index."""


@cmd_sli.command("fit")
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out", "out_path", required=True)
@click.option("--per-task", is_flag=True,
              help="Fit separate ranges per (language pair, task).")
def cmd_sli_fit(signals_path: str, out_path: str, per_task: bool) -> None:
    """Fit per-language-pair min/max ranges from a signal JSONL."""
    def stream() -> Iterator[tuple[str, SignalVector]]:
        for obj, vec in _iter_signal_rows(signals_path):
            group = Normalizer.group_key(obj["lp"], obj.get("task"),
                                             per_task=per_task)
            yield group, vec

    norm = fit_normalizers(stream(), per_task=per_task)
    if not norm.groups():
        raise LiteralisError("no signal rows to fit")
    norm.save(out_path)
    logger.info("fitted ranges for %d groups", len(norm.groups()))


@cmd_sli.command("apply")
@click.option("--signals", "signals_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--normalizer", "normalizer_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out", "out_path", default="-", show_default=True)
@click.option("--config", "config_path", default=None,
              type=click.Path(exists=False, dir_okay=False),
              help="JSON with per-signal hit rates and temperature.")
def cmd_sli_apply(signals_path: str, normalizer_path: str, out_path: str,
                  config_path: str | None) -> None:
    """Score records with the index using fitted normalizers."""
    norm = Normalizer.load(normalizer_path)
    cfg = SliConfig.load(config_path) if config_path else SliConfig()
    model = SliModel(norm, cfg)
    count = 0
    handle = _open_out(out_path)
    try:
        for obj, vec in _iter_signal_rows(signals_path):
            value = model.score(vec, obj["lp"], task=obj.get("task"))
            out = {
                "id": obj["id"],
                "lp": obj["lp"],
                "system": obj.get("system"),
                "task": obj.get("task"),
                "position": obj.get("position"),
                "sli": value,
            }
            handle.write(json.dumps(out, ensure_ascii=False))
            handle.write("\n")
            count += 1
    finally:
        if handle is not sys.stdout:
            handle.close()
    if model.renormalized_count:
        logger.warning("renormalized weights over a signal subset for %d of %d "
                       "records", model.renormalized_count, count)
    if model.clamp_count:
        logger.warning("clamped %d out-of-range signal values", model.clamp_count)
    logger.info("indexed %d records", count)


@cli.group("analyze", cls=_AnalyzeGroup)
def cmd_analyze() -> None:
    """Statistical analyses over scored corpora."""


@cmd_analyze.command("compare")
@click.option("--sli", "sli_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
@click.option("--seed", type=int, required=True)
@click.option("--n-resamples", type=int, default=10_000, show_default=True)
@click.option("--task", "task_filter", default=None)
@click.option("--position", "position_filter", type=int, default=None)
@click.option("--pair-key", "pair_key", default=None,
              help="Regex with one capture group extracting a shared "
                   "segment key from record ids.")
def cmd_analyze_compare(sli_path: str, out_dir: str, seed: int,
                        n_resamples: int, task_filter: str | None,
                        position_filter: int | None,
                        pair_key: str | None) -> None:
    """Pairwise system comparison with a bootstrap significance test.

    Systems sharing segment keys are compared with the paired test;
    otherwise the unpaired two-sample fallback is used and labeled.
    """
    rows = _load_sli_rows(sli_path)
    if task_filter is not None:
        rows = [r for r in rows if r.get("task") == task_filter]
    if position_filter is not None:
        rows = [r for r in rows if r.get("position") == position_filter]
    extract = None
    if pair_key is not None:
        pattern = re.compile(pair_key)

        def extract(rec_id: str) -> str:
            match = pattern.search(rec_id)
            if match is None or not match.groups():
                raise LiteralisError(
                    f"pair-key pattern did not capture a key in id {rec_id!r}")
            return match.group(1)

    by_system: dict[str, dict[str, float]] = {}
    for row in rows:
        system = row.get("system")
        if not isinstance(system, str) or not system:
            raise LiteralisError(f"index row {row.get('id')!r} lacks a system")
        key = extract(row["id"]) if extract else row["id"]
        scores = by_system.setdefault(system, {})
        if key in scores:
            raise LiteralisError(
                f"duplicate pair key {key!r} within system {system!r}")
        scores[key] = float(row["sli"])

    systems = sorted(by_system)
    if len(systems) < 2:
        raise LiteralisError("need at least two systems to compare")
    out_rows: list[dict[str, Any]] = []
    index = 0
    for i, system_a in enumerate(systems):
        for system_b in systems[i + 1:]:
            a, b = by_system[system_a], by_system[system_b]
            pair_seed = _pair_seed(seed, index)
            index += 1
            if set(a) & set(b):
                result = stats.paired_bootstrap(a, b, n_resamples=n_resamples,
                                                seed=pair_seed)
            else:
                result = stats.unpaired_bootstrap(
                    [a[k] for k in sorted(a)], [b[k] for k in sorted(b)],
                    n_resamples=n_resamples, seed=pair_seed)
            out_rows.append({
                "system_a": system_a,
                "system_b": system_b,
                "n": result.n,
                "mean_diff": result.mean_diff,
                "p": result.p_value,
                "stars": reports.stars(result.p_value),
                "method": result.method,
            })
    reports.write_report(
        out_dir, "compare",
        ("system_a", "system_b", "n", "mean_diff", "p", "stars", "method"),
        out_rows, extra={"seed": seed, "n_resamples": n_resamples})


def _load_pairs(sli_path: str, records_path: str) -> list[dynamics.EditPair]:
    sli_by_id = {row["id"]: float(row["sli"]) for row in _load_sli_rows(sli_path)}
    records = corpus.load_records(records_path)
    return dynamics.build_edit_pairs(records, sli_by_id)


@cmd_analyze.command("triggers")
@click.option("--sli", "sli_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--records", "records_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
@click.option("--seed", type=int, required=True)
@click.option("--n-permutations", type=int, default=10_000, show_default=True)
def cmd_analyze_triggers(sli_path: str, records_path: str, out_dir: str,
                         seed: int, n_permutations: int) -> None:
    """Correlate initial literality with the decision to edit."""
    pairs = _load_pairs(sli_path, records_path)
    rows = dynamics.revision_trigger(pairs, seed=seed,
                                     n_permutations=n_permutations)
    out_rows = []
    for row in rows:
        out_rows.append({
            "system": row.system,
            "n": row.n,
            "pb_r": row.pb.coefficient if row.pb else None,
            "pb_p": row.pb.p_value if row.pb else None,
            "spearman_rho": row.sp.coefficient if row.sp else None,
            "spearman_p": row.sp.p_value if row.sp else None,
            "note": row.note,
        })
    reports.write_report(
        out_dir, "triggers",
        ("system", "n", "pb_r", "pb_p", "spearman_rho", "spearman_p", "note"),
        out_rows, extra={"seed": seed, "n_permutations": n_permutations})


@cmd_analyze.command("dynamics")
@click.option("--sli", "sli_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--records", "records_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
@click.option("--epsilon", type=float, default=dynamics.DEFAULT_EPSILON,
              show_default=True)
@click.option("--record-weighted", is_flag=True,
              help="Weight the overall alteration share by records instead "
                   "of averaging per-LP shares.")
def cmd_analyze_dynamics(sli_path: str, records_path: str, out_dir: str,
                         epsilon: float, record_weighted: bool) -> None:
    """Tabulate edit directions per domain and system."""
    pairs = _load_pairs(sli_path, records_path)
    cfg = dynamics.DynamicsConfig(epsilon=epsilon)
    table = dynamics.dynamics_table(pairs, cfg)
    share = dynamics.alteration_share(pairs, record_weighted=record_weighted)
    out_rows = [{
        "domain": row.domain,
        "system": row.system,
        "n": row.n,
        "unchanged_n": row.unchanged_n,
        "unchanged_pct": row.unchanged_pct,
        "altered_n": row.altered_n,
        "altered_pct": row.altered_pct,
        "delit_pct": row.delit_pct,
        "relit_pct": row.relit_pct,
        "neutral_pct": row.neutral_pct,
    } for row in table]
    reports.write_report(
        out_dir, "dynamics",
        ("domain", "system", "n", "unchanged_n", "unchanged_pct", "altered_n",
         "altered_pct", "delit_pct", "relit_pct", "neutral_pct"),
        out_rows,
        extra={"epsilon": epsilon,
               "alteration_share": {"per_lp": share.per_lp,
                                    "overall": share.overall,
                                    "record_weighted": share.record_weighted}})


@cmd_analyze.command("trajectory")
@click.option("--sli", "sli_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
@click.option("--record-weighted", is_flag=True,
              help="Pool records instead of averaging per-LP means.")
def cmd_analyze_trajectory(sli_path: str, out_dir: str,
                           record_weighted: bool) -> None:
    """Mean index per iterative pass, with monotone-decrease flags."""
    rows = _load_sli_rows(sli_path)
    tuples = []
    for row in rows:
        if row.get("task") != "iterative":
            continue
        position = row.get("position")
        if not isinstance(position, int):
            raise LiteralisError(
                f"iterative index row {row['id']!r} lacks a position")
        tuples.append((row["lp"], row.get("system") or "", position,
                       float(row["sli"])))
    report = dynamics.trajectory(tuples, record_weighted=record_weighted)
    out_rows = [{
        "system": cell.system,
        "position": cell.position,
        "mean_sli": cell.mean_sli,
        "n": cell.n,
        "n_lps": cell.n_lps,
        "strictly_decreasing": report.strictly_decreasing[cell.system],
    } for cell in report.cells]
    reports.write_report(
        out_dir, "trajectory",
        ("system", "position", "mean_sli", "n", "n_lps", "strictly_decreasing"),
        out_rows,
        extra={"strictly_decreasing": report.strictly_decreasing,
               "record_weighted": record_weighted})


@cmd_analyze.command("hitrates")
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
def cmd_analyze_hitrates(in_path: str, out_dir: str) -> None:
    """Signal hit/miss/tie rates over annotated idiom triplets."""
    triplets = validation.load_triplets(in_path)
    if not triplets:
        raise LiteralisError("no triplets to score")
    entries = validation.hit_rates(triplets)
    out_rows = [{
        "signal": e.signal,
        "scope": e.scope,
        "n": e.n,
        "hit": e.hit,
        "miss": e.miss,
        "tie": e.tie,
    } for e in entries]
    reports.write_report(out_dir, "hitrates",
                         ("signal", "scope", "n", "hit", "miss", "tie"),
                         out_rows)


@cmd_analyze.command("gradient")
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out-dir", required=True)
def cmd_analyze_gradient(in_path: str, out_dir: str) -> None:
    """Per-level signal means over annotated literality mixtures."""
    scored = validation.load_scored_mixtures(in_path)
    if not scored:
        raise LiteralisError("no mixture instances to score")
    rows = validation.gradient_table(scored)
    out_rows = []
    for row in rows:
        record: dict[str, Any] = {
            "signal": row.signal,
            "n": row.n,
            "excluded": row.excluded,
        }
        for level in validation.MIXTURE_LEVELS:
            record[f"mean_{level}"] = row.means.get(level)
        record["friedman_chi2"] = row.statistic
        record["p"] = row.p_value
        record["stars"] = reports.stars(row.p_value) if row.p_value is not None else None
        out_rows.append(record)
    columns = ["signal", "n", "excluded"]
    columns += [f"mean_{level}" for level in validation.MIXTURE_LEVELS]
    columns += ["friedman_chi2", "p", "stars"]
    reports.write_report(out_dir, "gradient", columns, out_rows)


@cli.command("augment")
@click.option("--in", "in_path", required=True,
              type=click.Path(exists=False, dir_okay=False))
@click.option("--out", "out_path", required=True)
@click.option("--n", "count", type=int, required=True)
@click.option("--seed", type=int, required=True)
def cmd_augment(in_path: str, out_path: str, count: int, seed: int) -> None:
    """Generate seeded three-segment literality mixtures from triplets."""
    base = validation.load_triplets(in_path)
    mixtures = validation.augment(base, count, seed)
    written = validation.write_mixtures(out_path, mixtures)
    logger.info("wrote %d mixture instances", written)


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
    except LiteralisError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_DOMAIN
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
