"""Command-line entry point: load, rank, evaluate, emit, minimize.

Exit codes: 0 success, 2 configuration error (bad flags, missing files,
unknown ids), 3 corpus/formula parse error, 4 runtime error.  Every
command that writes into an output directory also writes
``run_metadata.json`` echoing the full configuration and seed, enough
to reproduce the run byte for byte.
"""

from __future__ import annotations

import json
import os
import shlex
import sys
from pathlib import Path

import click

from . import __version__
from .corpus import load_corpus
from .errors import ConfigError, CorpusError, FofSyntaxError, PremselError
from .evaluate import (
    emit_problems,
    make_ranker,
    report_csv,
    run_incremental,
    chronological_fallback,
)
from .kernel import GridSearchConfig, write_loss_table
from .minimize import SubprocessOracle, batch_minimize, greedy_minimize, write_trace_csv

EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_RUNTIME = 4

DEFAULT_N_SET = "1,2,3,4,5,6,7,8,9,10,20,30,40,50,60,70,80,90,100"


def _parse_floats(text: str | None, flag: str):
    if text is None:
        return None
    try:
        values = tuple(float(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{flag} must be comma-separated numbers, got {text!r}")
    if not values:
        raise ConfigError(f"{flag} must not be empty")
    return values


def _parse_ints(text: str, flag: str):
    try:
        values = tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError:
        raise ConfigError(f"{flag} must be comma-separated integers, got {text!r}")
    if not values or any(v < 1 for v in values):
        raise ConfigError(f"{flag} must be positive integers")
    return values


def _parse_names(text: str | None):
    if text is None:
        return None
    names = tuple(part.strip() for part in text.split(",") if part.strip())
    return names or None


def _check_paths(paths):
    for path in paths:
        if not Path(path).is_file():
            raise ConfigError(f"input file not found: {path}")


def _load(formula_paths, dep_path):
    _check_paths(list(formula_paths) + [dep_path])
    return load_corpus(formula_paths, dep_path)


def _grid_config(lambda_grid, sigma_grid, split, seed, chrono_split) -> GridSearchConfig:
    kwargs = {"split": split, "seed": seed, "chronological": chrono_split}
    if lambda_grid is not None:
        kwargs["lambda_grid"] = lambda_grid
    if sigma_grid is not None:
        kwargs["sigma_grid"] = sigma_grid
    return GridSearchConfig(**kwargs)


def _build_ranker(ranker, kernel, lambda_grid, sigma_grid, split, seed, chrono_split,
                  regrid, smoothing):
    grid = _grid_config(
        _parse_floats(lambda_grid, "--lambda-grid"),
        _parse_floats(sigma_grid, "--sigma-grid"),
        split,
        seed,
        chrono_split,
    )
    if ranker == "nb":
        if smoothing <= 0:
            raise ConfigError("--smoothing must be positive")
        return make_ranker("nb", smoothing=smoothing)
    return make_ranker("mor", kernel_kind=kernel, grid=grid, regrid=regrid)


def _write_metadata(out_dir, command: str, options: dict) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    payload = {"command": command, "version": __version__, "options": options}
    with open(out / "run_metadata.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _corpus_options(f):
    f = click.option("--deps", "dep_path", required=True, help="Dependency file.")(f)
    f = click.option(
        "--formulas", "-f", "formula_paths", multiple=True, required=True,
        help="Formula file; repeat for several, order = chronology.",
    )(f)
    return f


def _ranker_options(f):
    for option in reversed([
        click.option("--ranker", type=click.Choice(["nb", "mor"]), default="nb",
                     show_default=True, help="nb = naive Bayes, mor = multi-output ridge."),
        click.option("--kernel", type=click.Choice(["gaussian", "linear"]),
                     default="gaussian", show_default=True),
        click.option("--lambda-grid", default=None,
                     help="Comma-separated regularization grid (default: 2^-7..2^7)."),
        click.option("--sigma-grid", default=None,
                     help="Comma-separated kernel width grid (default: sigma^2 = 2^-3..2^9)."),
        click.option("--split", type=float, default=0.70, show_default=True,
                     help="Training fraction of the grid-search split."),
        click.option("--chrono-split", is_flag=True,
                     help="Split train/validation chronologically instead of shuffling."),
        click.option("--regrid", type=click.Choice(["once", "always"]), default="once",
                     show_default=True, help="Re-run the grid search at every step or once."),
        click.option("--smoothing", type=float, default=1.0, show_default=True,
                     help="Additive smoothing for the naive Bayes counts."),
        click.option("--train-rows", type=click.Choice(["theorems", "all"]),
                     default="theorems", show_default=True,
                     help="Which roles contribute training rows (all roles are premises)."),
        click.option("--seed", type=int, default=0, show_default=True),
    ]):
        f = option(f)
    return f


def _row_roles(train_rows: str):
    return ("theorem",) if train_rows == "theorems" else ("axiom", "definition", "theorem", "conjecture")


@click.group()
@click.version_option(__version__, prog_name="premsel")
def cli():
    """Premise selection over first-order corpora."""


@cli.command()
@_corpus_options
@_ranker_options
@click.option("--conjecture", required=True, help="Identifier of the item to rank for.")
@click.option("-n", "--top", "top_n", type=int, default=10, show_default=True)
@click.option("--out-dir", default=None, help="Also write advice.csv and metadata here.")
def rank(formula_paths, dep_path, conjecture, top_n, ranker, kernel, lambda_grid,
         sigma_grid, split, chrono_split, regrid, smoothing, train_rows, seed, out_dir):
    """Rank the premises available to one conjecture."""
    if top_n < 1:
        raise ConfigError("-n must be positive")
    engine = _build_ranker(ranker, kernel, lambda_grid, sigma_grid, split, seed,
                           chrono_split, regrid, smoothing)
    corpus = _load(formula_paths, dep_path)
    if conjecture not in corpus:
        raise ConfigError(f"unknown conjecture id {conjecture!r}")
    position = corpus.position_of(conjecture)
    view = corpus.training_view(position, _row_roles(train_rows))
    engine.prepare([view])
    advice = engine.advise(view)
    if advice is None:
        advice = chronological_fallback(view)
        click.echo("note: pool not trainable, advice is chronological", err=True)
    n = top_n
    if n > len(advice.premise_ids):
        click.echo(
            f"warning: n={n} exceeds pool size {len(advice.premise_ids)}; returning whole pool",
            err=True,
        )
        n = len(advice.premise_ids)
    for pid, score in zip(advice.premise_ids[:n], advice.scores[:n]):
        click.echo(f"{pid}\t{score!r}")
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with open(out / "advice.csv", "w", encoding="utf-8", newline="") as handle:
            handle.write("rank,premise_id,score\n")
            for i, (pid, score) in enumerate(zip(advice.premise_ids[:n], advice.scores[:n])):
                handle.write(f"{i},{pid},{score!r}\n")
        _write_metadata(out_dir, "rank", {
            "formulas": list(formula_paths), "deps": dep_path, "conjecture": conjecture,
            "n": top_n, "ranker": ranker, "kernel": kernel, "lambda_grid": lambda_grid,
            "sigma_grid": sigma_grid, "split": split, "chrono_split": chrono_split,
            "regrid": regrid, "smoothing": smoothing, "train_rows": train_rows, "seed": seed,
        })


@cli.command("eval")
@_corpus_options
@_ranker_options
@click.option("--conjectures", default=None, help="Comma-separated ids to evaluate.")
@click.option("--conjecture-roles", default="theorem", show_default=True,
              help="Roles evaluated as conjectures when --conjectures is not given.")
@click.option("--n-set", default=DEFAULT_N_SET, show_default=True,
              help="Comma-separated n values for recall@n.")
@click.option("--jobs", type=int, default=None,
              help="Parallel evaluation steps (default: available cores).")
@click.option("--out-dir", required=True)
def eval_cmd(formula_paths, dep_path, conjectures, conjecture_roles, n_set, jobs, out_dir,
             ranker, kernel, lambda_grid, sigma_grid, split, chrono_split, regrid,
             smoothing, train_rows, seed):
    """Incremental evaluation: recall@n per conjecture plus averages."""
    n_values = _parse_ints(n_set, "--n-set")
    roles = _parse_names(conjecture_roles) or ("theorem",)
    ids = _parse_names(conjectures)
    if jobs is None:
        jobs = os.cpu_count() or 1
    if jobs < 1:
        raise ConfigError("--jobs must be >= 1")
    engine = _build_ranker(ranker, kernel, lambda_grid, sigma_grid, split, seed,
                           chrono_split, regrid, smoothing)
    corpus = _load(formula_paths, dep_path)
    report = run_incremental(
        corpus, engine, n_values=n_values, conjecture_ids=ids, conjecture_roles=roles,
        row_roles=_row_roles(train_rows), jobs=jobs,
    )
    paths = report_csv(report, out_dir)
    if getattr(engine, "search", None) is not None:
        write_loss_table(engine.search.table, Path(out_dir) / "grid_loss.csv")
    _write_metadata(out_dir, "eval", {
        "formulas": list(formula_paths), "deps": dep_path, "conjectures": conjectures,
        "conjecture_roles": conjecture_roles, "n_set": n_set, "ranker": ranker,
        "kernel": kernel, "lambda_grid": lambda_grid, "sigma_grid": sigma_grid,
        "split": split, "chrono_split": chrono_split, "regrid": regrid,
        "smoothing": smoothing, "train_rows": train_rows, "seed": seed,
    })
    click.echo(
        f"evaluated {report.evaluated_count} conjectures "
        f"({report.skipped_empty} with no dependencies, {report.error_count} errors)"
    )
    for name in ("conjectures", "average", "segments"):
        click.echo(f"wrote {paths[name]}")


@cli.command()
@_corpus_options
@_ranker_options
@click.option("--mode", type=click.Choice(["bushy", "chainy", "advised"]), required=True)
@click.option("-n", "--top", "top_n", type=int, default=None,
              help="Number of advised premises (advised mode only).")
@click.option("--conjectures", default=None, help="Comma-separated ids to emit.")
@click.option("--conjecture-roles", default="theorem", show_default=True)
@click.option("--out-dir", required=True)
def emit(formula_paths, dep_path, mode, top_n, conjectures, conjecture_roles, out_dir,
         ranker, kernel, lambda_grid, sigma_grid, split, chrono_split, regrid,
         smoothing, train_rows, seed):
    """Emit one problem file per conjecture."""
    roles = _parse_names(conjecture_roles) or ("theorem",)
    ids = _parse_names(conjectures)
    engine = None
    if mode == "advised":
        if top_n is None or top_n < 1:
            raise ConfigError("advised mode needs a positive -n")
        engine = _build_ranker(ranker, kernel, lambda_grid, sigma_grid, split, seed,
                               chrono_split, regrid, smoothing)
    corpus = _load(formula_paths, dep_path)
    written = emit_problems(
        corpus, mode, out_dir, conjecture_ids=ids, conjecture_roles=roles,
        n=top_n, ranker=engine, row_roles=_row_roles(train_rows),
    )
    _write_metadata(out_dir, "emit", {
        "formulas": list(formula_paths), "deps": dep_path, "mode": mode, "n": top_n,
        "conjectures": conjectures, "conjecture_roles": conjecture_roles,
        "ranker": ranker if mode == "advised" else None, "kernel": kernel,
        "lambda_grid": lambda_grid, "sigma_grid": sigma_grid, "split": split,
        "chrono_split": chrono_split, "regrid": regrid, "smoothing": smoothing,
        "train_rows": train_rows, "seed": seed,
    })
    click.echo(f"wrote {len(written)} problem files to {out_dir}")


@cli.command()
@click.option("--oracle-cmd", required=True,
              help="Command run per probe; candidate ids on stdin, exit 0 = sufficient.")
@click.option("--ids", default=None, help="Comma-separated candidate ids.")
@click.option("--ids-file", default=None, help="File with one candidate id per line.")
@click.option("--order", type=click.Choice(["given", "reverse"]), default="given",
              show_default=True)
@click.option("--batch", is_flag=True, help="Chunked passes before the element-wise pass.")
@click.option("--schedule", default=None, help="Comma-separated chunk sizes for --batch.")
@click.option("--trace-csv", default=None, help="Write the removal trace here.")
@click.option("--out-dir", default=None)
def minimize(oracle_cmd, ids, ids_file, order, batch, schedule, trace_csv, out_dir):
    """Reduce a dependency set to a 1-minimal sufficient subset."""
    if (ids is None) == (ids_file is None):
        raise ConfigError("give exactly one of --ids or --ids-file")
    if ids is not None:
        candidates = list(_parse_names(ids) or ())
    else:
        _check_paths([ids_file])
        candidates = [line.strip() for line in open(ids_file, encoding="utf-8")
                      if line.strip()]
    if not candidates:
        raise ConfigError("candidate id list is empty")
    sizes = _parse_ints(schedule, "--schedule") if schedule is not None else None
    if sizes is not None and not batch:
        raise ConfigError("--schedule requires --batch")
    oracle = SubprocessOracle(shlex.split(oracle_cmd))
    if batch:
        result = batch_minimize(candidates, oracle, sizes)
    else:
        result = greedy_minimize(candidates, oracle, order)
    for kept in result.kept:
        click.echo(kept)
    click.echo(f"oracle calls: {result.call_count}", err=True)
    if trace_csv is not None:
        write_trace_csv(result, trace_csv)
    if out_dir is not None:
        _write_metadata(out_dir, "minimize", {
            "oracle_cmd": oracle_cmd, "ids": ids, "ids_file": ids_file, "order": order,
            "batch": batch, "schedule": schedule, "trace_csv": trace_csv,
        })


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        sys.exit(exc.exit_code)
    except click.UsageError as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except click.ClickException as exc:
        exc.show()
        sys.exit(EXIT_CONFIG)
    except ConfigError as exc:
        click.echo(f"configuration error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (FofSyntaxError, CorpusError) as exc:
        click.echo(f"parse error: {exc}", err=True)
        sys.exit(EXIT_PARSE)
    except (PremselError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    return 0


if __name__ == "__main__":
    main()
