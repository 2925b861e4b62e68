"""Chronological incremental evaluation, recall metrics, problem
emission, and CSV reporting.

For every selected conjecture the harness trains a ranker on the view
of everything strictly before it, ranks the candidate pool, and records
recall@n against the conjecture's recorded proof dependencies.
Conjectures with no recorded dependencies are excluded from recall
averages (the metric is undefined for them) but are still counted and
still get emitted problem files.
"""

from __future__ import annotations

import csv
import dataclasses
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from .corpus import Corpus, TrainingView
from .errors import ConfigError, PremselError
from .fol import print_item
from .kernel import GridSearchConfig, GridSearchResult, KernelSpec, grid_search, ridge_score, ridge_train
from .naive_bayes import nb_score, nb_train

SEGMENT_COUNT = 4


@dataclass(frozen=True)
class RankedAdvice:
    """Premise ids of one pool in descending score order.

    The id list is always a permutation of the candidate pool.  Ties are
    broken by chronological position, earlier first, so advice is
    deterministic.  ``fallback`` marks pools that were returned in plain
    chronological order because the ranker could not be trained.
    """

    conjecture_id: str
    premise_ids: tuple[str, ...]
    scores: tuple[float, ...]
    fallback: bool = False


def rank_advice(conjecture_id, premise_ids, scores, fallback: bool = False) -> RankedAdvice:
    scores = [float(s) for s in scores]
    if len(scores) != len(premise_ids):
        raise ValueError("scores and premise ids differ in length")
    order = sorted(range(len(scores)), key=lambda j: (-scores[j], j))
    return RankedAdvice(
        conjecture_id,
        tuple(premise_ids[j] for j in order),
        tuple(scores[j] for j in order),
        fallback,
    )


def recall_at(used, advice: RankedAdvice, n: int) -> float:
    """|used ∩ top-n advised| / |used|; n beyond the pool is clamped."""
    used = frozenset(used)
    if not used:
        raise ValueError("recall is undefined for an empty dependency set")
    if n < 1:
        raise ValueError("n must be positive")
    top = advice.premise_ids[: min(n, len(advice.premise_ids))]
    return len(used.intersection(top)) / len(used)


class NaiveBayesRanker:
    """Retrains the naive Bayes model from scratch at every step."""

    name = "nb"

    def __init__(self, smoothing: float = 1.0):
        self.smoothing = smoothing

    def prepare(self, views) -> None:
        pass

    def advise(self, view: TrainingView) -> RankedAdvice | None:
        if not view.premise_ids:
            return None
        model = nb_train(view, self.smoothing)
        scores = nb_score(model, view.conjecture_features)
        return rank_advice(view.conjecture_id, view.premise_ids, scores)


class KernelRidgeRanker:
    """Multi-output ridge ranker ("mor") with grid-searched parameters.

    With ``regrid="once"`` the hyperparameter search runs on the first
    view that has at least two training rows and the chosen pair is
    reused for every later step; ``regrid="always"`` searches at every
    step.  Views with fewer than two rows cannot be trained and signal a
    fallback by returning None.

    Call :meth:`prepare` before advising from several threads; advising
    itself is read-only once the parameters are fixed.
    """

    name = "mor"

    def __init__(self, kernel_kind: str = "gaussian",
                 grid: GridSearchConfig | None = None, regrid: str = "once"):
        if regrid not in ("once", "always"):
            raise ConfigError(f"regrid must be 'once' or 'always', got {regrid!r}")
        if kernel_kind not in ("linear", "gaussian"):
            raise ConfigError(f"unknown kernel kind {kernel_kind!r}")
        self.kernel_kind = kernel_kind
        self.grid = grid if grid is not None else GridSearchConfig()
        self.regrid = regrid
        self.chosen: tuple[float, float | None] | None = None
        self.search: GridSearchResult | None = None

    def prepare(self, views) -> None:
        """Fix hyperparameters ahead of (possibly parallel) advising."""
        if self.regrid != "once" or self.chosen is not None:
            return
        for view in views:
            if len(view.rows) >= 2 and view.premise_ids:
                self.search = grid_search(view, self.kernel_kind, self.grid)
                self.chosen = (self.search.best_lambda, self.search.best_sigma)
                return

    def advise(self, view: TrainingView) -> RankedAdvice | None:
        if len(view.rows) < 2 or not view.premise_ids:
            return None
        if self.regrid == "once" and self.chosen is None:
            self.prepare([view])
        if self.chosen is not None and self.regrid == "once":
            lam, sigma = self.chosen
            spec = KernelSpec(self.kernel_kind, sigma if sigma is not None else 1.0)
            model = ridge_train(view, spec, lam)
        else:
            model = grid_search(view, self.kernel_kind, self.grid).model
        scores = ridge_score(model, view.conjecture_features)
        return rank_advice(view.conjecture_id, view.premise_ids, scores)


def make_ranker(name: str, **kwargs):
    if name == "nb":
        return NaiveBayesRanker(smoothing=kwargs.get("smoothing", 1.0))
    if name == "mor":
        return KernelRidgeRanker(
            kernel_kind=kwargs.get("kernel_kind", "gaussian"),
            grid=kwargs.get("grid"),
            regrid=kwargs.get("regrid", "once"),
        )
    raise ConfigError(f"unknown ranker {name!r}")


@dataclass
class ConjectureOutcome:
    conjecture_id: str
    position: int
    pool_size: int
    used_count: int
    fallback: bool
    # n -> recall value; None when the dependency set is empty
    recalls: dict[int, float] | None
    error: str | None = None
    advice: RankedAdvice | None = None


@dataclass(frozen=True)
class SegmentSummary:
    index: int
    count: int
    averages: dict[int, float]


@dataclass
class RecallReport:
    n_values: tuple[int, ...]
    outcomes: tuple[ConjectureOutcome, ...]
    averages: dict[int, float]
    segments: tuple[SegmentSummary, ...]
    evaluated_count: int
    skipped_empty: int
    error_count: int


def select_conjectures(corpus: Corpus, conjecture_ids=None, conjecture_roles=("theorem",)):
    """Positions of the items to evaluate, in chronological order."""
    if conjecture_ids is not None:
        positions = sorted(corpus.position_of(cid) for cid in conjecture_ids)
    else:
        roles = set(conjecture_roles)
        positions = [e.position for e in corpus.entries if e.role in roles]
    return positions


def chronological_fallback(view: TrainingView) -> RankedAdvice:
    return RankedAdvice(
        view.conjecture_id,
        view.premise_ids,
        tuple(0.0 for _ in view.premise_ids),
        fallback=True,
    )


def _mean(values) -> float:
    values = list(values)
    return math.fsum(values) / len(values)


def _segment_sizes(count: int) -> list[int]:
    base, extra = divmod(count, SEGMENT_COUNT)
    return [base + 1 if i < extra else base for i in range(SEGMENT_COUNT)]


def run_incremental(
    corpus: Corpus,
    ranker,
    *,
    n_values,
    conjecture_ids=None,
    conjecture_roles=("theorem",),
    row_roles=("theorem",),
    jobs: int = 1,
    keep_advice: bool = False,
) -> RecallReport:
    """Train-on-the-past / rank / score every selected conjecture.

    Steps are independent given the (featurized) corpus, so they may run
    on up to ``jobs`` threads; results are merged in position order and
    are identical for any job count.  Per-step training errors are
    recorded on the outcome and the run continues.
    """
    n_values = tuple(sorted(set(int(n) for n in n_values)))
    if not n_values or n_values[0] < 1:
        raise ConfigError("n values must be positive integers")
    if jobs < 1:
        raise ConfigError("jobs must be >= 1")
    positions = select_conjectures(corpus, conjecture_ids, conjecture_roles)
    corpus.ensure_featurized()
    views = [corpus.training_view(i, row_roles) for i in positions]
    ranker.prepare(views)

    def step(view: TrainingView) -> ConjectureOutcome:
        entry = corpus.entries[view.conjecture_position]
        used = entry.dependencies
        outcome = ConjectureOutcome(
            conjecture_id=view.conjecture_id,
            position=view.conjecture_position,
            pool_size=view.pool_size,
            used_count=len(used),
            fallback=False,
            recalls=None,
        )
        try:
            advice = ranker.advise(view)
        except PremselError as exc:
            outcome.error = str(exc)
            return outcome
        if advice is None:
            advice = chronological_fallback(view)
        outcome.fallback = advice.fallback
        if keep_advice:
            outcome.advice = advice
        if used:
            outcome.recalls = {n: recall_at(used, advice, n) for n in n_values}
        return outcome

    if jobs == 1 or len(views) <= 1:
        outcomes = [step(v) for v in views]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(step, views))

    evaluated = [o for o in outcomes if o.recalls is not None]
    averages = {n: _mean(o.recalls[n] for o in evaluated) for n in n_values} if evaluated else {}
    segments = []
    start = 0
    for index, size in enumerate(_segment_sizes(len(evaluated))):
        chunk = evaluated[start : start + size]
        start += size
        seg_avg = {n: _mean(o.recalls[n] for o in chunk) for n in n_values} if chunk else {}
        segments.append(SegmentSummary(index, len(chunk), seg_avg))
    return RecallReport(
        n_values=n_values,
        outcomes=tuple(outcomes),
        averages=averages,
        segments=tuple(segments),
        evaluated_count=len(evaluated),
        skipped_empty=sum(1 for o in outcomes if o.recalls is None and o.error is None),
        error_count=sum(1 for o in outcomes if o.error is not None),
    )


# ---------------------------------------------------------------------------
# CSV reporting
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def report_csv(report: RecallReport, out_dir) -> dict[str, Path]:
    """Write conjectures.csv, average.csv, and segments.csv into out_dir."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        "conjectures": out / "conjectures.csv",
        "average": out / "average.csv",
        "segments": out / "segments.csv",
    }
    recall_cols = [f"recall@{n}" for n in report.n_values]
    with open(paths["conjectures"], "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(
            ["conjecture_id", "position", "pool_size", "used_count", "fallback", "error"]
            + recall_cols
        )
        for o in report.outcomes:
            recalls = [
                _fmt(o.recalls[n]) if o.recalls is not None else "" for n in report.n_values
            ]
            writer.writerow(
                [o.conjecture_id, o.position, o.pool_size, o.used_count, _fmt(o.fallback),
                 o.error or ""]
                + recalls
            )
    with open(paths["average"], "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["n", "average_recall"])
        for n in report.n_values:
            if report.averages:
                writer.writerow([n, _fmt(report.averages[n])])
    with open(paths["segments"], "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["segment", "count"] + recall_cols)
        for seg in report.segments:
            row = [seg.index, seg.count]
            row += [_fmt(seg.averages[n]) if seg.averages else "" for n in report.n_values]
            writer.writerow(row)
    return paths


# ---------------------------------------------------------------------------
# Problem emission
# ---------------------------------------------------------------------------

EMIT_MODES = ("bushy", "chainy", "advised")


def _safe_filename(identifier: str) -> str:
    return "".join(c if c.isalnum() or c in "_.-" else "_" for c in identifier)


def _write_problem(corpus: Corpus, position: int, axiom_ids, out_dir: Path) -> Path:
    entry = corpus.entries[position]
    lines = []
    for axiom_id in axiom_ids:
        axiom = corpus.entry(axiom_id)
        lines.append(print_item(dataclasses.replace(axiom.item, role="axiom")))
    lines.append(print_item(dataclasses.replace(entry.item, role="conjecture")))
    path = out_dir / f"{_safe_filename(entry.name)}.p"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def emit_problems(
    corpus: Corpus,
    mode: str,
    out_dir,
    *,
    conjecture_ids=None,
    conjecture_roles=("theorem",),
    n: int | None = None,
    ranker=None,
    row_roles=("theorem",),
) -> list[Path]:
    """One problem file per conjecture, named ``<id>.p``.

    Axioms are the conjecture's recorded dependencies (bushy), all
    chronologically earlier items (chainy), or the top-n ranked premises
    (advised); the conjecture itself is emitted with role
    ``conjecture``.  Every file re-parses cleanly.
    """
    if mode not in EMIT_MODES:
        raise ConfigError(f"mode must be one of {', '.join(EMIT_MODES)}")
    if mode == "advised":
        if ranker is None or n is None or n < 1:
            raise ConfigError("advised emission needs a ranker and a positive n")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    positions = select_conjectures(corpus, conjecture_ids, conjecture_roles)
    written: list[Path] = []
    if mode == "advised":
        corpus.ensure_featurized()
        views = [corpus.training_view(i, row_roles) for i in positions]
        ranker.prepare(views)
        for view in views:
            advice = ranker.advise(view)
            if advice is None:
                advice = chronological_fallback(view)
            top = advice.premise_ids[: min(n, len(advice.premise_ids))]
            written.append(_write_problem(corpus, view.conjecture_position, top, out))
        return written
    for position in positions:
        entry = corpus.entries[position]
        if mode == "bushy":
            axiom_ids = sorted(entry.dependencies, key=corpus.position_of)
        else:
            axiom_ids = [e.name for e in corpus.entries[:position]]
        written.append(_write_problem(corpus, position, axiom_ids, out))
    return written
