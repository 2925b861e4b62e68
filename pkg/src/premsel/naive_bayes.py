"""Per-premise naive Bayes ranking over binary formula features.

For each candidate premise the model keeps add-one smoothed counts of
how often each feature occurred among the training rows that used the
premise, plus the global per-feature row counts.  Scoring a conjecture
sums, over its features, the smoothed log-odds of the feature given
"premise was used" versus "premise was not used", and adds the smoothed
prior log-odds of the premise.  Only features present in the conjecture
contribute, which keeps scoring linear in the conjecture size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .corpus import TrainingView
from .errors import TrainingError
from .features import FeatureVector

_FORMAT = "premsel-nb/1"


@dataclass
class NbModel:
    """Trained classifier state for every premise of one training pool.

    ``priors[p]`` is the smoothed prior log-odds of premise p being
    used.  ``bases[p]`` is the log-odds weight shared by every feature
    that occurred in no training row.  Weights of other features derive
    from the stored counts; see :meth:`weight`.
    """

    premise_ids: tuple[str, ...]
    row_count: int
    smoothing: float
    uses: tuple[int, ...]
    priors: tuple[float, ...]
    bases: tuple[float, ...]
    feature_row_counts: dict[int, int]
    positive_counts: tuple[dict[int, int], ...]

    def weight(self, premise: int, feature: int) -> float:
        """Log-odds weight of one feature index for one premise."""
        a = self.smoothing
        used = self.uses[premise]
        unused = self.row_count - used
        cp = self.positive_counts[premise].get(feature, 0)
        cn = self.feature_row_counts.get(feature, 0) - cp
        return math.log((cp + a) / (used + 2 * a)) - math.log((cn + a) / (unused + 2 * a))

    def save(self, path) -> None:
        """Write the model as a documented, stable text (JSON) file.

        Per premise: its id, prior log-odds, and the sparse per-feature
        counts that parameterize its weight list (weights derive from
        the counts through :meth:`weight`).  Storing exact integer
        counts instead of float weights makes the round trip reproduce
        scores bit for bit.
        """
        payload = {
            "format": _FORMAT,
            "smoothing": self.smoothing,
            "rows": self.row_count,
            "premises": [
                {
                    "id": pid,
                    "uses": self.uses[p],
                    "prior": self.priors[p],
                    "feature_counts": {
                        str(i): c for i, c in sorted(self.positive_counts[p].items())
                    },
                }
                for p, pid in enumerate(self.premise_ids)
            ],
            "feature_row_counts": {str(i): c for i, c in sorted(self.feature_row_counts.items())},
        }
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(payload, handle, indent=1, sort_keys=True)
            handle.write("\n")

    @classmethod
    def load(cls, path) -> "NbModel":
        with open(path, encoding="utf-8") as handle:
            payload = json.load(handle)
        if payload.get("format") != _FORMAT:
            raise ValueError(f"not a {_FORMAT} file: {path}")
        smoothing = float(payload["smoothing"])
        rows = int(payload["rows"])
        ids = tuple(p["id"] for p in payload["premises"])
        uses = tuple(int(p["uses"]) for p in payload["premises"])
        positive = tuple(
            {int(i): int(c) for i, c in p["feature_counts"].items()}
            for p in payload["premises"]
        )
        totals = {int(i): int(c) for i, c in payload["feature_row_counts"].items()}
        priors, bases = _derived_terms(rows, uses, smoothing)
        return cls(ids, rows, smoothing, uses, priors, bases, totals, positive)


def _derived_terms(row_count: int, uses, smoothing: float):
    priors = tuple(
        math.log((u + smoothing) / (row_count - u + smoothing)) for u in uses
    )
    bases = tuple(
        math.log(row_count - u + 2 * smoothing) - math.log(u + 2 * smoothing) for u in uses
    )
    return priors, bases


def nb_train(view: TrainingView, smoothing: float = 1.0) -> NbModel:
    """Train one classifier per candidate premise of ``view``.

    Counting is a single pass over the rows; training different
    premises shares the per-feature row totals.
    """
    if smoothing <= 0:
        raise ValueError("smoothing must be positive")
    pool = len(view.premise_ids)
    if pool == 0:
        raise TrainingError("empty premise pool")
    uses = [0] * pool
    totals: dict[int, int] = {}
    positive: list[dict[int, int]] = [{} for _ in range(pool)]
    for row in view.rows:
        if row.features is None:
            raise TrainingError("training row without a feature vector")
        for i in row.features.indices:
            totals[i] = totals.get(i, 0) + 1
        for p in row.used:
            uses[p] += 1
            counts = positive[p]
            for i in row.features.indices:
                counts[i] = counts.get(i, 0) + 1
    priors, bases = _derived_terms(len(view.rows), uses, smoothing)
    return NbModel(
        premise_ids=view.premise_ids,
        row_count=len(view.rows),
        smoothing=smoothing,
        uses=tuple(uses),
        priors=priors,
        bases=bases,
        feature_row_counts=totals,
        positive_counts=positive,
    )


def nb_score(model: NbModel, features: FeatureVector) -> np.ndarray:
    """Score every premise for a conjecture with the given features.

    Feature indices unknown to the model's dictionary must already have
    been dropped (test-time vectorization does this).
    """
    idx = features.indices
    k = len(idx)
    totals = model.feature_row_counts
    tots = [totals.get(i, 0) for i in idx]
    a = model.smoothing
    # counts are bounded by the row count, so log values come from a table
    logs = [math.log(c + a) for c in range(model.row_count + 1)]
    scores = np.empty(len(model.premise_ids))
    for p in range(len(model.premise_ids)):
        counts = model.positive_counts[p]
        s = model.priors[p] + k * model.bases[p]
        for i, tot in zip(idx, tots):
            cp = counts.get(i, 0)
            s += logs[cp] - logs[tot - cp]
        scores[p] = s
    return scores
