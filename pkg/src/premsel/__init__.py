"""Premise selection over first-order proof corpora.

Parses FOF-style formula files, learns premise rankers (naive Bayes and
a kernel ridge multi-output ranker) from recorded proof dependencies,
evaluates them with the chronological train-on-the-past protocol, emits
ATP problem files, and minimizes dependency sets against a sufficiency
oracle.
"""

__version__ = "0.1.0"

from .corpus import Corpus, CorpusEntry, ProofMatrix, TrainingRow, TrainingView, load_corpus
from .errors import ConfigError, CorpusError, FofSyntaxError, PremselError, TrainingError
from .evaluate import (
    KernelRidgeRanker,
    NaiveBayesRanker,
    RankedAdvice,
    RecallReport,
    emit_problems,
    rank_advice,
    recall_at,
    report_csv,
    run_incremental,
)
from .features import FeatureDictionary, FeatureVector, dot, extract_features, vectorize
from .fol import NamedItem, parse_file, parse_item, parse_items, print_item
from .kernel import (
    GridSearchConfig,
    GridSearchResult,
    KernelSpec,
    RidgeModel,
    build_kernel_matrix,
    grid_search,
    kernel_eval,
    ridge_score,
    ridge_solve,
    ridge_train,
)
from .minimize import (
    CountingOracle,
    MinimizationResult,
    SubprocessOracle,
    batch_minimize,
    greedy_minimize,
)
from .naive_bayes import NbModel, nb_score, nb_train

__all__ = [
    "__version__",
    "Corpus", "CorpusEntry", "ProofMatrix", "TrainingRow", "TrainingView", "load_corpus",
    "ConfigError", "CorpusError", "FofSyntaxError", "PremselError", "TrainingError",
    "KernelRidgeRanker", "NaiveBayesRanker", "RankedAdvice", "RecallReport",
    "emit_problems", "rank_advice", "recall_at", "report_csv", "run_incremental",
    "FeatureDictionary", "FeatureVector", "dot", "extract_features", "vectorize",
    "NamedItem", "parse_file", "parse_item", "parse_items", "print_item",
    "GridSearchConfig", "GridSearchResult", "KernelSpec", "RidgeModel",
    "build_kernel_matrix", "grid_search", "kernel_eval", "ridge_score", "ridge_solve",
    "ridge_train",
    "CountingOracle", "MinimizationResult", "SubprocessOracle", "batch_minimize",
    "greedy_minimize",
    "NbModel", "nb_score", "nb_train",
]
