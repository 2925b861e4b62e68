"""Corpus loading, proof matrix, and training view contracts."""

import pytest

from premsel.corpus import load_corpus, parse_dependency_lines
from premsel.errors import CorpusError

from helpers import write_corpus

THREE = """\
fof(t1, axiom, p(a)).
fof(t2, axiom, q(b)).
fof(t3, theorem, p(a) & q(b)).
"""


def _load(tmp_path, formulas=THREE, deps="t3: t1\n"):
    f, d = write_corpus(tmp_path, formulas, deps)
    return load_corpus([f], d)


class TestLoad:
    def test_single_dependency_populates_matrix(self, tmp_path):
        corpus = _load(tmp_path)
        assert len(corpus) == 3
        for c in range(3):
            for p in range(3):
                assert corpus.matrix.mu(c, p) == (c == 2 and p == 0)

    def test_dependencies_match_matrix_rows_exactly(self, tmp_path):
        corpus = _load(tmp_path, deps="t3: t1 t2\n")
        for entry in corpus.entries:
            derived = {corpus.entries[p].name for p in corpus.matrix.row(entry.position)}
            assert derived == set(entry.dependencies)

    def test_empty_dependency_file(self, tmp_path):
        corpus = _load(tmp_path, deps="")
        assert all(not corpus.matrix.row(i) for i in range(3))

    def test_forward_dependency_rejected(self, tmp_path):
        with pytest.raises(CorpusError, match="precede"):
            _load(tmp_path, deps="t1: t3\n")

    def test_self_dependency_rejected(self, tmp_path):
        with pytest.raises(CorpusError, match="precede"):
            _load(tmp_path, deps="t3: t3\n")

    def test_unknown_identifier_rejected(self, tmp_path):
        with pytest.raises(CorpusError, match="unknown"):
            _load(tmp_path, deps="t3: nope\n")
        with pytest.raises(CorpusError, match="unknown"):
            _load(tmp_path, deps="nope: t1\n")

    def test_duplicate_dependency_line_rejected(self, tmp_path):
        with pytest.raises(CorpusError, match="duplicate"):
            _load(tmp_path, deps="t3: t1\nt3: t2\n")

    def test_duplicate_item_across_files_rejected(self, tmp_path):
        f1, d = write_corpus(tmp_path, THREE, "")
        f2 = tmp_path / "second.p"
        f2.write_text("fof(t1, axiom, r(c)).\n", encoding="utf-8")
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus([f1, f2], d)

    def test_chronology_spans_files(self, tmp_path):
        f1 = tmp_path / "a.p"
        f2 = tmp_path / "b.p"
        f1.write_text("fof(t1, axiom, p(a)).\n", encoding="utf-8")
        f2.write_text("fof(t2, theorem, p(a)).\n", encoding="utf-8")
        d = tmp_path / "deps.txt"
        d.write_text("t2: t1\n", encoding="utf-8")
        corpus = load_corpus([f1, f2], d)
        assert corpus.matrix.mu(1, 0)
        # reversed file order makes the dependency forward
        with pytest.raises(CorpusError, match="precede"):
            load_corpus([f2, f1], d)

    def test_comment_and_blank_lines_ignored(self):
        deps = parse_dependency_lines("# c\n\nt3: t1\n", {"t1": 0, "t3": 2})
        assert deps == {"t3": frozenset({"t1"})}


class TestTrainingView:
    def test_position_zero_has_empty_pool(self, tmp_path):
        view = _load(tmp_path).training_view(0)
        assert view.premise_ids == ()
        assert view.rows == ()

    def test_pool_is_exactly_the_prefix(self, tmp_path):
        view = _load(tmp_path).training_view(2)
        assert view.premise_ids == ("t1", "t2")

    def test_pool_sizes_grow_linearly(self, tmp_path):
        corpus = _load(tmp_path)
        assert [corpus.training_view(i).pool_size for i in range(3)] == [0, 1, 2]

    def test_out_of_range(self, tmp_path):
        corpus = _load(tmp_path)
        with pytest.raises(IndexError):
            corpus.training_view(3)
        with pytest.raises(IndexError):
            corpus.training_view(-1)

    def test_rows_default_to_theorems_only(self, tmp_path):
        text = THREE + "fof(t4, theorem, q(b)).\n"
        corpus = _load(tmp_path, formulas=text, deps="t3: t1\nt4: t2\n")
        view = corpus.training_view(3)
        assert [r.position for r in view.rows] == [2]
        view_all = corpus.training_view(3, row_roles=("axiom", "definition", "theorem"))
        assert [r.position for r in view_all.rows] == [0, 1, 2]

    def test_row_labels_never_reference_the_future(self, tmp_path):
        text = THREE + "fof(t4, theorem, q(b)).\n"
        corpus = _load(tmp_path, formulas=text, deps="t3: t1\nt4: t2\n")
        for i in range(4):
            view = corpus.training_view(i)
            for row in view.rows:
                assert all(p < row.position for p in row.used)
                assert all(p < i for p in row.used)

    def test_conjecture_features_exclude_later_indices(self, tmp_path):
        # "b" first occurs in the conjecture at position 1 and again
        # later; the view at 1 must not expose it even though the full
        # dictionary eventually contains it.
        text = "fof(t1, axiom, p(a)).\nfof(t2, theorem, p(b)).\nfof(t3, theorem, q(b)).\n"
        corpus = _load(tmp_path, formulas=text, deps="")
        corpus.ensure_featurized()
        view = corpus.training_view(1)
        visible_keys = {corpus.dictionary.key_at(i) for i in view.conjecture_features}
        assert visible_keys == {"s:p/1"}
        assert "s:b/0" in corpus.dictionary  # known globally, hidden at step 1

    def test_featurize_is_idempotent(self, tmp_path):
        corpus = _load(tmp_path)
        corpus.ensure_featurized()
        first = [e.features for e in corpus.entries]
        corpus.ensure_featurized()
        assert [e.features for e in corpus.entries] == first

    def test_unknown_identifier_lookup(self, tmp_path):
        corpus = _load(tmp_path)
        with pytest.raises(CorpusError, match="unknown"):
            corpus.position_of("missing")
