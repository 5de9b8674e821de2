import io
import math

import numpy as np
import pytest

from depsum.corpus import Document
from depsum.embed import FileBackend, HashedBackend, cosine_sim
from depsum.errors import DegenerateCorpusError, OutOfRangeError, TermAbsentError
from depsum.lexicon import (
    AlertingLexicon,
    Category,
    SCORED_CATEGORIES,
    assign_category,
    build_corpus_stats,
    build_lexicon,
    candidate_words,
    coverage,
    default_alerting_lexicon,
    load_alerting_lexicon,
    ranked_word_scores,
    rphq,
    tf_idf,
    top_words_report,
    word_score,
)
from depsum.summarize import Summary

# The published PHQ -> RPHQ remap, transcribed row by row; 24 extends the
# depressed branch linearly.
RPHQ_TABLE = {
    0: 10, 1: 9, 2: 8, 3: 7, 4: 6, 5: 5, 6: 4, 7: 3, 8: 2, 9: 1,
    10: -1, 11: -2, 12: -3, 13: -4, 14: -5, 15: -6, 16: -7, 17: -8,
    18: -9, 19: -10, 20: -11, 21: -12, 22: -13, 23: -14, 24: -15,
}


def brute_force_word_score(word, token_docs, phqs):
    """Independent WS evaluation straight off raw token lists."""
    d_plus = sum(RPHQ_TABLE[p] for p in phqs if RPHQ_TABLE[p] > 0)
    d_minus = -sum(RPHQ_TABLE[p] for p in phqs if RPHQ_TABLE[p] < 0)
    pos = sum(
        RPHQ_TABLE[p] * tokens.count(word)
        for tokens, p in zip(token_docs, phqs)
        if RPHQ_TABLE[p] > 0 and word in tokens
    )
    neg = sum(
        RPHQ_TABLE[p] * tokens.count(word)
        for tokens, p in zip(token_docs, phqs)
        if RPHQ_TABLE[p] < 0 and word in tokens
    )
    return pos / d_plus + neg / d_minus


def _docs_from_tokens(token_docs):
    return [Document(i + 1, (" ".join(tokens),)) for i, tokens in enumerate(token_docs)]


class TestRphq:
    def test_full_table(self):
        for phq, expected in RPHQ_TABLE.items():
            assert rphq(phq) == expected

    def test_out_of_range(self):
        for bad in (-1, 25, 100):
            with pytest.raises(OutOfRangeError):
                rphq(bad)

    def test_strictly_decreasing_and_bounded(self):
        values = [rphq(p) for p in range(25)]
        assert all(a > b for a, b in zip(values, values[1:10]))
        assert all(a > b for a, b in zip(values[10:], values[11:]))
        assert max(values) == 10 and min(values) == -15

    def test_sign_encodes_label(self):
        for phq in range(25):
            assert (rphq(phq) < 0) == (phq >= 10)


class TestTfIdf:
    def test_term_in_every_document(self):
        docs = _docs_from_tokens([["x", "x"], ["x"], ["x", "y"]])
        stats = build_corpus_stats([(d, p) for d, p in zip(docs, [0, 5, 15])], policy=None)
        for session in (1, 2, 3):
            assert tf_idf("x", session, stats) == 0.0

    def test_single_document_corpus(self):
        stats = build_corpus_stats([(Document(1, ("a b a",)), 0)], policy=None)
        assert tf_idf("a", 1, stats) == 0.0

    def test_direct_evaluation(self):
        # tf=3, N=4, df=2 -> 3 ln 2
        token_docs = [["q"] * 3, ["q"], ["z"], ["z"]]
        docs = _docs_from_tokens(token_docs)
        stats = build_corpus_stats([(d, 0) for d in docs], policy=None)
        assert tf_idf("q", 1, stats) == pytest.approx(3 * math.log(2), abs=1e-12)

    def test_absent_term_zero(self):
        stats = build_corpus_stats([(Document(1, ("a",)), 0)], policy=None)
        assert tf_idf("zz", 1, stats) == 0.0

    def test_inconsistent_stats_raise(self):
        stats = build_corpus_stats([(Document(1, ("a",)), 0)], policy=None)
        stats.tf[1]["ghost"] = 2  # corrupt on purpose
        with pytest.raises(TermAbsentError):
            tf_idf("ghost", 1, stats)


class TestWordScore:
    def test_hand_example(self):
        # docA: PHQ 0, tf(happy)=3; docB: PHQ 20, tf(sad)=2 -> WS 3 and -2
        docs = [(Document(1, ("happy happy happy",)), 0), (Document(2, ("sad sad",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        assert word_score("happy", stats) == pytest.approx(3.0, abs=1e-12)
        assert word_score("sad", stats) == pytest.approx(-2.0, abs=1e-12)

    def test_absent_word_zero(self):
        docs = [(Document(1, ("a",)), 0), (Document(2, ("b",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        assert word_score("missing", stats) == 0.0

    def test_cancellation(self):
        # equal weighted presence on both sides: rphq 10 * 1 / 10 == 11 * 1 / 11
        docs = [(Document(1, ("both",)), 0), (Document(2, ("both",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        assert word_score("both", stats) == pytest.approx(0.0, abs=1e-15)

    def test_degenerate_corpus(self):
        stats = build_corpus_stats([(Document(1, ("a",)), 0)], policy=None)
        with pytest.raises(DegenerateCorpusError):
            word_score("a", stats)

    def test_brute_force_oracle_random_corpora(self, rng):
        vocab = [f"w{i}" for i in range(30)]
        for _ in range(25):
            n_docs = 10
            phqs = [int(rng.integers(0, 25)) for _ in range(n_docs)]
            # force both classes
            phqs[0] = int(rng.integers(0, 10))
            phqs[1] = int(rng.integers(10, 25))
            token_docs = [
                [vocab[int(rng.integers(0, len(vocab)))] for _ in range(int(rng.integers(3, 40)))]
                for _ in range(n_docs)
            ]
            docs = _docs_from_tokens(token_docs)
            stats = build_corpus_stats(list(zip(docs, phqs)), policy=None)
            for word in vocab[::3]:
                expected = brute_force_word_score(word, token_docs, phqs)
                assert word_score(word, stats) == pytest.approx(expected, abs=1e-9)

    def test_linear_in_tf(self):
        token_docs = [["a", "a", "b"], ["a", "c"], ["c", "c"]]
        phqs = [3, 12, 20]
        docs = _docs_from_tokens(token_docs)
        stats = build_corpus_stats(list(zip(docs, phqs)), policy=None)
        doubled = _docs_from_tokens([t + t for t in token_docs])
        stats2 = build_corpus_stats(list(zip(doubled, phqs)), policy=None)
        for word in ("a", "b", "c"):
            assert word_score(word, stats2) == pytest.approx(2 * word_score(word, stats))

    def test_sign_properties(self, rng):
        token_docs = [["only-dep"], ["only-non"], ["filler"]]
        phqs = [15, 2, 8]
        docs = _docs_from_tokens(token_docs)
        stats = build_corpus_stats(list(zip(docs, phqs)), policy=None)
        assert word_score("only-dep", stats) < 0
        assert word_score("only-non", stats) > 0


class TestCandidateWords:
    def test_small_vocab_returns_all(self):
        docs = [(Document(1, ("a b c",)), 0), (Document(2, ("d e",)), 15)]
        stats = build_corpus_stats(docs, policy=None)
        assert len(candidate_words(stats, 2000)) == 5

    def test_k1_is_argmin(self):
        docs = [(Document(1, ("pos pos",)), 0), (Document(2, ("neg neg neg",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        [entry] = candidate_words(stats, 1)
        assert entry.word == "neg"
        ranked = ranked_word_scores(stats)
        assert entry.ws == min(e.ws for e in ranked)

    def test_sorted_ascending_stable(self):
        docs = [(Document(1, ("x y",)), 0), (Document(2, ("p q",)), 15)]
        stats = build_corpus_stats(docs, policy=None)
        first = candidate_words(stats, 10)
        second = candidate_words(stats, 10)
        assert first == second
        assert [e.ws for e in first] == sorted(e.ws for e in first)
        # p and q tie: lexicographic order
        assert [e.word for e in first[:2]] == ["p", "q"]

    def test_stopwords_filtered_pronouns_retained(self):
        docs = [
            (Document(1, ("i am the happy",)), 0),
            (Document(2, ("i am the sad",)), 20),
        ]
        stats = build_corpus_stats(docs)  # default policy
        words = {e.word for e in candidate_words(stats, 100)}
        assert "i" in words
        assert "am" not in words and "the" not in words


class TestAssignCategory:
    def test_dominance(self):
        # candidate identical to one treatment word, orthogonal to everything else
        e = np.eye(8)
        vectors = {
            "word": e[0],
            "t1": e[0], "t2": e[1],
            "s1": e[2], "s2": e[3],
            "n1": e[4], "n2": e[5],
        }
        alerting = AlertingLexicon({
            Category.SYMPTOMS: ("s1", "s2"),
            Category.TREATMENT: ("t1", "t2"),
            Category.NEGATIVE_WORDS: ("n1", "n2"),
            Category.RELIGIOUS_INVOLVEMENT: (),
            Category.PRONOUNS: (),
        })
        cat, score = assign_category("word", alerting, FileBackend(vectors))
        assert cat is Category.TREATMENT
        assert score == pytest.approx(0.5)

    def test_tie_breaks_to_symptoms(self):
        e = np.eye(8)
        vectors = {"word": e[0], "s": e[1], "t": e[2], "n": e[3]}
        alerting = AlertingLexicon({
            Category.SYMPTOMS: ("s",),
            Category.TREATMENT: ("t",),
            Category.NEGATIVE_WORDS: ("n",),
            Category.RELIGIOUS_INVOLVEMENT: (),
            Category.PRONOUNS: (),
        })
        cat, score = assign_category("word", alerting, FileBackend(vectors))
        assert cat is Category.SYMPTOMS
        assert score == pytest.approx(0.0)

    def test_brute_force_agreement(self, rng):
        words = [f"cand{i}" for i in range(20)]
        backend = HashedBackend(dim=64, seed=2)
        members = {
            Category.SYMPTOMS: tuple(f"sym{i}" for i in range(6)),
            Category.TREATMENT: tuple(f"treat{i}" for i in range(4)),
            Category.NEGATIVE_WORDS: tuple(f"neg{i}" for i in range(8)),
            Category.RELIGIOUS_INVOLVEMENT: ("rel0",),
            Category.PRONOUNS: ("i",),
        }
        alerting = AlertingLexicon(members)
        for word in words:
            got_cat, got_score = assign_category(word, alerting, backend)
            wv = backend.embed(word)
            best = None
            for cat in SCORED_CATEGORIES:
                sims = [cosine_sim(wv, backend.embed(m)) for m in members[cat]]
                mean = sum(sims) / len(sims)
                if best is None or mean > best[1]:
                    best = (cat, mean)
            assert got_cat is best[0]
            assert got_score == pytest.approx(best[1])

    def test_scale_invariance(self):
        class Scaled:
            def __init__(self, inner, factor):
                self.inner, self.factor = inner, factor
                self.dim, self.name = inner.dim, "scaled"

            def embed(self, text):
                return self.factor * self.inner.embed(text)

        base = HashedBackend(dim=32, seed=4)
        alerting = default_alerting_lexicon()
        for word in ("gloom", "pills", "dread"):
            cat1, s1 = assign_category(word, alerting, base)
            cat2, s2 = assign_category(word, alerting, Scaled(base, 17.0))
            assert cat1 is cat2
            assert s1 == pytest.approx(s2)

    def test_sum_aggregate_available(self):
        backend = HashedBackend(dim=32, seed=4)
        alerting = default_alerting_lexicon()
        cat, score = assign_category("dread", alerting, backend, aggregate="sum")
        assert cat in SCORED_CATEGORIES
        assert math.isfinite(score)


class TestBuildLexicon:
    def test_k1_single_row(self, backend64):
        docs = [(Document(1, ("calm",)), 0), (Document(2, ("gloom gloom",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        rows = build_lexicon(stats, default_alerting_lexicon(), backend64, k=1)
        assert len(rows) == 1
        assert rows[0].word == "gloom"
        assert rows[0].category in SCORED_CATEGORIES

    def test_rows_match_assign_category(self, backend64):
        docs = [
            (Document(1, ("calm water walk",)), 2),
            (Document(2, ("gloom dread ache",)), 18),
        ]
        stats = build_corpus_stats(docs, policy=None)
        rows = build_lexicon(stats, default_alerting_lexicon(), backend64, k=10)
        for row in rows:
            cat, score = assign_category(row.word, default_alerting_lexicon(), backend64)
            assert row.category is cat
            assert row.similarity == pytest.approx(score)

    def test_sorted_by_abs_ws_within_category(self, backend64):
        docs = [
            (Document(1, ("calm water walk sun",)), 0),
            (Document(2, ("gloom gloom dread ache ache ache",)), 20),
        ]
        stats = build_corpus_stats(docs, policy=None)
        rows = build_lexicon(stats, default_alerting_lexicon(), backend64, k=20)
        by_cat = {}
        for row in rows:
            by_cat.setdefault(row.category, []).append(abs(row.ws))
        for values in by_cat.values():
            assert values == sorted(values, reverse=True)


class TestCoverage:
    def test_empty_lexicon_vacuous(self):
        assert coverage([], [Summary(("a b",), 2, 1)]) == 1.0

    def test_full_containment(self, backend64):
        docs = [(Document(1, ("calm",)), 0), (Document(2, ("gloom",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        rows = build_lexicon(stats, default_alerting_lexicon(), backend64, k=2)
        summaries = [Summary(("gloom calm",), 2, 1)]
        assert coverage(rows, summaries) == 1.0

    def test_partial(self, backend64):
        docs = [(Document(1, ("calm sun",)), 0), (Document(2, ("gloom dread",)), 20)]
        stats = build_corpus_stats(docs, policy=None)
        rows = build_lexicon(stats, default_alerting_lexicon(), backend64, k=4)
        summaries = [Summary(("gloom calm",), 2, 1)]
        assert coverage(rows, summaries) == pytest.approx(0.5)


class TestTopWordsReport:
    def _stats(self):
        docs = [
            (Document(1, ("up1 up2 shared",)), 0),
            (Document(2, ("down1 down2 shared",)), 20),
        ]
        return build_corpus_stats(docs, policy=None)

    def test_m_zero_empty(self):
        assert top_words_report(self._stats(), 0) == []

    def test_m_covers_vocab(self):
        report = top_words_report(self._stats(), 50)
        words = [e.word for e in report]
        assert sorted(words) == ["down1", "down2", "shared", "up1", "up2"]
        assert len(words) == len(set(words))

    def test_extremes_ordered(self):
        report = top_words_report(self._stats(), 2)
        assert {report[0].word, report[1].word} == {"down1", "down2"}
        assert {report[2].word, report[3].word} == {"up1", "up2"}
        assert report[0].ws <= report[1].ws
        assert report[2].ws >= report[3].ws


class TestTopWordsOnSyntheticCorpus:
    def test_pronoun_i_among_lowest_ws(self, tmp_path):
        """First-person-heavy depressed sessions push 'i' into the lowest-WS extreme."""
        from depsum.corpus import Split, build_document, load_labels, parse_transcript
        from depsum.synth import generate_corpus

        generate_corpus(tmp_path, seed=21, n_sessions=40)
        meta = {}
        for split in Split:
            with (tmp_path / f"labels_{split.value}.csv").open() as fh:
                meta.update(load_labels(fh, split))
        docs = []
        for path in sorted((tmp_path / "transcripts").glob("*_TRANSCRIPT.tsv")):
            session_id = int(path.name.split("_")[0])
            with path.open() as fh:
                docs.append(build_document(session_id, parse_transcript(fh)))
        stats = build_corpus_stats([(d, meta[d.session_id].phq8_score) for d in docs])
        lowest_words = {e.word for e in ranked_word_scores(stats)[:30]}
        assert "i" in lowest_words


class TestAlertingLexicon:
    def test_default_loads_all_categories(self):
        alerting = default_alerting_lexicon()
        for cat in SCORED_CATEGORIES:
            assert len(alerting.categories[cat]) >= 20
        assert "god" in alerting.categories[Category.RELIGIOUS_INVOLVEMENT]
        assert "i" in alerting.categories[Category.PRONOUNS]

    def test_scored_categories_must_be_non_empty(self):
        with pytest.raises(ValueError):
            AlertingLexicon({cat: () for cat in Category})

    def test_load_from_csv(self):
        csv_text = "category,word\nsymptoms,Pain\ntreatment,pills\nnegative_words,dark\n"
        alerting = load_alerting_lexicon(io.StringIO(csv_text))
        assert alerting.categories[Category.SYMPTOMS] == ("pain",)
