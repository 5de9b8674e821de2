"""Word statistics, TF-IDF, the RPHQ remap, Word Score, and lexicon assembly.

Word Score weights a term's per-document frequencies by each document's RPHQ
value (positive for non-depressed, negative for depressed, magnitude growing
with severity), normalized by corpus-wide class totals. Negative WS marks
depression-associated words; the k lowest-WS words form the candidate pool
that gets assigned to alerting-word categories by embedding similarity.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import IO, Iterable, Mapping, Sequence

from .corpus import Document
from .embed import EmbeddingBackend, cosine_sim
from .errors import DegenerateCorpusError, OutOfRangeError, TermAbsentError
from .summarize import Summary
from .tokenize import StopwordPolicy, default_policy, filter_stopwords, tweet_tokenize

DEFAULT_CANDIDATE_POOL = 2000


class Category(Enum):
    SYMPTOMS = "symptoms"
    TREATMENT = "treatment"
    NEGATIVE_WORDS = "negative_words"
    RELIGIOUS_INVOLVEMENT = "religious_involvement"
    PRONOUNS = "pronouns"


# Fixed assignment order; the last two categories are comparison-only and
# never receive candidates.
SCORED_CATEGORIES = (Category.SYMPTOMS, Category.TREATMENT, Category.NEGATIVE_WORDS)
COMPARISON_CATEGORIES = (Category.RELIGIOUS_INVOLVEMENT, Category.PRONOUNS)


def rphq(phq: int) -> int:
    """Remap a PHQ-8 score: 0..9 -> 10..1, 10..24 -> -1..-15."""
    if not 0 <= phq <= 24:
        raise OutOfRangeError(f"PHQ-8 score must be in 0..24, got {phq}")
    return 10 - phq if phq <= 9 else 9 - phq


@dataclass
class CorpusStats:
    """Per-document term frequencies plus document frequencies and RPHQ values.

    Token counting applies the tweet tokenizer and (unless policy is None)
    the stopword inventory with pronoun retention, so the vocabulary here is
    already the filtered one used by candidate selection.
    """

    tf: dict[int, Counter]
    df: Counter
    n_docs: int
    rphq_by_doc: dict[int, int]

    @property
    def vocabulary(self) -> list[str]:
        return sorted(self.df)

    def class_totals(self) -> tuple[int, int]:
        """(d_plus, d_minus): corpus-wide RPHQ totals per class, both positive."""
        d_plus = sum(v for v in self.rphq_by_doc.values() if v > 0)
        d_minus = -sum(v for v in self.rphq_by_doc.values() if v < 0)
        return d_plus, d_minus


_USE_DEFAULT_POLICY = object()


def build_corpus_stats(
    docs: Sequence[tuple[Document, int]],
    policy: StopwordPolicy | None = _USE_DEFAULT_POLICY,  # type: ignore[assignment]
) -> CorpusStats:
    """Count terms over (document, phq8) pairs.

    Pass policy=None for raw, unfiltered counts.
    """
    if policy is _USE_DEFAULT_POLICY:
        policy = default_policy()
    tf: dict[int, Counter] = {}
    df: Counter = Counter()
    rphq_by_doc: dict[int, int] = {}
    for doc, phq in docs:
        tokens = tweet_tokenize(doc.full_text)
        if policy is not None:
            tokens = filter_stopwords(tokens, policy)
        counts = Counter(tokens)
        tf[doc.session_id] = counts
        df.update(counts.keys())
        rphq_by_doc[doc.session_id] = rphq(phq)
    return CorpusStats(tf=tf, df=df, n_docs=len(tf), rphq_by_doc=rphq_by_doc)


def tf_idf(term: str, session_id: int, stats: CorpusStats) -> float:
    """tf * ln(N / df). Natural log; the base only rescales rankings."""
    tf = stats.tf[session_id][term]
    if tf == 0:
        return 0.0
    df = stats.df[term]
    if df == 0:
        raise TermAbsentError(f"term {term!r} has tf > 0 but df = 0")
    return tf * math.log(stats.n_docs / df)


def word_score(term: str, stats: CorpusStats) -> float:
    """RPHQ-weighted frequency score; negative marks depression-associated words.

    WS = sum over positive-RPHQ docs of rphq * tf, divided by the corpus-wide
    positive-RPHQ total, plus the mirrored negative-class term divided by the
    (negated) negative-RPHQ total. Documents not containing the term
    contribute zero, so the sums effectively run over documents that do.
    """
    d_plus, d_minus = stats.class_totals()
    if d_plus == 0 or d_minus == 0:
        raise DegenerateCorpusError("word_score needs both classes present in the corpus")
    pos = 0.0
    neg = 0.0
    for session_id in sorted(stats.tf):
        count = stats.tf[session_id][term]
        if count == 0:
            continue
        r = stats.rphq_by_doc[session_id]
        if r > 0:
            pos += r * count
        else:
            neg += r * count
    return pos / d_plus + neg / d_minus


@dataclass(frozen=True)
class WordScoreEntry:
    word: str
    ws: float


def ranked_word_scores(stats: CorpusStats) -> list[WordScoreEntry]:
    """Every vocabulary word scored, ascending by WS (ties lexicographic)."""
    d_plus, d_minus = stats.class_totals()
    if d_plus == 0 or d_minus == 0:
        raise DegenerateCorpusError("word scores need both classes present in the corpus")
    pos: dict[str, float] = {}
    neg: dict[str, float] = {}
    for session_id in sorted(stats.tf):
        r = stats.rphq_by_doc[session_id]
        bucket = pos if r > 0 else neg
        for term, count in stats.tf[session_id].items():
            bucket[term] = bucket.get(term, 0.0) + r * count
    entries = [
        WordScoreEntry(word, pos.get(word, 0.0) / d_plus + neg.get(word, 0.0) / d_minus)
        for word in stats.vocabulary
    ]
    entries.sort(key=lambda e: (e.ws, e.word))
    return entries


def candidate_words(stats: CorpusStats, k: int = DEFAULT_CANDIDATE_POOL) -> list[WordScoreEntry]:
    """The k lowest-WS (most depression-associated) vocabulary words, ascending."""
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    return ranked_word_scores(stats)[:k]


def top_words_report(stats: CorpusStats, m: int) -> list[WordScoreEntry]:
    """The m lowest-WS entries (ascending) then the m highest (descending).

    Deduplicated, so m at or above the vocabulary size returns each word once.
    """
    ranked = ranked_word_scores(stats)
    lowest = ranked[: max(m, 0)]
    highest = ranked[::-1][: max(m, 0)]
    seen = {e.word for e in lowest}
    return lowest + [e for e in highest if e.word not in seen]


@dataclass(frozen=True)
class AlertingLexicon:
    """Alerting-word inventory grouped by category (case-normalized)."""

    categories: Mapping[Category, tuple[str, ...]]

    def __post_init__(self) -> None:
        for cat in SCORED_CATEGORIES:
            if not self.categories.get(cat):
                raise ValueError(f"alerting lexicon category {cat.value} must be non-empty")


def load_alerting_lexicon(stream: Iterable[str]) -> AlertingLexicon:
    """Read the `category,word` CSV into an AlertingLexicon."""
    grouped: dict[Category, list[str]] = {cat: [] for cat in Category}
    reader = csv.DictReader(stream)
    for row in reader:
        cat = Category(row["category"].strip())
        grouped[cat].append(row["word"].strip().lower())
    return AlertingLexicon({cat: tuple(words) for cat, words in grouped.items()})


@lru_cache(maxsize=1)
def default_alerting_lexicon() -> AlertingLexicon:
    text = (resources.files("depsum") / "data" / "alerting_words.csv").read_text("utf-8")
    return load_alerting_lexicon(text.splitlines())


def assign_category(
    word: str,
    alerting: AlertingLexicon,
    backend: EmbeddingBackend,
    aggregate: str = "mean",
) -> tuple[Category, float]:
    """Best-matching scored category for a word, by embedding similarity.

    Per category the cosine similarities between the word and every member
    are averaged (aggregate="sum" keeps the raw sum instead, which biases
    toward large categories). Ties resolve in the fixed category order.
    """
    if not word:
        raise ValueError("assign_category needs a non-empty word")
    if aggregate not in ("mean", "sum"):
        raise ValueError(f"aggregate must be 'mean' or 'sum', got {aggregate!r}")
    word_vec = backend.embed(word)
    best_cat = SCORED_CATEGORIES[0]
    best_score = -math.inf
    for cat in SCORED_CATEGORIES:
        members = alerting.categories[cat]
        total = 0.0
        for member in members:
            total += cosine_sim(word_vec, backend.embed(member))
        score = total / len(members) if aggregate == "mean" else total
        if score > best_score:
            best_cat, best_score = cat, score
    return best_cat, best_score


@dataclass(frozen=True)
class DepressionLexiconRow:
    word: str
    ws: float
    category: Category
    similarity: float


def build_lexicon(
    stats: CorpusStats,
    alerting: AlertingLexicon,
    backend: EmbeddingBackend,
    k: int = DEFAULT_CANDIDATE_POOL,
    aggregate: str = "mean",
) -> list[DepressionLexiconRow]:
    """Candidate words assigned to categories, sorted by |WS| within category."""
    rows = [
        DepressionLexiconRow(e.word, e.ws, *assign_category(e.word, alerting, backend, aggregate))
        for e in candidate_words(stats, k)
    ]
    order = {cat: i for i, cat in enumerate(SCORED_CATEGORIES)}
    rows.sort(key=lambda r: (order[r.category], -abs(r.ws), r.word))
    return rows


def coverage(lexicon: Sequence[DepressionLexiconRow], summaries: Iterable[Summary]) -> float:
    """Fraction of lexicon words appearing as tokens in the summaries.

    An empty lexicon is vacuously covered (1.0).
    """
    if not lexicon:
        return 1.0
    summary_tokens: set[str] = set()
    for summary in summaries:
        for phrase in summary.phrases:
            summary_tokens.update(tweet_tokenize(phrase))
    hits = sum(1 for row in lexicon if row.word in summary_tokens)
    return hits / len(lexicon)


def write_lexicon_csv(out: IO[str], rows: Sequence[DepressionLexiconRow]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["word", "ws", "category", "similarity"])
    for row in rows:
        writer.writerow([row.word, repr(row.ws), row.category.value, repr(row.similarity)])


def write_wordscores_csv(out: IO[str], entries: Sequence[WordScoreEntry]) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(["word", "ws", "rank"])
    for rank, entry in enumerate(entries, start=1):
        writer.writerow([entry.word, repr(entry.ws), rank])
