"""Extractive summarization: chunking, candidate ranking, MMR, recombination.

A document is chunked to fit the encoder context, each chunk's deduplicated
n-grams are ranked by cosine similarity to the chunk embedding, a greedy
maximal-marginal-relevance pass diversifies each chunk's ranking, and the
per-chunk selections are recombined round-robin under the token budget.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import IO, Iterable, Iterator, Sequence, Union

import numpy as np

from .corpus import Document
from .embed import EmbeddingBackend, embed_token_seq
from .errors import DimMismatchError, EmptyCandidateSetError, InvalidNError, ZeroNormError
from .tokenize import count_tokens, ngrams, tweet_tokenize

DEFAULT_N = 7
DEFAULT_LAMBDA = 0.7
DEFAULT_BUDGET = 512
# Chunks stay below the 512 budget to leave headroom for encoder special
# tokens when real backends consume them.
CHUNK_MAX_TOKENS = 480
N_RANGE = (6, 9)

DocLike = Union[Document, str, Sequence[str]]


@dataclass(frozen=True)
class MmrParams:
    lam: float
    top_k: int

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must be in [0, 1], got {self.lam}")
        if self.top_k < 1:
            raise ValueError(f"top_k must be positive, got {self.top_k}")


@dataclass(frozen=True)
class CandidatePhrase:
    text: str
    n: int
    embedding: np.ndarray
    relevance: float


@dataclass(frozen=True)
class Summary:
    phrases: tuple[str, ...]
    token_count: int
    source_session: int


def _sentences_of(doc: DocLike) -> list[str]:
    if isinstance(doc, Document):
        return list(doc.sentences)
    if isinstance(doc, str):
        return [doc]
    return list(doc)


def chunk_document(doc: DocLike, max_tokens: int) -> list[str]:
    """Partition the document's token sequence into chunks of <= max_tokens.

    Boundaries fall at sentence boundaries when a sentence fits, otherwise a
    long sentence is split at token boundaries (the split pieces are
    space-joined tokens, which re-tokenize to themselves).
    """
    if max_tokens < 1:
        raise ValueError(f"max_tokens must be >= 1, got {max_tokens}")
    chunks: list[str] = []
    cur: list[str] = []
    cur_tokens = 0

    def flush() -> None:
        nonlocal cur, cur_tokens
        if cur:
            chunks.append(" ".join(cur))
            cur = []
            cur_tokens = 0

    for sent in _sentences_of(doc):
        t = count_tokens(sent)
        if t == 0:
            # No lexical content; keep the text but it costs nothing.
            cur.append(sent)
            continue
        if t > max_tokens:
            flush()
            toks = tweet_tokenize(sent)
            for i in range(0, len(toks), max_tokens):
                window = toks[i : i + max_tokens]
                if len(window) == max_tokens:
                    chunks.append(" ".join(window))
                else:
                    cur = [" ".join(window)]
                    cur_tokens = len(window)
        elif cur_tokens + t <= max_tokens:
            cur.append(sent)
            cur_tokens += t
        else:
            flush()
            cur = [sent]
            cur_tokens = t
    flush()
    return chunks


def rank_candidates(chunk_text: str, n: int, backend: EmbeddingBackend) -> list[CandidatePhrase]:
    """Deduplicated n-grams of the chunk, ranked by similarity to the chunk.

    Sorted by relevance descending; ties keep first-occurrence order.
    """
    if n < 1:
        raise InvalidNError(f"n-gram size must be >= 1, got {n}")
    tokens = tweet_tokenize(chunk_text)
    if len(tokens) < n:
        return []
    windows: dict[tuple[str, ...], None] = {}
    for i in range(len(tokens) - n + 1):
        windows.setdefault(tuple(tokens[i : i + n]), None)
    chunk_vec = np.asarray(backend.embed(chunk_text), dtype=np.float64)
    embs = np.stack([embed_token_seq(backend, list(w)) for w in windows])
    norms = np.linalg.norm(embs, axis=1)
    doc_norm = float(np.linalg.norm(chunk_vec))
    if doc_norm == 0.0 or np.any(norms == 0.0):
        raise ZeroNormError("zero-magnitude embedding while ranking candidates")
    relevances = (embs @ chunk_vec) / (norms * doc_norm)
    candidates = [
        CandidatePhrase(" ".join(w), n, embs[i], float(relevances[i]))
        for i, w in enumerate(windows)
    ]
    candidates.sort(key=lambda c: -c.relevance)  # stable: ties keep occurrence order
    return candidates


def _minmax(values: np.ndarray) -> np.ndarray:
    lo = values.min()
    hi = values.max()
    if hi == lo:
        return np.full(values.shape, 0.5)
    return (values - lo) / (hi - lo)


def mmr_order(
    relevances: np.ndarray, pairwise: np.ndarray, lam: float, top_k: int
) -> list[int]:
    """Greedy MMR over raw similarity inputs; returns selected indices in order.

    Both the relevance scores and the pairwise similarities are min-max
    normalized within the candidate set (pairwise over off-diagonal entries;
    an all-equal set degenerates to 0.5). Each step picks the argmax of
    lam * rel_hat[i] - (1 - lam) * max_{j selected} sim_hat[i, j], with the
    max over an empty selection defined as 0. Ties break toward higher raw
    relevance, then earlier list position.
    """
    relevances = np.asarray(relevances, dtype=np.float64)
    n = relevances.shape[0]
    rel_hat = _minmax(relevances)
    if n > 1:
        off_diag = pairwise[~np.eye(n, dtype=bool)]
        lo, hi = off_diag.min(), off_diag.max()
        if hi == lo:
            sim_hat = np.full((n, n), 0.5)
        else:
            sim_hat = (pairwise - lo) / (hi - lo)
    else:
        sim_hat = np.zeros((1, 1))

    selected: list[int] = []
    # running max of sim_hat[i, j] over selected j; 0 while nothing is selected
    penalty = np.zeros(n)
    available = np.ones(n, dtype=bool)
    for _ in range(min(top_k, n)):
        scores = np.where(available, lam * rel_hat - (1.0 - lam) * penalty, -np.inf)
        best_score = scores.max()
        # ties break toward higher raw relevance, then earlier position
        pick = int(np.argmax(np.where(scores == best_score, relevances, -np.inf)))
        selected.append(pick)
        available[pick] = False
        penalty = np.maximum(penalty, sim_hat[:, pick])
    return selected


def mmr_select(
    candidates: Sequence[CandidatePhrase], doc_vec: np.ndarray, params: MmrParams
) -> list[CandidatePhrase]:
    """Diversified selection of min(top_k, len(candidates)) phrases."""
    if not candidates:
        raise EmptyCandidateSetError("MMR selection needs at least one candidate")
    embs = np.stack([c.embedding for c in candidates]).astype(np.float64)
    norms = np.linalg.norm(embs, axis=1)
    doc_vec = np.asarray(doc_vec, dtype=np.float64)
    doc_norm = float(np.linalg.norm(doc_vec))
    if doc_norm == 0.0 or np.any(norms == 0.0):
        raise ZeroNormError("zero-magnitude embedding in MMR selection")
    if embs.shape[1] != doc_vec.shape[0]:
        raise DimMismatchError(
            f"candidate dim {embs.shape[1]} vs document dim {doc_vec.shape[0]}"
        )
    relevances = (embs @ doc_vec) / (norms * doc_norm)
    unit = embs / norms[:, None]
    pairwise = unit @ unit.T
    order = mmr_order(relevances, pairwise, params.lam, params.top_k)
    return [candidates[i] for i in order]


def per_chunk_top_k(budget: int, n: int, num_chunks: int) -> int:
    """Slight over-generation per chunk; the budget filter truncates later."""
    return math.ceil(budget / (n * num_chunks)) + 2


def summarize_document(
    doc: DocLike,
    backend: EmbeddingBackend,
    *,
    n: int = DEFAULT_N,
    lam: float = DEFAULT_LAMBDA,
    budget: int = DEFAULT_BUDGET,
    chunk_max_tokens: int = CHUNK_MAX_TOKENS,
) -> Summary:
    """Chunk, rank, MMR-diversify, and recombine under the token budget.

    Per-chunk selections are interleaved round-robin in chunk order, stopping
    at the first phrase that would push the token count past the budget.
    Documents with no candidate anywhere (every chunk shorter than n) yield
    an empty summary.
    """
    if budget < n:
        raise ValueError(f"budget {budget} smaller than phrase size {n}")
    session_id = doc.session_id if isinstance(doc, Document) else -1
    chunks = chunk_document(doc, chunk_max_tokens)
    if not chunks:
        return Summary((), 0, session_id)

    top_k = per_chunk_top_k(budget, n, len(chunks))
    selections: list[list[str]] = []
    for chunk in chunks:
        candidates = rank_candidates(chunk, n, backend)
        if not candidates:
            selections.append([])
            continue
        picked = mmr_select(candidates, backend.embed(chunk), MmrParams(lam, top_k))
        selections.append([c.text for c in picked])

    phrases: list[str] = []
    token_count = 0
    rounds = max((len(s) for s in selections), default=0)
    for r in range(rounds):
        for sel in selections:
            if r >= len(sel):
                continue
            cost = count_tokens(sel[r])
            if token_count + cost > budget:
                return Summary(tuple(phrases), token_count, session_id)
            phrases.append(sel[r])
            token_count += cost
    return Summary(tuple(phrases), token_count, session_id)


def texts_for_document(
    doc: DocLike, n: int = DEFAULT_N, chunk_max_tokens: int = CHUNK_MAX_TOKENS
) -> Iterator[str]:
    """Every text a summarization run will ask the backend to embed."""
    for chunk in chunk_document(doc, chunk_max_tokens):
        yield chunk
        yield from ngrams(tweet_tokenize(chunk), n)


# summaries JSONL: {"id": int, "phrases": [str], "token_count": int}

def write_summaries(out: IO[str], summaries: Iterable[Summary]) -> int:
    count = 0
    for s in sorted(summaries, key=lambda s: s.source_session):
        record = {"id": s.source_session, "phrases": list(s.phrases), "token_count": s.token_count}
        out.write(json.dumps(record, ensure_ascii=False) + "\n")
        count += 1
    return count


def read_summaries(stream: Iterable[str]) -> list[Summary]:
    summaries = []
    for raw in stream:
        line = raw.strip()
        if not line:
            continue
        record = json.loads(line)
        summaries.append(
            Summary(tuple(record["phrases"]), int(record["token_count"]), int(record["id"]))
        )
    return summaries
