"""Embedding backends, pooling, and similarity math.

Real encoders never run in-process: their vectors arrive through the JSONL
file exchange (:func:`load_vectors` / :func:`save_vectors`). The hashed
backend is the deterministic reference used for tests and the synthetic
end-to-end run.
"""

from __future__ import annotations

import hashlib
import json
import math
from typing import IO, Iterable, Mapping, Protocol

import numpy as np

from .errors import (
    DimMismatchError,
    DuplicateKeyError,
    EmptyMatrixError,
    MalformedLineError,
    MissingVectorError,
    ZeroNormError,
)
from .tokenize import tweet_tokenize

DEFAULT_DIM = 768


class EmbeddingBackend(Protocol):
    """Contract: a named, fixed-dimension, deterministic text -> vector map."""

    name: str
    dim: int

    def embed(self, text: str) -> np.ndarray: ...


def mean_pool(matrix: np.ndarray) -> np.ndarray:
    """Component-wise mean over the rows of a (sequence, dim) matrix."""
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] == 0:
        raise EmptyMatrixError(f"mean_pool needs a non-empty 2-d matrix, got shape {m.shape}")
    return m.mean(axis=0)


def cosine_sim(a: np.ndarray, b: np.ndarray) -> float:
    """a.b / (|a||b|). Raises on dimension mismatch or zero-magnitude input."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise DimMismatchError(f"cosine_sim dims differ: {a.shape} vs {b.shape}")
    na = math.sqrt(float(a @ a))
    nb = math.sqrt(float(b @ b))
    if na == 0.0 or nb == 0.0:
        raise ZeroNormError("cosine_sim undefined for zero-magnitude vectors")
    return float(a @ b) / (na * nb)


def _token_slot(token: str, dim: int, seed: int) -> tuple[int, float]:
    """Stable (bucket, sign) for a token: blake2b keyed by the seed."""
    digest = hashlib.blake2b(
        token.encode("utf-8"), digest_size=12, key=str(seed).encode("ascii")
    ).digest()
    bucket = int.from_bytes(digest[:8], "little") % dim
    sign = 1.0 if digest[8] & 1 == 0 else -1.0
    return bucket, sign


def hashed_embed(text: str, dim: int = DEFAULT_DIM, seed: int = 0) -> np.ndarray:
    """Signed feature-hash of the token multiset, L2-normalized.

    Order-insensitive by construction. An empty token list maps to the first
    basis vector so downstream cosine similarity never sees a zero norm.
    """
    if dim < 8:
        raise ValueError(f"hashed_embed needs dim >= 8, got {dim}")
    vec = np.zeros(dim, dtype=np.float64)
    tokens = tweet_tokenize(text)
    if not tokens:
        vec[0] = 1.0
        return vec
    for token in tokens:
        bucket, sign = _token_slot(token, dim, seed)
        vec[bucket] += sign
    norm = math.sqrt(float(vec @ vec))
    if norm == 0.0:
        # Signed counts can cancel exactly; fall back to the basis vector.
        vec[0] = 1.0
        return vec
    return vec / norm


class HashedBackend:
    """Reference backend: deterministic signed feature hashing."""

    def __init__(self, dim: int = DEFAULT_DIM, seed: int = 0):
        if dim < 8:
            raise ValueError(f"HashedBackend needs dim >= 8, got {dim}")
        self.dim = dim
        self.seed = seed
        self.name = f"hashed-d{dim}-s{seed}"
        self._slot_cache: dict[str, tuple[int, float]] = {}

    def _slot(self, token: str) -> tuple[int, float]:
        slot = self._slot_cache.get(token)
        if slot is None:
            slot = _token_slot(token, self.dim, self.seed)
            self._slot_cache[token] = slot
        return slot

    def embed(self, text: str) -> np.ndarray:
        return self.embed_tokens(tweet_tokenize(text))

    def embed_tokens(self, tokens: list[str]) -> np.ndarray:
        """Embed a pre-tokenized multiset; equals embed(" ".join(tokens))."""
        vec = np.zeros(self.dim, dtype=np.float64)
        if not tokens:
            vec[0] = 1.0
            return vec
        for token in tokens:
            bucket, sign = self._slot(token)
            vec[bucket] += sign
        norm = math.sqrt(float(vec @ vec))
        if norm == 0.0:
            vec[0] = 1.0
            return vec
        return vec / norm


class FileBackend:
    """Backend over externally computed vectors, keyed by the exact text."""

    def __init__(self, vectors: Mapping[str, np.ndarray], name: str = "file"):
        if not vectors:
            raise MissingVectorError("file backend needs at least one vector")
        dims = {v.shape[0] for v in vectors.values()}
        if len(dims) != 1:
            raise DimMismatchError(f"file backend vectors have mixed dims: {sorted(dims)}")
        self._vectors = dict(vectors)
        self.dim = dims.pop()
        self.name = name

    def embed(self, text: str) -> np.ndarray:
        try:
            return self._vectors[text]
        except KeyError:
            raise MissingVectorError(f"no vector for text {text[:60]!r}")


def load_vectors(stream: Iterable[str]) -> dict[str, np.ndarray]:
    """Read a `{"key":..., "vector":[...]}` JSONL stream into a map."""
    vectors: dict[str, np.ndarray] = {}
    dim: int | None = None
    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line:
            continue
        try:
            record = json.loads(line)
            key = record["key"]
            values = record["vector"]
        except (json.JSONDecodeError, KeyError, TypeError):
            raise MalformedLineError(f"vectors line {lineno} is not a valid record")
        if not isinstance(key, str) or not isinstance(values, list) or not values:
            raise MalformedLineError(f"vectors line {lineno} has a bad key or vector")
        vec = np.asarray(values, dtype=np.float64)
        if vec.ndim != 1 or not np.all(np.isfinite(vec)):
            raise MalformedLineError(f"vectors line {lineno} holds non-finite values")
        if dim is None:
            dim = vec.shape[0]
        elif vec.shape[0] != dim:
            raise DimMismatchError(
                f"vectors line {lineno}: dim {vec.shape[0]} != first-seen dim {dim}"
            )
        if key in vectors:
            raise DuplicateKeyError(f"vectors line {lineno}: duplicate key {key!r}")
        vectors[key] = vec
    return vectors


def save_vectors(out: IO[str], vectors: Mapping[str, np.ndarray]) -> int:
    """Write vectors as JSONL, keys in sorted order. Round-trips bit-exactly."""
    count = 0
    for key in sorted(vectors):
        values = [float(v) for v in np.asarray(vectors[key], dtype=np.float64)]
        out.write(json.dumps({"key": key, "vector": values}) + "\n")
        count += 1
    return count


def embed_token_seq(backend: EmbeddingBackend, tokens: list[str]) -> np.ndarray:
    """Embed an already-tokenized window through any backend.

    Tokens are whitespace-free and the tokenizer is idempotent under
    re-joining, so this always equals embed(" ".join(tokens)); backends that
    expose embed_tokens just skip the redundant re-tokenization.
    """
    fn = getattr(backend, "embed_tokens", None)
    if fn is not None:
        return fn(tokens)
    return backend.embed(" ".join(tokens))


def write_texts(out: IO[str], texts: Iterable[str]) -> int:
    """Emit the texts-to-embed exchange file (`{"key":..., "text":...}` lines).

    Keys equal the texts themselves, deduplicated and sorted, so an external
    encoder can fill a vectors file that FileBackend consumes directly.
    """
    count = 0
    for text in sorted(set(texts)):
        out.write(json.dumps({"key": text, "text": text}, ensure_ascii=False) + "\n")
        count += 1
    return count
