"""Tweet-style tokenization, stopword filtering, and n-gram generation.

The tokenizer is the single point of truth for token counting: the 512-token
summary budget and the lexicon statistics both count with it, so no subword
vocabulary ever enters the picture.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Iterable

from .errors import InvalidNError

# Ordered alternation: hashtags/mentions, dotted abbreviations ("u.s.a."),
# numbers with decimal or thousands separators, then words with internal
# apostrophes or hyphens (contractions stay whole). Bare punctuation and
# ellipses never match and are dropped.
_TOKEN_RE = re.compile(
    r"[#@][a-z0-9_]+"
    r"|(?:[a-z]\.){2,}"
    r"|\d+(?:[.,]\d+)*"
    r"|[a-z0-9]+(?:['’\-][a-z0-9]+)*"
)

RETAINED_PRONOUNS = frozenset({"i", "me", "myself", "my", "mine"})


def tweet_tokenize(text: str) -> list[str]:
    """Lowercase and split ``text`` into tweet-style tokens.

    Tokens never contain whitespace and are never empty, so joining a token
    list with single spaces and re-tokenizing is the identity.
    """
    return _TOKEN_RE.findall(text.lower())


def count_tokens(text: str) -> int:
    """Token count of ``text`` under :func:`tweet_tokenize`."""
    return len(tweet_tokenize(text))


@dataclass(frozen=True)
class StopwordPolicy:
    """A base stoplist with a closed set of retained first-person pronouns."""

    base_stopwords: frozenset[str]
    retained_pronouns: frozenset[str] = RETAINED_PRONOUNS

    @property
    def effective(self) -> frozenset[str]:
        """Stopwords actually removed: the base list minus retained pronouns."""
        return self.base_stopwords - self.retained_pronouns


def load_stopwords(lines: Iterable[str]) -> frozenset[str]:
    """Parse a stopword file: one token per line, ``#`` comments allowed."""
    words = set()
    for raw in lines:
        line = raw.strip()
        if line and not line.startswith("#"):
            words.add(line.lower())
    return frozenset(words)


@lru_cache(maxsize=1)
def default_policy() -> StopwordPolicy:
    """Policy backed by the stopword list shipped with the package."""
    text = (resources.files("depsum") / "data" / "stopwords.txt").read_text("utf-8")
    return StopwordPolicy(base_stopwords=load_stopwords(text.splitlines()))


def filter_stopwords(tokens: Iterable[str], policy: StopwordPolicy | None = None) -> list[str]:
    """Drop stopwords, keeping retained pronouns and the original order."""
    if policy is None:
        policy = default_policy()
    effective = policy.effective
    return [t for t in tokens if t not in effective]


def ngrams(tokens: list[str], n: int) -> list[str]:
    """All contiguous ``n``-token windows joined by single spaces.

    Deduplicated preserving first occurrence; inputs shorter than ``n``
    yield an empty list.
    """
    if n < 1:
        raise InvalidNError(f"n-gram size must be >= 1, got {n}")
    seen: dict[str, None] = {}
    for i in range(len(tokens) - n + 1):
        seen.setdefault(" ".join(tokens[i : i + n]), None)
    return list(seen)
