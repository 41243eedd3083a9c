"""Software-engineering tokenizer.

Splits text on non-alphanumerics and camel/pascal/digit boundaries,
lowercases, drops English stopwords, and emits unigrams plus bigrams and
trigrams over adjacent surviving parts of the same whitespace-delimited word
(so compound identifiers like ``MailboxSyncEngine`` produce n-grams, but
n-grams never span whitespace).
"""

from __future__ import annotations

import re
from collections import Counter
from importlib import resources
from typing import NamedTuple

UNIGRAM = "unigram"
BIGRAM = "bigram"
TRIGRAM = "trigram"


class Token(NamedTuple):
    text: str
    arity: str


def _load_stopwords() -> frozenset[str]:
    data = resources.files("sociograph.data").joinpath("stopwords.txt").read_text("utf-8")
    return frozenset(w for w in data.split() if w)


STOPWORDS = _load_stopwords()

# Pieces of a word: acronym runs, capitalised runs, lowercase runs, digit
# runs, and (as a catch-all) runs of non-ASCII letters.
_PIECE_RE = re.compile(r"[A-Z]+(?![a-z])|[A-Z][a-z]*|[a-z]+|\d+|[^\W\dA-Za-z_]+")


def split_identifier(word: str) -> list[str]:
    """Lowercased pieces of one whitespace-delimited word, stopwords removed."""
    pieces = [p.lower() for p in _PIECE_RE.findall(word)]
    return [p for p in pieces if p not in STOPWORDS]


def tokenize(text: str) -> Counter[Token]:
    """Token multiset of a text per the pipeline in the module docstring."""
    tokens: Counter[Token] = Counter()
    for word in text.split():
        parts = split_identifier(word)
        count = len(parts)
        for i, part in enumerate(parts):
            tokens[Token(part, UNIGRAM)] += 1
            if i + 1 < count:
                tokens[Token(f"{part} {parts[i + 1]}", BIGRAM)] += 1
            if i + 2 < count:
                tokens[Token(f"{part} {parts[i + 1]} {parts[i + 2]}", TRIGRAM)] += 1
    return tokens
