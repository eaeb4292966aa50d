"""Text normalization and tokenization shared by every analysis stage."""

from __future__ import annotations

import re
from typing import NamedTuple

WORD = "word"
HASHTAG = "hashtag"
MENTION = "mention"

# Spanish accents only; anything else passes through untouched.
_ACCENTS = str.maketrans("áéíóúüñ", "aeiouun")

# A '#' or '@' always opens a new token, so this is equivalent to splitting
# on characters outside [a-z0-9_#@] and then cutting runs at each prefix.
_TOKEN_RE = re.compile(r"[#@]?[a-z0-9_]+")


class Token(NamedTuple):
    surface: str
    kind: str


def normalize_text(raw: str) -> str:
    """Lowercase and strip Spanish diacritics ("Ñuñoa" -> "nunoa")."""
    return raw.lower().translate(_ACCENTS)


def _kind(surface: str) -> str:
    head = surface[0]
    if head == "#":
        return HASHTAG
    if head == "@":
        return MENTION
    return WORD


def token_surfaces(text: str) -> list[str]:
    """Token surfaces of ``text`` in order, without kind tagging."""
    return _TOKEN_RE.findall(normalize_text(text))


def tokenize(text: str) -> list[Token]:
    """Split ``text`` into word, hashtag and mention tokens.

    A bare ``#`` or ``@`` with no word characters after it yields nothing.

    >>> [t.surface for t in tokenize("Voté en #Ñuñoa!")]
    ['vote', 'en', '#nunoa']
    """
    return [Token(s, _kind(s)) for s in token_surfaces(text)]


def hashtags_and_mentions(text: str) -> tuple[tuple[str, ...], tuple[str, ...]]:
    surfaces = token_surfaces(text)
    hashtags = tuple(s for s in surfaces if s[0] == "#")
    mentions = tuple(s for s in surfaces if s[0] == "@")
    return hashtags, mentions


def canonical_key(text: str) -> str:
    """Normalized, trimmed, whitespace-collapsed form used for lookups."""
    return " ".join(normalize_text(text).split())
