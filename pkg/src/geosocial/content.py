"""Per-region tweet volume and characteristic vocabulary.

Each region is one document made of the tweets its users authored. A
term's weight in region ``r`` is ``freq(w, r) * ln(|R| / df(w))`` where
``freq`` counts the region's tweets containing the term and ``df`` counts
regions whose tweets contain it at all.
"""

from __future__ import annotations

import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .corpus import Corpus
from .text import token_surfaces

MENTIONS = "mentions"
HASHTAGS = "hashtags"


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class BinnedSeries:
    region_id: int
    bin_width: int
    start: int
    counts: tuple[int, ...]

    def bin_starts(self) -> range:
        return range(self.start, self.start + self.bin_width * len(self.counts), self.bin_width)


@dataclass(frozen=True)
class RegionVector:
    region_id: int
    weights: dict[str, float]


@dataclass(frozen=True)
class TermStats:
    term: str
    tweet_count: int


def volume_series(
    corpus: Corpus,
    assignment: Mapping[int, int],
    bin_width: int = 300,
    regions: Optional[Iterable[int]] = None,
) -> list[BinnedSeries]:
    """Tweets (retweets included) per region per ``bin_width`` seconds.

    All series share the span of the geolocated tweets, with the start
    aligned to a multiple of ``bin_width``. Tweets by authors without a
    region are left out.
    """
    if bin_width <= 0:
        raise DomainError("bin_width must be positive")
    region_ids = sorted(set(regions) if regions is not None else set(assignment.values()))
    located = [(assignment[t.author_id], t.timestamp) for t in corpus.tweets if t.author_id in assignment]
    if not located:
        return [BinnedSeries(r, bin_width, 0, ()) for r in region_ids]
    start = min(ts for _, ts in located) // bin_width * bin_width
    n_bins = (max(ts for _, ts in located) - start) // bin_width + 1
    slot = {r: i for i, r in enumerate(region_ids)}
    grid = [[0] * n_bins for _ in region_ids]
    for region, ts in located:
        if region in slot:
            grid[slot[region]][(ts - start) // bin_width] += 1
    return [BinnedSeries(r, bin_width, start, tuple(row)) for r, row in zip(region_ids, grid)]


def normalize_series(counts: Sequence[float]) -> list[float]:
    """Divide by the series peak; an all-zero series stays zero."""
    peak = max(counts, default=0)
    if peak <= 0:
        return [0.0] * len(counts)
    return [c / peak for c in counts]


def aggregate_profiles(series: Sequence[Sequence[float]]) -> tuple[list[float], list[float]]:
    """Per-bin mean and population standard deviation across regions."""
    if not series:
        raise DomainError("need at least one series")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise DomainError(f"series lengths differ: {sorted(lengths)}")
    arr = np.asarray(series, dtype=float)
    return arr.mean(axis=0).tolist(), arr.std(axis=0).tolist()


def popular_terms(corpus: Corpus, kind: str, k: Optional[int] = None) -> list[TermStats]:
    """Most frequent mentions or hashtags, counted once per tweet."""
    if kind not in (MENTIONS, HASHTAGS):
        raise DomainError(f"kind must be {MENTIONS!r} or {HASHTAGS!r}")
    counts: Counter[str] = Counter()
    for t in corpus.tweets:
        counts.update(set(t.mentions if kind == MENTIONS else t.hashtags))
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    if k is not None:
        ranked = ranked[:k]
    return [TermStats(term, n) for term, n in ranked]


def region_term_frequencies(
    corpus: Corpus, assignment: Mapping[int, int]
) -> dict[int, Counter[str]]:
    """region -> term -> number of original tweets containing the term."""
    freq: dict[int, Counter[str]] = {}
    for t in corpus.tweets:
        if t.is_retweet:
            continue
        region = assignment.get(t.author_id)
        if region is None:
            continue
        counter = freq.get(region)
        if counter is None:
            counter = freq[region] = Counter()
        counter.update(set(token_surfaces(t.text)))
    return freq


def tfidf_from_frequencies(freq: Mapping[int, Mapping[str, int]]) -> list[RegionVector]:
    docs = {r: f for r, f in freq.items() if f}
    if len(docs) < 2:
        raise DomainError("TF-IDF needs at least two regions with tweets")
    n_docs = len(docs)
    df: Counter[str] = Counter()
    for f in docs.values():
        df.update(f.keys())
    idf = {w: math.log(n_docs / d) for w, d in df.items() if d < n_docs}
    vectors = []
    for r in sorted(docs):
        weights = {w: n * idf[w] for w, n in docs[r].items() if w in idf}
        vectors.append(RegionVector(r, dict(sorted(weights.items()))))
    return vectors


def tfidf_vectors(corpus: Corpus, assignment: Mapping[int, int]) -> list[RegionVector]:
    """TF-IDF vector per region over words, hashtags and mentions.

    Retweets are excluded. Regions without original tweets are not
    documents and do not count toward ``|R|``.
    """
    return tfidf_from_frequencies(region_term_frequencies(corpus, assignment))


def top_terms_per_region(vectors: Iterable[RegionVector], k: int = 25) -> dict[int, list[tuple[str, float]]]:
    return {
        v.region_id: sorted(v.weights.items(), key=lambda kv: (-kv[1], kv[0]))[:k]
        for v in vectors
    }
