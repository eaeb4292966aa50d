"""Gender classification from first names and biography vocabulary analysis.

Biographies of gender-classified users become word sets. Words are linked
when they share a biography, the graph keeps only its heaviest edges, and
PageRank over what is left ranks the vocabulary. Each ranked word carries
its gender tendency, (male - female) / (male + female) users.
"""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from collections import Counter
from collections.abc import Iterable, Mapping
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .corpus import Corpus
from .text import WORD, normalize_text, tokenize

logger = logging.getLogger(__name__)

MALE = "male"
FEMALE = "female"
UNDETERMINED = "undetermined"


class DomainError(ValueError):
    pass


class PageRankConvergenceWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class GenderLexicon:
    male_names: frozenset[str]
    female_names: frozenset[str]

    @classmethod
    def from_names(cls, male: Iterable[str], female: Iterable[str]) -> "GenderLexicon":
        return cls(
            frozenset(_first_token(n) for n in male if _first_token(n)),
            frozenset(_first_token(n) for n in female if _first_token(n)),
        )

    def swapped(self) -> "GenderLexicon":
        return GenderLexicon(self.female_names, self.male_names)


@dataclass(frozen=True)
class CooccurrenceGraph:
    nodes: frozenset[str]
    edges: dict[tuple[str, str], float]  # (a, b) with a < b
    total_bios: int


@dataclass(frozen=True)
class BioKeyword:
    word: str
    pagerank_score: float
    tendency: float
    user_share: float
    male_users: int
    female_users: int


def _first_token(name: str) -> str:
    parts = normalize_text(name).split()
    return parts[0] if parts else ""


def read_word_list(path: str | Path) -> list[str]:
    """One entry per line; blank lines and ``#`` comments are ignored."""
    out = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                out.append(line)
    return out


def load_lexicon(male_path: str | Path, female_path: str | Path) -> GenderLexicon:
    return GenderLexicon.from_names(read_word_list(male_path), read_word_list(female_path))


def load_stopwords(path: str | Path) -> frozenset[str]:
    return frozenset(normalize_text(w) for w in read_word_list(path))


def classify_gender(lexicon: GenderLexicon, display_name: str) -> str:
    first = _first_token(display_name)
    is_male = first in lexicon.male_names
    is_female = first in lexicon.female_names
    if is_male and not is_female:
        return MALE
    if is_female and not is_male:
        return FEMALE
    return UNDETERMINED


def classify_users(corpus: Corpus, lexicon: GenderLexicon) -> dict[int, str]:
    return {uid: classify_gender(lexicon, u.display_name) for uid, u in corpus.users.items()}


def bio_words(bio: str, stopwords: frozenset[str] | set[str]) -> frozenset[str]:
    return frozenset(
        t.surface for t in tokenize(bio) if t.kind == WORD and t.surface not in stopwords
    )


def bio_word_sets(
    corpus: Corpus, genders: Mapping[int, str], stopwords: frozenset[str] | set[str]
) -> dict[int, frozenset[str]]:
    """Distinct non-stopword words per male/female user; empty bios stay in."""
    return {
        uid: bio_words(u.bio_text, stopwords)
        for uid, u in corpus.users.items()
        if genders.get(uid) in (MALE, FEMALE)
    }


def build_cooccurrence(word_sets: Iterable[frozenset[str]]) -> CooccurrenceGraph:
    pair_counts: Counter[tuple[str, str]] = Counter()
    nodes: set[str] = set()
    total = 0
    for words in word_sets:
        total += 1
        nodes.update(words)
        if len(words) > 1:
            pair_counts.update(itertools.combinations(sorted(words), 2))
    if total == 0:
        raise DomainError("need at least one word set")
    edges = {pair: n / total for pair, n in sorted(pair_counts.items())}
    return CooccurrenceGraph(frozenset(nodes), edges, total)


def filter_top_edges(graph: CooccurrenceGraph, keep_fraction: float = 0.001) -> CooccurrenceGraph:
    """Keep the heaviest ``ceil(keep_fraction * |E|)`` edges plus ties at the cutoff."""
    if not 0 < keep_fraction <= 1:
        raise DomainError(f"keep_fraction must be in (0, 1], got {keep_fraction}")
    if not graph.edges:
        return CooccurrenceGraph(frozenset(), {}, graph.total_bios)
    # exact decimal arithmetic: 0.07 * 100 must give 7, not 7.000000000000001
    n_keep = max(1, math.ceil(Fraction(repr(keep_fraction)) * len(graph.edges)))
    weights = sorted(graph.edges.values(), reverse=True)
    cutoff = weights[min(n_keep, len(weights)) - 1]
    kept = {pair: w for pair, w in graph.edges.items() if w >= cutoff}
    nodes = frozenset(itertools.chain.from_iterable(kept))
    return CooccurrenceGraph(nodes, kept, graph.total_bios)


def pagerank(
    graph: CooccurrenceGraph,
    damping: float = 0.85,
    tolerance: float = 1e-10,
    max_iter: int = 200,
) -> dict[str, float]:
    """Weighted PageRank on an undirected graph by power iteration.

    Each edge is walked in both directions with probability proportional to
    its weight. Mass on nodes without edges is spread uniformly. Emits a
    :class:`PageRankConvergenceWarning` and returns the last iterate if the
    L1 change is still above ``tolerance`` after ``max_iter`` steps.
    """
    nodes = sorted(graph.nodes)
    n = len(nodes)
    if n == 0:
        raise DomainError("pagerank of an empty graph")
    index = {w: i for i, w in enumerate(nodes)}

    src, dst, wt = [], [], []
    for (a, b), w in graph.edges.items():
        i, j = index[a], index[b]
        src += [i, j]
        dst += [j, i]
        wt += [w, w]
    src = np.asarray(src, dtype=np.intp)
    dst = np.asarray(dst, dtype=np.intp)
    wt = np.asarray(wt, dtype=float)
    strength = np.bincount(src, weights=wt, minlength=n)
    dangling = strength == 0
    # transition probability along each directed half-edge
    prob = wt / strength[src] if len(wt) else wt

    scores = np.full(n, 1.0 / n)
    converged = False
    for _ in range(max_iter):
        flow = np.bincount(dst, weights=scores[src] * prob, minlength=n)
        new = damping * (flow + scores[dangling].sum() / n) + (1.0 - damping) / n
        new /= new.sum()
        delta = np.abs(new - scores).sum()
        scores = new
        if delta < tolerance:
            converged = True
            break
    if not converged:
        warnings.warn(
            f"pagerank did not converge in {max_iter} iterations", PageRankConvergenceWarning
        )
    return {w: float(scores[i]) for i, w in enumerate(nodes)}


def gendered_word_counts(
    word_sets: Mapping[int, frozenset[str]], genders: Mapping[int, str]
) -> dict[str, tuple[int, int]]:
    """word -> (male_users, female_users)."""
    male: Counter[str] = Counter()
    female: Counter[str] = Counter()
    for uid, words in word_sets.items():
        g = genders.get(uid)
        if g == MALE:
            male.update(words)
        elif g == FEMALE:
            female.update(words)
    return {w: (male[w], female[w]) for w in sorted(male.keys() | female.keys())}


def tendency(male_users: int, female_users: int) -> float:
    total = male_users + female_users
    if total <= 0:
        raise DomainError("tendency undefined for a word no classified user wrote")
    return (male_users - female_users) / total


def word_tendency(word: str, index: Mapping[str, tuple[int, int]]) -> float:
    if word not in index:
        raise DomainError(f"word {word!r} not used by any classified user")
    return tendency(*index[word])


def top_bio_keywords(
    word_sets: Mapping[int, frozenset[str]],
    genders: Mapping[int, str],
    k: int = 50,
    keep_fraction: float = 0.001,
    damping: float = 0.85,
    tolerance: float = 1e-10,
    max_iter: int = 200,
) -> list[BioKeyword]:
    """Rank biography words by PageRank over the filtered co-occurrence graph."""
    if not word_sets:
        return []
    graph = filter_top_edges(build_cooccurrence(word_sets.values()), keep_fraction)
    if not graph.nodes:
        return []
    scores = pagerank(graph, damping, tolerance, max_iter)
    index = gendered_word_counts(word_sets, genders)
    classified = len(word_sets)
    ranked = sorted(scores, key=lambda w: (-scores[w], w))[:k]
    out = []
    for w in ranked:
        m, f = index[w]
        out.append(BioKeyword(w, scores[w], tendency(m, f), (m + f) / classified, m, f))
    logger.info(
        "bio graph: %d words, %d kept edges, %d classified users",
        len(graph.nodes), len(graph.edges), classified,
    )
    return out
