"""Region-to-region information flow through mentions and retweets."""

from __future__ import annotations

import statistics
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from typing import Optional

from .corpus import Corpus
from .text import normalize_text


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class ODMatrix:
    """``cells[i][j]``: tweets from ``regions[i]`` that reach ``regions[j]``."""

    regions: tuple[int, ...]
    cells: tuple[tuple[int, ...], ...]
    # mentions that could not be placed in any region
    dropped_mentions: int = field(default=0, compare=False)

    def total(self) -> int:
        return sum(map(sum, self.cells))

    def as_dict(self) -> dict[tuple[int, int], int]:
        return {
            (src, dst): self.cells[i][j]
            for i, src in enumerate(self.regions)
            for j, dst in enumerate(self.regions)
        }


@dataclass(frozen=True)
class FlowStats:
    region_id: int
    inflow: int
    outflow: int
    in_out_ratio: Optional[float]
    intra_share: Optional[float]


def screen_name_regions(corpus: Corpus, assignment: Mapping[int, int]) -> dict[str, int]:
    """``@screen_name`` -> region of that account, for located accounts."""
    out = {}
    for uid, user in corpus.users.items():
        region = assignment.get(uid)
        if region is not None:
            out["@" + normalize_text(user.screen_name)] = region
    return out


def od_matrix(
    corpus: Corpus,
    assignment: Mapping[int, int],
    account_regions: Optional[Mapping[str, int]] = None,
    regions: Optional[Iterable[int]] = None,
) -> ODMatrix:
    """Count each tweet once per distinct destination region it reaches.

    Destinations are the regions of the mentioned accounts plus, for a
    retweet, the region of the retweeted author. Accounts with no known
    region are dropped and tallied in ``dropped_mentions``.
    """
    if account_regions is None:
        account_regions = screen_name_regions(corpus, assignment)
    region_ids = tuple(sorted(set(regions) if regions is not None else set(assignment.values())))
    slot = {r: i for i, r in enumerate(region_ids)}
    cells = [[0] * len(region_ids) for _ in region_ids]

    author_of: dict[int, int] = {}
    if any(t.is_retweet and t.retweeted_author is None for t in corpus.tweets):
        author_of = {t.tweet_id: t.author_id for t in corpus.tweets}
    screen_of = {uid: "@" + normalize_text(u.screen_name) for uid, u in corpus.users.items()}

    dropped = 0
    for t in corpus.tweets:
        origin = assignment.get(t.author_id)
        if origin is None or origin not in slot:
            continue
        targets = set(t.mentions)
        if t.is_retweet:
            if t.retweeted_author is not None:
                targets.add(t.retweeted_author)
            elif t.retweeted_id in author_of:
                targets.add(screen_of[author_of[t.retweeted_id]])
        destinations = set()
        for name in targets:
            region = account_regions.get(name)
            if region is None or region not in slot:
                dropped += 1
            else:
                destinations.add(region)
        row = cells[slot[origin]]
        for region in destinations:
            row[slot[region]] += 1
    return ODMatrix(region_ids, tuple(tuple(r) for r in cells), dropped)


def flow_stats(matrix: ODMatrix) -> list[FlowStats]:
    """In/out ratio and intra-region share of incoming flow, per region.

    The diagonal counts toward both the in and the out totals. Undefined
    values (division by zero) are ``None``.
    """
    n = len(matrix.regions)
    if any(len(row) != n for row in matrix.cells) or len(matrix.cells) != n:
        raise DomainError("OD matrix must be square")
    out = []
    for i, region in enumerate(matrix.regions):
        inflow = sum(matrix.cells[j][i] for j in range(n))
        outflow = sum(matrix.cells[i])
        out.append(
            FlowStats(
                region,
                inflow,
                outflow,
                inflow / outflow if outflow else None,
                matrix.cells[i][i] / inflow if inflow else None,
            )
        )
    return out


def flow_summary(
    stats: Sequence[FlowStats],
) -> tuple[tuple[float, float], tuple[float, float]]:
    """``((ratio mean, ratio std), (intra mean, intra std))`` over defined values."""
    ratios = [s.in_out_ratio for s in stats if s.in_out_ratio is not None]
    intra = [s.intra_share for s in stats if s.intra_share is not None]
    if not ratios or not intra:
        raise DomainError("no region has defined flow statistics")
    return (
        (statistics.fmean(ratios), statistics.pstdev(ratios)),
        (statistics.fmean(intra), statistics.pstdev(intra)),
    )


def flow_diagram_export(matrix: ODMatrix) -> list[tuple[int, int, int]]:
    edges = [
        (src, dst, matrix.cells[i][j])
        for i, src in enumerate(matrix.regions)
        for j, dst in enumerate(matrix.regions)
        if matrix.cells[i][j]
    ]
    edges.sort(key=lambda e: (-e[2], e[0], e[1]))
    return edges
