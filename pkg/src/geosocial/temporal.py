"""Daily registration series, peak detection and registration deciles."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from datetime import date, timedelta
from typing import Optional

from .corpus import Corpus


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class DailySeries:
    start_date: date
    counts: tuple[int, ...]

    def date_at(self, i: int) -> date:
        return self.start_date + timedelta(days=i)

    def items(self) -> Iterable[tuple[date, int]]:
        for i, c in enumerate(self.counts):
            yield self.date_at(i), c


@dataclass(frozen=True)
class Peak:
    date: date
    volume: int
    significance: float


@dataclass(frozen=True)
class DecileRow:
    percent: int
    date: date
    days_since_previous: Optional[int]


def daily_series(dates: Iterable[date]) -> DailySeries:
    per_day = Counter(dates)
    if not per_day:
        raise DomainError("no registration dates")
    start = min(per_day)
    span = (max(per_day) - start).days + 1
    counts = [0] * span
    for d, n in per_day.items():
        counts[(d - start).days] = n
    return DailySeries(start, tuple(counts))


def registration_series(corpus: Corpus) -> DailySeries:
    if not corpus.users:
        raise DomainError("registration series of a corpus without users")
    return daily_series(u.created_at for u in corpus.users.values())


def detect_peaks(series: DailySeries, window: int = 7) -> list[Peak]:
    """Days that strictly exceed every other day within ``window`` days.

    Windows are truncated at the series ends. Significance is the excess
    over the mean of the neighbouring days (the day itself excluded), so a
    lone day with no neighbours is never a peak.
    """
    if window < 1:
        raise DomainError("window must be at least one day")
    counts = series.counts
    n = len(counts)
    peaks = []
    for i, c in enumerate(counts):
        lo, hi = max(0, i - window), min(n, i + window + 1)
        neighbours = counts[lo:i] + counts[i + 1:hi]
        if not neighbours or c <= max(neighbours):
            continue
        significance = c - sum(neighbours) / len(neighbours)
        if significance > 0:
            peaks.append(Peak(series.date_at(i), c, significance))
    return peaks


def top_decile_peaks(peaks: Sequence[Peak]) -> list[Peak]:
    """Peaks in the top tenth by volume, counted by rank, ties at the cutoff kept.

    The cutoff is the volume of the ``ceil(n / 10)``-th largest peak.
    """
    if not peaks:
        return []
    volumes = sorted((p.volume for p in peaks), reverse=True)
    cutoff = volumes[-(-len(volumes) // 10) - 1]
    return [p for p in peaks if p.volume >= cutoff]


def deciles(dates: Iterable[date]) -> list[DecileRow]:
    """Nearest-rank registration date at 0%, 10%, ..., 100% of users."""
    ordered = sorted(dates)
    n = len(ordered)
    if n == 0:
        raise DomainError("deciles of an empty population")
    rows = []
    prev = None
    for p in range(0, 101, 10):
        rank = max(1, -(-p * n // 100))
        d = ordered[rank - 1]
        rows.append(DecileRow(p, d, (d - prev).days if prev is not None else None))
        prev = d
    return rows


def registration_deciles(corpus: Corpus) -> list[DecileRow]:
    if not corpus.users:
        raise DomainError("deciles of a corpus without users")
    return deciles(u.created_at for u in corpus.users.values())
