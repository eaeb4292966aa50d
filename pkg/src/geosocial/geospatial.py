"""Hexagonal binning of geotagged tweets.

Points are projected with an equirectangular projection about an origin,
then assigned to a pointy-top hexagonal lattice in axial ``(q, r)``
coordinates. ``cell_size`` is the center-to-vertex distance in meters.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Optional

from .corpus import Corpus

EARTH_RADIUS_M = 6371000.0
SQRT3 = math.sqrt(3.0)


@dataclass(frozen=True)
class HexGridSpec:
    origin: tuple[float, float]  # (lat, lon)
    cell_size: float = 500.0
    projection_latitude: Optional[float] = None  # defaults to origin latitude

    def __post_init__(self):
        if not self.cell_size > 0:
            raise ValueError("cell_size must be positive")

    @property
    def cos_lat(self) -> float:
        lat = self.origin[0] if self.projection_latitude is None else self.projection_latitude
        return math.cos(math.radians(lat))


@dataclass(frozen=True)
class HexBin:
    q: int
    r: int
    count: int
    center: tuple[float, float]  # (lat, lon)


@dataclass(frozen=True)
class GeoSummary:
    geo_tweet_count: int
    geo_share: float
    median_lat: Optional[float]
    median_lon: Optional[float]


def project(point: tuple[float, float], spec: HexGridSpec) -> tuple[float, float]:
    lat, lon = point
    x = EARTH_RADIUS_M * math.radians(lon - spec.origin[1]) * spec.cos_lat
    y = EARTH_RADIUS_M * math.radians(lat - spec.origin[0])
    return x, y


def unproject(xy: tuple[float, float], spec: HexGridSpec) -> tuple[float, float]:
    x, y = xy
    lat = spec.origin[0] + math.degrees(y / EARTH_RADIUS_M)
    lon = spec.origin[1] + math.degrees(x / (EARTH_RADIUS_M * spec.cos_lat))
    return lat, lon


def hex_center(q: int, r: int, cell_size: float) -> tuple[float, float]:
    return cell_size * SQRT3 * (q + r / 2.0), cell_size * 1.5 * r


def hex_index(xy: tuple[float, float], cell_size: float) -> tuple[int, int]:
    """Axial cell containing a planar point (cube rounding)."""
    x, y = xy
    qf = (SQRT3 / 3.0 * x - y / 3.0) / cell_size
    rf = (2.0 / 3.0 * y) / cell_size
    sf = -qf - rf
    q, r, s = round(qf), round(rf), round(sf)
    dq, dr, ds = abs(q - qf), abs(r - rf), abs(s - sf)
    if dq > dr and dq > ds:
        q = -r - s
    elif dr > ds:
        r = -q - s
    return int(q), int(r)


def hex_counts(corpus: Corpus, spec: HexGridSpec) -> Counter[tuple[int, int]]:
    """Geotagged tweets per cell, before any threshold."""
    counts: Counter[tuple[int, int]] = Counter()
    for t in corpus.tweets:
        if t.coordinates is not None:
            counts[hex_index(project(t.coordinates, spec), spec.cell_size)] += 1
    return counts


def hexbin_aggregate(corpus: Corpus, spec: HexGridSpec, min_count: int = 20) -> list[HexBin]:
    bins = []
    for (q, r), n in hex_counts(corpus, spec).items():
        if n >= min_count:
            center = unproject(hex_center(q, r, spec.cell_size), spec)
            bins.append(HexBin(q, r, n, center))
    bins.sort(key=lambda b: (-b.count, b.q, b.r))
    return bins


def _lower_median(values: list[float]) -> float:
    values.sort()
    return values[(len(values) - 1) // 2]


def geo_summary(corpus: Corpus) -> GeoSummary:
    """Count, share of all tweets, and per-axis lower medians of geotagged tweets."""
    lats = [t.coordinates[0] for t in corpus.tweets if t.coordinates is not None]
    lons = [t.coordinates[1] for t in corpus.tweets if t.coordinates is not None]
    if not lats:
        return GeoSummary(0, 0.0, None, None)
    return GeoSummary(len(lats), len(lats) / len(corpus.tweets), _lower_median(lats), _lower_median(lons))
