"""Toponym gazetteer built from an administrative hierarchy.

Every commune, province and region is expanded into the twelve whole-string
forms users typically type in a profile ("comuna", "comuna, provincia",
"region de pais", ...). Lookup is exact on the normalized, whitespace
collapsed location string.
"""

from __future__ import annotations

import csv
import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple, Optional

from .corpus import Corpus
from .text import canonical_key

COMMUNE = "commune"
PROVINCE = "province"
REGION = "region"
COUNTRY = "country"
LEVELS = (COMMUNE, PROVINCE, REGION, COUNTRY)
LEVEL_RANK = {level: i for i, level in enumerate(LEVELS)}
_PARENT_LEVEL = {COMMUNE: PROVINCE, PROVINCE: REGION, REGION: COUNTRY}

RESOLVED = "resolved"
UNDETERMINED = "undetermined"
EMPTY_LOCATION = "empty_location"


class GazetteerError(ValueError):
    pass


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class AdminUnit:
    unit_id: int
    name: str
    level: str
    parent_id: Optional[int] = None
    population: Optional[int] = None


class Outcome(NamedTuple):
    outcome: str
    unit_id: Optional[int] = None
    level: Optional[str] = None


@dataclass(frozen=True)
class GeoResolution:
    user_id: int
    outcome: str
    unit_id: Optional[int] = None
    level: Optional[str] = None


@dataclass(frozen=True)
class CoverageRow:
    level: str
    users: int
    user_share: float
    tweets: int
    tweet_share: float


def template_expansions(units: Mapping[int, AdminUnit]) -> list[tuple[int, str, int]]:
    """All ``(template_number, raw_string, unit_id)`` forms for a hierarchy."""
    out = []
    for u in units.values():
        if u.level == COUNTRY:
            out.append((12, u.name, u.unit_id))
            continue
        parent = units[u.parent_id]
        chain = [u]
        while chain[-1].parent_id is not None:
            chain.append(units[chain[-1].parent_id])
        country = chain[-1].name
        if u.level == COMMUNE:
            out += [
                (1, u.name, u.unit_id),
                (3, f"{u.name}, {parent.name}", u.unit_id),
                (6, f"{u.name}, {country}", u.unit_id),
                (9, f"{u.name} de {country}", u.unit_id),
            ]
        elif u.level == PROVINCE:
            out += [
                (2, u.name, u.unit_id),
                (4, f"{u.name}, {parent.name}", u.unit_id),
                (7, f"{u.name}, {country}", u.unit_id),
                (10, f"{u.name} de {country}", u.unit_id),
            ]
        else:
            out += [
                (5, u.name, u.unit_id),
                (8, f"{u.name}, {country}", u.unit_id),
                (11, f"{u.name} de {country}", u.unit_id),
            ]
    return out


def _check_tree(units: Mapping[int, AdminUnit]) -> None:
    countries = [u for u in units.values() if u.level == COUNTRY]
    if len(countries) != 1:
        raise GazetteerError(f"hierarchy must have exactly one country, found {len(countries)}")
    for u in units.values():
        if u.level not in LEVEL_RANK:
            raise GazetteerError(f"unit {u.unit_id}: unknown level {u.level!r}")
        if not u.name.strip():
            raise GazetteerError(f"unit {u.unit_id}: empty name")
        if u.population is not None and u.population < 0:
            raise GazetteerError(f"unit {u.unit_id}: negative population")
        if u.level == COUNTRY:
            if u.parent_id is not None:
                raise GazetteerError(f"country {u.unit_id} has a parent")
            continue
        parent = units.get(u.parent_id) if u.parent_id is not None else None
        if parent is None:
            raise GazetteerError(f"orphan unit {u.unit_id} ({u.name})")
        if parent.level != _PARENT_LEVEL[u.level]:
            raise GazetteerError(
                f"unit {u.unit_id}: {u.level} under {parent.level} {parent.unit_id}"
            )


class Gazetteer:
    """Immutable toponym table plus the hierarchy it was built from."""

    def __init__(self, entries: dict[str, tuple[int, str]], hierarchy: dict[int, AdminUnit]):
        self.entries = entries
        self.hierarchy = hierarchy
        self._region: dict[int, Optional[int]] = {}
        for uid in hierarchy:
            u = hierarchy[uid]
            while u.level not in (REGION, COUNTRY):
                u = hierarchy[u.parent_id]
            self._region[uid] = u.unit_id if u.level == REGION else None

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, key: str) -> bool:
        return canonical_key(key) in self.entries

    def region_of(self, unit_id: int) -> Optional[int]:
        """Ancestor region of a unit; ``None`` for the country itself."""
        return self._region[unit_id]

    def regions(self) -> list[AdminUnit]:
        return sorted(
            (u for u in self.hierarchy.values() if u.level == REGION), key=lambda u: u.unit_id
        )

    def resolve(self, location_text: str) -> Outcome:
        key = canonical_key(location_text)
        if not key:
            return Outcome(EMPTY_LOCATION)
        hit = self.entries.get(key)
        if hit is None:
            return Outcome(UNDETERMINED)
        return Outcome(RESOLVED, hit[0], hit[1])


def build_gazetteer(
    hierarchy: Iterable[AdminUnit], aliases: Optional[Mapping[str, int]] = None
) -> Gazetteer:
    """Expand the templates for every unit and settle key collisions.

    On a collision the most specific level wins, then the larger
    population, then the lower unit id. Alias entries are manual
    curation and override whatever the templates produced for that key.
    """
    units: dict[int, AdminUnit] = {}
    for u in hierarchy:
        if u.unit_id in units:
            raise GazetteerError(f"duplicate unit_id {u.unit_id}")
        units[u.unit_id] = u
    _check_tree(units)

    best: dict[str, tuple[tuple[int, int, int], int]] = {}
    for _, raw, uid in template_expansions(units):
        key = canonical_key(raw)
        u = units[uid]
        rank = (LEVEL_RANK[u.level], -(u.population or 0), uid)
        cur = best.get(key)
        if cur is None or rank < cur[0]:
            best[key] = (rank, uid)

    entries = {key: (uid, units[uid].level) for key, (_, uid) in best.items()}
    for alias, uid in (aliases or {}).items():
        if uid not in units:
            raise GazetteerError(f"alias {alias!r} points at unknown unit {uid}")
        key = canonical_key(alias)
        if key:
            entries[key] = (uid, units[uid].level)
    return Gazetteer(dict(sorted(entries.items())), dict(sorted(units.items())))


def resolve_location(gazetteer: Gazetteer, location_text: str) -> Outcome:
    return gazetteer.resolve(location_text)


def geolocate_users(corpus: Corpus, gazetteer: Gazetteer) -> list[GeoResolution]:
    out = []
    for user in corpus.users.values():
        outcome, uid, level = gazetteer.resolve(user.location_text)
        out.append(GeoResolution(user.user_id, outcome, uid, level))
    return out


def region_assignment(resolutions: Iterable[GeoResolution], gazetteer: Gazetteer) -> dict[int, int]:
    """user_id -> region unit id, rolling communes and provinces up.

    Users resolved only at country level, or not at all, are left out.
    """
    out = {}
    for r in resolutions:
        if r.outcome == RESOLVED:
            region = gazetteer.region_of(r.unit_id)
            if region is not None:
                out[r.user_id] = region
    return out


def coverage_table(resolutions: Sequence[GeoResolution], corpus: Corpus) -> list[CoverageRow]:
    """Users and tweets per detected level.

    Empty locations are folded into the undetermined row. Tweet counts
    include retweets.
    """
    per_user = corpus.tweets_per_user()
    order = [COUNTRY, REGION, PROVINCE, COMMUNE, UNDETERMINED]
    users = dict.fromkeys(order, 0)
    tweets = dict.fromkeys(order, 0)
    for r in resolutions:
        if r.user_id not in corpus.users:
            raise DomainError(f"user {r.user_id} not in corpus")
        row = r.level if r.outcome == RESOLVED else UNDETERMINED
        users[row] += 1
        tweets[row] += per_user.get(r.user_id, 0)
    n_users = sum(users.values())
    n_tweets = sum(tweets.values())
    return [
        CoverageRow(
            level,
            users[level],
            users[level] / n_users if n_users else 0.0,
            tweets[level],
            tweets[level] / n_tweets if n_tweets else 0.0,
        )
        for level in order
    ]


def pearson_log_correlation(pairs: Sequence[tuple[float, float]]) -> float:
    """Pearson correlation between ln(physical) and ln(virtual) populations."""
    if len(pairs) < 2:
        raise DomainError("need at least two pairs")
    xs, ys = [], []
    for x, y in pairs:
        if x <= 0 or y <= 0:
            raise DomainError(f"populations must be positive, got ({x}, {y})")
        xs.append(math.log(x))
        ys.append(math.log(y))
    n = len(xs)
    mx = math.fsum(xs) / n
    my = math.fsum(ys) / n
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise DomainError("correlation undefined for zero variance")
    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def regional_population_pairs(
    gazetteer: Gazetteer, assignment: Mapping[int, int]
) -> list[tuple[int, int, int]]:
    """``(region_id, physical, virtual)`` for regions with both counts positive."""
    virtual: dict[int, int] = {}
    for region in assignment.values():
        virtual[region] = virtual.get(region, 0) + 1
    out = []
    for unit in gazetteer.regions():
        if unit.population and virtual.get(unit.unit_id):
            out.append((unit.unit_id, unit.population, virtual[unit.unit_id]))
    return out


# -- file formats -------------------------------------------------------------


def _opt_int(value: str, what: str, lineno: int) -> Optional[int]:
    value = value.strip()
    if not value:
        return None
    try:
        return int(value)
    except ValueError as exc:
        raise GazetteerError(f"line {lineno}: {what} {value!r} is not an integer") from exc


def load_hierarchy(path: str | Path) -> list[AdminUnit]:
    """Read ``unit_id,level,name,parent_id,population`` rows."""
    units = []
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        expected = {"unit_id", "level", "name", "parent_id", "population"}
        if reader.fieldnames is None or not expected <= set(reader.fieldnames):
            raise GazetteerError(f"{path}: header must contain {sorted(expected)}")
        for lineno, row in enumerate(reader, start=2):
            uid = _opt_int(row["unit_id"], "unit_id", lineno)
            if uid is None:
                raise GazetteerError(f"line {lineno}: missing unit_id")
            units.append(
                AdminUnit(
                    unit_id=uid,
                    name=row["name"].strip(),
                    level=row["level"].strip(),
                    parent_id=_opt_int(row["parent_id"], "parent_id", lineno),
                    population=_opt_int(row["population"], "population", lineno),
                )
            )
    return units


def load_aliases(path: str | Path) -> dict[str, int]:
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"alias", "unit_id"} <= set(reader.fieldnames):
            raise GazetteerError(f"{path}: header must be alias,unit_id")
        for lineno, row in enumerate(reader, start=2):
            uid = _opt_int(row["unit_id"], "unit_id", lineno)
            if uid is None:
                raise GazetteerError(f"line {lineno}: missing unit_id")
            out[row["alias"]] = uid
    return out


def packaged_hierarchy_path() -> Path:
    return Path(__file__).parent / "data" / "chile_hierarchy.csv"


def packaged_aliases_path() -> Path:
    return Path(__file__).parent / "data" / "chile_aliases.csv"
