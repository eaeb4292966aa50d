"""Seeded generator of synthetic tweet archives with planted structure.

The generator writes an archive in the ingest input format together with
the fixtures a full run needs and a ``manifest.json`` holding the ground
truth it planted:

* one exclusive hashtag per region (should rank first by TF-IDF),
* the region-to-region mention matrix,
* registration spike dates,
* clusters of geotagged tweets,
* the dominant biography word pair.

Ground truth is tracked from the generator's own bookkeeping, never by
calling the analysis code.
"""

from __future__ import annotations

import csv
import json
import random
import shutil
import unicodedata
from dataclasses import dataclass, field
from datetime import date, datetime, timedelta, timezone
from pathlib import Path
from typing import Optional

DATA_DIR = Path(__file__).parent / "data"

COLLECTION_DAY = date(2012, 10, 28)
# 10:00 to 24:00 local time (UTC-3) on election day
WINDOW_START = int(datetime(2012, 10, 28, 13, 0, tzinfo=timezone.utc).timestamp())
WINDOW_END = int(datetime(2012, 10, 29, 3, 0, tzinfo=timezone.utc).timestamp())
FIRST_SIGNUP = date(2006, 8, 9)
SPIKE_DATES = (date(2009, 7, 9), date(2009, 8, 13), date(2010, 1, 17), date(2010, 3, 1), date(2011, 9, 4))

COMMON_WORDS = (
    "voté", "hoy", "elección", "elecciones", "alcalde", "concejal", "mesa", "votar",
    "resultados", "candidato", "comuna", "municipales", "gente", "urna", "vocal",
)
EVENT_HASHTAGS = ("#municipales2012", "#tudecides", "#yovote")
MEDIA_ACCOUNTS = ("@biobio", "@cooperativa", "@cnnchile", "@24horastvn", "@emol")
UNDETERMINED_PLACES = (
    "mi casa", "en el mundo", "Buenos Aires", "Tierra Media", "por ahí", "Lima, Perú",
    "Madrid", "donde tú estés", "Hogwarts", "planeta tierra",
)
ORG_NAMES = ("Radio", "Diario", "Municipalidad", "Noticias", "Club", "Partido", "Canal")
SURNAMES = (
    "González", "Muñoz", "Rojas", "Díaz", "Pérez", "Soto", "Contreras", "Silva",
    "Martínez", "Sepúlveda", "Morales", "Rodríguez", "López", "Fuentes", "Hernández",
    "Torres", "Araya", "Flores", "Espinoza", "Valenzuela", "Castillo", "Tapia",
)
BIO_NEUTRAL = (
    "vida", "musica", "familia", "amigos", "chile", "cine", "social", "trabajo",
    "mundo", "feliz", "historia", "naturaleza", "dios", "viajes", "libros",
)
BIO_MALE = ("ingeniero", "hincha", "padre", "hijo", "futbol", "colo", "candidato", "profesor")
BIO_FEMALE = ("mama", "madre", "hija", "mujer", "enamorada", "amiga", "periodista", "love")
BIO_PAIR = ("estudiante", "universidad")
BIO_FILLER = ("de", "la", "y", "el", "en", "mi", "los", "con")
SANTIAGO_CLUSTERS = ((-33.4263, -70.6170), (-33.4489, -70.6693), (-33.4080, -70.5670))
_SYLLABLES = ("ca", "lo", "mi", "ta", "re", "so", "pu", "ne", "ri", "ga", "mo", "la", "te", "du", "fi", "ve")


class SynthError(ValueError):
    pass


def _plain(s: str) -> str:
    decomposed = unicodedata.normalize("NFKD", s.lower())
    return "".join(c for c in decomposed if not unicodedata.combining(c))


def _slug(s: str) -> str:
    return "".join(c for c in _plain(s) if c.isalnum())


def _classic(dt: datetime) -> str:
    days = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
    months = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
    return (
        f"{days[dt.weekday()]} {months[dt.month - 1]} {dt.day:02d} "
        f"{dt.hour:02d}:{dt.minute:02d}:{dt.second:02d} +0000 {dt.year}"
    )


def _read_names(path: Path) -> list[str]:
    with open(path, encoding="utf-8") as fh:
        return [ln.split("#", 1)[0].strip() for ln in fh if ln.split("#", 1)[0].strip()]


@dataclass
class _User:
    uid: int
    screen: str
    name: str
    location: str
    bio: str
    created: datetime
    region: Optional[int]  # planted region, None when not regionally located
    gender: str


@dataclass
class _Places:
    """Location strings per region that resolve unambiguously to it."""

    by_region: dict[int, list[str]] = field(default_factory=dict)
    names: dict[int, str] = field(default_factory=dict)
    populations: dict[int, int] = field(default_factory=dict)
    country: str = "Chile"


def _load_places(hierarchy_csv: Path, aliases_csv: Path) -> _Places:
    with open(hierarchy_csv, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    units = {int(r["unit_id"]): r for r in rows}

    def region_of(uid: int) -> Optional[int]:
        r = units[uid]
        while r["level"] not in ("region", "country"):
            r = units[int(r["parent_id"])]
        return int(r["unit_id"]) if r["level"] == "region" else None

    # a name is safe when every unit carrying it sits in the same region
    name_regions: dict[str, set] = {}
    for uid, r in units.items():
        name_regions.setdefault(_plain(r["name"]), set()).add(region_of(uid))

    def safe(name: str) -> bool:
        return len(name_regions[_plain(name)]) == 1

    places = _Places()
    for uid, r in units.items():
        if r["level"] == "country":
            places.country = r["name"]
        elif r["level"] == "region":
            places.names[uid] = r["name"]
            places.populations[uid] = int(r["population"] or 0)
            places.by_region[uid] = []
    country = places.country
    for uid, r in sorted(units.items()):
        level, name = r["level"], r["name"]
        if level == "country" or not safe(name):
            continue
        region = region_of(uid)
        forms = [name, f"{name}, {country}"]
        if level == "commune":
            parent = units[int(r["parent_id"])]["name"]
            forms += [f"{name}, {parent}", f"{name} de {country}"]
        places.by_region[region].extend(forms)
    with open(aliases_csv, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            region = region_of(int(row["unit_id"]))
            if region is not None and _plain(row["alias"]) not in name_regions:
                places.by_region[region].append(row["alias"])
    return places


def _vary_case(rng: random.Random, s: str) -> str:
    roll = rng.random()
    if roll < 0.15:
        return s.upper()
    if roll < 0.3:
        return s.lower()
    if roll < 0.4:
        return _plain(s)
    return s


def generate_synthetic(
    out_dir: str | Path,
    seed: int = 1,
    n_users: int = 1000,
    n_tweets: int = 10000,
    n_regions: int = 15,
    retweet_share: float = 0.35,
    geo_share: float = 0.07,
    plant_share: float = 0.5,
) -> dict:
    """Write ``tweets.jsonl``, fixtures and ``manifest.json`` into ``out_dir``.

    Returns the manifest. The same arguments always produce the same bytes.
    """
    if n_tweets < n_users:
        raise SynthError("every user needs at least one tweet: n_tweets >= n_users")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = random.Random(seed)

    places = _load_places(DATA_DIR / "chile_hierarchy.csv", DATA_DIR / "chile_aliases.csv")
    regions = sorted(places.by_region)
    if not 2 <= n_regions <= len(regions):
        raise SynthError(f"n_regions must be within 2..{len(regions)}")
    regions = regions[:n_regions]
    region_weights = [places.populations[r] ** 0.5 for r in regions]
    planted_terms = {r: "#" + _slug(places.names[r]) for r in regions}
    hub = max(regions, key=lambda r: (places.populations[r], -r))

    male = _read_names(DATA_DIR / "male_names.txt")
    female = _read_names(DATA_DIR / "female_names.txt")
    male_plain, female_plain = {_plain(n) for n in male}, {_plain(n) for n in female}
    male_only = [n for n in male if _plain(n) not in female_plain]
    female_only = [n for n in female if _plain(n) not in male_plain]
    ambiguous = [n for n in male if _plain(n) in female_plain]

    noise_vocab = sorted(
        {"".join(rng.choice(_SYLLABLES) for _ in range(rng.randint(2, 4))) for _ in range(3000)}
    )

    # -- users -----------------------------------------------------------------
    signup_span = (COLLECTION_DAY - FIRST_SIGNUP).days
    users: list[_User] = []
    gender_counts = {"male": 0, "female": 0, "undetermined": 0}
    location_kinds = {"region": 0, "country": 0, "undetermined": 0, "empty": 0}
    users_per_region = dict.fromkeys(regions, 0)
    for i in range(n_users):
        uid = 1000 + i
        roll = rng.random()
        if roll < 0.40:
            first, gender = rng.choice(male_only), "male"
        elif roll < 0.68:
            first, gender = rng.choice(female_only), "female"
        elif roll < 0.80:
            first, gender = rng.choice(ambiguous), "undetermined"
        else:
            first, gender = rng.choice(ORG_NAMES), "undetermined"
        gender_counts[gender] += 1
        surname = rng.choice(SURNAMES)
        name = _vary_case(rng, f"{first} {surname}")
        screen = f"{_slug(first)}_{_slug(surname)}{uid}"

        # the first located users cover every region at least twice
        region = None
        if i < 2 * len(regions):
            region = regions[i % len(regions)]
        else:
            roll = rng.random()
            if roll < 0.55:
                region = rng.choices(regions, region_weights)[0]
            elif roll < 0.63:
                location_kinds["country"] += 1
                location = _vary_case(rng, places.country)
            elif roll < 0.83:
                location_kinds["undetermined"] += 1
                location = rng.choice(UNDETERMINED_PLACES)
            else:
                location_kinds["empty"] += 1
                location = rng.choice(("", "", " "))
        if region is not None:
            location_kinds["region"] += 1
            users_per_region[region] += 1
            location = _vary_case(rng, rng.choice(places.by_region[region]))

        bio = _make_bio(rng, gender)
        if rng.random() < 0.06:
            day = rng.choice(SPIKE_DATES)
        else:
            # growth: late days are more likely
            day = FIRST_SIGNUP + timedelta(days=int(signup_span * rng.random() ** 0.6))
        created = datetime(day.year, day.month, day.day, tzinfo=timezone.utc) + timedelta(
            seconds=rng.randrange(86400)
        )
        users.append(_User(uid, screen, name, location, bio, created, region, gender))

    located_by_region = {r: [u for u in users if u.region == r] for r in regions}
    unlocated = [u for u in users if u.region is None]

    # -- tweets ----------------------------------------------------------------
    stamps = sorted(_tweet_time(rng) for _ in range(n_tweets))
    extra = rng.choices(range(n_users), [1.0 / (k + 1) ** 0.8 for k in range(n_users)], k=n_tweets - n_users)
    author_order = list(range(n_users)) + extra
    rng.shuffle(author_order)

    slot = {r: i for i, r in enumerate(regions)}
    od = [[0] * len(regions) for _ in regions]
    originals: list[tuple[int, _User, str, list[_User]]] = []
    cluster_counts = [0] * len(SANTIAGO_CLUSTERS)
    scattered = 0
    retweets = 0
    tweet_id = 500000000
    lines = []
    for ts, author_idx in zip(stamps, author_order):
        tweet_id += rng.randint(1, 50)
        author = users[author_idx]
        record = {
            "id": tweet_id,
            "created_at": _classic(datetime.fromtimestamp(ts, tz=timezone.utc)),
            "user": {
                "id": author.uid,
                "name": author.name,
                "screen_name": author.screen,
                "location": author.location,
                "description": author.bio,
                "created_at": _classic(author.created),
            },
            "coordinates": None,
        }
        if originals and rng.random() < retweet_share:
            retweets += 1
            orig_id, orig_author, orig_text, orig_targets = originals[
                max(0, len(originals) - 1 - int(rng.expovariate(1 / 200)))
            ]
            record["text"] = f"RT @{orig_author.screen}: {orig_text}"
            record["retweeted_status"] = {
                "id": orig_id,
                "user": {"id": orig_author.uid, "screen_name": orig_author.screen},
            }
            targets = orig_targets + [orig_author]
        else:
            text, targets = _make_text(
                rng, author, planted_terms, regions, hub, located_by_region, unlocated,
                noise_vocab, plant_share,
            )
            record["text"] = text
            originals.append((tweet_id, author, text, targets))
        if author.region is not None:
            row = od[slot[author.region]]
            for dest in {u.region for u in targets if u.region is not None}:
                row[slot[dest]] += 1
        if rng.random() < geo_share:
            if rng.random() < 0.7:
                k = rng.randrange(len(SANTIAGO_CLUSTERS))
                cluster_counts[k] += 1
                lat0, lon0 = SANTIAGO_CLUSTERS[k]
                lat, lon = lat0 + rng.gauss(0, 0.002), lon0 + rng.gauss(0, 0.002)
            else:
                scattered += 1
                lat, lon = rng.uniform(-53.0, -18.5), rng.uniform(-73.5, -68.0)
            record["coordinates"] = {"type": "Point", "coordinates": [round(lon, 6), round(lat, 6)]}
        lines.append(json.dumps(record, ensure_ascii=False, sort_keys=True))

    with open(out / "tweets.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines))
        fh.write("\n")

    for src, dst in (
        ("chile_hierarchy.csv", "hierarchy.csv"),
        ("chile_aliases.csv", "aliases.csv"),
        ("male_names.txt", "male.txt"),
        ("female_names.txt", "female.txt"),
        ("stopwords_es.txt", "stopwords.txt"),
    ):
        shutil.copyfile(DATA_DIR / src, out / dst)
    config = {
        "input": "tweets.jsonl",
        "hierarchy": "hierarchy.csv",
        "aliases": "aliases.csv",
        "male_names": "male.txt",
        "female_names": "female.txt",
        "stopwords": "stopwords.txt",
    }
    with open(out / "config.json", "w", encoding="utf-8") as fh:
        json.dump(config, fh, indent=2, sort_keys=True)
        fh.write("\n")

    manifest = {
        "seed": seed,
        "users": n_users,
        "tweets": n_tweets,
        "retweets": retweets,
        "regions": [
            {
                "region_id": r,
                "name": places.names[r],
                "planted_term": planted_terms[r],
                "users": users_per_region[r],
            }
            for r in regions
        ],
        "od_matrix": {"regions": regions, "cells": od},
        "registration_spikes": [d.isoformat() for d in SPIKE_DATES],
        "geo_clusters": [
            {"lat": lat, "lon": lon, "tweets": n}
            for (lat, lon), n in zip(SANTIAGO_CLUSTERS, cluster_counts)
        ],
        "geo_scattered": scattered,
        "genders": gender_counts,
        "locations": location_kinds,
        "bio_pair": list(BIO_PAIR),
    }
    with open(out / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
    return manifest


def _tweet_time(rng: random.Random) -> int:
    # background activity plus a surge once vote counting starts (~23:00 UTC)
    if rng.random() < 0.4:
        return rng.randrange(WINDOW_START, WINDOW_END)
    t = int(rng.gauss(WINDOW_START + 10 * 3600, 5400))
    return min(max(t, WINDOW_START), WINDOW_END - 1)


def _make_bio(rng: random.Random, gender: str) -> str:
    if rng.random() < 0.15:
        return ""
    words = rng.sample(BIO_NEUTRAL, rng.randint(1, 3))
    if gender == "male" and rng.random() < 0.6:
        words.append(rng.choice(BIO_MALE))
    elif gender == "female" and rng.random() < 0.6:
        words.append(rng.choice(BIO_FEMALE))
    if rng.random() < 0.4:
        words += list(BIO_PAIR)
    rng.shuffle(words)
    out = []
    for w in words:
        out.append(w.capitalize() if rng.random() < 0.3 else w)
        if rng.random() < 0.5:
            out.append(rng.choice(BIO_FILLER))
    return " ".join(out) + rng.choice(("", ".", "!", " :)"))


def _make_text(
    rng, author, planted_terms, regions, hub, located_by_region, unlocated, noise_vocab, plant_share
):
    tokens = rng.sample(COMMON_WORDS, rng.randint(2, 5))
    tokens += rng.sample(noise_vocab, rng.randint(0, 2))
    if author.region is not None and rng.random() < plant_share:
        tokens.append(planted_terms[author.region])
    if rng.random() < 0.35:
        tokens.append(rng.choice(EVENT_HASHTAGS))
    targets: list[_User] = []
    if rng.random() < 0.45:
        for _ in range(rng.randint(1, 2)):
            roll = rng.random()
            if roll < 0.1:
                tokens.append(rng.choice(MEDIA_ACCOUNTS))
                continue
            if roll < 0.15 and unlocated:
                target = rng.choice(unlocated)
            else:
                home = author.region if author.region is not None else rng.choice(regions)
                roll = rng.random()
                if roll < 0.6:
                    dest = home
                elif roll < 0.8:
                    dest = hub
                else:
                    dest = rng.choice(regions)
                target = rng.choice(located_by_region[dest])
            targets.append(target)
            tokens.append("@" + target.screen)
    rng.shuffle(tokens)
    return " ".join(tokens) + rng.choice(("", "!", ".", " :)")), targets
