"""Ingestion of line-delimited tweet archives into an immutable corpus.

Each input line is one JSON object in the classic streaming API shape::

    {"id": 1, "text": "...", "created_at": "Sun Oct 28 14:03:11 +0000 2012",
     "user": {"id": 7, "name": "...", "screen_name": "...", "location": "...",
              "description": "...", "created_at": "..."},
     "coordinates": {"coordinates": [lon, lat]} | null,
     "retweeted_status": {"id": 0, "user": {"screen_name": "..."}}}

The canonical corpus file written by :func:`save_corpus` is also line
delimited JSON: a header object, then users by id, then tweets in corpus
order. Keys are sorted so the bytes depend only on the corpus content.
"""

from __future__ import annotations

import calendar
import json
import logging
from collections.abc import Iterable
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from pathlib import Path
from typing import Optional

from .text import hashtags_and_mentions, normalize_text, token_surfaces

logger = logging.getLogger(__name__)

CORPUS_FORMAT = "geosocial-corpus/1"

_MONTHS = {
    m: i
    for i, m in enumerate(
        ["Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec"],
        start=1,
    )
}


class IngestError(Exception):
    """The archive could not be read at all."""


class RecordError(ValueError):
    """A single input line does not describe a valid tweet."""


@dataclass(frozen=True, slots=True)
class TweetRecord:
    tweet_id: int
    author_id: int
    timestamp: int
    text: str
    hashtags: tuple[str, ...] = ()
    mentions: tuple[str, ...] = ()
    coordinates: Optional[tuple[float, float]] = None  # (lat, lon)
    is_retweet: bool = False
    retweeted_id: Optional[int] = None
    # "@screen_name" of the retweeted author when the archive carries it
    retweeted_author: Optional[str] = None


@dataclass(frozen=True, slots=True)
class UserProfile:
    user_id: int
    screen_name: str
    display_name: str
    location_text: str
    bio_text: str
    created_at: date


@dataclass(frozen=True)
class Corpus:
    """Tweets sorted by (timestamp, tweet_id) plus one profile per author.

    Treat as read-only; nothing in the package mutates a corpus after
    construction.
    """

    tweets: tuple[TweetRecord, ...]
    users: dict[int, UserProfile]
    collection_date: Optional[date]
    skipped_lines: int = field(default=0, compare=False)

    def __len__(self) -> int:
        return len(self.tweets)

    def originals(self) -> Iterable[TweetRecord]:
        return (t for t in self.tweets if not t.is_retweet)

    def tweets_per_user(self) -> dict[int, int]:
        counts: dict[int, int] = {}
        for t in self.tweets:
            counts[t.author_id] = counts.get(t.author_id, 0) + 1
        return counts


@dataclass(frozen=True)
class CorpusStats:
    tweet_count: int
    retweet_count: int
    participant_count: int
    vocabulary_size: int
    hashtag_tweet_share: float

    def as_dict(self) -> dict:
        return {
            "tweet_count": self.tweet_count,
            "retweet_count": self.retweet_count,
            "participant_count": self.participant_count,
            "vocabulary_size": self.vocabulary_size,
            "hashtag_tweet_share": self.hashtag_tweet_share,
        }


def parse_timestamp(value: str) -> int:
    """Parse ``"Sun Oct 28 14:03:11 +0000 2012"`` to UTC epoch seconds."""
    parts = value.split()
    if len(parts) != 6:
        raise RecordError(f"bad timestamp {value!r}")
    _, mon, day, clock, offset, year = parts
    try:
        hh, mm, ss = (int(x) for x in clock.split(":"))
        month = _MONTHS[mon]
        sign = -1 if offset[0] == "-" else 1
        if len(offset) != 5 or offset[0] not in "+-":
            raise ValueError(offset)
        off = sign * (int(offset[1:3]) * 3600 + int(offset[3:5]) * 60)
        # validates the calendar fields
        dt = datetime(int(year), month, int(day), hh, mm, ss)
    except (KeyError, ValueError) as exc:
        raise RecordError(f"bad timestamp {value!r}") from exc
    return calendar.timegm(dt.timetuple()) - off


def epoch_to_date(ts: int) -> date:
    return datetime.fromtimestamp(ts, tz=timezone.utc).date()


def _int(value, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, str) and value.isdigit():
            return int(value)
        raise RecordError(f"{what} is not an integer")
    return value


def _str(value, what: str, default: Optional[str] = None) -> str:
    if value is None and default is not None:
        return default
    if not isinstance(value, str):
        raise RecordError(f"{what} is not a string")
    return value


def parse_record(obj: dict) -> tuple[TweetRecord, UserProfile]:
    """Map one decoded archive object onto a tweet and its author profile."""
    if not isinstance(obj, dict):
        raise RecordError("record is not an object")
    try:
        user = obj["user"]
        if not isinstance(user, dict):
            raise RecordError("user is not an object")
        tweet_id = _int(obj["id"], "id")
        text = _str(obj["text"], "text")
        timestamp = parse_timestamp(_str(obj["created_at"], "created_at"))
        user_id = _int(user["id"], "user.id")
        profile = UserProfile(
            user_id=user_id,
            screen_name=_str(user["screen_name"], "user.screen_name"),
            display_name=_str(user.get("name"), "user.name", ""),
            location_text=_str(user.get("location"), "user.location", ""),
            bio_text=_str(user.get("description"), "user.description", ""),
            created_at=epoch_to_date(parse_timestamp(_str(user["created_at"], "user.created_at"))),
        )
    except KeyError as exc:
        raise RecordError(f"missing field {exc.args[0]!r}") from exc

    coordinates = None
    geo = obj.get("coordinates")
    if geo is not None:
        try:
            lon, lat = geo["coordinates"]
            lat, lon = float(lat), float(lon)
        except (KeyError, TypeError, ValueError) as exc:
            raise RecordError("malformed coordinates") from exc
        if not (-90.0 <= lat <= 90.0 and -180.0 <= lon <= 180.0):
            raise RecordError(f"coordinates out of range: {lat}, {lon}")
        coordinates = (lat, lon)

    retweeted_id = None
    retweeted_author = None
    rt = obj.get("retweeted_status")
    if rt is not None:
        if not isinstance(rt, dict) or "id" not in rt:
            raise RecordError("malformed retweeted_status")
        retweeted_id = _int(rt["id"], "retweeted_status.id")
        rt_user = rt.get("user")
        if isinstance(rt_user, dict) and isinstance(rt_user.get("screen_name"), str):
            retweeted_author = "@" + normalize_text(rt_user["screen_name"])

    hashtags, mentions = hashtags_and_mentions(text)
    tweet = TweetRecord(
        tweet_id=tweet_id,
        author_id=user_id,
        timestamp=timestamp,
        text=text,
        hashtags=hashtags,
        mentions=mentions,
        coordinates=coordinates,
        is_retweet=retweeted_id is not None,
        retweeted_id=retweeted_id,
        retweeted_author=retweeted_author,
    )
    return tweet, profile


def build_corpus(
    pairs: Iterable[tuple[TweetRecord, UserProfile]],
    collection_date: Optional[date] = None,
    skipped_lines: int = 0,
) -> Corpus:
    """Assemble a corpus; the profile attached to a user's latest tweet wins."""
    tweets: dict[int, TweetRecord] = {}
    latest: dict[int, tuple[tuple[int, int], UserProfile]] = {}
    duplicates = 0
    for tweet, profile in pairs:
        if tweet.tweet_id in tweets:
            duplicates += 1
            continue
        tweets[tweet.tweet_id] = tweet
        key = (tweet.timestamp, tweet.tweet_id)
        prev = latest.get(profile.user_id)
        if prev is None or key > prev[0]:
            latest[profile.user_id] = (key, profile)
    if duplicates:
        logger.warning("dropped %d duplicate tweet ids", duplicates)

    ordered = tuple(sorted(tweets.values(), key=lambda t: (t.timestamp, t.tweet_id)))
    users = {uid: latest[uid][1] for uid in sorted(latest)}
    if collection_date is None and ordered:
        collection_date = epoch_to_date(ordered[-1].timestamp)
    if collection_date is not None:
        late = sum(1 for u in users.values() if u.created_at > collection_date)
        if late:
            logger.warning("%d users registered after the collection date", late)
    return Corpus(ordered, users, collection_date, skipped_lines)


def ingest(path: str | Path, collection_date: Optional[date] = None) -> Corpus:
    """Read a line-delimited archive. Bad lines are logged and skipped."""
    path = Path(path)
    skipped = 0

    def records():
        nonlocal skipped
        try:
            fh = open(path, "rb")
        except OSError as exc:
            raise IngestError(f"cannot read {path}: {exc}") from exc
        with fh:
            for lineno, raw in enumerate(fh, start=1):
                if not raw.strip():
                    continue
                try:
                    yield parse_record(json.loads(raw.decode("utf-8")))
                except (UnicodeDecodeError, json.JSONDecodeError, RecordError) as exc:
                    skipped += 1
                    logger.warning("%s:%d: %s", path, lineno, exc)

    pairs = list(records())
    corpus = build_corpus(pairs, collection_date, skipped)
    logger.info("ingested %d tweets from %s (%d lines skipped)", len(corpus), path, skipped)
    return corpus


def corpus_stats(corpus: Corpus) -> CorpusStats:
    originals = 0
    with_hashtag = 0
    vocabulary: set[str] = set()
    for t in corpus.tweets:
        if not t.is_retweet:
            originals += 1
            if t.hashtags:
                with_hashtag += 1
        vocabulary.update(token_surfaces(t.text))
    return CorpusStats(
        tweet_count=originals,
        retweet_count=len(corpus.tweets) - originals,
        participant_count=len({t.author_id for t in corpus.tweets}),
        vocabulary_size=len(vocabulary),
        hashtag_tweet_share=with_hashtag / originals if originals else 0.0,
    )


# -- canonical serialization -------------------------------------------------


def _dumps(obj) -> str:
    return json.dumps(obj, ensure_ascii=False, sort_keys=True, separators=(",", ":"))


def _tweet_to_json(t: TweetRecord) -> dict:
    return {
        "id": t.tweet_id,
        "author_id": t.author_id,
        "timestamp": t.timestamp,
        "text": t.text,
        "hashtags": list(t.hashtags),
        "mentions": list(t.mentions),
        "coordinates": list(t.coordinates) if t.coordinates is not None else None,
        "retweeted_id": t.retweeted_id,
        "retweeted_author": t.retweeted_author,
    }


def _tweet_from_json(d: dict) -> TweetRecord:
    coords = d["coordinates"]
    return TweetRecord(
        tweet_id=d["id"],
        author_id=d["author_id"],
        timestamp=d["timestamp"],
        text=d["text"],
        hashtags=tuple(d["hashtags"]),
        mentions=tuple(d["mentions"]),
        coordinates=(coords[0], coords[1]) if coords is not None else None,
        is_retweet=d["retweeted_id"] is not None,
        retweeted_id=d["retweeted_id"],
        retweeted_author=d["retweeted_author"],
    )


def _user_to_json(u: UserProfile) -> dict:
    return {
        "id": u.user_id,
        "screen_name": u.screen_name,
        "name": u.display_name,
        "location": u.location_text,
        "description": u.bio_text,
        "created_at": u.created_at.isoformat(),
    }


def _user_from_json(d: dict) -> UserProfile:
    return UserProfile(
        user_id=d["id"],
        screen_name=d["screen_name"],
        display_name=d["name"],
        location_text=d["location"],
        bio_text=d["description"],
        created_at=date.fromisoformat(d["created_at"]),
    )


def dump_corpus(corpus: Corpus) -> Iterable[str]:
    yield _dumps(
        {
            "format": CORPUS_FORMAT,
            "collection_date": corpus.collection_date.isoformat() if corpus.collection_date else None,
            "users": len(corpus.users),
            "tweets": len(corpus.tweets),
        }
    ) + "\n"
    for u in corpus.users.values():
        yield _dumps({"user": _user_to_json(u)}) + "\n"
    for t in corpus.tweets:
        yield _dumps({"tweet": _tweet_to_json(t)}) + "\n"


def save_corpus(corpus: Corpus, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.writelines(dump_corpus(corpus))


def load_corpus(path: str | Path) -> Corpus:
    """Read a corpus file written by :func:`save_corpus`."""
    try:
        fh = open(path, encoding="utf-8")
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    with fh:
        header = json.loads(fh.readline() or "null")
        if not isinstance(header, dict) or header.get("format") != CORPUS_FORMAT:
            raise IngestError(f"{path} is not a {CORPUS_FORMAT} file")
        users: dict[int, UserProfile] = {}
        tweets: list[TweetRecord] = []
        for line in fh:
            obj = json.loads(line)
            if "tweet" in obj:
                tweets.append(_tweet_from_json(obj["tweet"]))
            else:
                u = _user_from_json(obj["user"])
                users[u.user_id] = u
    cd = header["collection_date"]
    return Corpus(tuple(tweets), users, date.fromisoformat(cd) if cd else None)
