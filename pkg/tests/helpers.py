"""Builders for small hand-made archives."""

import json
from datetime import datetime, timezone

from geosocial.corpus import build_corpus, parse_record

_DAYS = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
BASE_TS = 1351432800  # 2012-10-28 14:00:00 UTC


def classic(ts):
    dt = datetime.fromtimestamp(ts, tz=timezone.utc)
    return (f"{_DAYS[dt.weekday()]} {_MONTHS[dt.month - 1]} {dt.day:02d} "
            f"{dt:%H:%M:%S} +0000 {dt.year}")


def record(tid, uid, text="hola", ts=None, screen=None, name="", location="", bio="",
           created="Mon Jan 04 10:00:00 +0000 2010", coords=None, rt=None, rt_author=None):
    obj = {
        "id": tid,
        "text": text,
        "created_at": classic(BASE_TS + tid if ts is None else ts),
        "user": {
            "id": uid,
            "name": name,
            "screen_name": screen or f"user{uid}",
            "location": location,
            "description": bio,
            "created_at": created,
        },
        "coordinates": None if coords is None else {"type": "Point", "coordinates": [coords[1], coords[0]]},
    }
    if rt is not None:
        obj["retweeted_status"] = {"id": rt}
        if rt_author is not None:
            obj["retweeted_status"]["user"] = {"screen_name": rt_author}
    return obj


def corpus_of(records):
    return build_corpus(parse_record(r) for r in records)


def write_jsonl(path, records, extra_lines=()):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
        for line in extra_lines:
            fh.write(line + "\n")
    return path


# criterion number -> (PASS | FAIL, title, detail), filled by test_acceptance
ACCEPTANCE = {}
