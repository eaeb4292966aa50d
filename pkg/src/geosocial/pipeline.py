"""Full-pipeline orchestration, configuration and CSV output.

Stages run in dependency order: ingest, geolocate, demographics, temporal,
content, interactions, hexbin. Every data file is written with fixed
column order, RFC 4180 quoting and ``repr`` floats so two runs over the
same inputs produce identical bytes. Run metadata that varies between
runs (timestamps) lives only in ``report.json``.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import time
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field, fields
from datetime import datetime, timezone
from pathlib import Path
from typing import Optional

import yaml

from . import __version__
from .content import (
    HASHTAGS,
    MENTIONS,
    aggregate_profiles,
    normalize_series,
    popular_terms,
    tfidf_vectors,
    top_terms_per_region,
    volume_series,
)
from .corpus import Corpus, corpus_stats, ingest, save_corpus
from .demographics import (
    FEMALE,
    MALE,
    bio_word_sets,
    classify_users,
    load_lexicon,
    load_stopwords,
    top_bio_keywords,
)
from .gazetteer import (
    DomainError,
    GeoResolution,
    build_gazetteer,
    coverage_table,
    geolocate_users,
    load_aliases,
    load_hierarchy,
    pearson_log_correlation,
    region_assignment,
    regional_population_pairs,
)
from .geospatial import HexGridSpec, geo_summary, hexbin_aggregate
from .interactions import flow_diagram_export, flow_stats, flow_summary, od_matrix
from .temporal import detect_peaks, registration_deciles, registration_series, top_decile_peaks

logger = logging.getLogger(__name__)

# file name -> stage, in the order the stages write them
OUTPUT_FILES = {
    "corpus.jsonl": "ingest",
    "geolocation.csv": "geolocate",
    "demographics.csv": "demographics",
    "registrations.csv": "temporal",
    "peaks.csv": "temporal",
    "deciles.csv": "temporal",
    "volume.csv": "content",
    "profile.csv": "content",
    "popular.csv": "content",
    "tfidf.csv": "content",
    "matrix.csv": "interactions",
    "stats.csv": "interactions",
    "edges.csv": "interactions",
    "hexbin.csv": "hexbin",
}
REPORT_FILE = "report.json"


class ConfigError(ValueError):
    pass


class StageError(RuntimeError):
    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage {stage} failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass
class PipelineConfig:
    input: Optional[Path] = None
    hierarchy: Optional[Path] = None
    aliases: Optional[Path] = None
    male_names: Optional[Path] = None
    female_names: Optional[Path] = None
    stopwords: Optional[Path] = None
    out_dir: Optional[Path] = None
    bin_width: int = 300
    keep_fraction: float = 0.001
    damping: float = 0.85
    tolerance: float = 1e-10
    max_iter: int = 200
    window: int = 7
    bio_top_k: int = 50
    term_top_k: int = 25
    popular_top_k: int = 25
    cell_size: float = 500.0
    min_count: int = 20
    hex_origin: Optional[tuple[float, float]] = None

    _PATHS = ("input", "hierarchy", "aliases", "male_names", "female_names", "stopwords", "out_dir")

    @classmethod
    def from_mapping(cls, data: Mapping, base_dir: Path = Path(".")) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown configuration keys: {sorted(unknown)}")
        cfg = cls()
        cfg.update(data, base_dir)
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "PipelineConfig":
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as fh:
                data = yaml.safe_load(fh) or {}
        except (OSError, yaml.YAMLError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a mapping")
        return cls.from_mapping(data, path.parent)

    def update(self, data: Mapping, base_dir: Path = Path(".")) -> None:
        """Overlay values; relative paths resolve against ``base_dir``."""
        for key, value in data.items():
            if value is None:
                continue
            if key in self._PATHS:
                value = Path(value)
                if not value.is_absolute():
                    value = base_dir / value
            elif key == "hex_origin":
                value = parse_origin(value)
            setattr(self, key, value)

    def validate(self) -> None:
        problems = []
        required = ("input", "hierarchy", "male_names", "female_names", "stopwords", "out_dir")
        for name in required:
            if getattr(self, name) is None:
                problems.append(f"{name} is required")
        for name in ("input", "hierarchy", "aliases", "male_names", "female_names", "stopwords"):
            p = getattr(self, name)
            if p is not None and not Path(p).is_file():
                problems.append(f"{name}: no such file {p}")
        checks = [
            ("bin_width", isinstance(self.bin_width, int) and self.bin_width > 0, "a positive integer"),
            ("keep_fraction", _num(self.keep_fraction) and 0 < self.keep_fraction <= 1, "in (0, 1]"),
            ("damping", _num(self.damping) and 0 < self.damping < 1, "in (0, 1)"),
            ("tolerance", _num(self.tolerance) and self.tolerance > 0, "positive"),
            ("max_iter", isinstance(self.max_iter, int) and self.max_iter >= 1, "at least 1"),
            ("window", isinstance(self.window, int) and self.window >= 1, "at least 1"),
            ("bio_top_k", isinstance(self.bio_top_k, int) and self.bio_top_k >= 1, "at least 1"),
            ("term_top_k", isinstance(self.term_top_k, int) and self.term_top_k >= 1, "at least 1"),
            ("popular_top_k", isinstance(self.popular_top_k, int) and self.popular_top_k >= 1, "at least 1"),
            ("cell_size", _num(self.cell_size) and self.cell_size > 0, "positive"),
            ("min_count", isinstance(self.min_count, int) and self.min_count >= 1, "at least 1"),
        ]
        for name, ok, what in checks:
            if not ok:
                problems.append(f"{name} must be {what}, got {getattr(self, name)!r}")
        if self.hex_origin is not None:
            lat, lon = self.hex_origin
            if not (-90 <= lat <= 90 and -180 <= lon <= 180):
                problems.append(f"hex_origin out of range: {self.hex_origin}")
        if problems:
            raise ConfigError("; ".join(problems))

    def parameters(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            out[f.name] = str(v) if isinstance(v, Path) else (list(v) if isinstance(v, tuple) else v)
        return out


def _num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def parse_origin(value) -> tuple[float, float]:
    try:
        if isinstance(value, str):
            lat, lon = (float(x) for x in value.split(","))
        else:
            lat, lon = (float(x) for x in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"origin must be 'lat,lon', got {value!r}") from exc
    return lat, lon


@dataclass
class Report:
    outputs: list[dict] = field(default_factory=list)
    metadata: dict = field(default_factory=dict)
    summary: dict = field(default_factory=dict)
    version: str = __version__

    def add(self, path: Path, stage: str) -> None:
        data = path.read_bytes()
        self.outputs.append(
            {
                "stage": stage,
                "file": path.name,
                "bytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
            }
        )

    def write(self, path: Path) -> None:
        body = {
            "tool": "geosocial",
            "version": self.version,
            "metadata": self.metadata,
            "outputs": self.outputs,
            "summary": self.summary,
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(body, fh, indent=2, sort_keys=True, ensure_ascii=False, default=str)
            fh.write("\n")


# -- CSV writers ----------------------------------------------------------------


def fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def write_geolocation(path, resolutions: Iterable[GeoResolution], gazetteer) -> Path:
    def rows():
        for r in resolutions:
            region = gazetteer.region_of(r.unit_id) if r.unit_id is not None else None
            yield r.user_id, r.outcome, r.unit_id, r.level, region

    return write_csv(path, ["user_id", "outcome", "unit_id", "level", "region_id"], rows())


def read_region_assignment(path: str | Path) -> dict[int, int]:
    """user_id -> region_id from a geolocation CSV; unassigned users skipped."""
    out = {}
    with open(path, encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            if row["region_id"]:
                out[int(row["user_id"])] = int(row["region_id"])
    return out


def write_demographics(path, keywords) -> Path:
    return write_csv(
        path,
        ["rank", "word", "pagerank", "tendency", "user_share", "male_users", "female_users"],
        (
            (i, k.word, k.pagerank_score, k.tendency, k.user_share, k.male_users, k.female_users)
            for i, k in enumerate(keywords, start=1)
        ),
    )


def write_temporal(series_path, peaks_path, deciles_path, series, peaks, top, decile_rows) -> list[Path]:
    top_dates = {p.date for p in top}
    return [
        write_csv(series_path, ["date", "count"], ((d.isoformat(), c) for d, c in series.items())),
        write_csv(
            peaks_path,
            ["date", "volume", "significance", "top_decile"],
            ((p.date.isoformat(), p.volume, p.significance, int(p.date in top_dates)) for p in peaks),
        ),
        write_csv(
            deciles_path,
            ["percent", "date", "days_since_previous"],
            ((r.percent, r.date.isoformat(), r.days_since_previous) for r in decile_rows),
        ),
    ]


def run_content(corpus: Corpus, assignment, out_dir: Path, bin_width: int, top_k: int, popular_k: int) -> tuple[list[Path], dict]:
    series = volume_series(corpus, assignment, bin_width)
    normalized = [normalize_series(s.counts) for s in series]
    paths = [
        write_csv(
            out_dir / "volume.csv",
            ["region_id", "bin_start", "count", "normalized"],
            (
                (s.region_id, b, c, v)
                for s, norm in zip(series, normalized)
                for b, c, v in zip(s.bin_starts(), s.counts, norm)
            ),
        )
    ]
    profile_rows = []
    if series and series[0].counts:
        mean, std = aggregate_profiles(normalized)
        profile_rows = list(zip(series[0].bin_starts(), mean, std))
    paths.append(write_csv(out_dir / "profile.csv", ["bin_start", "mean", "std"], profile_rows))
    popular = [("mention", t.term, t.tweet_count) for t in popular_terms(corpus, MENTIONS, popular_k)]
    popular += [("hashtag", t.term, t.tweet_count) for t in popular_terms(corpus, HASHTAGS, popular_k)]
    paths.append(write_csv(out_dir / "popular.csv", ["kind", "term", "count"], popular))
    top = {}
    try:
        top = top_terms_per_region(tfidf_vectors(corpus, assignment), top_k)
    except ValueError as exc:
        logger.warning("tfidf skipped: %s", exc)
    paths.append(
        write_csv(
            out_dir / "tfidf.csv",
            ["region_id", "rank", "term", "weight"],
            (
                (region, rank, term, weight)
                for region in sorted(top)
                for rank, (term, weight) in enumerate(top[region], start=1)
            ),
        )
    )
    summary = {"regions": len(series), "bins": len(series[0].counts) if series else 0}
    return paths, summary


def run_interactions(corpus: Corpus, assignment, out_dir: Path) -> tuple[list[Path], dict]:
    matrix = od_matrix(corpus, assignment)
    stats = flow_stats(matrix)
    paths = [
        write_csv(
            out_dir / "matrix.csv",
            ["region_id", *matrix.regions],
            ((r, *row) for r, row in zip(matrix.regions, matrix.cells)),
        ),
        write_csv(
            out_dir / "stats.csv",
            ["region_id", "in", "out", "ratio", "intra_share"],
            ((s.region_id, s.inflow, s.outflow, s.in_out_ratio, s.intra_share) for s in stats),
        ),
        write_csv(out_dir / "edges.csv", ["source", "destination", "count"], flow_diagram_export(matrix)),
    ]
    summary = {"total": matrix.total(), "dropped_mentions": matrix.dropped_mentions}
    try:
        (rm, rs), (im, is_) = flow_summary(stats)
        summary.update(ratio_mean=rm, ratio_std=rs, intra_mean=im, intra_std=is_)
    except ValueError as exc:
        logger.warning("flow summary undefined: %s", exc)
    return paths, summary


def write_hexbin(path, bins) -> Path:
    return write_csv(
        path,
        ["q", "r", "center_lat", "center_lon", "count"],
        ((b.q, b.r, b.center[0], b.center[1], b.count) for b in bins),
    )


def hex_spec_for(corpus: Corpus, cell_size: float, origin: Optional[tuple[float, float]]) -> HexGridSpec:
    if origin is None:
        g = geo_summary(corpus)
        origin = (g.median_lat, g.median_lon) if g.geo_tweet_count else (0.0, 0.0)
    return HexGridSpec(origin=origin, cell_size=cell_size)


# -- orchestration ----------------------------------------------------------------


class _WarningCounter(logging.Handler):
    def __init__(self):
        super().__init__(logging.WARNING)
        self.count = 0

    def emit(self, record):
        self.count += 1


def run_pipeline(config: PipelineConfig) -> Report:
    """Validate ``config`` then run every stage, writing into ``config.out_dir``.

    Raises :class:`ConfigError` before anything is written, or
    :class:`StageError` naming the failing stage; in the latter case a
    partial ``report.json`` lists the files completed so far.
    """
    config.validate()
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    report = Report()
    report.metadata = {
        "started_at": datetime.now(timezone.utc).isoformat(),
        "parameters": config.parameters(),
    }
    counter = _WarningCounter()
    root = logging.getLogger("geosocial")
    root.addHandler(counter)
    t0 = time.perf_counter()
    stage = "ingest"
    try:
        corpus = ingest(config.input)
        save_corpus(corpus, out / "corpus.jsonl")
        report.add(out / "corpus.jsonl", stage)
        report.metadata["skipped_lines"] = corpus.skipped_lines
        report.summary["corpus"] = corpus_stats(corpus).as_dict()

        stage = "geolocate"
        aliases = load_aliases(config.aliases) if config.aliases else None
        gazetteer = build_gazetteer(load_hierarchy(config.hierarchy), aliases)
        resolutions = geolocate_users(corpus, gazetteer)
        report.add(write_geolocation(out / "geolocation.csv", resolutions, gazetteer), stage)
        assignment = region_assignment(resolutions, gazetteer)
        report.summary["gazetteer_entries"] = len(gazetteer)
        report.summary["coverage"] = [asdict(r) for r in coverage_table(resolutions, corpus)]
        pairs = regional_population_pairs(gazetteer, assignment)
        try:
            report.summary["pearson_log_population"] = pearson_log_correlation([p[1:] for p in pairs])
        except DomainError as exc:
            logger.warning("population correlation undefined: %s", exc)
            report.summary["pearson_log_population"] = None

        stage = "demographics"
        lexicon = load_lexicon(config.male_names, config.female_names)
        genders = classify_users(corpus, lexicon)
        word_sets = bio_word_sets(corpus, genders, load_stopwords(config.stopwords))
        keywords = top_bio_keywords(
            word_sets, genders, config.bio_top_k, config.keep_fraction,
            config.damping, config.tolerance, config.max_iter,
        )
        report.add(write_demographics(out / "demographics.csv", keywords), stage)
        values = list(genders.values())
        report.summary["genders"] = {
            g: values.count(g) for g in (MALE, FEMALE, "undetermined")
        }

        stage = "temporal"
        series = registration_series(corpus)
        peaks = detect_peaks(series, config.window)
        top = top_decile_peaks(peaks)
        for p in write_temporal(
            out / "registrations.csv", out / "peaks.csv", out / "deciles.csv",
            series, peaks, top, registration_deciles(corpus),
        ):
            report.add(p, stage)
        report.summary["peaks"] = {"detected": len(peaks), "top_decile": len(top)}

        stage = "content"
        paths, summary = run_content(
            corpus, assignment, out, config.bin_width, config.term_top_k, config.popular_top_k
        )
        for p in paths:
            report.add(p, stage)
        report.summary["content"] = summary

        stage = "interactions"
        paths, summary = run_interactions(corpus, assignment, out)
        for p in paths:
            report.add(p, stage)
        report.summary["interactions"] = summary

        stage = "hexbin"
        spec = hex_spec_for(corpus, config.cell_size, config.hex_origin)
        bins = hexbin_aggregate(corpus, spec, config.min_count)
        report.add(write_hexbin(out / "hexbin.csv", bins), stage)
        report.summary["geo"] = asdict(geo_summary(corpus))
        report.summary["hexbins"] = len(bins)
    except Exception as exc:
        report.metadata.update(status="failed", failed_stage=stage, error=str(exc))
        _finish(report, out, counter, root, t0)
        raise StageError(stage, exc) from exc
    report.metadata["status"] = "ok"
    _finish(report, out, counter, root, t0)
    return report


def _finish(report: Report, out: Path, counter, root, t0: float) -> None:
    root.removeHandler(counter)
    report.metadata["warnings"] = counter.count
    report.metadata["elapsed_seconds"] = round(time.perf_counter() - t0, 3)
    report.metadata["finished_at"] = datetime.now(timezone.utc).isoformat()
    report.write(out / REPORT_FILE)
