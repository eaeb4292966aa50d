"""Command line entry point: ``geosocial <subcommand> ...``.

Each analysis stage is available as its own subcommand working on the
canonical corpus file written by ``ingest``; ``run`` chains all of them
from one configuration file. Exit codes: 0 success, 1 stage failure,
2 configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .corpus import IngestError, corpus_stats, ingest, load_corpus, save_corpus
from .demographics import bio_word_sets, classify_users, load_lexicon, load_stopwords, top_bio_keywords
from .gazetteer import (
    build_gazetteer,
    geolocate_users,
    load_aliases,
    load_hierarchy,
    packaged_aliases_path,
    packaged_hierarchy_path,
)
from .geospatial import hexbin_aggregate
from .pipeline import (
    ConfigError,
    PipelineConfig,
    StageError,
    hex_spec_for,
    parse_origin,
    read_region_assignment,
    run_content,
    run_interactions,
    run_pipeline,
    write_demographics,
    write_geolocation,
    write_hexbin,
    write_temporal,
)
from .temporal import detect_peaks, registration_deciles, registration_series, top_decile_peaks

log = logging.getLogger("geosocial")

EXIT_OK, EXIT_STAGE, EXIT_CONFIG = 0, 1, 2


def _existing(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such file: {p}")
    return p


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(f"{path.stem}_{suffix}{path.suffix}")


def _load_config(args) -> dict:
    """Values from ``--config`` (JSON or YAML), paths made absolute."""
    if not getattr(args, "config", None):
        return {}
    cfg = PipelineConfig.from_file(args.config)
    return {k: v for k, v in vars(cfg).items()}


def _pick(args, name: str, cfg: dict, key: str, default=None):
    value = getattr(args, name, None)
    if value is not None:
        return value
    value = cfg.get(key)
    return default if value is None else value


def _out_dir(args, cfg: dict) -> Path:
    out = Path(_pick(args, "out_dir", cfg, "out_dir", "."))
    out.mkdir(parents=True, exist_ok=True)
    return out


# -- subcommands ------------------------------------------------------------------


def cmd_ingest(args, cfg):
    src = _existing(_pick(args, "input", cfg, "input"))
    out = Path(args.out) if args.out else _out_dir(args, cfg) / "corpus.jsonl"
    corpus = ingest(src)
    save_corpus(corpus, out)
    stats = corpus_stats(corpus).as_dict()
    stats["skipped_lines"] = corpus.skipped_lines
    if args.stats:
        json.dump(stats, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    log.info("ingested %d tweets from %d users, skipped %d lines",
             len(corpus.tweets), len(corpus.users), corpus.skipped_lines)


def cmd_geolocate(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    hierarchy = _existing(_pick(args, "hierarchy", cfg, "hierarchy", packaged_hierarchy_path()))
    aliases = _pick(args, "aliases", cfg, "aliases")
    if aliases is None and args.hierarchy is None and not cfg:
        aliases = packaged_aliases_path()
    g = build_gazetteer(load_hierarchy(hierarchy), load_aliases(_existing(aliases)) if aliases else None)
    out = Path(args.out) if args.out else _out_dir(args, cfg) / "geolocation.csv"
    resolutions = geolocate_users(corpus, g)
    write_geolocation(out, resolutions, g)
    log.info("resolved %d of %d users", sum(r.unit_id is not None for r in resolutions), len(resolutions))


def cmd_demographics(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    lexicon = load_lexicon(
        _existing(_pick(args, "male", cfg, "male_names")),
        _existing(_pick(args, "female", cfg, "female_names")),
    )
    stopwords = load_stopwords(_existing(_pick(args, "stopwords", cfg, "stopwords")))
    genders = classify_users(corpus, lexicon)
    keywords = top_bio_keywords(
        bio_word_sets(corpus, genders, stopwords),
        genders,
        _pick(args, "top_k", cfg, "bio_top_k", 50),
        _pick(args, "keep_fraction", cfg, "keep_fraction", 0.001),
        _pick(args, "damping", cfg, "damping", 0.85),
        _pick(args, "tolerance", cfg, "tolerance", 1e-10),
        _pick(args, "max_iter", cfg, "max_iter", 200),
    )
    out = Path(args.out) if args.out else _out_dir(args, cfg) / "demographics.csv"
    write_demographics(out, keywords)


def cmd_temporal(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    window = _pick(args, "window", cfg, "window", 7)
    if window < 1:
        raise ConfigError("--window must be at least 1")
    if args.out:
        series_path = Path(args.out)
        peaks_path, deciles_path = _sibling(series_path, "peaks"), _sibling(series_path, "deciles")
    else:
        out = _out_dir(args, cfg)
        series_path, peaks_path, deciles_path = (
            out / "registrations.csv", out / "peaks.csv", out / "deciles.csv"
        )
    series = registration_series(corpus)
    peaks = detect_peaks(series, window)
    write_temporal(
        series_path, peaks_path, deciles_path, series, peaks,
        top_decile_peaks(peaks), registration_deciles(corpus),
    )


def cmd_content(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    assignment = read_region_assignment(_existing(args.regions))
    bin_width = _pick(args, "bin", cfg, "bin_width", 300)
    if bin_width < 1:
        raise ConfigError("--bin must be positive")
    top_k = _pick(args, "top_k", cfg, "term_top_k", 25)
    run_content(corpus, assignment, _out_dir(args, cfg), bin_width, top_k,
                cfg.get("popular_top_k") or 25)


def cmd_interactions(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    assignment = read_region_assignment(_existing(args.regions))
    run_interactions(corpus, assignment, _out_dir(args, cfg))


def cmd_hexbin(args, cfg):
    corpus = load_corpus(_existing(args.corpus))
    origin = parse_origin(args.origin) if args.origin else cfg.get("hex_origin")
    cell = _pick(args, "cell", cfg, "cell_size", 500.0)
    min_count = _pick(args, "min_count", cfg, "min_count", 20)
    if cell <= 0 or min_count < 1:
        raise ConfigError("--cell must be positive and --min-count at least 1")
    bins = hexbin_aggregate(corpus, hex_spec_for(corpus, cell, origin), min_count)
    out = Path(args.out) if args.out else _out_dir(args, cfg) / "hexbin.csv"
    write_hexbin(out, bins)


def cmd_run(args, cfg):
    config = PipelineConfig.from_file(args.config) if getattr(args, "config", None) else PipelineConfig()
    overrides = {
        "input": args.input,
        "hierarchy": args.hierarchy,
        "aliases": args.aliases,
        "male_names": args.male,
        "female_names": args.female,
        "stopwords": args.stopwords,
        "out_dir": getattr(args, "out_dir", None),
        "bin_width": args.bin,
        "keep_fraction": args.keep_fraction,
        "damping": args.damping,
        "tolerance": args.tolerance,
        "max_iter": args.max_iter,
        "window": args.window,
        "bio_top_k": args.top_k,
        "cell_size": args.cell,
        "min_count": args.min_count,
        "hex_origin": args.origin,
    }
    config.update(overrides)
    report = run_pipeline(config)
    log.info("wrote %d files to %s", len(report.outputs) + 1, config.out_dir)


def cmd_synth(args, cfg):
    from .synth import SynthError, generate_synthetic

    out = Path(getattr(args, "out_dir", None) or cfg.get("out_dir") or ".")
    try:
        manifest = generate_synthetic(out, seed=args.seed, n_users=args.users, n_tweets=args.tweets,
                                      n_regions=args.regions)
    except SynthError as exc:
        raise ConfigError(str(exc)) from exc
    log.info("synthetic corpus: %d tweets, %d users in %s", manifest["tweets"], manifest["users"], out)


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=argparse.SUPPRESS, help="JSON or YAML configuration file")
    common.add_argument("--out-dir", default=argparse.SUPPRESS, help="output directory")
    common.add_argument("--quiet", action="store_true", default=argparse.SUPPRESS, help="log errors only")

    parser = argparse.ArgumentParser(prog="geosocial", description=__doc__.split("\n")[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", parents=[common], help="parse a raw tweet archive")
    p.add_argument("--input", help="line-delimited JSON archive")
    p.add_argument("--out", help="canonical corpus file (default OUT_DIR/corpus.jsonl)")
    p.add_argument("--stats", action="store_true", help="print corpus statistics as JSON")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("geolocate", parents=[common], help="resolve profile locations")
    p.add_argument("--corpus", required=True)
    p.add_argument("--hierarchy", help="administrative hierarchy CSV (default: packaged Chile)")
    p.add_argument("--aliases")
    p.add_argument("--out")
    p.set_defaults(func=cmd_geolocate)

    p = sub.add_parser("demographics", parents=[common], help="gender split and biography keywords")
    p.add_argument("--corpus", required=True)
    p.add_argument("--male")
    p.add_argument("--female")
    p.add_argument("--stopwords")
    p.add_argument("--top-k", type=int)
    p.add_argument("--keep-fraction", type=float)
    p.add_argument("--damping", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_demographics)

    p = sub.add_parser("temporal", parents=[common], help="registration series, peaks and deciles")
    p.add_argument("--corpus", required=True)
    p.add_argument("--window", type=int)
    p.add_argument("--out", help="series CSV; peaks and deciles go next to it")
    p.set_defaults(func=cmd_temporal)

    p = sub.add_parser("content", parents=[common], help="regional volume and TF-IDF terms")
    p.add_argument("--corpus", required=True)
    p.add_argument("--regions", required=True, help="geolocation CSV")
    p.add_argument("--bin", type=int, help="bin width in seconds")
    p.add_argument("--top-k", type=int)
    p.set_defaults(func=cmd_content)

    p = sub.add_parser("interactions", parents=[common], help="region-to-region mention flow")
    p.add_argument("--corpus", required=True)
    p.add_argument("--regions", required=True, help="geolocation CSV")
    p.set_defaults(func=cmd_interactions)

    p = sub.add_parser("hexbin", parents=[common], help="hexagonal density of geotagged tweets")
    p.add_argument("--corpus", required=True)
    p.add_argument("--origin", help="lat,lon (default: median of geotagged points)")
    p.add_argument("--cell", type=float, help="cell size in meters")
    p.add_argument("--min-count", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_hexbin)

    p = sub.add_parser("run", parents=[common], help="full pipeline from a config file")
    p.add_argument("--input")
    p.add_argument("--hierarchy")
    p.add_argument("--aliases")
    p.add_argument("--male")
    p.add_argument("--female")
    p.add_argument("--stopwords")
    p.add_argument("--bin", type=int)
    p.add_argument("--keep-fraction", type=float)
    p.add_argument("--damping", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--top-k", type=int)
    p.add_argument("--cell", type=float)
    p.add_argument("--min-count", type=int)
    p.add_argument("--origin")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("synth", parents=[common], help="write a seeded synthetic archive")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--users", type=int, default=1000)
    p.add_argument("--tweets", type=int, default=10000)
    p.add_argument("--regions", type=int, default=15)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.ERROR if getattr(args, "quiet", False) else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        cfg = {} if args.command == "run" else _load_config(args)
        args.func(args, cfg)
    except ConfigError as exc:
        print(f"geosocial: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"geosocial: stage {exc.stage} failed: {exc.cause}", file=sys.stderr)
        return EXIT_STAGE
    except (IngestError, OSError, ValueError) as exc:
        print(f"geosocial: stage {args.command} failed: {exc}", file=sys.stderr)
        return EXIT_STAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
