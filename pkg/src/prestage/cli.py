"""Command-line entry point.

Exit status: 0 success, 1 usage error, 2 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Sequence, TextIO

from .batch import GenerationConfig, generate_all
from .census_index import build_index, entity_counts, parse_fips
from .colormap import ColorScheme, NormalizationMode
from .errors import PrestageError
from .geometry import (
    GeoPoint,
    RadiusQuery,
    aggregate_demographics,
    bbox_center,
    blocks_within_radius,
    haversine_km,
)
from .ingest import SyntheticSpec, generate_synthetic, load_bundle_file, serialize_bundle

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # argparse would exit with status 2
        raise UsageError(f"{self.prog}: error: {message}")


def _csv(kind):
    def parse(text: str):
        try:
            return tuple(kind.parse(t) for t in text.split(",") if t.strip())
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from None
    return parse


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="prestage", description="Pre-staged census map and workbook generator.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    ing = sub.add_parser("ingest", help="validate a bundle and report entity counts")
    ing.add_argument("bundle")
    ing.add_argument("--out", help="write the canonical re-serialized bundle here")

    syn = sub.add_parser("synth", help="write a synthetic bundle")
    syn.add_argument("--seed", type=int, default=0)
    syn.add_argument("--states", type=int, default=3)
    syn.add_argument("--counties", type=int, default=4, help="counties per state")
    syn.add_argument("--blocks", type=int, default=250, help="blocks per county")
    syn.add_argument("--density-min", type=float, default=5.0)
    syn.add_argument("--density-max", type=float, default=50000.0)
    syn.add_argument("--out", required=True)

    gen = sub.add_parser("generate", help="generate the KML/XLSX corpus")
    gen.add_argument("bundle")
    gen.add_argument("--out", help="output root directory")
    gen.add_argument("--config", help="JSON file with generation settings")
    gen.add_argument("--workers", type=int)
    gen.add_argument("--schemes", type=_csv(ColorScheme))
    gen.add_argument("--modes", type=_csv(NormalizationMode))
    gen.add_argument("--alpha", type=int, help="fill alpha byte (0-255)")
    gen.add_argument("--case-rate", type=float)
    gen.add_argument("--no-kml", action="store_true")
    gen.add_argument("--no-xlsx", action="store_true")

    q = sub.add_parser("query", help="blocks and totals within a radius")
    q.add_argument("bundle")
    q.add_argument("--county", required=True, help="5-digit state+county FIPS")
    q.add_argument("--lon", type=float, help="center longitude (default: county center)")
    q.add_argument("--lat", type=float, help="center latitude (default: county center)")
    q.add_argument("--radius", type=float, required=True, help="radius in km")

    st = sub.add_parser("stats", help="entity counts and national density bounds")
    st.add_argument("bundle")
    return p


def _config(args) -> GenerationConfig:
    base: dict = {}
    if args.config:
        with open(args.config, encoding="utf-8") as fh:
            base = json.load(fh)
        if not isinstance(base, dict):
            raise UsageError("--config must contain a JSON object")
    env_workers = os.environ.get("PRESTAGE_WORKERS")

    def pick(flag, key, default):
        if flag is not None:
            return flag
        if key in base:
            return base[key]
        return default

    workers = pick(args.workers, "workers", int(env_workers) if env_workers else 1)
    schemes = args.schemes or tuple(ColorScheme.parse(s) for s in base.get("schemes", [])) \
        or tuple(ColorScheme)
    modes = args.modes or tuple(NormalizationMode.parse(m) for m in base.get("modes", [])) \
        or tuple(NormalizationMode)
    out = pick(args.out, "out", None)
    if out is None:
        raise UsageError("generate needs --out (or \"out\" in --config)")
    return GenerationConfig(
        output_root=Path(out),
        workers=int(workers),
        schemes=schemes,
        modes=modes,
        fill_alpha=int(pick(args.alpha, "alpha", 0x99)),
        case_rate=float(pick(args.case_rate, "case_rate", 0.0)),
        emit_kml=False if args.no_kml else bool(base.get("emit_kml", True)),
        emit_xlsx=False if args.no_xlsx else bool(base.get("emit_xlsx", True)),
    )


def _query(args, out: TextIO) -> None:
    index = load_bundle_file(args.bundle)
    geoid = args.county
    if len(geoid) != 5 or not geoid.isdigit():
        raise UsageError(f"--county must be a 5-digit FIPS, got {geoid!r}")
    s_fp, c_fp, _ = parse_fips(geoid + "0000000")
    county = index.county(s_fp, c_fp)
    if county is None:
        raise PrestageError(f"county {geoid} not in bundle")
    center = bbox_center(county.bbox)
    q = RadiusQuery(GeoPoint(args.lon if args.lon is not None else center.lon,
                             args.lat if args.lat is not None else center.lat), args.radius)
    hits = blocks_within_radius(county, q)
    out.write(f"{'GEOID':<12} {'LON':>12} {'LAT':>11} {'DIST_KM':>10} {'POP':>7} "
              f"{'UNDER15':>7} {'OVER65':>7} {'DENSITY':>9} {'MED_AGE':>7}\n")
    for b in hits:
        c = bbox_center(b.bbox)
        d = b.demo
        out.write(f"{b.full_fips:<12} {c.lon:>12.6f} {c.lat:>11.6f} "
                  f"{haversine_km(q.center, c):>10.4f} {d.population:>7d} {d.under_15:>7d} "
                  f"{d.over_65:>7d} {d.density:>9.0f} {d.median_age:>7.1f}\n")
    agg = aggregate_demographics(hits)
    out.write(f"blocks={agg.block_count} population={agg.population} under_15={agg.under_15} "
              f"over_65={agg.over_65} mean_density={agg.mean_density:.1f} "
              f"mean_of_medians={agg.mean_of_medians:.1f}\n")


def run(argv: Sequence[str], out: TextIO = sys.stdout, err: TextIO = sys.stderr) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
        if args.command is None:
            raise UsageError("no command given")

        if args.command == "ingest":
            index = load_bundle_file(args.bundle)
            if args.out:
                Path(args.out).write_bytes(serialize_bundle(index))
            s, c, b = entity_counts(index)
            out.write(f"states={s} counties={c} blocks={b}\n")
        elif args.command == "synth":
            spec = SyntheticSpec(args.seed, args.states, args.counties, args.blocks,
                                 (args.density_min, args.density_max))
            index = build_index(generate_synthetic(spec))
            Path(args.out).write_bytes(serialize_bundle(index))
            s, c, b = entity_counts(index)
            out.write(f"wrote {args.out}: states={s} counties={c} blocks={b}\n")
        elif args.command == "generate":
            try:
                cfg = _config(args)
            except (ValueError, TypeError) as exc:
                raise UsageError(str(exc)) from None
            index = load_bundle_file(args.bundle)
            report = generate_all(index, cfg)
            out.write(f"files_written={report.files_written} bytes_written={report.bytes_written} "
                      f"failures={len(report.per_county_failures)}\n")
            for fips, msg in report.per_county_failures:
                out.write(f"failure {fips} {msg}\n")
            out.write(f"elapsed_s={report.elapsed:.3f}\n")
            return EXIT_DATA if report.per_county_failures else EXIT_OK
        elif args.command == "query":
            _query(args, out)
        elif args.command == "stats":
            index = load_bundle_file(args.bundle)
            s, c, b = entity_counts(index)
            lo, hi = index.density_bounds_absolute
            out.write(f"states={s} counties={c} blocks={b}\n")
            out.write(f"density_min={lo!r} density_max={hi!r}\n")
        return EXIT_OK
    except SystemExit as exc:  # --help
        return EXIT_OK if not exc.code else EXIT_USAGE
    except UsageError as exc:
        err.write(parser.format_help() if not argv else parser.format_usage())
        err.write(f"{exc}\n")
        return EXIT_USAGE
    except (PrestageError, OSError, ValueError, json.JSONDecodeError) as exc:
        err.write(f"prestage: error: {exc}\n")
        return EXIT_DATA


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
