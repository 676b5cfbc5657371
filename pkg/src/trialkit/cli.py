"""Command-line interface: analyze, validate, datasets.

Exit codes are a stable contract: 0 success, 1 usage error, 2 structured
analysis error (the error is serialized as one JSON line on stderr).
Repeated runs over the same inputs produce byte-identical output bundles.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__, fixtures, pipeline, report
from .data import BUILTIN_NAMES, builtin_dataset, load_table
from .design import design_from_document, parse_design, validate_against_data
from .errors import AnalysisError, UnknownDataset


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad usage; the CLI contract wants 1
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="trialkit",
        description="Design-driven analysis of balanced experiments: "
                    "multi-stratum ANOVA, Tukey HSD under hierarchical "
                    "interpretation rules, diagnostics, variance components "
                    "and BLUPs, stability analysis, and a decision summary.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", parents=[], help="run the full pipeline "
                          "and export a report bundle")
    _add_input_flags(p_an)
    p_an.add_argument("--alpha", type=float, default=None,
                      help="significance level override (default: design document)")
    p_an.add_argument("--alpha-v", type=float, default=None, dest="alpha_v",
                      help="assumption-test level override")
    p_an.add_argument("--groups", default=None, metavar="COL[,COL]",
                      help="partition columns; one sub-analysis per group")
    p_an.add_argument("--out", required=True, metavar="DIR",
                      help="output directory for the report bundle")
    p_an.add_argument("--minimize", action="store_true",
                      help="rank small responses best (e.g. disease severity)")
    p_an.add_argument("--format", choices=("text", "csv", "structured"),
                      default="text",
                      help="what to print on stdout (bundle always written)")

    p_val = sub.add_parser("validate", help="check a design document against "
                           "a dataset without analyzing")
    _add_input_flags(p_val)

    p_ds = sub.add_parser("datasets", help="list or dump builtin datasets")
    ds_sub = p_ds.add_subparsers(dest="ds_command", required=True)
    ds_sub.add_parser("list", help="list builtin dataset names")
    p_show = ds_sub.add_parser("show", help="dump one dataset as CSV")
    p_show.add_argument("name")
    return parser


def _add_input_flags(p) -> None:
    p.add_argument("--data", metavar="PATH", default=None,
                   help="CSV file (long format, header row)")
    p.add_argument("--design", metavar="PATH", default=None,
                   help="design document (JSON)")
    p.add_argument("--dataset", metavar="NAME", default=None,
                   help=f"builtin dataset ({', '.join(BUILTIN_NAMES)}); "
                        "implies its canonical design")


def _load_inputs(args, parser):
    if args.dataset is not None:
        if args.data is not None:
            parser.error("--dataset and --data are mutually exclusive")
        if args.dataset not in BUILTIN_NAMES:
            raise UnknownDataset(
                f"unknown dataset '{args.dataset}' "
                f"(available: {', '.join(BUILTIN_NAMES)})", name=args.dataset)
        data = builtin_dataset(args.dataset)
        if args.design is not None:
            spec = parse_design(_read(args.design))
        else:
            spec = design_from_document(fixtures.DESIGN_DOCUMENTS[args.dataset])
        return spec, data
    if args.data is None or args.design is None:
        parser.error("either --dataset or both --data and --design are required")
    spec = parse_design(_read(args.design))
    data = load_table(_read(args.data))
    return spec, data


def _read(path: str) -> str:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise AnalysisError(f"cannot read '{path}': {exc.strerror}") from None


def _cmd_analyze(args, parser) -> int:
    spec, data = _load_inputs(args, parser)
    groups = None
    if args.groups is not None:
        groups = tuple(g.strip() for g in args.groups.split(",") if g.strip())
    elif spec.group_factors:
        groups = spec.group_factors

    if groups:
        grouped = pipeline.analyze_grouped(
            spec, data, groups, alpha=args.alpha, alpha_v=args.alpha_v,
            minimize=args.minimize)
        files = report.grouped_bundle_files(grouped)
        report.write_bundle(files, args.out)
        if args.format in ("text", "csv"):
            sys.stdout.write(files["report.txt"])
        else:
            ok = {"/".join(k): o.ok for k, o in grouped.items()}
            sys.stdout.write(json.dumps({"groups": ok}, indent=2) + "\n")
        n_ok = sum(1 for _, o in grouped.items() if o.ok)
        if n_ok == 0:
            first = next(o.error for _, o in grouped.items())
            sys.stderr.write(json.dumps(first.to_record()) + "\n")
            return 2
        return 0

    result = pipeline.analyze(spec, data, alpha=args.alpha,
                              alpha_v=args.alpha_v, minimize=args.minimize)
    files = report.bundle_files(result)
    report.write_bundle(files, args.out)
    if args.format == "text":
        sys.stdout.write(files["report.txt"])
    elif args.format == "csv":
        sys.stdout.write(files["anova.csv"])
    else:
        sys.stdout.write(files["result.json"])
    return 0


def _cmd_validate(args, parser) -> int:
    spec, data = _load_inputs(args, parser)
    vd = validate_against_data(spec, data)
    lines = [
        f"design: {spec.kind} (response {spec.response})",
        f"rows: {vd.n_rows}; replicates per cell: {vd.replicates}",
    ]
    for name in spec.factor_names():
        lines.append(f"{name}: {len(vd.levels[name])} levels "
                     f"({', '.join(vd.levels[name])})")
    lines.append("ok: design and data are compatible")
    sys.stdout.write("\n".join(lines) + "\n")
    return 0


def _cmd_datasets(args) -> int:
    if args.ds_command == "list":
        for name in BUILTIN_NAMES:
            sys.stdout.write(name + "\n")
        return 0
    data = builtin_dataset(args.name)
    sys.stdout.write(data.to_csv())
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "analyze":
            return _cmd_analyze(args, parser)
        if args.command == "validate":
            return _cmd_validate(args, parser)
        if args.command == "datasets":
            return _cmd_datasets(args)
    except AnalysisError as exc:
        sys.stderr.write(json.dumps(exc.to_record()) + "\n")
        return 2
    return 1  # pragma: no cover


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
