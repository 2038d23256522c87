"""Command-line entry point: ``mifx {extract,evaluate,mi,compare}``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from .baselines import lda_fit, pca_fit
from .data import DataError, apply_normalizer, fit_normalizer, load_csv, parse_dims, parse_float, read_rows, stratified_kfold
from .evaluation import METHOD_ORDER, config_digest, cross_validate, load_reports, render_table, save_reports
from .extraction import ExtractionConfig, extract
from .ga import GaConfig
from .infotheory import (HistogramConfig, bayes_error_bounds, entropy_binned, entropy_discrete,
                         mi_cc, mi_cd)

EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 1, 2, 3

log = logging.getLogger("mifx")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_data_args(p, label_required=True):
    p.add_argument("--data", required=True, help="CSV file")
    p.add_argument("--label-col", default="last" if label_required else None,
                   help="label column: zero-based index, header name, or 'last'")
    p.add_argument("--no-header", action="store_true", help="the CSV has no header row")


def _add_hist_args(p):
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--log-base", choices=["2", "e"], default="2")
    p.add_argument("--bias-correction", action="store_true")


def _add_extraction_args(p):
    _add_hist_args(p)
    p.add_argument("--config", help="JSON file with extraction settings (hist/ga/entropy_floor)")
    p.add_argument("--population", type=int)
    p.add_argument("--generations", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--refine", action="store_true", help="hill-climb after the GA")
    p.add_argument("--entropy-floor", type=float)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--norm", choices=["per-feature", "global"], default="per-feature")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="mifx", description="Mutual-information feature extraction")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("extract", help="fit a projection and write the model JSON")
    _add_data_args(p)
    _add_extraction_args(p)
    p.add_argument("--dims", type=int, default=2, help="number of components to extract")
    p.add_argument("--method", choices=["mifx", "pca", "lda"], default="mifx")
    p.add_argument("--out", required=True, help="model JSON path")

    p = sub.add_parser("evaluate", help="cross-validated 1-NN accuracy per dimension")
    _add_data_args(p)
    _add_extraction_args(p)
    p.add_argument("--method", default="mifx", help="raw, pca, lda, mifx, a comma list, or all")
    p.add_argument("--dims", default="1-7")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--k", type=int, default=1, help="neighbours for KNN")
    p.add_argument("--no-stratify", action="store_true")
    p.add_argument("--raw-columns", help="feature columns used by the raw method (dims syntax, 1-based)")
    p.add_argument("--out", help="report JSON path")
    p.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")

    p = sub.add_parser("mi", help="entropy / mutual information of CSV columns")
    _add_data_args(p, label_required=False)
    _add_hist_args(p)
    p.add_argument("--x", required=True, help="column index or name")
    p.add_argument("--y", help="second real-valued column")

    p = sub.add_parser("compare", help="merge report files into one table")
    p.add_argument("reports", nargs="+")
    p.add_argument("--reference", help="CSV of reference values: dim,<column>...")
    p.add_argument("--format", choices=["markdown", "csv", "json"], default="markdown")
    p.add_argument("--out")
    return parser


def _hist_config(args) -> HistogramConfig:
    return HistogramConfig(n_bins=args.bins, log_base=math.e if args.log_base == "e" else 2.0,
                           bias_correction=args.bias_correction)


def _extraction_config(args, t: int) -> ExtractionConfig:
    base = {}
    if args.config:
        try:
            base = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise UsageError(f"cannot read config {args.config}: {e}") from None
    hist = HistogramConfig.from_dict(base["hist"]) if "hist" in base else _hist_config(args)
    ga_kw = dict(base.get("ga", {}))
    for name in ("population", "generations", "restarts"):
        if getattr(args, name) is not None:
            ga_kw[name] = getattr(args, name)
    if args.refine:
        ga_kw["refine"] = True
    floor = args.entropy_floor if args.entropy_floor is not None else base.get("entropy_floor", 1e-6)
    try:
        return ExtractionConfig(t=t, hist=hist, ga=GaConfig(**ga_kw), entropy_floor=floor)
    except (TypeError, ValueError) as e:
        raise UsageError(str(e)) from None


def _load(args):
    return load_csv(args.data, args.label_col, header=not args.no_header)


def _announce(seed, digest):
    print(f"seed={seed} config_digest={digest}", file=sys.stderr)


def cmd_extract(args) -> int:
    data = _load(args)
    if args.dims < 1 or args.dims > data.d:
        raise UsageError(f"dims exceeds feature count ({args.dims} > {data.d})")
    cfg = _extraction_config(args, args.dims)
    train = apply_normalizer(fit_normalizer(data, args.norm), data)
    digest = config_digest({"data": str(args.data), "n": data.n, "d": data.d, "method": args.method,
                            "seed": args.seed, "normalization": args.norm,
                            "extraction": cfg.to_dict()})
    _announce(args.seed, digest)
    if args.method == "mifx":
        W = extract(train, cfg, args.seed)
    elif args.method == "pca":
        W = pca_fit(train, args.dims)
    else:
        W = lda_fit(train, args.dims)
    if args.method != "mifx":
        W = type(W)(W.vectors, W.method, [], None, None)
    W.save(args.out)
    for i, diag in enumerate(W.diagnostics, 1):
        print(f"component {i}: relevance={diag['relevance']:.6f} penalty={diag['penalty']:.6f} "
              f"objective={diag['objective']:.6f}")
    print(f"wrote {args.out} (method={W.method}, t={W.t}, d={W.d})")
    return 0


def _methods(text: str) -> list[str]:
    if text == "all":
        return list(METHOD_ORDER)
    methods = [m.strip() for m in text.split(",") if m.strip()]
    bad = [m for m in methods if m not in METHOD_ORDER]
    if bad or not methods:
        raise UsageError(f"unknown method(s) {bad}; choose from {', '.join(METHOD_ORDER)} or all")
    return methods


def cmd_evaluate(args) -> int:
    methods = _methods(args.method)
    try:
        dims = parse_dims(args.dims)
    except ValueError as e:
        raise UsageError(str(e)) from None
    data = _load(args)
    if dims[-1] > data.d:
        raise UsageError(f"dims exceeds feature count ({dims[-1]} > {data.d})")
    if args.folds < 2 or args.folds > data.n:
        raise UsageError(f"folds must lie in [2, {data.n}]")
    raw_cols = None
    if args.raw_columns:
        raw_cols = [c - 1 for c in parse_dims(args.raw_columns)]
        if raw_cols[-1] >= data.d:
            raise UsageError("raw column index exceeds feature count")
    cfg = _extraction_config(args, max(dims))
    plan = stratified_kfold(data, args.folds, args.seed, not args.no_stratify)
    reports = []
    for m in methods:
        rep = cross_validate(data, m, dims, args.folds, args.seed, cfg, plan=plan, knn_k=args.k,
                             norm_mode=args.norm, raw_columns=raw_cols, n_jobs=args.threads)
        _announce(rep.seed, rep.config_digest)
        reports.append(rep)
    if args.out:
        save_reports(reports, args.out)
    sys.stdout.write(render_table(reports, args.format))
    return 0


def _column(names, ncols, spec) -> int:
    if names is not None and spec in names:
        return names.index(spec)
    if spec == "last":
        return ncols - 1
    try:
        idx = int(spec)
    except (TypeError, ValueError):
        raise UsageError(f"column {spec!r} not found") from None
    if not -ncols <= idx < ncols:
        raise UsageError(f"column {spec!r} not found ({ncols} columns)")
    return idx % ncols


def cmd_mi(args) -> int:
    names, rows = read_rows(args.data, header=not args.no_header)
    ncols = len(rows[0])
    cfg = _hist_config(args)
    header_offset = 1 if names is not None else 0

    def real_column(spec):
        j = _column(names, ncols, spec)
        return np.array([parse_float(r[j], i + 1 + header_offset, names[j] if names else j)
                         for i, r in enumerate(rows)])

    xi = _column(names, ncols, args.x)
    x = real_column(args.x)
    label = (lambda j: names[j] if names else str(j))
    print(f"H({label(xi)}) = {entropy_binned(x, cfg):.6f} bits (binned, {cfg.n_bins} bins)")
    if args.y is not None:
        yi = _column(names, ncols, args.y)
        y = real_column(args.y)
        print(f"I({label(xi)}; {label(yi)}) = {mi_cc(x, y, cfg):.6f} bits")
    if args.label_col is not None:
        li = _column(names, ncols, args.label_col)
        codes: dict[str, int] = {}
        c = np.array([codes.setdefault(r[li], len(codes)) for r in rows])
        h_c = entropy_discrete(c)
        mi = mi_cd(x, c, cfg)
        lo, hi = bayes_error_bounds(h_c, mi if cfg.log_base == 2 else mi / math.log(2), max(len(codes), 2))
        print(f"H(C) = {h_c:.6f} bits ({len(codes)} classes)")
        print(f"I({label(xi)}; C) = {mi:.6f} bits")
        print(f"Bayes error bounds: Fano lower = {lo:.6f}, Hellman-Raviv upper = {hi:.6f}")
    return 0


def read_reference(path) -> dict[str, dict[int, float]]:
    """Reference-table CSV with header ``dim,<column>...``; ``-`` or empty means absent."""
    with open(path, newline="") as f:
        rows = [r for r in csv.reader(f) if r]
    if not rows or rows[0][0].strip().lower() != "dim":
        raise DataError(f"{path}: reference CSV must start with a 'dim' header column")
    cols = [c.strip() for c in rows[0][1:]]
    out: dict[str, dict[int, float]] = {c: {} for c in cols}
    for i, r in enumerate(rows[1:], 2):
        dim = int(parse_float(r[0], i, "dim"))
        for c, v in zip(cols, r[1:]):
            v = v.strip()
            if v and v != "-":
                out[c][dim] = parse_float(v, i, c)
    return out


def cmd_compare(args) -> int:
    reports = []
    for p in args.reports:
        try:
            reports.extend(load_reports(p))
        except FileNotFoundError:
            raise DataError(f"report file not found: {p}") from None
        except (KeyError, json.JSONDecodeError) as e:
            raise DataError(f"{p}: not a report file ({e})") from None
    ref = read_reference(args.reference) if args.reference else None
    try:
        text = render_table(reports, args.format, ref)
    except ValueError as e:
        raise DataError(str(e)) from None
    if args.out:
        Path(args.out).write_text(text)
    sys.stdout.write(text)
    return 0


COMMANDS = {"extract": cmd_extract, "evaluate": cmd_evaluate, "mi": cmd_mi, "compare": cmd_compare}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        print(f"mifx: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as e:
        print(f"mifx: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (ArithmeticError, np.linalg.LinAlgError, FloatingPointError) as e:
        print(f"mifx: numeric failure: {e}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
