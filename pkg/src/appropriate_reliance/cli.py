"""Command-line interface: ``appropriate-reliance <subcommand>``.

Exit status is 0 on success, 1 on data errors (missing files, schema or
configuration problems) and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional, Sequence

from . import __version__
from .errors import RelianceError
from .plot import plot_data_csv, render_reliance_plot
from .report import (COMPARED_METRICS, ReportOptions, build_report, load_report, parse_log,
                     serialize_log)
from .simulator import SimConfig, derive_seed, simulate_conditions, simulate_study
from .stats import METRICS, compare, power_estimate


class DataError(Exception):
    pass


def _formatter(prog: str) -> argparse.HelpFormatter:
    return argparse.HelpFormatter(prog, width=88, max_help_position=32)


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except FileNotFoundError:
        raise DataError(f"file not found: {path}") from None
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from None


def _write_output(path: Optional[str], text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {path}: {exc.strerror}") from None


def _load_json(path: str) -> object:
    try:
        return json.loads(_read_input(path).decode("utf-8"))
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise DataError(f"{path}: invalid JSON ({exc})") from None


def _log_format(args) -> str:
    if args.input_format:
        return args.input_format
    return "json" if args.log.endswith(".json") else "csv"


def _add_log_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("log", help="trial log (CSV or JSON); '-' reads standard input")
    p.add_argument("--input-format", choices=("csv", "json"),
                   help="log format (default: from the file extension, else csv)")
    p.add_argument("--labels", help="comma-separated label set the log must use")


def _add_report_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--threshold", type=float,
                   help="reliance threshold in [0, 1] (default: random baseline)")
    p.add_argument("--baseline-model", choices=("keep_switch", "uniform_label"),
                   default="keep_switch", help="random-baseline model (default: %(default)s)")
    p.add_argument("--mode", choices=("macro", "micro"), default="macro",
                   help="aggregation over participants (default: %(default)s)")
    p.add_argument("--test", choices=("welch", "pooled"), default="welch",
                   help="two-sample test (default: %(default)s)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="appropriate-reliance", formatter_class=_formatter,
        description="Measure appropriate reliance on AI advice in sequential "
                    "human-AI decision logs.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("analyze", help="compute metrics, diagnosis and comparisons for a log",
                       formatter_class=_formatter)
    _add_log_args(p)
    _add_report_args(p)
    p.add_argument("--bootstrap", type=int, default=0, metavar="N",
                   help="add percentile bootstrap intervals with N resamples (needs --seed)")
    p.add_argument("--level", type=float, default=0.95,
                   help="bootstrap confidence level (default: %(default)s)")
    p.add_argument("--seed", type=int, help="seed for bootstrap resampling")
    p.add_argument("--strict", action="store_true",
                   help="flag trials whose final label is neither the initial decision nor the advice")
    p.add_argument("--format", choices=("json", "text"), default="json",
                   help="report format (default: %(default)s)")
    p.add_argument("--out", help="report path (default: standard output)")
    p.add_argument("--plot", metavar="SVG", help="also write the reliance-space plot")
    p.add_argument("--plot-data", metavar="CSV", help="also write the plotted values as CSV")

    p = sub.add_parser("compare", help="test the difference between two conditions",
                       formatter_class=_formatter)
    _add_log_args(p)
    p.add_argument("--conditions", nargs=2, required=True, metavar=("A", "B"),
                   help="the two conditions to compare")
    p.add_argument("--metric", choices=METRICS, action="append",
                   help="metric to compare; repeatable (default: rair and rsr)")
    p.add_argument("--test", choices=("welch", "pooled"), default="welch",
                   help="two-sample test (default: %(default)s)")
    p.add_argument("--format", choices=("json", "text"), default="json",
                   help="output format (default: %(default)s)")
    p.add_argument("--out", help="output path (default: standard output)")

    p = sub.add_parser("simulate", help="write a synthetic log from a JSON config",
                       formatter_class=_formatter)
    p.add_argument("config", help="SimConfig JSON object, or {\"conditions\": [...]}")
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--format", choices=("csv", "json"), default="csv",
                   help="log format (default: %(default)s)")
    p.add_argument("--out", help="log path (default: standard output)")
    p.add_argument("--provenance", metavar="JSON",
                   help="write hidden per-trial simulator state (single-condition configs)")

    p = sub.add_parser("power", help="estimate power of a two-condition comparison",
                       formatter_class=_formatter)
    p.add_argument("null_config", help="SimConfig JSON of the reference condition")
    p.add_argument("alt_config", help="SimConfig JSON of the treatment condition")
    p.add_argument("--seed", type=int, required=True, help="master seed (required)")
    p.add_argument("--alpha", type=float, default=0.05, help="significance level (default: %(default)s)")
    p.add_argument("--replications", type=int, default=1000,
                   help="simulated study pairs (default: %(default)s)")
    p.add_argument("--metric", choices=("rair", "rsr", "utilization"), default="rair",
                   help="compared metric (default: %(default)s)")
    p.add_argument("--test", choices=("welch", "pooled"), default="welch",
                   help="two-sample test (default: %(default)s)")
    p.add_argument("--workers", type=int, default=1, help="worker threads (default: %(default)s)")
    p.add_argument("--out", help="output path (default: standard output)")

    p = sub.add_parser("plot", help="render the reliance-space SVG from a JSON report",
                       formatter_class=_formatter)
    p.add_argument("report", help="ar-report/1 JSON; '-' reads standard input")
    p.add_argument("--out", help="SVG path (default: standard output)")
    p.add_argument("--plot-data", metavar="CSV", help="also write the plotted values as CSV")
    p.add_argument("--error-bars", choices=("se", "bootstrap"), default="se",
                   help="error-bar source (default: %(default)s)")
    return parser


def _labels(args) -> Optional[tuple[str, ...]]:
    return tuple(x for x in args.labels.split(",") if x) if args.labels else None


def _cmd_analyze(args) -> None:
    if args.threshold is not None and not 0 <= args.threshold <= 1:
        raise DataError("--threshold must lie in [0, 1]")
    if args.bootstrap and args.seed is None:
        raise DataError("--bootstrap requires --seed")
    labels = _labels(args)
    trials = parse_log(_read_input(args.log), _log_format(args), labels)
    options = ReportOptions(threshold=args.threshold, mode=args.mode, test=args.test,
                            baseline_model=args.baseline_model,
                            bootstrap_resamples=args.bootstrap, bootstrap_level=args.level,
                            seed=args.seed, strict=args.strict, labels=labels)
    report = build_report(trials, options)
    if args.plot:
        render_reliance_plot(report, args.plot)
    if args.plot_data:
        _write_output(args.plot_data, plot_data_csv(report))
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    _write_output(args.out, report.to_json() if args.format == "json" else report.to_text())


def _cmd_compare(args) -> None:
    trials = parse_log(_read_input(args.log), _log_format(args), _labels(args))
    report = build_report(trials, ReportOptions(labels=_labels(args)))
    names = {c.condition for c in report.conditions}
    for name in args.conditions:
        if name not in names:
            raise DataError(f"condition {name!r} not found; log has {', '.join(sorted(names))}")
    a, b = (report.condition(n) for n in args.conditions)
    results = []
    for metric in args.metric or COMPARED_METRICS:
        va = [v for _, v in a.aggregates[metric].per_unit_values]
        vb = [v for _, v in b.aggregates[metric].per_unit_values]
        results.append(compare(va, vb, args.test, metric_name=metric,
                               groups=tuple(args.conditions)).as_dict())
    if args.format == "json":
        text = json.dumps({"schema": "ar-compare/1", "comparisons": results},
                          indent=2, sort_keys=True) + "\n"
    else:
        text = "".join(f"{r['metric']} {r['groups'][0]} vs {r['groups'][1]}: "
                       f"t={r['t_statistic']:.3f}, df={r['degrees_of_freedom']:.1f}, "
                       f"p={r['p_value']:.4f} ({r['test']})\n" for r in results)
    _write_output(args.out, text)


def _configs(doc: object, seed: int) -> list[SimConfig]:
    if isinstance(doc, dict) and "conditions" in doc:
        entries = doc["conditions"]
        if not isinstance(entries, list) or not entries:
            raise DataError("'conditions' must be a non-empty list of SimConfig objects")
        return [SimConfig.from_dict({**e, "seed": derive_seed(seed, i)})
                for i, e in enumerate(entries)]
    if isinstance(doc, dict):
        return [SimConfig.from_dict({**doc, "seed": seed})]
    raise DataError("config must be a JSON object")


def _cmd_simulate(args) -> None:
    cfgs = _configs(_load_json(args.config), args.seed)
    if args.provenance:
        if len(cfgs) != 1:
            raise DataError("--provenance supports single-condition configs only")
        study = simulate_study(cfgs[0])
        trials = study.trials
        _write_output(args.provenance, study.provenance_json())
    else:
        trials = simulate_conditions(cfgs)
    labels = sorted({label for c in cfgs for label in c.label_names})
    _write_output(args.out, serialize_log(trials, args.format, labels))


def _cmd_power(args) -> None:
    null_doc, alt_doc = _load_json(args.null_config), _load_json(args.alt_config)
    if not isinstance(null_doc, dict) or not isinstance(alt_doc, dict):
        raise DataError("configs must be JSON objects")
    est = power_estimate(SimConfig.from_dict(null_doc), SimConfig.from_dict(alt_doc),
                         alpha=args.alpha, n_replications=args.replications, seed=args.seed,
                         metric=args.metric, test=args.test, n_workers=args.workers)
    _write_output(args.out, json.dumps(est.as_dict(), indent=2, sort_keys=True) + "\n")


def _cmd_plot(args) -> None:
    doc = load_report(_read_input(args.report))
    svg = render_reliance_plot(doc, error_bars=args.error_bars)
    if args.plot_data:
        _write_output(args.plot_data, plot_data_csv(doc, args.error_bars))
    _write_output(args.out, svg)


COMMANDS = {"analyze": _cmd_analyze, "compare": _cmd_compare, "simulate": _cmd_simulate,
            "power": _cmd_power, "plot": _cmd_plot}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)  # exits with status 2 on usage errors
    try:
        COMMANDS[args.command](args)
    except (DataError, RelianceError, ValueError, KeyError) as exc:
        msg = str(exc).replace("\n", " ")
        print(f"appropriate-reliance {args.command}: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
