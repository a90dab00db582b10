"""Command-line front end: ``fidvr {analyze,compare,batch,generate,plot}``.

Exit codes: 0 assessed without violation, 2 assessed with violation,
1 on any error. ``EVRVI_LOG`` selects the diagnostic level on stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

from .criteria import ConfigurationError, criterion_trace, load_criteria
from .emd import EmdConfig
from .entropy import LegacyConfig, legacy_kl_index
from .envelope import extract_envelopes
from .evrvi import EvrviConfig, assess
from .plot import analysis_svg, envelope_svg
from .report import evaluate_corpus, format_matrix, results_csv, summary_dict, write_summary
from .synth import build_corpus, load_template, read_corpus, write_corpus
from .trace import TraceError, load_trace, resample_uniform, window_post_fault

log = logging.getLogger("fidvr")

EXIT_OK, EXIT_ERROR, EXIT_VIOLATION = 0, 1, 2

_LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
               "info": logging.INFO, "debug": logging.DEBUG}


class CliError(Exception):
    """User-facing failure; the message goes to stderr and the exit code is 1."""


def _add_config_flags(p):
    g = p.add_argument_group("index configuration")
    g.add_argument("--partitions", type=int, default=256, help="voltage partitions N (default 256)")
    g.add_argument("--s", type=float, default=0.05, help="Gaussian spread for EVRVI (default 0.05)")
    g.add_argument("--lambda", dest="lam", type=float, default=0.1,
                   help="Gaussian spread for the legacy KL index (default 0.1)")
    g.add_argument("--vmin", type=float, default=0.0, help="lower end of the voltage axis, pu")
    g.add_argument("--vmax", type=float, default=2.0, help="upper end of the voltage axis, pu")
    g.add_argument("--emd-max-imfs", type=int, default=10)
    g.add_argument("--emd-sift-tol", type=float, default=0.05)
    g.add_argument("--emd-max-sift-iters", type=int, default=50)


def _add_trace_flags(p, criteria_required=True):
    p.add_argument("trace", help="CSV with header time_s,voltage_pu")
    p.add_argument("--criteria", required=criteria_required, help="criteria JSON")
    p.add_argument("--t-clear", type=float, default=None,
                   help="fault clearing time; the window starts here (default: first sample)")
    p.add_argument("--duration", type=float, default=None,
                   help="window length in seconds (default: to the end of the trace)")
    p.add_argument("--resample", type=float, default=None, metavar="DT",
                   help="resample onto a uniform grid with this step before analysis")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fidvr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="EVRVI report for one trace")
    _add_trace_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", help="report JSON path (default: stdout)")
    p.add_argument("--svg", help="write the four-panel figure here")

    p = sub.add_parser("compare", help="legacy KL index and EVRVI side by side")
    _add_trace_flags(p)
    _add_config_flags(p)
    p.add_argument("--out", help="report JSON path (default: stdout)")

    p = sub.add_parser("batch", help="score both classifiers over a generated corpus")
    p.add_argument("corpus", help="directory holding manifest.json")
    p.add_argument("--criteria", required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out-dir", required=True, help="receives results.csv and summary.json")
    _add_config_flags(p)

    p = sub.add_parser("generate", help="write a seeded synthetic corpus")
    p.add_argument("template", help="template JSON path, or the builtin name 'acceptance'")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--count", type=int, default=None,
                   help="scenario count; overrides a single-group template, "
                        "must match the total of a multi-group one")
    p.add_argument("--seed", type=int, default=None, help="master seed (default: from template)")

    p = sub.add_parser("plot", help="SVG of a trace and its monotone envelopes")
    _add_trace_flags(p, criteria_required=False)
    p.add_argument("--svg", "--out", dest="svg", required=True, help="output SVG path")
    p.add_argument("--emd-max-imfs", type=int, default=10)
    p.add_argument("--emd-sift-tol", type=float, default=0.05)
    p.add_argument("--emd-max-sift-iters", type=int, default=50)
    return parser


def _emd_config(args) -> EmdConfig:
    return EmdConfig(max_imfs=args.emd_max_imfs, max_sift_iters=args.emd_max_sift_iters,
                     sift_tolerance=args.emd_sift_tol)


def _configs(args):
    emd = _emd_config(args)
    cfg = EvrviConfig(args.s, args.partitions, args.vmin, args.vmax, emd)
    legacy = LegacyConfig(args.partitions, args.lam, args.vmin, args.vmax)
    return cfg, legacy


def _criteria(path):
    if not os.path.isfile(path):
        raise CliError(f"criteria file not found: {path}")
    try:
        return load_criteria(path)
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}: invalid JSON ({exc})") from None


def _prepared_trace(args):
    if not os.path.isfile(args.trace):
        raise CliError(f"trace file not found: {args.trace}")
    trace = load_trace(args.trace)
    if args.resample is not None:
        trace = resample_uniform(trace, args.resample)
    elif not trace.uniform:
        raise CliError(f"{args.trace}: non-uniform sampling, rerun with --resample DT")
    if args.t_clear is not None or args.duration is not None:
        t_clear = trace.t0 if args.t_clear is None else args.t_clear
        end = trace.t0 + trace.duration
        duration = end - t_clear if args.duration is None else args.duration
        trace = window_post_fault(trace, t_clear, duration)
    log.info("trace: %d samples, dt=%g s", len(trace), trace.dt)
    return trace


def _emit_json(doc, path):
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _full_report(trace, criteria, cfg, legacy):
    ref = criterion_trace(criteria.uv, trace.dt, trace.duration)
    old = legacy_kl_index(trace, ref, legacy)
    return replace(assess(trace, criteria.uv, criteria.ov, cfg), legacy=old)


def cmd_analyze(args) -> int:
    criteria = _criteria(args.criteria)
    trace = _prepared_trace(args)
    cfg, legacy = _configs(args)
    rep = _full_report(trace, criteria, cfg, legacy)
    if args.svg:
        pair = extract_envelopes(trace, cfg.emd)
        with open(args.svg, "w", encoding="utf-8") as fh:
            fh.write(analysis_svg(trace.time_axis(), trace.samples, pair, criteria, cfg, rep))
    _emit_json(rep.to_dict(), args.out)
    return EXIT_VIOLATION if rep.violated else EXIT_OK


def cmd_compare(args) -> int:
    criteria = _criteria(args.criteria)
    trace = _prepared_trace(args)
    cfg, legacy = _configs(args)
    rep = _full_report(trace, criteria, cfg, legacy)
    doc = {
        "legacy": {"kl_signal": rep.legacy.kl_signal, "kl_reference": rep.legacy.kl_reference,
                   "violated": rep.legacy.violated},
        "evrvi": {k: v for k, v in rep.to_dict().items() if k != "legacy"},
        "legacy_verdict": rep.legacy.violated,
        "evrvi_verdict": rep.violated,
        "disagreement": rep.legacy.violated != rep.violated,
    }
    _emit_json(doc, args.out)
    return EXIT_VIOLATION if rep.violated else EXIT_OK


def cmd_batch(args) -> int:
    criteria = _criteria(args.criteria)
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1")
    if not os.path.isdir(args.corpus):
        raise CliError(f"corpus directory not found: {args.corpus}")
    manifest = os.path.join(args.corpus, "manifest.json")
    if not os.path.isfile(manifest):
        if not os.listdir(args.corpus):
            raise CliError(f"empty corpus: {args.corpus}")
        raise CliError(f"manifest.json not found in {args.corpus}")
    corpus = read_corpus(args.corpus)
    if not corpus:
        raise CliError(f"empty corpus: {args.corpus}")
    cfg, legacy = _configs(args)
    ev = evaluate_corpus(corpus, criteria, cfg, legacy, jobs=args.jobs)
    os.makedirs(args.out_dir, exist_ok=True)
    with open(os.path.join(args.out_dir, "results.csv"), "w", encoding="utf-8", newline="") as fh:
        fh.write(results_csv(ev))
    write_summary(summary_dict(ev, criteria, cfg, legacy), os.path.join(args.out_dir, "summary.json"))
    if ev.errors:
        log.warning("%d scenario(s) failed assessment", len(ev.errors))
    sys.stdout.write(format_matrix(ev.legacy, "legacy KL index") + "\n\n"
                     + format_matrix(ev.evrvi, "EVRVI") + "\n")
    return EXIT_OK


def cmd_generate(args) -> int:
    try:
        template = load_template(args.template)
    except FileNotFoundError:
        raise CliError(f"template not found: {args.template}") from None
    if args.count is not None:
        if args.count < 1:
            raise CliError("--count must be >= 1")
        if "groups" in template:
            total = sum(int(g.get("count", 1)) for g in template["groups"])
            if total != args.count:
                raise CliError(f"template yields {total} scenarios, not --count {args.count}")
        else:
            template = {**template, "count": args.count}
    corpus = build_corpus(template, args.seed)
    try:
        path = write_corpus(corpus, args.out_dir)
    except OSError as exc:
        raise CliError(f"cannot write corpus to {args.out_dir}: {exc.strerror or exc}") from None
    log.info("wrote %d scenarios, manifest %s", len(corpus), path)
    return EXIT_OK


def cmd_plot(args) -> int:
    criteria = _criteria(args.criteria) if args.criteria else None
    trace = _prepared_trace(args)
    pair = extract_envelopes(trace, _emd_config(args))
    with open(args.svg, "w", encoding="utf-8") as fh:
        fh.write(envelope_svg(trace.time_axis(), trace.samples, pair, criteria))
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "compare": cmd_compare, "batch": cmd_batch,
            "generate": cmd_generate, "plot": cmd_plot}


def _setup_logging():
    level = _LOG_LEVELS.get(os.environ.get("EVRVI_LOG", "warn").lower(), logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(levelname)s %(name)s: %(message)s"))
    root = logging.getLogger("fidvr")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which would read as "violation"
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    try:
        return COMMANDS[args.command](args)
    except (CliError, TraceError, ConfigurationError, ValueError, OSError) as exc:
        print(f"fidvr {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except Exception as exc:  # never leak a code other than 0/1/2
        log.debug("unexpected failure", exc_info=True)
        print(f"fidvr {args.command}: unexpected error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
