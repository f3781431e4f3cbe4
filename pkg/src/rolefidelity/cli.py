"""Command-line entry point: ``rolefidelity <command> [options]``.

Exit codes: 0 success, 1 reproduction check failed, 2 input or schema
error, 3 empty selection, 4 configuration error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Sequence

from .analysis import CohortFilter, breakdown, compare_cohorts
from .classifier import RetryPolicy, StubProvider, classify_batch, load_stub_table
from .consensus import KINDS, consolidate, load_factcheck_runs
from .metrics import EmptyCohortError, metrics_summary
from .model import Cohort, Language, Role, SchemaError, load_cohort, serialize_run_record, write_cohort
from .providers import ConfigError, HttpProvider, ProviderConfig, ReplayProvider, TranscriptRecorder
from .report import Column, ReportTable
from .reproduce import FIXTURES, TABLES, fixture_path, reproduce
from .simulator import load_profile, paper_profile_charitable, paper_profile_critical, simulate_cohort

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_INPUT = 2
EXIT_EMPTY = 3
EXIT_CONFIG = 4

log = logging.getLogger("rolefidelity")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


# --- input helpers -----------------------------------------------------------


def resolve_input(spec: str) -> Path:
    """A file path, or ``fixture:NAME`` for a shipped fixture cohort."""
    if spec.startswith("fixture:"):
        name = spec.split(":", 1)[1]
        try:
            return fixture_path(name)
        except KeyError:
            raise CliError(f"unknown fixture {name!r}; known: {', '.join(sorted(FIXTURES))}", EXIT_INPUT) from None
    return Path(spec)


def _cohort(args, spec: str | None = None) -> Cohort:
    spec = spec or getattr(args, "input", None)
    if not spec:
        raise CliError("--input is required", EXIT_INPUT)
    flt = CohortFilter.parse(args.filter or [])
    cohort = load_cohort(resolve_input(spec), flt, strict=args.strict)
    if not cohort:
        what = f" after filter {' '.join(args.filter)}" if args.filter else ""
        raise CliError(f"no records selected from {spec}{what}", EXIT_EMPTY)
    return cohort


def _emit(args, table: ReportTable) -> None:
    sys.stdout.write(table.render(args.format))


# --- commands ----------------------------------------------------------------


def metrics_table(cohort: Cohort, title: str) -> ReportTable:
    s = metrics_summary(cohort)
    t = ReportTable(title, [
        Column("n", "int"), Column("Correct", "int"), Column("Accuracy", "pct"), Column("EDD", "metric"),
        Column("EDD SD", "metric"), Column("DDI", "signed"), Column("RDI", "metric"), Column("ERS", "metric"),
        Column("ERS stmt", "metric"), Column("EDD stmt", "metric"),
    ])
    t.add_row(s.n, s.correct, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi, s.rdi, s.ers_pooled,
              s.ers_stmt_mean, s.edd_stmt_mean)
    if s.rdi is None:
        t.footnotes.append(f"RDI undefined: {s.rdi_note}.")
    if cohort.skipped:
        t.footnotes.append(f"{cohort.skipped} malformed line(s) skipped.")
    return t


def cmd_metrics(args) -> int:
    cohort = _cohort(args)
    _emit(args, metrics_table(cohort, f"Role fidelity metrics: {cohort.label}"))
    return EXIT_OK


def cmd_compare(args) -> int:
    specs = list(args.inputs)
    if len(specs) == 1 and getattr(args, "input", None):
        specs.insert(0, args.input)
    if len(specs) != 2:
        raise CliError("compare needs two inputs", EXIT_INPUT)
    a, b = (_cohort(args, s) for s in specs)
    r = compare_cohorts(a, b)
    t = ReportTable("Accuracy comparison (two-sided two-proportion z-test)", [
        Column("A"), Column("B"), Column("A Acc", "pct"), Column("B Acc", "pct"), Column("A k/n"), Column("B k/n"),
        Column("Delta", "pp"), Column("z", "z"), Column("p", "p"), Column("Sig"),
    ])
    t.add_row(a.label, b.label, r.p1, r.p2, f"{r.k1}/{r.n1}", f"{r.k2}/{r.n2}", r.delta_pp, r.z, r.p_value, r.label)
    if r.degenerate:
        t.footnotes.append("Pooled proportion is 0 or 1; the test is degenerate.")
    _emit(args, t)
    return EXIT_OK


def cmd_breakdown(args) -> int:
    cohort = _cohort(args)
    try:
        b = breakdown(cohort, args.axis)
    except EmptyCohortError as exc:
        raise CliError(str(exc), EXIT_EMPTY) from None
    t = ReportTable(f"Breakdown by {args.axis}: {cohort.label}", [
        Column(args.axis.capitalize()), Column("n", "int"), Column("Correct", "int"), Column("Accuracy", "pct"),
        Column("EDD", "metric"), Column("EDD SD", "metric"), Column("DDI", "signed"),
        Column("EDD stmt", "metric"), Column("ERS stmt", "metric"),
    ])
    for key, s in b.groups.items():
        label = key if isinstance(key, str) else (f"{key:+d}" if key else "0")
        t.add_row(label, s.n, s.correct, s.accuracy, s.edd_mean, s.edd_sd_obs, s.ddi, s.edd_stmt_mean, s.ers_stmt_mean)
    if b.excluded_unscored:
        t.footnotes.append(f"{b.excluded_unscored} record(s) without scores excluded.")
    _emit(args, t)
    return EXIT_OK


def cmd_simulate(args) -> int:
    if args.profile == "charitable":
        profile = paper_profile_charitable()
    elif args.profile == "critical":
        profile = paper_profile_critical()
    else:
        profile = load_profile(args.profile)
    if args.runs is not None:
        profile = profile.with_runs(args.runs)
    seed = args.seed if args.seed is not None else 0
    cohort = simulate_cohort(profile, args.n, seed, label=profile.name or "sim")
    if args.out:
        write_cohort(cohort, args.out)
        log.info("wrote %d records to %s", len(cohort), args.out)
    else:
        for r in cohort:
            sys.stdout.write(serialize_run_record(r) + "\n")
    return EXIT_OK


def _read_texts(path: Path) -> list[dict]:
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror or exc}") from exc
    items = []
    for no, line in enumerate(lines, 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not JSON: {exc.msg}", line_no=no) from None
        if not isinstance(obj, dict) or not isinstance(obj.get("text"), str):
            raise SchemaError("each line needs a string 'text' field", field="text", line_no=no)
        try:
            Language(obj.get("language", "en"))
        except ValueError:
            raise SchemaError(f"unknown language {obj.get('language')!r}", field="language", line_no=no) from None
        items.append(obj)
    return items


def _provider(args):
    if args.replay:
        return ReplayProvider(args.replay)
    if args.stub is not None:
        table = load_stub_table(args.stub) if args.stub else {}
        default = Role(args.stub_default.upper()) if args.stub_default != "none" else None
        return StubProvider(table, default=default, failure_rate=args.stub_failure_rate)
    config = ProviderConfig.from_env()
    provider = HttpProvider(config)
    if args.transcript:
        return TranscriptRecorder(provider, args.transcript, meta={"model": config.model, "endpoint": config.endpoint})
    return provider


def cmd_classify(args) -> int:
    if not getattr(args, "input", None):
        raise CliError("--input is required", EXIT_INPUT)
    items = _read_texts(resolve_input(args.input))
    provider = _provider(args)
    result = classify_batch(
        [it["text"] for it in items],
        provider,
        RetryPolicy(max_attempts=args.max_attempts),
        [it.get("language", "en") for it in items],
        parallelism=args.parallelism,
    )
    lines = []
    for it, res in zip(items, result.items):
        rec = {"id": it.get("id", res.index + 1), "attempts": res.attempts}
        if res.ok:
            rec["verdict"] = res.verdict.to_dict()
        else:
            rec["error_kind"], rec["error"] = res.error_kind, res.error
        lines.append(json.dumps(rec, ensure_ascii=False) + "\n")
    if args.out:
        Path(args.out).write_text("".join(lines), encoding="utf-8")
    else:
        sys.stdout.write("".join(lines))
    kinds = Counter(f.error_kind for f in result.failures)
    t = ReportTable("Classification summary", [Column("Metric"), Column("Value", "int")])
    for label, value in (("texts", len(items)), ("verdicts", len(items) - len(result.failures)),
                         ("failures", len(result.failures)), ("requests", result.requests),
                         ("retries", result.retries)):
        t.add_row(label, value)
    for kind, n in sorted(kinds.items()):
        t.add_row(f"failures: {kind}", n)
    for role, n in sorted(Counter(v.classification.value for v in result.verdicts if v).items()):
        t.add_row(f"verdict: {role}", n)
    # with records on stdout the summary goes to stderr
    (sys.stdout if args.out else sys.stderr).write(t.render(args.format))
    return EXIT_OK


def cmd_consolidate(args) -> int:
    if not getattr(args, "input", None):
        raise CliError("--input is required", EXIT_INPUT)
    groups = load_factcheck_runs(resolve_input(args.input))
    reports = [consolidate(runs, threshold=args.threshold, min_support=args.min_support) for runs in groups.values()]
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            for rep in reports:
                fh.write(json.dumps(rep.to_dict(), ensure_ascii=False) + "\n")
    t = ReportTable("Consolidated fact-check reports", [
        Column("Statement"), Column("Provider"), Column("Lang"), Column("Facts", "int"),
        Column("Contradictions", "int"), Column("Missing context", "int"),
    ])
    for rep in reports:
        t.add_row(rep.statement_id, rep.provider.value, rep.language.value,
                  *(len(rep.items(k)) for k in KINDS))
    _emit(args, t)
    return EXIT_OK


def cmd_reproduce(args) -> int:
    try:
        results = reproduce(args.name)
    except KeyError:
        names = ", ".join(sorted(TABLES) + ["all"])
        raise CliError(f"unknown table set {args.name!r}; known: {names}", EXIT_INPUT) from None
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
    verdicts = []
    for res in results:
        sys.stdout.write(res.table.render(args.format))
        for c in res.checks:
            if not c.ok or args.verbose:
                sys.stdout.write(f"  {c.describe()}\n")
        line = res.verdict_line()
        sys.stdout.write(line + "\n\n")
        verdicts.append(line)
        if out_dir:
            ext = "tsv" if args.format == "dsv" else "txt"
            (out_dir / f"{res.name}.{ext}").write_text(res.table.render(args.format), encoding="utf-8")
    if out_dir:
        (out_dir / "verdicts.txt").write_text("\n".join(verdicts) + "\n", encoding="utf-8")
    return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED


# --- parser ------------------------------------------------------------------


def _global_options(parser: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--input", default=d(None), help="record file or fixture:NAME")
    parser.add_argument("--filter", action="append", default=d(None), metavar="KEY=VALUE",
                        help="keep records matching KEY=VALUE (repeatable)")
    parser.add_argument("--strict", dest="strict", action="store_true", default=d(True),
                        help="fail on the first malformed line (default)")
    parser.add_argument("--lenient", dest="strict", action="store_false", default=d(True),
                        help="skip malformed lines and report the count")
    parser.add_argument("--format", choices=("text", "dsv"), default=d("text"))
    parser.add_argument("--seed", type=int, default=d(None))
    parser.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rolefidelity", description="Role fidelity metrics and reports.")
    _global_options(parser, suppress=False)
    common = argparse.ArgumentParser(add_help=False)
    _global_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("metrics", parents=[common], help="summary metrics for a cohort")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("compare", parents=[common], help="two-proportion z-test of accuracy")
    p.add_argument("inputs", nargs="+", metavar="INPUT")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("breakdown", parents=[common], help="metrics grouped by a score dimension or category")
    p.add_argument("--axis", "--by", dest="axis", choices=("logos", "ethos", "pathos", "category"), default="logos")
    p.set_defaults(func=cmd_breakdown)

    p = sub.add_parser("simulate", parents=[common], help="draw a synthetic cohort from a profile")
    p.add_argument("--profile", default="charitable", help="profile file, or 'charitable' / 'critical'")
    p.add_argument("-n", "--n", dest="n", type=int, default=150, help="number of statements")
    p.add_argument("--runs", type=int, default=None, help="override runs per statement")
    p.add_argument("--out", help="output file (default: stdout)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("classify", parents=[common], help="classify reasoning texts (JSON lines with 'text')")
    p.add_argument("--stub", nargs="?", const="", default=None, metavar="TABLE",
                   help="offline stub provider, optionally with a verdict table file")
    p.add_argument("--stub-default", default="balanced", help="stub verdict for unknown texts, or 'none'")
    p.add_argument("--stub-failure-rate", type=float, default=0.0)
    p.add_argument("--replay", help="answer from a recorded transcript")
    p.add_argument("--transcript", help="record live exchanges to this file")
    p.add_argument("--max-attempts", type=int, default=3)
    p.add_argument("--parallelism", type=int, default=1)
    p.add_argument("--out", help="verdict records file")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("consolidate", parents=[common], help="apply the k-of-n consensus rule to fact-check runs")
    p.add_argument("--threshold", type=float, default=0.8)
    p.add_argument("--min-support", type=int, default=2)
    p.add_argument("--out", help="consolidated reports file")
    p.set_defaults(func=cmd_consolidate)

    p = sub.add_parser("reproduce", parents=[common], help="rebuild published tables from shipped fixtures")
    p.add_argument("name", help=f"one of: {', '.join(sorted(TABLES))}, all")
    p.add_argument("--out-dir", help="also write each table and the verdicts here")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the input-error code
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except SchemaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except EmptyCohortError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
