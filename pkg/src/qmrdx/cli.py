"""Command-line interface.

Machine-readable results go to stdout; logs and warnings go to stderr.
Exit codes: 0 success, 1 runtime error, 2 usage error, 3 failed --check.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import __version__
from .evaluate import (
    EvalReport,
    evaluate,
    evaluate_dialogue,
    format_table,
    grid_search,
    report_to_csv_rows,
)
from .exceptions import QmrdxError
from .inference import Evidence, posterior, top_k
from .inquiry import LookaheadConfig, UtilityKind
from .network import (
    build_network_from_cases,
    load_dialogue_cases,
    load_network,
    network_stats,
    save_network,
    validate,
)
from .session import Diagnose, Session, SessionConfig
from .simulate import dump_cases, sample_cases

CHECK_FAILED = 3


def _log(message: str) -> None:
    print(message, file=sys.stderr)


def _use_color() -> bool:
    return sys.stdout.isatty() and not os.environ.get("NO_COLOR")


def _bold(text: str) -> str:
    return f"\033[1m{text}\033[0m" if _use_color() else text


def _session_config(args) -> SessionConfig:
    return SessionConfig(
        max_steps=args.max_steps,
        utility_threshold=args.threshold,
        lookahead=LookaheadConfig(depth=args.depth, utility_kind=UtilityKind(args.utility)),
        top_k=args.top_k,
    )


def _add_net_arg(parser) -> None:
    parser.add_argument("--net", required=True, help="network file (JSON)")
    parser.add_argument(
        "--format",
        default="auto",
        choices=["auto", "native", "symcat"],
        help="network file format (default: auto-detect)",
    )


def _add_session_args(parser) -> None:
    parser.add_argument("--threshold", type=float, default=0.01,
                        help="stop inquiring when the best utility drops below this (nats)")
    parser.add_argument("--max-steps", type=int, default=20, help="inquiry budget")
    parser.add_argument("--depth", type=int, default=1, help="lookahead depth")
    parser.add_argument("--utility", default="kl", choices=["kl", "ig"])
    parser.add_argument("--top-k", type=int, default=5, help="diagnoses to report")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmrdx",
        description="Differential diagnosis over noisy-OR belief networks.",
    )
    parser.add_argument("--version", action="version", version=f"qmrdx {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="lint a network file")
    _add_net_arg(p)

    p = sub.add_parser("simulate", help="sample synthetic patient cases")
    _add_net_arg(p)
    p.add_argument("--cases", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("evaluate", help="run simulated episodes, print a CSV report")
    _add_net_arg(p)
    _add_session_args(p)
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--dialogue-cases", help="evaluate a dialogue case file instead of simulating")
    p.add_argument("--unrecorded", default="absent", choices=["absent", "skip"],
                   help="answer for findings a dialogue case never mentions")
    p.add_argument("--check", action="append", default=[], choices=["topk-order"],
                   help="fail (exit 3) if the named invariant does not hold")

    p = sub.add_parser("grid", help="threshold x budget grid search")
    _add_net_arg(p)
    p.add_argument("--thresholds", default="0.01,0.05,0.10",
                   help="comma-separated utility thresholds")
    p.add_argument("--max-steps", default="10,15,20",
                   help="comma-separated inquiry budgets")
    p.add_argument("--depth", type=int, default=1)
    p.add_argument("--utility", default="kl", choices=["kl", "ig"])
    p.add_argument("--cases", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", action="store_true", help="CSV instead of the pretty table")
    p.add_argument("--check", action="append", default=[], choices=["trends", "topk-order"])

    p = sub.add_parser("diagnose", help="interactive diagnosis session in the terminal")
    _add_net_arg(p)
    _add_session_args(p)
    p.add_argument("--init", action="append", default=[], metavar="+NAME/-NAME",
                   help="initial finding, +Name for present, -Name for absent (repeatable)")

    p = sub.add_parser("build-net", help="estimate a network from a dialogue case file")
    p.add_argument("--cases", required=True, help="dialogue case file (JSON)")
    p.add_argument("--prior-mode", default="uniform", choices=["uniform", "empirical"])
    p.add_argument("--out", required=True, help="output network file (native JSON)")

    p = sub.add_parser("serve", help="start the HTTP session service")
    _add_net_arg(p)
    p.add_argument("--addr", default="127.0.0.1:8000", help="host:port to bind")
    p.add_argument("--cors", action="store_true", help="allow any origin (for UI dev)")
    p.add_argument("--static", help="directory of UI assets to serve at /")

    return parser


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args) -> int:
    net = load_network(args.net, args.format, strict=False)
    violations = validate(net)
    stats = network_stats(net)
    _log(
        f"{args.net}: {stats.n_diseases} diseases, {stats.n_findings} findings, "
        f"{stats.n_edges} edges ({stats.findings_per_disease:.2f} findings/disease, "
        f"{stats.diseases_per_finding:.2f} diseases/finding)"
    )
    if violations:
        for v in violations:
            print(v)
        return CHECK_FAILED
    print("ok")
    return 0


def cmd_simulate(args) -> int:
    net = load_network(args.net, args.format)
    docs = dump_cases(net, sample_cases(net, args.cases, args.seed))
    text = json.dumps(docs, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
        _log(f"wrote {args.cases} cases to {args.out}")
    else:
        print(text)
    return 0


def _check_topk_order(reports: list[EvalReport]) -> list[str]:
    failures = []
    for r in reports:
        if not r.top1 <= r.top3 <= r.top5:
            failures.append(
                f"top-k ordering violated at threshold={r.threshold} "
                f"max_steps={r.max_steps}: {r.top1} / {r.top3} / {r.top5}"
            )
    return failures


def _check_trends(reports: list[EvalReport]) -> list[str]:
    failures = []
    rows: dict[int, dict[float, float]] = {}
    for r in reports:
        rows.setdefault(r.max_steps, {})[r.threshold] = r.avg_steps
    for max_steps, row in rows.items():
        steps = [row[t] for t in sorted(row)]
        if steps != sorted(steps, reverse=True):
            failures.append(f"avg_steps not non-increasing in threshold at max_steps={max_steps}")
    cols: dict[float, dict[int, float]] = {}
    for r in reports:
        cols.setdefault(r.threshold, {})[r.max_steps] = r.avg_steps
    for threshold, col in cols.items():
        steps = [col[s] for s in sorted(col)]
        if steps != sorted(steps):
            failures.append(f"avg_steps not non-decreasing in budget at threshold={threshold}")
    return failures


def _run_checks(names, reports) -> int:
    failures = []
    for name in names:
        if name == "topk-order":
            failures += _check_topk_order(reports)
        elif name == "trends":
            failures += _check_trends(reports)
    for f in failures:
        _log(f"CHECK FAILED: {f}")
    return CHECK_FAILED if failures else 0


def cmd_evaluate(args) -> int:
    net = load_network(args.net, args.format)
    cfg = _session_config(args)
    if args.dialogue_cases:
        cases = load_dialogue_cases(args.dialogue_cases)
        report = evaluate_dialogue(net, cases, cfg, unrecorded=args.unrecorded)
    else:
        report = evaluate(net, cfg, args.cases, args.seed, workers=args.workers)
    for row in report_to_csv_rows([report]):
        print(row)
    if report.n_unknown_disease:
        _log(f"{report.n_unknown_disease} cases named diseases unknown to the network (counted as misses)")
    if report.n_degenerate:
        _log(f"{report.n_degenerate} episodes ended with zero-probability evidence (prior fallback)")
    return _run_checks(args.check, [report])


def cmd_grid(args) -> int:
    net = load_network(args.net, args.format)
    thresholds = [float(x) for x in args.thresholds.split(",") if x]
    budgets = [int(x) for x in args.max_steps.split(",") if x]
    reports = grid_search(
        net, thresholds, budgets, args.depth, args.cases, args.seed,
        utility_kind=UtilityKind(args.utility),
    )
    if args.csv:
        for row in report_to_csv_rows(reports):
            print(row)
    else:
        print(format_table(reports))
    return _run_checks(args.check, reports)


def _parse_init(net, specs) -> Evidence:
    pos, neg = set(), set()
    for spec in specs:
        spec = spec.strip()
        if not spec or spec[0] not in "+-":
            raise QmrdxError(f"initial finding must start with + or -: {spec!r}")
        fid = net.finding_id(spec[1:].strip())
        (pos if spec[0] == "+" else neg).add(fid)
    return Evidence(frozenset(pos), frozenset(neg))


def _print_posterior(net, session) -> None:
    post = session.posterior()
    k = min(session.config.top_k, net.n_diseases)
    flag = "  [zero-probability evidence, showing priors]" if post.degenerate else ""
    print(f"current top {k}:{flag}")
    for disease_id, prob in top_k(post, k):
        bar = "#" * int(round(40 * prob))
        print(f"  {prob:7.4f}  {net.diseases[disease_id].name:<40} {bar}")


def cmd_diagnose(args) -> int:
    net = load_network(args.net, args.format)
    try:
        initial = _parse_init(net, args.init)
    except KeyError as exc:
        raise QmrdxError(str(exc)) from exc
    session = Session(net, _session_config(args), initial)
    print(f"{len(initial.positive)} positive / {len(initial.negative)} negative initial findings")
    _print_posterior(net, session)

    while True:
        decision = session.next_suggestion()
        if isinstance(decision, Diagnose):
            print(f"stopping: {decision.reason.value}")
            break
        name = net.findings[decision.finding_id].name
        prompt = _bold(f"Ask: {name}?") + f"  (utility {decision.utility:.4f} nats)  [y/n/?/!set/!stop] "
        sys.stdout.write(prompt)
        sys.stdout.flush()
        line = sys.stdin.readline()
        if not line:
            print()
            break
        reply = line.strip()
        try:
            if reply in ("y", "yes"):
                session.answer(decision.finding_id, True)
            elif reply in ("n", "no"):
                session.answer(decision.finding_id, False)
            elif reply == "?":
                session.answer(decision.finding_id, None)
            elif reply == "!stop":
                break
            elif reply.startswith("!set "):
                parts = reply[5:].rsplit(" ", 1)
                if len(parts) != 2 or parts[1] not in ("y", "n", "?"):
                    print("usage: !set <finding name> <y|n|?>")
                    continue
                value = {"y": True, "n": False, "?": None}[parts[1]]
                session.override(net.finding_id(parts[0].strip()), value)
            else:
                print("reply y, n, ? (unknown), !set <finding> <y|n|?>, or !stop")
                continue
        except (QmrdxError, KeyError) as exc:
            print(f"error: {exc}")
            continue
        _print_posterior(net, session)

    diagnosis = session.finalize() if session.diagnosis is None else session.diagnosis
    print(f"diagnosis after {diagnosis.steps} steps ({diagnosis.reason.value}):")
    for disease_id, prob in diagnosis.ranked:
        print(f"  {prob:7.4f}  {net.diseases[disease_id].name}")
    return 0


def cmd_build_net(args) -> int:
    cases = load_dialogue_cases(args.cases)
    net = build_network_from_cases(cases, prior_mode=args.prior_mode)
    save_network(net, args.out)
    stats = network_stats(net)
    _log(
        f"built network from {len(cases)} cases: {stats.n_diseases} diseases, "
        f"{stats.n_findings} findings, {stats.n_edges} edges -> {args.out}"
    )
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    net = load_network(args.net, args.format)
    host, _, port = args.addr.rpartition(":")
    app = create_app(net, cors=args.cors, static_dir=args.static)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port), log_level="info")
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "simulate": cmd_simulate,
    "evaluate": cmd_evaluate,
    "grid": cmd_grid,
    "diagnose": cmd_diagnose,
    "build-net": cmd_build_net,
    "serve": cmd_serve,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except QmrdxError as exc:
        _log(f"error: {exc}")
        return 1
    except FileNotFoundError as exc:
        _log(f"error: {exc}")
        return 1
    except ValueError as exc:
        _log(f"error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
