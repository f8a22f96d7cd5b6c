"""Command-line entry point: ``alcself <subcommand> ...``.

Exit codes: 0/1 for verdicts (accepting/rejecting, all hold/some fail,
match/no match), 2 for usage, parse and validation errors, 3 when a
resource budget runs out.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import lemmas
from . import reduction as rd
from . import serialize as ser
from . import witness as wt
from .atm import find_accepting_run, inject_tape_fault, is_accepting_oracle
from .cq import exists_match, find_matches
from .dl import check_kb
from .errors import AlcSelfError, BudgetExceeded

USAGE_ERROR, BUDGET_ERROR = 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _UsageError(message)


class _UsageError(Exception):
    pass


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str, text: str):
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise _UsageError(f"cannot write {path}: {exc.strerror}") from None


def _kb_format(path: str) -> str:
    return "owlfs" if path.endswith(".ofn") else "dltext"


def cmd_oracle(args) -> int:
    accepting = is_accepting_oracle(ser.parse_atm(_read(args.atm)))
    print("accepting" if accepting else "rejecting")
    return 0 if accepting else 1


def cmd_compile(args) -> int:
    atm = ser.parse_atm(_read(args.atm))
    bundle = rd.reduce(atm, tbox_only=args.tbox_only)
    _write(args.out_kb, ser.emit_kb(bundle.kb, args.format))
    _write(args.out_query, ser.emit_cq(bundle.query))
    for key, value in bundle.stats.items():
        print(f"{key}={value}")
    return 0


def _parse_fault(text: str) -> tuple[str, int]:
    node, sep, cell = text.rpartition(",")
    if not sep or not cell.isdigit() or not set(node) <= {"0", "1"}:
        raise _UsageError(f"--fault expects node,cell (e.g. 0,1), got {text!r}")
    return node, int(cell)


def cmd_witness(args) -> int:
    atm = ser.parse_atm(_read(args.atm))
    if args.fault and args.kind != "qct":
        raise _UsageError("--fault only applies to --kind qct")
    start = atm.initial_configuration()
    if args.kind == "unit":
        interp = wt.build_unit(atm.n + 1)
    elif args.kind == "conf":
        interp = wt.build_config_tree(atm, start)
    elif args.kind == "enr":
        interp = wt.build_enriched_tree(atm, start, wt.INIT)
    else:
        run = find_accepting_run(atm)
        if run is None:
            print("error: the machine is not accepting; no quasi-computation tree to build", file=sys.stderr)
            return 1
        if args.fault:
            node, cell = _parse_fault(args.fault)
            try:
                run = inject_tape_fault(run, node, cell)
            except (ValueError, KeyError, IndexError) as exc:
                raise _UsageError(f"bad fault {args.fault}: {exc}") from None
        interp = wt.build_quasi_computation_tree(atm, run, tbox_only=args.tbox_only)
    _write(args.out, ser.emit_interp(interp))
    print(f"kind={args.kind}")
    print(f"elements={len(interp.domain)}")
    return 0


def cmd_check(args) -> int:
    interp = ser.parse_interp(_read(args.interp))
    kb = ser.parse_kb(_read(args.kb), _kb_format(args.kb))
    report = check_kb(interp, kb)
    for k, entry in enumerate(report.entries):
        name = entry.label or f"#{k}"
        if entry.holds:
            print(f"{name}=holds")
        elif entry.error:
            print(f"{name}=error {entry.error}")
        else:
            print(f"{name}=fails witness={entry.witness}")
    failed = len(report.failures())
    print(f"failed={failed}")
    return 0 if report.ok else 1


def cmd_eval(args) -> int:
    interp = ser.parse_interp(_read(args.interp))
    query = ser.parse_cq(_read(args.query))
    if args.exists or not query.distinguished:
        found = exists_match(interp, query)
        print("true" if found else "false")
        return 0 if found else 1
    rows = find_matches(interp, query)
    for row in rows:
        print(" ".join(row))
    return 0 if rows else 1


def cmd_verify(args) -> int:
    atm = ser.parse_atm(_read(args.atm)) if args.atm else None
    if args.n < 1:
        raise _UsageError("--n must be at least 1")
    rows = lemmas.run_suites(atm, max_n=args.n)
    width = max(len(c.lemma) for c, _ in rows)
    for check, _ in rows:
        detail = f"  {check.detail}" if check.detail else ""
        print(f"C{check.criterion}  {check.lemma:<{width}}  {check.status}{detail}")
    failed = sum(not c.passed for c, _ in rows)
    print(f"checks={len(rows)} failed={failed}")
    return 0 if failed == 0 else 1


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="alcself", description="ATM-to-ALCself reduction toolkit")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("oracle", help="decide acceptance of an ATM")
    s.add_argument("--atm", required=True)
    s.set_defaults(func=cmd_oracle)

    s = sub.add_parser("compile", help="write K_M and q_M for an ATM")
    s.add_argument("--atm", required=True)
    s.add_argument("--out-kb", required=True)
    s.add_argument("--out-query", required=True)
    s.add_argument("--tbox-only", action="store_true")
    s.add_argument("--format", choices=("dltext", "owlfs"), default="dltext")
    s.set_defaults(func=cmd_compile)

    s = sub.add_parser("witness", help="write a witness interpretation")
    s.add_argument("--atm", required=True)
    s.add_argument("--kind", choices=("unit", "conf", "enr", "qct"), required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--fault", help="node,cell: flip an untouched tape cell of the run (qct only)")
    s.add_argument("--tbox-only", action="store_true", help="qct for the TBox-only knowledge base")
    s.set_defaults(func=cmd_witness)

    s = sub.add_parser("check", help="check every axiom of a KB in an interpretation")
    s.add_argument("--interp", required=True)
    s.add_argument("--kb", required=True)
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("eval", help="evaluate a conjunctive query")
    s.add_argument("--interp", required=True)
    s.add_argument("--query", required=True)
    s.add_argument("--exists", action="store_true")
    s.set_defaults(func=cmd_eval)

    s = sub.add_parser("verify-lemmas", help="run the lemma suites")
    s.add_argument("--n", type=int, default=3, help="largest unit depth for the unit suite")
    s.add_argument("--atm")
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return BUDGET_ERROR
    except AlcSelfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
