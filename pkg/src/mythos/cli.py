"""``mythos`` command-line interface.

Exit statuses: 0 success / no conflict, 1 conflict found, 2 usage or I/O
error, 3 resource limit.  ``corpus`` exits with the number of unexpected
verdicts instead (capped at 255).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path
from typing import Sequence

from . import data_path
from .antipatterns import detect_antipatterns
from .errors import MythosError, ResourceLimitError
from .ingest import ENDPOINT_ENV, fetch_translation, normalize_with_log, parse_ntriples, record_fixture
from .krss import load_kb, parse_concept, serialize_kb
from .pipeline import ERROR, check_claim, merge, run_corpus, summarize
from .tableau import DEFAULT_NODE_CAP, Reasoner

EXIT_OK, EXIT_CONFLICT, EXIT_USAGE, EXIT_LIMIT = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit; keep main() in control
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


def _node_cap(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("node cap must be at least 1")
    return value


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--node-cap", type=_node_cap, default=DEFAULT_NODE_CAP,
                        help="maximum tableau nodes per query (default %(default)s)")
    common.add_argument("--format", choices=("json", "text"), default=None,
                        help="output format (default depends on the command)")
    common.add_argument("--output", "-o", help="write output to this file instead of stdout")

    p = _Parser(prog="mythos", description="Check claims against medical knowledge with description logic.")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    c = sub.add_parser("check", parents=[common], help="check a myth against a fact")
    c.add_argument("myth")
    c.add_argument("fact")
    c.add_argument("--background", action="append", default=[], help="background KB (repeatable)")
    c.add_argument("--rules", action="append", default=[], help="rule file (repeatable)")
    c.add_argument("--id", default=None, help="identifier used in the report")
    c.add_argument("--isolate", action="store_true", help="prefix myth and fact individuals")
    c.add_argument("--timings", action="store_true", help="include per-step timings")

    s = sub.add_parser("sat", parents=[common], help="concept satisfiability")
    s.add_argument("kb")
    s.add_argument("--concept", required=True)

    s = sub.add_parser("subsumes", parents=[common], help="concept subsumption")
    s.add_argument("kb")
    s.add_argument("--sub", required=True)
    s.add_argument("--super", required=True, dest="sup")

    for name, text in (("coherent", "TBox coherence"), ("consistent", "KB consistency"),
                       ("antipatterns", "anti-pattern scan")):
        s = sub.add_parser(name, parents=[common], help=text)
        s.add_argument("kb")

    s = sub.add_parser("ingest", parents=[common], help="convert N-Triples to KRSS")
    s.add_argument("ntriples")
    s.add_argument("--out", help="KRSS output file (default stdout)")

    s = sub.add_parser("translate", parents=[common], help="translate a sentence to RDF")
    s.add_argument("text")
    s.add_argument("--fixtures", help="directory of recorded translations")
    s.add_argument("--endpoint", help=f"live service URL (or ${ENDPOINT_ENV})")
    s.add_argument("--record", metavar="DIR", help="store a live translation as a fixture in DIR")
    s.add_argument("--normalize", action="store_true", help="print the normalized KRSS instead of N-Triples")

    s = sub.add_parser("corpus", parents=[common], help="run a corpus manifest")
    s.add_argument("manifest")
    s.add_argument("--jobs", type=int, default=None, help="worker threads")
    s.add_argument("--timings", action="store_true")
    return p


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _cmd_check(a):
    myth, fact = load_kb(a.myth, "myth"), load_kb(a.fact, "fact")
    background = merge([load_kb(p) for p in a.background]) if a.background else None
    rules = [r for path in a.rules for r in load_kb(path).rules]
    report = check_claim(myth, fact, background, rules, myth_id=a.id or Path(a.myth).stem,
                         node_cap=a.node_cap, isolate_inputs=a.isolate)
    if report.verdict == ERROR:
        status = EXIT_LIMIT
    else:
        status = EXIT_CONFLICT if report.is_conflict else EXIT_OK
    if a.format == "text":
        lines = [f"{report.myth_id}: {report.verdict}"]
        if report.error:
            lines.append(f"{report.error['step']}: {report.error['message']}")
        if report.explanation:
            lines.append(report.explanation)
        return "\n".join(lines) + "\n", status
    return _dump(report.to_dict(timings=a.timings)), status


def _cmd_sat(a):
    kb = load_kb(a.kb)
    ok = Reasoner(kb, a.node_cap).is_satisfiable(parse_concept(a.concept))
    word = "satisfiable" if ok else "unsatisfiable"
    out = _dump({"concept": a.concept, "satisfiable": ok}) if a.format == "json" else word + "\n"
    return out, EXIT_OK if ok else EXIT_CONFLICT


def _cmd_subsumes(a):
    kb = load_kb(a.kb)
    ok = Reasoner(kb, a.node_cap).subsumes(parse_concept(a.sup), parse_concept(a.sub))
    if a.format == "json":
        return _dump({"sub": a.sub, "super": a.sup, "subsumes": ok}), EXIT_OK
    return ("yes" if ok else "no") + "\n", EXIT_OK


def _cmd_coherent(a):
    ok, unsat = Reasoner(load_kb(a.kb), a.node_cap).is_coherent()
    if a.format == "json":
        out = _dump({"coherent": ok, "unsat_concepts": unsat})
    else:
        out = "coherent\n" if ok else "incoherent: " + ", ".join(unsat) + "\n"
    return out, EXIT_OK if ok else EXIT_CONFLICT


def _cmd_consistent(a):
    ok = Reasoner(load_kb(a.kb), a.node_cap).is_consistent()
    out = _dump({"consistent": ok}) if a.format == "json" else ("consistent" if ok else "inconsistent") + "\n"
    return out, EXIT_OK if ok else EXIT_CONFLICT


def _cmd_antipatterns(a):
    matches = detect_antipatterns(load_kb(a.kb))
    if a.format == "text":
        lines = [f"{m.pattern_id} ({m.label}): " + ", ".join(f"{k}={v}" for k, v in m.participants.items())
                 for m in matches]
        out = "".join(line + "\n" for line in lines)
    else:
        out = _dump([m.to_dict() for m in matches])
    return out, EXIT_CONFLICT if matches else EXIT_OK


def _cmd_ingest(a):
    with open(a.ntriples, encoding="utf-8") as fh:
        graph = parse_ntriples(fh.read())
    kb, log = normalize_with_log(graph)
    for triple, message in log.warnings:
        print(f"warning: {message}: {triple}", file=sys.stderr)
    text = serialize_kb(kb) + ("\n" if kb.statements or kb.rbox or kb.annotations else "")
    if a.out:
        Path(a.out).write_text(text, encoding="utf-8")
        return "", EXIT_OK
    return text, EXIT_OK


def _cmd_translate(a):
    endpoint = a.endpoint or os.environ.get(ENDPOINT_ENV)
    if a.fixtures:
        graph = fetch_translation(a.text, fixtures=a.fixtures)
    elif endpoint:
        graph = fetch_translation(a.text, endpoint=endpoint)
        if a.record:
            path = record_fixture(a.text, graph, a.record)
            print(f"recorded {path}", file=sys.stderr)
    else:
        graph = fetch_translation(a.text, fixtures=data_path("fred"))
    if a.normalize:
        kb, _ = normalize_with_log(graph)
        return serialize_kb(kb) + "\n", EXIT_OK
    return graph.to_ntriples(), EXIT_OK


def _cmd_corpus(a):
    reports = run_corpus(a.manifest, jobs=a.jobs, node_cap=a.node_cap)
    summary = summarize(reports)
    counts = ", ".join(f"{k}={v}" for k, v in summary["counts"].items() if v)
    print(f"{summary['total']} entries: {counts or 'none'}", file=sys.stderr)
    if summary["unexpected"]:
        print("unexpected: " + ", ".join(summary["unexpected"]), file=sys.stderr)
    if a.format == "text":
        out = "".join(f"{r.myth_id}: {r.verdict}\n" for r in reports)
    else:
        out = _dump([r.to_dict(timings=a.timings) for r in reports])
    return out, min(len(summary["unexpected"]), 255)


_COMMANDS = {
    "check": _cmd_check, "sat": _cmd_sat, "subsumes": _cmd_subsumes, "coherent": _cmd_coherent,
    "consistent": _cmd_consistent, "antipatterns": _cmd_antipatterns, "ingest": _cmd_ingest,
    "translate": _cmd_translate, "corpus": _cmd_corpus,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    try:
        out, status = _COMMANDS[args.command](args)
    except ResourceLimitError as exc:
        print(f"mythos: resource limit: {exc}", file=sys.stderr)
        return EXIT_LIMIT
    except (OSError, MythosError, ValueError, json.JSONDecodeError) as exc:
        print(f"mythos: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        Path(args.output).write_text(out, encoding="utf-8")
    else:
        sys.stdout.write(out)
    return status


if __name__ == "__main__":
    sys.exit(main())
