"""Command-line driver: ``bnctrl {enumerate,verify,oracle,maxlen,export-lp}``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from .benders import EnumerationReport, enumerate_controls
from .cnf import CNFWidthError, build_clauses
from .dynamics import (
    ControlVector,
    OracleSweep,
    StateSpaceTooLarge,
    enumerate_attractors,
)
from .model import (
    ModelError,
    build_aggregated_llp,
    build_master,
    build_max_forbidden_length,
    build_subproblem,
    build_subspace_separation,
    write_lp,
)
from .network import BnetError, augment_phenotype, parse_bnet, read_bnet
from .verify import VerificationCache, max_forbidden_length, verify_feasibility, verify_minimality

log = logging.getLogger("bnctrl")

EXIT_OK, EXIT_INPUT, EXIT_PARTIAL = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise InputError(message)


def _tmax(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("--tmax must be at least 1")
    return v


def _tmax_or_inf(text: str) -> int | None:
    if text.lower() in ("inf", "infinity", "none"):
        return None
    return _tmax(text)


def _nonneg(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _load(path: str):
    try:
        bn = read_bnet(path)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    if bn.phenotype is None:
        raise InputError(f"{path}: no '# phenotype:' directive")
    return augment_phenotype(bn)


def _control(bn, specs) -> ControlVector:
    try:
        d = ControlVector.parse(specs or [])
    except ValueError as exc:
        raise InputError(str(exc)) from None
    bad = [g for g in d if g not in bn.controllable]
    if bad:
        raise InputError(f"not controllable: {', '.join(bad)}")
    return d


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="bnctrl", description="Minimal controls of synchronous Boolean networks.")
    p.add_argument("-v", "--verbose", action="count", default=0, help="more logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("enumerate", help="enumerate minimal controls")
    e.add_argument("model")
    e.add_argument("--tmax", type=_tmax, default=5)
    e.add_argument("--use-ts-cut", action="store_true")
    e.add_argument("--strategy", choices=["DEC", "AGG"], default="DEC", type=str.upper)
    e.add_argument("--max-size", type=_nonneg, default=7)
    e.add_argument("--time-limit", type=float, default=600.0)
    e.add_argument("--backend", default=None, help="builtin | builtin:python | external:<command>")
    e.add_argument("--seed-order", type=int, default=None, help="seed for a variable-order permutation")
    e.add_argument("--accept-no-attractor", action="store_true",
                   help="accept controls that leave no attractor of length <= tmax")
    e.add_argument("--out", default=None, help="report JSON (default: stdout)")
    e.add_argument("--progress-csv", default=None)
    e.add_argument("--cut-stats-csv", default=None)
    e.add_argument("--no-timestamps", action="store_true", help="omit timing fields from the JSON")

    v = sub.add_parser("verify", help="check feasibility and minimality of a report's controls")
    v.add_argument("report")
    v.add_argument("--model", default=None, help="network file (default: the one embedded in the report)")
    v.add_argument("--tmax", type=_tmax_or_inf, default=argparse.SUPPRESS,
                   help="length bound (default: the report's Tmax; 'inf' for exhaustive)")
    v.add_argument("--cache", default=None, help="JSON cache file")
    v.add_argument("--time-limit", type=float, default=None, help="per-length limit in seconds")
    v.add_argument("--backend", default=None)
    v.add_argument("--out", default=None, help="verdict CSV (default: stdout)")

    o = sub.add_parser("oracle", help="exhaustive attractors and minimal controls")
    o.add_argument("model")
    o.add_argument("--tmax", type=_tmax_or_inf, default=None)
    o.add_argument("--control", nargs="*", default=[], help="fixings like x2=1")
    o.add_argument("--minimal", action="store_true", help="also list minimal controls")
    o.add_argument("--max-size", type=_nonneg, default=2)
    o.add_argument("--accept-no-attractor", action="store_true")
    o.add_argument("--out", default=None)

    m = sub.add_parser("maxlen", help="longest forbidden attractor over small controls")
    m.add_argument("model")
    m.add_argument("--lambda-max", type=_nonneg, default=7)
    m.add_argument("--tmax", type=_tmax, default=100)
    m.add_argument("--time-limit", type=float, default=3600.0)
    m.add_argument("--backend", default=None)

    x = sub.add_parser("export-lp", help="write one of the integer models as an LP file")
    x.add_argument("model")
    x.add_argument("--kind", choices=["subproblem", "llp", "master", "separation", "maxlen"],
                   default="subproblem")
    x.add_argument("--control", nargs="*", default=[])
    x.add_argument("--length", type=_tmax, default=1, help="T for the subproblem")
    x.add_argument("--tmax", type=_tmax, default=5)
    x.add_argument("--lambda", dest="lam", type=_nonneg, default=0)
    x.add_argument("--out", default=None)
    return p


def cmd_enumerate(args) -> int:
    bn = _load(args.model)
    clauses = build_clauses(bn)
    report = enumerate_controls(
        bn, clauses, Tmax=args.tmax, use_ts_cut=args.use_ts_cut, strategy=args.strategy,
        max_size=args.max_size, time_limit=args.time_limit, accept_no_attractor=args.accept_no_attractor,
        backend=args.backend, order_seed=args.seed_order,
    )
    report.network["path"] = str(args.model)
    _write(args.out, json.dumps(report.to_json(not args.no_timestamps), indent=1) + "\n")
    if args.progress_csv:
        _write(args.progress_csv, report.progress_csv())
    if args.cut_stats_csv:
        _write(args.cut_stats_csv, report.cut_stats_csv())
    log.info("%d minimal control(s); termination: %s", len(report.controls), report.termination)
    return EXIT_PARTIAL if report.timed_out else EXIT_OK


def cmd_verify(args) -> int:
    try:
        data = json.loads(Path(args.report).read_text(encoding="utf-8"))
        report = EnumerationReport.from_json(data)
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"cannot read report {args.report}: {exc}") from None
    if args.model:
        bn = _load(args.model)
    else:
        bn = augment_phenotype(parse_bnet(report.network["bnet"]))
    tmax = args.tmax if hasattr(args, "tmax") else report.settings.get("Tmax")
    accept = bool(report.settings.get("accept_no_attractor", False))
    clauses = build_clauses(bn)
    cache = VerificationCache(args.cache)
    rows = []
    partial = False
    for fc in report.controls:
        fv = verify_feasibility(bn, clauses, fc.control, tmax, cache, args.time_limit, args.backend, accept)
        mv = verify_minimality(bn, clauses, fc.control, tmax, cache, args.time_limit, args.backend, accept)
        partial |= fv.status == "indeterminate" or bool(mv.indeterminate)
        rows.append({
            "control": " ".join(fc.control.strings()) or "{}",
            "size": fc.size,
            "feasible": fv.status,
            "minimal": "yes" if mv.minimal else ("unknown" if mv.indeterminate else "no"),
            "feasible_subset": " ".join(mv.witness_subset.strings()) if mv.witness_subset is not None else "",
        })
    cache.save()
    out = sys.stdout if args.out in (None, "-") else open(args.out, "w", newline="", encoding="utf-8")
    try:
        w = csv.DictWriter(out, fieldnames=["control", "size", "feasible", "minimal", "feasible_subset"],
                           lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    finally:
        if out is not sys.stdout:
            out.close()
    bad = sum(r["feasible"] != "feasible" or r["minimal"] != "yes" for r in rows)
    log.info("%d control(s) checked, %d not certified", len(rows), bad)
    return EXIT_PARTIAL if partial else EXIT_OK


def cmd_oracle(args) -> int:
    bn = _load(args.model)
    d = _control(bn, args.control)
    atts = enumerate_attractors(bn, d, args.tmax)
    phi = bn.phenotype_gene
    shown = [g for g in bn.genes if g != phi]
    out = {
        "schema": 1,
        "genes": shown,
        "control": d.strings(),
        "tmax": args.tmax,
        "attractors": [
            {"length": w.length, "forbidden": w.is_forbidden(phi),
             "states": ["".join(str(s[bn.index(g)]) for g in shown) for s in w.states]}
            for w in atts
        ],
    }
    if args.minimal:
        sweep = OracleSweep(bn, args.max_size)
        out["max_size"] = args.max_size
        out["minimal_controls"] = [c.strings() for c in sweep.minimal_controls(args.tmax, args.accept_no_attractor)]
    _write(args.out, json.dumps(out, indent=1) + "\n")
    return EXIT_OK


def cmd_maxlen(args) -> int:
    bn = _load(args.model)
    res = max_forbidden_length(bn, build_clauses(bn), args.lambda_max, args.tmax, args.time_limit, args.backend)
    out = {"status": res.status, "value": res.value,
           "control": res.control.strings() if res.control is not None else None,
           "states": res.witness.render() if res.witness is not None else None}
    _write(None, json.dumps(out, indent=1) + "\n")
    return EXIT_PARTIAL if res.status in ("lower-bound", "unknown") else EXIT_OK


def cmd_export_lp(args) -> int:
    bn = _load(args.model)
    clauses = build_clauses(bn)
    d = _control(bn, args.control)
    if args.kind == "subproblem":
        model = build_subproblem(bn, clauses, d, args.length, max(args.tmax, args.length))
    elif args.kind == "llp":
        model = build_aggregated_llp(bn, clauses, d, args.tmax)
    elif args.kind == "master":
        model = build_master(bn, args.lam)
    elif args.kind == "separation":
        model = build_subspace_separation(bn, clauses, d)
    else:
        model = build_max_forbidden_length(bn, clauses, args.lam, args.tmax)
    _write(args.out, write_lp(model))
    return EXIT_OK


COMMANDS = {
    "enumerate": cmd_enumerate,
    "verify": cmd_verify,
    "oracle": cmd_oracle,
    "maxlen": cmd_maxlen,
    "export-lp": cmd_export_lp,
}


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except InputError as exc:
        print(f"bnctrl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, BnetError, CNFWidthError, ModelError, StateSpaceTooLarge, ValueError) as exc:
        print(f"bnctrl: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
