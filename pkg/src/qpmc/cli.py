"""Command-line entry point.

Exit codes: 0 holds/found, 1 fails/none, 2 unknown, 3 input error,
4 checker/oracle disagreement.  The machine-readable report is one JSON
object on stdout; a human summary goes to stderr.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import lemmas
from .checker import FAILS, HOLDS, Checker, UnknownAtomError, check_quiescent, max_horizon_from_env
from .logic import UNBOUNDED, FormulaSyntaxError, parse_formula, render_formula, required_horizon
from .pcp import PCPFormatError, load_pcp, pad, solve_bounded
from .qpds import (
    Configuration,
    SystemFormatError,
    dumps_system,
    loads_system,
    orthogonality_diagnostics,
    validate_system,
)
from .reduction import (
    DecisionMode,
    PhaseAssignment,
    decide_pcp,
    encode_bounded,
    encode_unbounded,
    frac_str,
)

EXIT_HOLDS, EXIT_FAILS, EXIT_UNKNOWN, EXIT_INPUT, EXIT_DISAGREE = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


def _digest(*parts: str) -> str:
    h = hashlib.sha256()
    for p in parts:
        h.update(p.encode("utf-8"))
        h.update(b"\0")
    return h.hexdigest()[:16]


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(str(exc)) from None


def _emit(report: dict) -> None:
    sys.stdout.write(json.dumps(report, sort_keys=True, ensure_ascii=False) + "\n")


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {text!r}") from None


def _phases(args) -> PhaseAssignment:
    if args.phases == "random":
        return PhaseAssignment(args.seed if args.seed is not None else 0)
    return PhaseAssignment()


def _exit_for(truth) -> int:
    if truth is HOLDS:
        return EXIT_HOLDS
    if truth is FAILS:
        return EXIT_FAILS
    return EXIT_UNKNOWN


# --- commands --------------------------------------------------------------


def cmd_validate(args) -> int:
    text = _read(args.system)
    try:
        sys_ = loads_system(text)
    except SystemFormatError as exc:
        _emit({"command": "validate", "error": str(exc), "line": exc.line, "column": exc.column})
        _say(f"parse error: {exc}")
        return EXIT_INPUT
    report = validate_system(sys_, strict=not args.lenient)
    non_orth = orthogonality_diagnostics(sys_, args.tol)
    out = {
        "command": "validate",
        "inputs": _digest(text),
        "ok": report.ok,
        "violations": report.violations,
        "orthogonality": {
            "checked": "rows of pXw / qYw over a shared suffix w",
            "non_orthogonal_pairs": [list(p) for p in non_orth],
            "gating": False,
        },
        "warnings": ["the 'empty' label on empty-stack configurations is a tool convention"],
    }
    _emit(out)
    _say(f"{len(sys_.rules)} rules over {len(sys_.gamma)} symbols: "
         + ("OK" if report.ok else f"{len(report.violations)} violation(s)"))
    for v in report.violations:
        _say(f"  {v['kind']}: {v['where']} ({v['detail']})")
    if non_orth:
        _say(f"  note: {len(non_orth)} head pair(s) with non-orthogonal rows (diagnostic only)")
    return EXIT_HOLDS if report.ok else EXIT_FAILS


def cmd_check(args) -> int:
    sys_text = _read(args.system)
    formula_text = _read(args.formula[1:]) if args.formula.startswith("@") else args.formula
    try:
        sys_ = loads_system(sys_text)
        f = parse_formula(formula_text.strip())
    except (SystemFormatError, FormulaSyntaxError) as exc:
        _emit({"command": "check", "error": str(exc)})
        _say(f"input error: {exc}")
        return EXIT_INPUT
    if args.config is not None:
        toks = args.config.split()
        start = Configuration(None, tuple(toks)) if sys_.stateless else Configuration(toks[0], tuple(toks[1:]))
    elif sys_.start is not None:
        start = sys_.start
    else:
        _emit({"command": "check", "error": "no start configuration"})
        return EXIT_INPUT
    need = required_horizon(f)
    mode = args.mode or ("fixed" if need != UNBOUNDED or args.horizon else "deepen")
    checker = Checker(sys_, max_entries=args.cache_cap)
    started = time.perf_counter()
    try:
        if mode == "deepen":
            verdict, horizon = check_quiescent(sys_, start, f, ceiling=args.horizon or max_horizon_from_env(),
                                               checker=checker)
        else:
            horizon = args.horizon if args.horizon is not None else need
            if horizon == UNBOUNDED:
                raise ValueError("unbounded formula needs --horizon or --mode deepen")
            verdict = checker.check(start, f, horizon)
    except (UnknownAtomError, ValueError) as exc:
        _emit({"command": "check", "error": str(exc)})
        _say(f"input error: {exc}")
        return EXIT_INPUT
    out = {
        "command": "check",
        "inputs": _digest(sys_text, render_formula(f), str(start)),
        "start": str(start),
        "verdict": verdict.truth.value,
        "horizon": horizon,
        "required_horizon": None if need == UNBOUNDED else need,
        "quiescent": verdict.quiescent,
        "mode": mode,
        "wall_time": round(time.perf_counter() - started, 6),
    }
    if verdict.interval is not None:
        out["interval"] = {"lo": frac_str(verdict.interval.lo), "hi": frac_str(verdict.interval.hi)}
        if args.approx:
            out["interval_approx"] = [float(verdict.interval.lo), float(verdict.interval.hi)]
    _emit(out)
    _say(f"{verdict.truth.value} at horizon {horizon}" + (f", P in {verdict.interval}" if verdict.interval else ""))
    return _exit_for(verdict.truth)


def _load_pcp(path: str):
    try:
        return load_pcp(path)
    except OSError as exc:
        raise InputError(str(exc)) from None


def cmd_encode(args) -> int:
    inst = _load_pcp(args.pcp)
    if args.k is not None:
        inst = inst.with_bound(args.k)
    p = pad(inst)
    phases = _phases(args)
    bounded = not args.unbounded
    if bounded and inst.bound is None:
        raise InputError("bounded encoding needs 'k:' in the file or --k (use --unbounded otherwise)")
    art = encode_bounded(p, phases, args.t) if bounded else encode_unbounded(p, phases, args.t)
    prefix = Path(args.out) if args.out else Path(args.pcp).with_suffix("")
    sys_path = prefix.with_name(prefix.name + ".qpds")
    formula_path = prefix.with_name(prefix.name + ".pctl")
    sys_text = dumps_system(art.system)
    formula_text = render_formula(art.formula) + "\n"
    sys_path.write_text(sys_text, encoding="utf-8")
    formula_path.write_text(formula_text, encoding="utf-8")
    out = {
        "command": "encode",
        "inputs": inst.digest(),
        "mode": art.mode.value,
        "t": frac_str(art.t),
        "system": str(sys_path),
        "formula": str(formula_path),
        "gamma": art.gamma_report,
        "rules": len(art.system.rules),
        "horizon_hint": None if art.horizon_hint == UNBOUNDED else art.horizon_hint,
        "outer_bound": art.outer_bound,
        "phi_bound": art.phi_bound,
        "phases": phases.describe(),
        "warnings": art.warnings,
    }
    _emit(out)
    _say(f"wrote {sys_path} ({len(art.system.rules)} rules) and {formula_path}")
    for w in art.warnings:
        _say(f"  warning: {w}")
    return EXIT_HOLDS


def cmd_pcp_solve(args) -> int:
    inst = _load_pcp(args.pcp)
    k = args.k if args.k is not None else inst.bound
    if k is None:
        raise InputError("solve needs a bound: 'k:' in the file or --k")
    witness = solve_bounded(inst, k)
    _emit({"command": "pcp solve", "inputs": inst.digest(), "k": k,
           "witness": list(witness) if witness else None})
    _say("witness " + " ".join(map(str, witness)) if witness else "no witness")
    return EXIT_HOLDS if witness else EXIT_FAILS


def cmd_pcp_decide(args) -> int:
    inst = _load_pcp(args.pcp)
    if args.k is not None:
        inst = inst.with_bound(args.k)
    if inst.bound is None:
        raise InputError("decide needs a bound: 'k:' in the file or --k")
    report = decide_pcp(pad(inst), args.t, _phases(args), DecisionMode(args.mode))
    out = report.to_dict()
    out["command"] = "pcp decide"
    if args.approx:
        for row in out["probabilities"]:
            for key in list(row):
                if key != "stack":
                    row[key + "_approx"] = float(Fraction(row[key]))
    _emit(out)
    _say(f"{report.verdict}; oracle witness {report.oracle_witness}; "
         + ("agree" if report.agree else "inconclusive" if report.agree is None else "DISAGREE"))
    if report.agree is None:
        return EXIT_UNKNOWN
    if not report.agree:
        return EXIT_DISAGREE
    return EXIT_HOLDS if report.verdict == HOLDS.value else EXIT_FAILS


def cmd_lemmas(args) -> int:
    inst = _load_pcp(args.pcp)
    if args.k is not None:
        inst = inst.with_bound(args.k)
    if inst.bound is None:
        raise InputError("lemmas needs a bound: 'k:' in the file or --k")
    results = lemmas.run_all(pad(inst))
    _emit({"command": "lemmas", "inputs": inst.digest(), "results": [r.to_dict() for r in results],
           "passed": all(r.passed for r in results)})
    for r in results:
        _say(f"[{'PASS' if r.passed else 'FAIL'}] {r.name}")
        for d in r.details:
            _say(f"    {d}")
    return EXIT_HOLDS if all(r.passed for r in results) else EXIT_FAILS


# --- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qpmc", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"qpmc {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="normalisation, totality and orthogonality report")
    v.add_argument("system")
    v.add_argument("--lenient", action="store_true", help="allow right-hand sides longer than 2")
    v.add_argument("--tol", type=float, default=1e-9)
    v.set_defaults(func=cmd_validate)

    c = sub.add_parser("check", help="check a formula at a configuration")
    c.add_argument("system")
    c.add_argument("formula", help="formula text, or @file")
    c.add_argument("--config", help="start stack (top first); control state first for qPDS")
    c.add_argument("--horizon", type=int)
    c.add_argument("--mode", choices=["fixed", "deepen"])
    c.add_argument("--cache-cap", type=int, default=None)
    c.add_argument("--approx", action="store_true")
    c.set_defaults(func=cmd_check)

    e = sub.add_parser("encode", help="encode a PCP file as a qBPA plus formula")
    e.add_argument("pcp")
    e.add_argument("--unbounded", action="store_true")
    e.add_argument("--k", type=int)
    e.add_argument("--t", type=_fraction, default=Fraction(1, 2))
    e.add_argument("--phases", choices=["unit", "random"], default="unit")
    e.add_argument("--seed", type=int)
    e.add_argument("-o", "--out", help="output prefix (default: next to the PCP file)")
    e.set_defaults(func=cmd_encode)

    p = sub.add_parser("pcp", help="bounded PCP tools")
    psub = p.add_subparsers(dest="pcp_command", required=True)
    s = psub.add_parser("solve")
    s.add_argument("pcp")
    s.add_argument("--k", type=int)
    s.set_defaults(func=cmd_pcp_solve)
    d = psub.add_parser("decide")
    d.add_argument("pcp")
    d.add_argument("--k", type=int)
    d.add_argument("--t", type=_fraction, default=Fraction(1, 2))
    d.add_argument("--phases", choices=["unit", "random"], default="unit")
    d.add_argument("--seed", type=int)
    d.add_argument("--mode", choices=["sum", "literal"], default="sum")
    d.add_argument("--approx", action="store_true")
    d.set_defaults(func=cmd_pcp_decide)

    lm = sub.add_parser("lemmas", help="run the lemma checks on a bounded instance")
    lm.add_argument("pcp")
    lm.add_argument("--k", type=int)
    lm.set_defaults(func=cmd_lemmas)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else 0
    try:
        return args.func(args)
    except (InputError, PCPFormatError, SystemFormatError, FormulaSyntaxError, UnknownAtomError) as exc:
        _emit({"command": args.command, "error": str(exc)})
        _say(f"input error: {exc}")
        return EXIT_INPUT
    except ValueError as exc:
        _emit({"command": args.command, "error": str(exc)})
        _say(f"input error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
