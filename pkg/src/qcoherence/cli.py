"""Command line entry point: ``qcoherence {example,verify,sweep,lemmas}``.

Exit codes: 0 ok, 1 example mismatch or lemma failure, 2 usage,
3 parse error (state/config/grid file), 4 invalid state,
5 bound violation, 6 I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bounds import FORMS, TOL_INEQ, best_bound, lemma2_factor
from .coherence import c_l1
from .config import ConfigError, load_config
from .errors import ArgumentError, StateFormatError, ValidationError
from .qmatrix import from_pure, load_state, partial_trace
from .sampling import worked_example
from .sweep import provenance, rows_to_csv, run_lemmas, run_sweep

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_PARSE = 3
EXIT_INVALID = 4
EXIT_VIOLATION = 5
EXIT_IO = 6

EXAMPLE_TOL = 1e-12


def _err(msg: str) -> None:
    print(f"error: {msg}", file=sys.stderr)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True)


def example_values(tol: float = TOL_INEQ) -> list[tuple[str, float, float]]:
    """(name, computed, expected) for every headline number of the worked example."""
    rho = from_pure(worked_example())
    report = best_bound(rho, alpha=2.0, beta=1.0, tol=tol)
    return [
        ("C(A1)", c_l1(partial_trace(rho, [0])), 1.0),
        ("C(A2)", c_l1(partial_trace(rho, [1])), 0.0),
        ("C(A3)", c_l1(partial_trace(rho, [2])), 3 / 5),
        ("C(A2A3)", c_l1(partial_trace(rho, [1, 2])), 3 / 5),
        ("C(A1A2A3)", c_l1(rho), 11 / 5),
        ("k", report.k if report.k is not None else float("nan"), 3 / 5),
        ("m", float(report.m) if report.m is not None else float("nan"), 1.0),
        ("factor(k=3/5, alpha=2)", lemma2_factor(3 / 5, 2.0), 39 / 9),
        ("factor(k=1, alpha=2)", lemma2_factor(1.0, 2.0), 3.0),
        ("rhs_theorem", report.rhs_theorem, 64 / 25),
        ("rhs_baseline_k1", report.rhs_baseline_k1, 52 / 25),
        ("lhs", report.lhs, 121 / 25),
    ]


def cmd_example(args) -> int:
    values = example_values(args.tol)
    bad = []
    for name, got, want in values:
        dev = abs(got - want)
        status = "ok" if dev <= EXAMPLE_TOL else "MISMATCH"
        print(f"{name:<24} {got:.17g}  expected {want:.17g}  [{status}]")
        if dev > EXAMPLE_TOL:
            bad.append(name)
    v = {name: got for name, got, _ in values}
    orderings = [
        ("factor beats k=1 baseline", v["factor(k=3/5, alpha=2)"] > v["factor(k=1, alpha=2)"]),
        ("lhs >= rhs_theorem", v["lhs"] >= v["rhs_theorem"]),
        ("rhs_theorem > rhs_baseline_k1", v["rhs_theorem"] > v["rhs_baseline_k1"]),
    ]
    for label, holds in orderings:
        print(f"{label:<32} [{'ok' if holds else 'FAIL'}]")
        if not holds:
            bad.append(label)
    if bad:
        _err("mismatch in " + ", ".join(bad))
        return EXIT_MISMATCH
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        rho = load_state(args.state)
    except OSError as exc:
        _err(f"cannot read {args.state}: {exc}")
        return EXIT_IO
    except (StateFormatError, ValidationError) as exc:
        # normalisation failures of pure vectors surface while parsing
        _err(str(exc))
        return EXIT_PARSE if isinstance(exc, StateFormatError) else EXIT_INVALID
    try:
        report = best_bound(rho, args.alpha, args.beta, tol=args.tol, form=args.form)
    except (ValidationError, ArgumentError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    out = report.to_dict()
    out["provenance"] = provenance()
    text = _dump(out)
    print(text)
    if args.out:
        try:
            Path(args.out).write_text(text + "\n")
        except OSError as exc:
            _err(f"cannot write {args.out}: {exc}")
            return EXIT_IO
    if report.violated(args.tol):
        _err(f"bound violated: lhs {report.lhs!r} < rhs {report.rhs_theorem!r}")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        _err(f"cannot read {args.config}: {exc}")
        return EXIT_IO
    except ConfigError as exc:
        _err(str(exc))
        return EXIT_PARSE
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.check_chain:
        updates["check_chain"] = True
    if args.tol is not None:
        updates["tolerances"] = config.tolerances.model_copy(update={"tol_ineq": args.tol})
    if args.out:
        updates["output_path"] = args.out
    if args.form:
        updates["condition_form"] = args.form
    config = config.model_copy(update=updates)
    try:
        rows, summary = run_sweep(config, workers=args.workers)
    except (ArgumentError, ValidationError) as exc:
        _err(str(exc))
        return EXIT_INVALID
    if config.output_path:
        try:
            Path(config.output_path).write_text(rows_to_csv(rows))
        except OSError as exc:
            _err(f"cannot write {config.output_path}: {exc}")
            return EXIT_IO
    print(_dump({"summary": summary.to_dict(), "provenance": provenance()}))
    if summary.violations:
        _err(f"{summary.violations} bound violations")
        return EXIT_VIOLATION
    if summary.chain_failures:
        _err(f"{summary.chain_failures} proof-chain failures")
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_lemmas(args) -> int:
    grid = None
    if args.config:
        try:
            grid = json.loads(Path(args.config).read_text())
        except OSError as exc:
            _err(f"cannot read {args.config}: {exc}")
            return EXIT_IO
        except json.JSONDecodeError as exc:
            _err(f"{args.config}: invalid JSON: {exc}")
            return EXIT_PARSE
        if not isinstance(grid, dict):
            _err("grid file must hold a JSON object")
            return EXIT_PARSE
    try:
        result = run_lemmas(grid, tol=args.tol)
    except (ArgumentError, TypeError) as exc:
        _err(f"bad grid: {exc}")
        return EXIT_PARSE
    print(f"lemma2 scalar grid: {result.lemma2_points} points, {result.lemma2_failures} failures")
    print(f"lemma1 states:      {result.lemma1_checks} checks, {result.lemma1_failures} failures")
    return EXIT_OK if result.ok else EXIT_MISMATCH


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qcoherence", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("example", help="reproduce the 3-qubit worked example")
    p.add_argument("--tol", type=float, default=TOL_INEQ, help="inequality tolerance")
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("verify", help="best bound for a state file")
    p.add_argument("--state", required=True, help="state JSON file")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=TOL_INEQ)
    p.add_argument("--out", help="write the JSON report here")
    p.add_argument("--form", choices=FORMS, default="proof", help="dominated-side condition form")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep", help="run a sweep described by a config file")
    p.add_argument("--config", required=True)
    p.add_argument("--out", help="CSV output path (overrides output_path)")
    p.add_argument("--seed", type=int, help="master seed override")
    p.add_argument("--check-chain", action="store_true", help="also verify every proof-chain step")
    p.add_argument("--tol", type=float, help="inequality tolerance override")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--form", choices=FORMS, help="dominated-side condition form override")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("lemmas", help="run the scalar and bipartite lemma batteries")
    p.add_argument("--config", help="optional JSON grid overrides")
    p.add_argument("--tol", type=float, default=TOL_INEQ)
    p.set_defaults(func=cmd_lemmas)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "tol", None) is not None and not args.tol >= 0:
        _err("--tol must be non-negative")
        return 2
    if getattr(args, "seed", None) is not None and not 0 <= args.seed < 2**64:
        _err("--seed must be a 64-bit unsigned integer")
        return 2
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
