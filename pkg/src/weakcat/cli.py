"""Command-line interface: ``weakcat <command> ...``.

Exit codes: 0 success, 1 diagnostics or infeasible post-selection, 2 usage
error (including missing files).  Data goes to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import report
from .qstate import QStateError
from .scenarios import (
    BUILTIN_NAMES,
    INTERPRETATIONS,
    VARIANT_NAMES,
    Scenario,
    ScenarioError,
    builtin,
    consistency_audit,
    evaluate_scenario,
)
from .sdl import SdlError, lower_text
from .vonneumann import PointerError, couple_and_postselect, gaussian_pointer, weak_limit_report
from .weakval import PostSelectionImpossible, WeakValueError, sample_outcomes, weak_value

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class _Exit(Exception):
    def __init__(self, code: int, message: str = ""):
        super().__init__(message)
        self.code = code
        self.message = message


def _seed() -> int:
    raw = os.environ.get("WEAKCAT_SEED", "0")
    try:
        return int(raw)
    except ValueError:
        raise _Exit(EXIT_USAGE, f"WEAKCAT_SEED must be an integer, got {raw!r}") from None


def load_scenario(ref: str, interpretation: Optional[str] = None) -> Scenario:
    if ref in BUILTIN_NAMES or ref in VARIANT_NAMES:
        return builtin(ref, interpretation or "literal")
    path = Path(ref)
    if not path.is_file():
        raise _Exit(EXIT_USAGE, f"{ref}: file not found (and not a built-in scenario)")
    try:
        text = path.read_bytes().decode("utf-8")
    except UnicodeDecodeError as e:
        raise _Exit(EXIT_FAIL, f"{ref}:1:1: error: file is not valid UTF-8 ({e.reason} at byte {e.start})") from None
    try:
        return lower_text(text, interpretation=interpretation, default_name=path.stem)
    except SdlError as e:
        raise _Exit(EXIT_FAIL, "\n".join(f"{ref}:{d}" for d in e.diagnostics)) from None


def _emit(text: str):
    sys.stdout.write(text)
    sys.stdout.flush()


def cmd_list(args) -> int:
    lines = []
    for name in BUILTIN_NAMES + VARIANT_NAMES:
        lines.append(f"{name:<22} {builtin(name).summary}")
    _emit("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_run(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    r = evaluate_scenario(s)
    if args.format == "json":
        _emit(report.dumps(report.report_dict(r)))
    elif args.format == "csv":
        _emit(report.report_csv(r))
    else:
        _emit(report.report_text(r))
    if not r.feasible:
        print(f"{s.name} ({s.interpretation}): post-selection impossible", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _observable(s: Scenario, name: str):
    try:
        return s.observable(name)
    except ScenarioError as e:
        raise _Exit(EXIT_USAGE, str(e)) from None


def cmd_weak(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    A = _observable(s, args.observable)
    w = weak_value(A, s.ensemble(), args.observable)
    out = {
        "schema": report.SCHEMA,
        "kind": "weak",
        "scenario": s.name,
        "interpretation": s.interpretation,
        "observable": args.observable,
        "weak_value": report.cplx(w.value),
        "overlap": report.cplx(w.overlap),
        "postselect_prob": report.fixed(w.postselect_prob),
    }
    _emit(report.dumps(out))
    return EXIT_OK


def cmd_pointer(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    A = _observable(s, args.observable)
    e = s.ensemble()
    if e.orthogonal:
        raise PostSelectionImpossible()
    ptr = gaussian_pointer(args.sigma, args.n, args.span)
    res = couple_and_postselect(A, e, ptr, args.g)
    out = report.coupling_dict(
        res,
        scenario=s.name,
        interpretation=s.interpretation,
        observable=args.observable,
        sigma=report.fixed(args.sigma),
        n=args.n,
        weak_value=report.cplx(weak_value(A, e).value),
    )
    _emit(report.dumps(out))
    return EXIT_OK


def sweep_points(g_from: float, g_to: float, steps: int) -> list[float]:
    """``steps`` geometrically spaced couplings between the bounds, descending."""
    if steps < 1:
        raise _Exit(EXIT_USAGE, "--steps must be at least 1")
    if g_from <= 0 or g_to <= 0:
        raise _Exit(EXIT_USAGE, "coupling bounds must be positive")
    hi, lo = max(g_from, g_to), min(g_from, g_to)
    if steps == 1:
        return [hi]
    if hi == lo:
        raise _Exit(EXIT_USAGE, "--g-from and --g-to must differ when --steps > 1")
    return [float(g) for g in np.geomspace(hi, lo, steps)]


def cmd_sweep(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    A = _observable(s, args.observable)
    e = s.ensemble()
    if e.orthogonal:
        raise PostSelectionImpossible()
    rows = weak_limit_report(A, e, args.sigma, sweep_points(args.g_from, args.g_to, args.steps), args.n, args.span)
    if args.format == "json":
        _emit(report.dumps(report.sweep_dict(
            rows, scenario=s.name, interpretation=s.interpretation,
            observable=args.observable, sigma=report.fixed(args.sigma), n=args.n,
        )))
    else:
        _emit(report.sweep_csv(rows))
    return EXIT_OK


def cmd_audit(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    a = consistency_audit(s)
    _emit(report.dumps(report.audit_dict(a)))
    if s.ensemble().orthogonal:
        print(f"{s.name} ({s.interpretation}): post-selection impossible", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def cmd_sample(args) -> int:
    s = load_scenario(args.scenario, args.interpretation)
    A = _observable(s, args.observable)
    if args.shots < 1:
        raise _Exit(EXIT_USAGE, "--shots must be at least 1")
    seed = _seed()
    state = s.ensemble().evolved_pre
    draws = sample_outcomes(A, state, args.shots, seed)
    from .weakval import born_distribution

    evals, probs, _ = born_distribution(A, state)
    outcomes = []
    for lam, p in zip(evals, probs):
        count = int(np.sum(draws == lam))
        outcomes.append({
            "eigenvalue": report.fixed(lam),
            "probability": report.fixed(p),
            "count": count,
            "frequency": report.fixed(count / args.shots),
        })
    _emit(report.dumps({
        "schema": report.SCHEMA,
        "kind": "sample",
        "scenario": s.name,
        "interpretation": s.interpretation,
        "observable": args.observable,
        "shots": args.shots,
        "seed": seed,
        "outcomes": outcomes,
    }))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="weakcat", description="Weak values of pre/post-selected interferometer scenarios.")
    sub = p.add_subparsers(dest="command", required=True)

    sub.add_parser("list", help="list built-in scenarios").set_defaults(func=cmd_list)

    def scenario_cmd(name, help, func, formats=None, default_format=None):
        sp = sub.add_parser(name, help=help)
        sp.add_argument("scenario", help="built-in scenario name or .sdl file")
        sp.add_argument("--interpretation", choices=INTERPRETATIONS, default=None)
        if formats:
            sp.add_argument("--format", choices=formats, default=default_format)
        sp.set_defaults(func=func)
        return sp

    scenario_cmd("run", "evaluate every observable of a scenario", cmd_run, ("json", "csv", "text"), "text")
    sp = scenario_cmd("weak", "weak value of one observable", cmd_weak)
    sp.add_argument("--observable", required=True)

    sp = scenario_cmd("pointer", "simulate the von Neumann pointer for one coupling strength", cmd_pointer)
    sp.add_argument("--observable", required=True)
    sp.add_argument("--g", type=float, required=True)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--span", type=float, default=None, help="grid half-width (default 16 sigma)")

    sp = scenario_cmd("sweep", "pointer shifts against weak-value predictions over a range of g",
                      cmd_sweep, ("csv", "json"), "csv")
    sp.add_argument("--observable", required=True)
    sp.add_argument("--g-from", type=float, required=True)
    sp.add_argument("--g-to", type=float, required=True)
    sp.add_argument("--steps", type=int, required=True)
    sp.add_argument("--sigma", type=float, default=1.0)
    sp.add_argument("--n", type=int, default=256)
    sp.add_argument("--span", type=float, default=None)

    scenario_cmd("audit", "consistency checks on a scenario", cmd_audit)

    sp = scenario_cmd("sample", "strong-measurement outcomes on the pre-selected state (seed: WEAKCAT_SEED)", cmd_sample)
    sp.add_argument("--observable", required=True)
    sp.add_argument("--shots", type=int, default=1000)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code) if e.code is not None else EXIT_OK
    try:
        return args.func(args)
    except _Exit as e:
        if e.message:
            print(e.message, file=sys.stderr)
        return e.code
    except PostSelectionImpossible as e:
        print(str(e), file=sys.stderr)
        return EXIT_FAIL
    except (PointerError, WeakValueError, ScenarioError, QStateError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_FAIL


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    return main(argv)


def entrypoint():
    sys.exit(main())
