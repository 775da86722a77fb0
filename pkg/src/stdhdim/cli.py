"""Command-line front end.

    stdhdim validate   --scenario FILE
    stdhdim hdim       --scenario FILE [--subgroup NAME]
    stdhdim oracle     --scenario FILE --subgroup NAME [--n N]
    stdhdim invariance --scenario FILE --transform NAME [--subgroup NAME]
    stdhdim spectrum   --scenario FILE

Exit codes: 0 success, 1 validation or check failure, 2 budget exhausted,
3 scenario parse error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .engine import (
    DimensionReport,
    density_sequence,
    liminf_estimate,
    main_theorem_check,
    spectrum_scan,
    std_invariance_check,
)
from .group_law import LawError, transform_presentation, validate_law
from .render import (
    decimal_str,
    dimension_csv,
    dimension_json,
    dumps,
    invariance_csv,
    invariance_json,
    oracle_csv,
    spectrum_csv,
    spectrum_json,
    write_atomic,
)
from .scenario import Scenario, ScenarioError, load_scenario
from .subgroups import (
    BudgetExceeded,
    IndeterminateRankError,
    ModuleSpan,
    NotASubgroupError,
    bruteforce_oracle,
    ensure_subgroup,
    image_log_index,
    verify_subgroup,
)

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_PARSE = 0, 1, 2, 3


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


def _out(msg: str = "") -> None:
    print(msg)


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario)
    if args.n_max is not None:
        if not 1 <= args.n_max < sc.trunc - sc.level:
            raise _Fail(EXIT_PARSE, f"--n-max must lie in 1..{sc.trunc - sc.level - 1}")
        sc = replace(sc, n_max=args.n_max)
    if args.budget is not None:
        sc = replace(sc, budget=args.budget)
    for w in sc.warnings:
        _warn(w)
    return sc


def _out_dir(args, sc: Scenario) -> Path | None:
    if args.out:
        return Path(args.out)
    if sc.out_dir:
        return Path(args.scenario).parent / sc.out_dir
    return None


def _format(args, sc: Scenario) -> str:
    return args.format or sc.out_format


def _emit(args, sc: Scenario, stem: str, csv_text: str | None, json_data) -> None:
    out = _out_dir(args, sc)
    if out is None:
        return
    fmt = _format(args, sc)
    if csv_text is not None and fmt in ("csv", "both"):
        _out(f"wrote {write_atomic(out / f'{stem}.csv', csv_text)}")
    if json_data is not None and fmt in ("json", "both"):
        _out(f"wrote {write_atomic(out / f'{stem}.json', dumps(json_data))}")


def _pick(names, wanted: str | None, what: str) -> list[str]:
    if wanted is None:
        if not names:
            raise _Fail(EXIT_PARSE, f"scenario defines no {what}s")
        return list(names)
    if wanted not in names:
        raise _Fail(EXIT_PARSE, f"unknown {what} {wanted!r} (have: {', '.join(names) or 'none'})")
    return [wanted]


# --- commands ----------------------------------------------------------------


def cmd_validate(args) -> int:
    sc = _scenario(args)
    S = sc.presentation
    failures = 0
    violations = validate_law(sc.law)
    if violations:
        failures += 1
        _out(f"law {sc.law.describe()}: INVALID")
        for v in violations:
            _out(f"  {v}")
    else:
        _out(f"law {sc.law.describe()}: ok")
    if violations:
        _out("subgroup and transform checks skipped: the law is invalid")
        return EXIT_FAIL
    n = min(2, S.max_steps)
    for name, spec in sc.subgroups.items():
        found = verify_subgroup(S, spec, n, sc.budget)
        if found is None:
            _out(f"subgroup {name}: ok (closed at n={n})")
        else:
            failures += 1
            _out(f"subgroup {name}: NOT A SUBGROUP at n={n}: {found}")
    for name, tau in sc.transforms.items():
        try:
            T = transform_presentation(S, tau)
            _out(f"transform {name}: ok (level {S.level} -> {T.level})")
        except LawError as exc:
            failures += 1
            _out(f"transform {name}: INVALID: {exc}")
    return EXIT_FAIL if failures else EXIT_OK


def _print_rows(rep: DimensionReport) -> None:
    _out(f"{'n':>3}  {'log|H:H^S_n|':>12}  {'log|S:S_n|':>10}  {'c_n':>8}  {'decimal':>9}")
    for r in rep.rows:
        _out(f"{r.n:>3}  {r.log_index_H:>12}  {r.log_index_G:>10}  {str(r.c):>8}  {decimal_str(r.c):>9}")


def cmd_hdim(args) -> int:
    sc = _scenario(args)
    S = sc.presentation
    status = EXIT_OK
    for name in _pick(sc.subgroups, args.subgroup, "subgroup"):
        spec = sc.subgroups[name]
        _out(f"# {name} ({S.describe()})")
        check = None
        if isinstance(spec, ModuleSpan):
            check = main_theorem_check(S, spec, sc.n_max, sc.budget, name)
            rep = check.report
        else:
            rep = density_sequence(S, spec, sc.n_max, sc.budget, name)
            if len(rep.rows) >= 4:
                rep = liminf_estimate(rep)
        _print_rows(rep)
        if rep.truncated_at is not None:
            _out(f"budget exhausted at n={rep.truncated_at}; last computed n={rep.truncated_at - 1}")
            status = max(status, EXIT_BUDGET)
        if rep.empirical_liminf is None:
            _out("too few rows for a liminf estimate")
        elif check is not None:
            verdict = "PASS" if check.passed else "FAIL"
            _out(f"liminf = {rep.value}, predicted = {check.predicted}, {verdict}")
            if not check.passed:
                _out(f"  {check.reason}")
                status = max(status, EXIT_FAIL)
        elif rep.exact_value is not None:
            label = {"periodic-formula": "periodic formula"}.get(rep.provenance)
            _out(f"liminf = {rep.value} ({label})" if label else f"liminf = {rep.value}, exact")
        else:
            _out(f"liminf ~ {rep.empirical_liminf} (tail minimum over n >= {rep.tail()[0].n}), limsup ~ {rep.empirical_limsup}")
        _emit(args, sc, f"hdim_{name}", dimension_csv(rep), dimension_json(rep, check))
    return status


def cmd_oracle(args) -> int:
    sc = _scenario(args)
    if not sc.oracle_enabled:
        raise _Fail(EXIT_BUDGET, "oracle disabled: budget is below |S:S_1|")
    S = sc.presentation
    (name,) = _pick(sc.subgroups, args.subgroup, "subgroup")
    spec = sc.subgroups[name]
    n_top = args.n or min(4, S.max_steps)
    ensure_subgroup(S, spec, n_top)
    rows = []
    for n in range(1, n_top + 1):
        fast = image_log_index(S, spec, n, sc.budget)
        slow = bruteforce_oracle(S, spec, n, sc.budget)
        rows.append((n, fast, slow))
        _out(f"n={n}: fast={fast} oracle={slow} {'match' if fast == slow else 'MISMATCH'}")
    matches = sum(f == s for _, f, s in rows)
    _out(f"{matches}/{len(rows)} matches")
    _emit(args, sc, f"oracle_{name}", oracle_csv(rows), None)
    return EXIT_OK if matches == len(rows) else EXIT_FAIL


def cmd_invariance(args) -> int:
    sc = _scenario(args)
    S = sc.presentation
    status = EXIT_OK
    (tname,) = _pick(sc.transforms, args.transform, "transform")
    tau = sc.transforms[tname]
    for name in _pick(sc.subgroups, args.subgroup, "subgroup"):
        rep = std_invariance_check(S, tau, sc.subgroups[name], sc.n_max, sc.budget, name)
        _out(f"# {name} under {tname}: {rep.transformed}")
        _out(f"{'n':>3}  {'c_n (phi)':>10}  {'c_n (psi)':>10}")
        for r in rep.rows:
            _out(f"{r.n:>3}  {str(r.c_phi):>10}  {str(r.c_psi):>10}")
        _out(f"sandwich: a = {rep.a}, b = {rep.b}")
        verdict = "PASS" if rep.passed else "FAIL"
        _out(f"liminf (phi) = {rep.liminf_phi}, liminf (psi) = {rep.liminf_psi}, tolerance {rep.tolerance}, {verdict}")
        if not rep.passed:
            status = EXIT_FAIL
        _emit(args, sc, f"invariance_{tname}_{name}", invariance_csv(rep), invariance_json(rep))
    return status


def cmd_spectrum(args) -> int:
    sc = _scenario(args)
    S = sc.presentation
    rep = spectrum_scan(S, sc.subgroups, sc.n_max, sc.budget)
    for e in rep.entries:
        note = "" if e.analytic else "  [non-analytic witness, excluded]"
        _out(f"{e.name}: {e.value} ({e.source}){note}")
    _out("spectrum = {" + ", ".join(str(v) for v in rep.spectrum) + "}")
    _out("allowed  = {" + ", ".join(str(v) for v in rep.allowed) + "}")
    for v in rep.violations:
        _out(f"VIOLATION {v}")
    _out("PASS" if rep.passed else "FAIL")
    _emit(args, sc, "spectrum", spectrum_csv(rep), spectrum_json(rep))
    return EXIT_OK if rep.passed else EXIT_FAIL


# --- entry point ---------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="stdhdim", description="Hausdorff dimensions of subgroups of standard groups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", required=True, help="scenario YAML file")
    common.add_argument("--out", help="output directory (overrides outputs.dir)")
    common.add_argument("--n-max", type=int, dest="n_max", help="override n_max")
    common.add_argument("--budget", type=int, help="override the enumeration budget")
    common.add_argument("--format", choices=("csv", "json", "both"), help="output format (overrides outputs.format)")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the law, subgroups and transforms")
    p = sub.add_parser("hdim", parents=[common], help="density sequence and dimension of a subgroup")
    p.add_argument("--subgroup", help="subgroup name (default: all)")
    p = sub.add_parser("oracle", parents=[common], help="compare fast indices with brute-force enumeration")
    p.add_argument("--subgroup", required=True)
    p.add_argument("--n", type=int, help="largest step to compare (default 4)")
    p = sub.add_parser("invariance", parents=[common], help="compare c_n under a chart transform")
    p.add_argument("--transform", required=True)
    p.add_argument("--subgroup", help="subgroup name (default: all)")
    sub.add_parser("spectrum", parents=[common], help="dimensions of every subgroup against {0, 1/d, ..., 1}")
    return parser


COMMANDS = {
    "validate": cmd_validate,
    "hdim": cmd_hdim,
    "oracle": cmd_oracle,
    "invariance": cmd_invariance,
    "spectrum": cmd_spectrum,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except _Fail as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except BudgetExceeded as exc:
        print(f"error: budget exhausted: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (NotASubgroupError, IndeterminateRankError, LawError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
