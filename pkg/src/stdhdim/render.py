"""JSON/CSV rendering of engine reports.

Fractions are the source of truth: JSON carries {num, den, decimal} and the
decimal is 6 significant digits, round-half-even. Nothing here depends on
time or the environment, so equal reports render to equal bytes.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from decimal import ROUND_HALF_EVEN, Context, Decimal
from fractions import Fraction
from pathlib import Path

from .engine import DimensionReport, InvarianceReport, MainTheoremResult, SpectrumReport

_CTX = Context(prec=6, rounding=ROUND_HALF_EVEN)


def decimal_str(x: Fraction) -> str:
    x = Fraction(x)
    if x == 0:
        return "0"
    return format(_CTX.divide(Decimal(x.numerator), Decimal(x.denominator)), "f")


def frac_json(x: Fraction | None) -> dict | None:
    if x is None:
        return None
    x = Fraction(x)
    return {"num": x.numerator, "den": x.denominator, "decimal": decimal_str(x)}


def dimension_json(rep: DimensionReport, check: MainTheoremResult | None = None) -> dict:
    out = {
        "presentation": rep.presentation,
        "subgroup": rep.subgroup,
        "kind": rep.kind,
        "d": rep.d,
        "ambient": rep.ambient,
        "rows": [
            {"n": r.n, "log_index_H": r.log_index_H, "log_index_G": r.log_index_G, "c": frac_json(r.c)} for r in rep.rows
        ],
        "tail_fraction": frac_json(rep.tail_fraction),
        "empirical_liminf": frac_json(rep.empirical_liminf),
        "empirical_limsup": frac_json(rep.empirical_limsup),
        "exact_value": frac_json(rep.exact_value),
        "provenance": rep.provenance,
        "exact_in_window": rep.exact_in_window,
        "predicted": frac_json(rep.predicted),
        "kspan_rank": rep.kspan_rank,
        "verified_at": rep.verified_at,
        "truncated_at": rep.truncated_at,
        "truncation_reason": rep.truncation_reason,
    }
    if check is not None:
        out["main_theorem"] = {
            "passed": check.passed,
            "e": check.e,
            "d": check.d,
            "predicted": frac_json(check.predicted),
            "tolerance": frac_json(check.tolerance),
            "reason": check.reason,
        }
    return out


def dimension_csv(rep: DimensionReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "log_index_H", "log_index_G", "c_num", "c_den", "c_decimal"])
    for r in rep.rows:
        c = r.c
        w.writerow([r.n, r.log_index_H, r.log_index_G, c.numerator, c.denominator, decimal_str(c)])
    return buf.getvalue()


def invariance_json(rep: InvarianceReport) -> dict:
    return {
        "transform": rep.transform,
        "subgroup": rep.subgroup,
        "presentation": rep.presentation,
        "transformed": rep.transformed,
        "ambient": rep.ambient,
        "a": rep.a,
        "b": rep.b,
        "window": rep.window,
        "checked_lower": list(rep.checked_lower),
        "checked_upper": list(rep.checked_upper),
        "rows": [
            {
                "n": r.n,
                "c_phi": frac_json(r.c_phi),
                "c_psi": frac_json(r.c_psi),
                "log_index_H_psi": r.log_index_H_psi,
                "log_index_G_psi": r.log_index_G_psi,
            }
            for r in rep.rows
        ],
        "liminf_phi": frac_json(rep.liminf_phi),
        "liminf_psi": frac_json(rep.liminf_psi),
        "tolerance": frac_json(rep.tolerance),
        "passed": rep.passed,
    }


def invariance_csv(rep: InvarianceReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "c_phi_num", "c_phi_den", "c_phi_decimal", "c_psi_num", "c_psi_den", "c_psi_decimal"])
    for r in rep.rows:
        w.writerow([r.n, r.c_phi.numerator, r.c_phi.denominator, decimal_str(r.c_phi),
                    r.c_psi.numerator, r.c_psi.denominator, decimal_str(r.c_psi)])
    return buf.getvalue()


def spectrum_json(rep: SpectrumReport) -> dict:
    return {
        "d": rep.d,
        "n_max": rep.n_max,
        "allowed": [frac_json(v) for v in rep.allowed],
        "spectrum": [frac_json(v) for v in rep.spectrum],
        "entries": [
            {
                "name": e.name,
                "kind": e.kind,
                "value": frac_json(e.value),
                "source": e.source,
                "analytic": e.analytic,
                "exact": e.exact,
                "note": None if e.analytic else "non-analytic witness",
            }
            for e in rep.entries
        ],
        "approximate": list(rep.approximate),
        "witnesses": list(rep.witnesses),
        "violations": list(rep.violations),
        "passed": rep.passed,
    }


def spectrum_csv(rep: SpectrumReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["name", "kind", "value_num", "value_den", "value_decimal", "source", "analytic"])
    for e in rep.entries:
        w.writerow([e.name, e.kind, e.value.numerator, e.value.denominator, decimal_str(e.value), e.source, e.analytic])
    return buf.getvalue()


def oracle_csv(rows: list[tuple[int, int, int]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "log_index_fast", "log_index_oracle", "match"])
    for n, fast, slow in rows:
        w.writerow([n, fast, slow, fast == slow])
    return buf.getvalue()


def dumps(data) -> str:
    return json.dumps(data, indent=2, sort_keys=True) + "\n"


def write_atomic(path: str | os.PathLike, text: str) -> Path:
    """Write via a temporary file in the same directory, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
