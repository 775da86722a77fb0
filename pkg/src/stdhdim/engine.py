"""Density sequences and Hausdorff dimension estimates.

For a closed subgroup H of a standard group S with natural filtration S_n,

    c_n = log |H : H cap S_n| / log |S : S_n|,

and the Hausdorff dimension of H is liminf c_n. The ambient group is S itself:
passing to an open overgroup G adds the constant log |G : S| to every
denominator, which leaves the liminf unchanged. Everything here is exact
rational arithmetic; decimals only appear when rendering.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Mapping

from .group_law import (
    ChartTransform,
    StandardGroupPresentation,
    apply_transform,
    invert_transform,
    transform_presentation,
)
from .ring_core import filtration_exponent, residues_between, count_residues_between
from .subgroups import (
    DEFAULT_BUDGET,
    BudgetExceeded,
    Generated,
    ModuleSpan,
    NotASubgroupError,
    SubgroupSpec,
    ValuationSet,
    ensure_subgroup,
    image_log_index,
    image_set,
    kspan_rank,
    point_valuation,
    quotient_order_log,
    spec_kind,
)

AMBIENT_NOTE = "ambient group S; the constant log|G:S| offset is omitted since it cannot change a liminf"

PERIODIC = "periodic-formula"
MODULE_RANK = "module-rank"
FULL_GROUP = "full-group"
TRIVIAL_GROUP = "trivial-group"


@dataclass(frozen=True)
class DensityRow:
    n: int
    log_index_H: int
    log_index_G: int

    @property
    def c(self) -> Fraction:
        return Fraction(self.log_index_H, self.log_index_G)


@dataclass(frozen=True)
class DimensionReport:
    presentation: str
    subgroup: str
    kind: str
    d: int
    rows: tuple[DensityRow, ...]
    empirical_liminf: Fraction | None = None
    empirical_limsup: Fraction | None = None
    exact_value: Fraction | None = None
    provenance: str | None = None
    predicted: Fraction | None = None
    kspan_rank: int | None = None
    closed_form: tuple[Fraction, str] | None = None
    verified_at: int | None = None
    truncated_at: int | None = None
    truncation_reason: str | None = None
    tail_fraction: Fraction | None = None
    ambient: str = AMBIENT_NOTE

    @property
    def values(self) -> list[Fraction]:
        return [r.c for r in self.rows]

    def tail(self) -> list[DensityRow]:
        if self.tail_fraction is None:
            return list(self.rows)
        k = math.ceil(self.tail_fraction * len(self.rows))
        return list(self.rows[-k:])

    @property
    def exact_in_window(self) -> bool | None:
        if self.exact_value is None or not self.rows:
            return None
        tail = [r.c for r in self.tail()]
        return min(tail) <= self.exact_value <= max(tail)

    @property
    def value(self) -> Fraction | None:
        """Best available dimension: the closed form if known, else the tail minimum."""
        return self.exact_value if self.exact_value is not None else self.empirical_liminf


def _closed_form(S: StandardGroupPresentation, spec: SubgroupSpec) -> tuple[tuple[Fraction, str] | None, int | None]:
    if isinstance(spec, ValuationSet):
        return (spec.density / S.d, PERIODIC), None
    if isinstance(spec, ModuleSpan):
        e = kspan_rank(S, spec)
        prov = FULL_GROUP if e == S.d else MODULE_RANK
        return (Fraction(e, S.d), prov), e
    if isinstance(spec, Generated) and not spec.gens:
        return (Fraction(0), TRIVIAL_GROUP), 0
    return None, None


def density_sequence(
    S: StandardGroupPresentation,
    spec: SubgroupSpec,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    name: str = "H",
    verify_budget: int = 1 << 16,
) -> DimensionReport:
    """Rows (n, log_p|H:H cap S_n|, log_p|S:S_n|, c_n) for n = 1..n_max.

    Coordinate-set specs under a non-additive law are checked to be
    subgroups first (at the largest step the verification budget allows).
    A budget failure truncates the rows and is recorded in the report.
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    if n_max > S.max_steps:
        raise ValueError(f"n_max = {n_max} needs M > N + n_max = {S.level + n_max}; have M = {S.trunc}")
    verified_at = ensure_subgroup(S, spec, n_max, verify_budget)
    rows = []
    truncated_at = reason = None
    for n in range(1, n_max + 1):
        try:
            h = image_log_index(S, spec, n, budget)
        except BudgetExceeded as exc:
            truncated_at, reason = n, str(exc)
            break
        rows.append(DensityRow(n, h, quotient_order_log(S, n)))
    closed, e = _closed_form(S, spec)
    return DimensionReport(
        presentation=S.describe(),
        subgroup=name,
        kind=spec_kind(spec),
        d=S.d,
        rows=tuple(rows),
        closed_form=closed,
        kspan_rank=e,
        verified_at=verified_at,
        truncated_at=truncated_at,
        truncation_reason=reason,
    )


def liminf_estimate(report: DimensionReport, tail_fraction: Fraction | float | str = Fraction(1, 2)) -> DimensionReport:
    """Tail minimum and maximum of c_n over the last ceil(tail_fraction * rows) rows,
    with the closed-form value attached when the subgroup class has one."""
    if len(report.rows) < 4:
        raise ValueError(f"need at least 4 rows for a liminf estimate, have {len(report.rows)}")
    frac = Fraction(tail_fraction)
    if not 0 < frac <= 1:
        raise ValueError("tail_fraction must lie in (0, 1]")
    k = math.ceil(frac * len(report.rows))
    tail = [r.c for r in report.rows[-k:]]
    exact, prov = report.closed_form if report.closed_form else (None, None)
    return replace(
        report,
        empirical_liminf=min(tail),
        empirical_limsup=max(tail),
        exact_value=exact,
        provenance=prov,
        tail_fraction=frac,
    )


# --- Main Theorem -------------------------------------------------------------------


@dataclass(frozen=True)
class MainTheoremResult:
    passed: bool
    predicted: Fraction
    e: int
    d: int
    tolerance: Fraction
    report: DimensionReport
    reason: str


def main_theorem_check(
    S: StandardGroupPresentation,
    spec: ModuleSpan,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    name: str = "H",
    tail_fraction: Fraction = Fraction(1, 2),
    verify_budget: int = 1 << 16,
) -> MainTheoremResult:
    """Compare the measured dimension of a coordinate-span subgroup with e/d.

    Passes when the tail minimum is within 1/n_max of e/d and the closed form,
    if any, equals e/d exactly.
    """
    if not isinstance(spec, ModuleSpan):
        raise TypeError("the Main Theorem check applies to ModuleSpan subgroups")
    report = liminf_estimate(density_sequence(S, spec, n_max, budget, name, verify_budget), tail_fraction)
    e = report.kspan_rank
    predicted = Fraction(e, S.d)
    report = replace(report, predicted=predicted)
    tol = Fraction(1, n_max)
    gap = abs(report.empirical_liminf - predicted)
    ok_liminf = gap <= tol
    ok_exact = report.exact_value is None or report.exact_value == predicted
    if ok_liminf and ok_exact:
        reason = f"liminf {report.empirical_liminf} within {tol} of e/d = {predicted}"
    elif not ok_liminf:
        reason = f"liminf {report.empirical_liminf} is {gap} away from e/d = {predicted} (tolerance {tol})"
    else:
        reason = f"closed form {report.exact_value} differs from e/d = {predicted}"
    return MainTheoremResult(ok_liminf and ok_exact, predicted, e, S.d, tol, report, reason)


# --- chart invariance --------------------------------------------------------------


@dataclass(frozen=True)
class InvarianceRow:
    n: int
    c_phi: Fraction
    c_psi: Fraction
    log_index_H_psi: int
    log_index_G_psi: int


@dataclass(frozen=True)
class InvarianceReport:
    transform: str
    subgroup: str
    presentation: str
    transformed: str
    rows: tuple[InvarianceRow, ...]
    a: int | None
    b: int | None
    checked_lower: tuple[int, ...]
    checked_upper: tuple[int, ...]
    liminf_phi: Fraction
    liminf_psi: Fraction
    tolerance: Fraction
    window: int
    passed: bool
    ambient: str = AMBIENT_NOTE


def _window_points(S: StandardGroupPresentation, lo: int, width: int):
    """Representatives of (m^lo)^d modulo (m^(lo+width))^d, at full precision."""
    from itertools import product

    coords = list(residues_between(S.ring, lo, lo + width, S.trunc))
    return product(coords, repeat=S.d)


def _window_width(S: StandardGroupPresentation, lo: int, width: int, budget: int) -> int:
    while width > 1 and count_residues_between(S.ring, lo, lo + width) ** S.d > budget:
        width -= 1
    return width


def _in_T(tau: ChartTransform, T: StandardGroupPresentation, S: StandardGroupPresentation, x, n: int) -> bool:
    """Is the point with phi-coordinates x in T_n?"""
    if point_valuation(x) < S.level + tau.restrict:
        return False
    return point_valuation(apply_transform(tau, x)) >= T.level + n


def _lower_holds(S, T, tau, a: int, n: int, width: int, budget: int) -> bool:
    """S_(n+a) <= T_n, checked on every window representative."""
    lo = S.level + n + a
    w = min(_window_width(S, lo, width, budget), S.trunc - lo)
    if w <= 0:
        return True
    return all(_in_T(tau, T, S, x, n) for x in _window_points(S, lo, w))


def _upper_holds(S, T, sigma, b: int, n: int, width: int, budget: int) -> bool:
    """T_n <= S_(n-b): every psi-window point of level T.level + n pulls back into S_(n-b)."""
    lo = T.level + n
    w = min(_window_width(T, lo, width, budget), T.trunc - lo)
    if w <= 0:
        return True
    need = S.level + n - b
    return all(point_valuation(apply_transform(sigma, y)) >= need for y in _window_points(T, lo, w))


def sandwich_constants(
    S: StandardGroupPresentation,
    tau: ChartTransform,
    n_max: int,
    window: int = 2,
    budget: int = 1 << 12,
) -> tuple[int | None, int | None, list[int], list[int]]:
    """Least a, then least b (each at most n_max // 2) with S_(n+a) <= T_n <= S_(n-b)
    at every n of the window 1..n_max (n >= b for the upper containment).

    Containments are checked extensionally: every representative of the
    leading ``window`` layers of the smaller group is mapped and its
    valuation inspected.
    """
    T = transform_presentation(S, tau)
    sigma = invert_transform(tau)
    cap = n_max // 2

    def lower_ns(a):
        return [n for n in range(1, n_max + 1) if S.level + n + a < S.trunc]

    def upper_ns(b):
        return [n for n in range(max(b, 1), n_max + 1) if T.level + n < T.trunc]

    a_found = next((a for a in range(cap + 1) if all(_lower_holds(S, T, tau, a, n, window, budget) for n in lower_ns(a))), None)
    b_found = next((b for b in range(cap + 1) if all(_upper_holds(S, T, sigma, b, n, window, budget) for n in upper_ns(b))), None)
    return (
        a_found,
        b_found,
        lower_ns(a_found) if a_found is not None else [],
        upper_ns(b_found) if b_found is not None else [],
    )


def transported_log_index(
    S: StandardGroupPresentation,
    tau: ChartTransform,
    spec: SubgroupSpec,
    n: int,
    a: int,
    budget: int = DEFAULT_BUDGET,
    b: int | None = None,
) -> int:
    """log_p |H : H cap T_n| for T with chart psi = tau o phi.

    With S_(n+a) <= T_n the cosets of T_n are unions of cosets of S_(n+a), so
    |H : H cap T_n| = |img| / |img cap T_n| for img the image of H in S/S_(n+a).
    A known upper containment T_n <= S_(n-b) limits the chart test to image
    points already in S_(n-b).
    """
    T = transform_presentation(S, tau)
    img = image_set(S, spec, n + a, budget)
    floor = S.level + max(n - b, 0) if b is not None else 0
    inside = 0
    for x in img:
        if point_valuation(x) >= floor and _in_T(tau, T, S, tuple(c.lift(S.trunc) for c in x), n):
            inside += 1
    ratio, rem = divmod(len(img), inside)
    if rem:
        raise AssertionError("T_n does not partition the image into equal cosets")
    h = 0
    while ratio > 1:
        ratio, r = divmod(ratio, S.ring.p)
        if r:
            raise AssertionError(f"index {len(img)}/{inside} is not a power of p")
        h += 1
    return h


def std_invariance_check(
    S: StandardGroupPresentation,
    tau: ChartTransform,
    spec: SubgroupSpec,
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    name: str = "H",
    tail_fraction: Fraction = Fraction(1, 2),
    window: int = 2,
) -> InvarianceReport:
    """Compare c_n under phi and under psi = tau o phi and find the sandwich constants.

    Denominators on the psi side are log |S : T_n| = d s (f_S(j) + f_T(n)),
    j = tau.restrict: the index of T = S_j in S plus that of T_n in T.
    """
    T = transform_presentation(S, tau)
    a, b, lo_ns, up_ns = sandwich_constants(S, tau, n_max, window)
    phi = liminf_estimate(density_sequence(S, spec, n_max, budget, name), tail_fraction)
    top = n_max if a is None else min(n_max, S.max_steps - a)
    rows = []
    for r in phi.rows[:top]:
        n = r.n
        h = transported_log_index(S, tau, spec, n, a or 0, budget, b)
        g = S.d * S.ring.s * (filtration_exponent(S.ring, S.level, tau.restrict) + filtration_exponent(T.ring, T.level, n))
        rows.append(InvarianceRow(n, r.c, Fraction(h, g), h, g))
    k = math.ceil(Fraction(tail_fraction) * len(rows))
    liminf_psi = min(row.c_psi for row in rows[-k:])
    tol = Fraction(2, n_max)
    passed = a is not None and b is not None and abs(phi.empirical_liminf - liminf_psi) <= tol
    return InvarianceReport(
        transform=tau.describe(),
        subgroup=name,
        presentation=S.describe(),
        transformed=T.describe(),
        rows=tuple(rows),
        a=a,
        b=b,
        checked_lower=tuple(lo_ns),
        checked_upper=tuple(up_ns),
        liminf_phi=phi.empirical_liminf,
        liminf_psi=liminf_psi,
        tolerance=tol,
        window=window,
        passed=passed,
    )


# --- spectrum ---------------------------------------------------------------------


@dataclass(frozen=True)
class SpectrumEntry:
    name: str
    kind: str
    value: Fraction
    source: str
    analytic: bool
    exact: bool
    report: DimensionReport


@dataclass(frozen=True)
class SpectrumReport:
    d: int
    n_max: int
    entries: tuple[SpectrumEntry, ...]
    spectrum: tuple[Fraction, ...]
    allowed: tuple[Fraction, ...]
    violations: tuple[str, ...]
    witnesses: tuple[str, ...]
    approximate: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.violations


def spectrum_scan(
    S: StandardGroupPresentation,
    specs: Mapping[str, SubgroupSpec],
    n_max: int,
    budget: int = DEFAULT_BUDGET,
    tail_fraction: Fraction = Fraction(1, 2),
) -> SpectrumReport:
    """Dimensions of a battery of subgroups against the allowed set {0, 1/d, ..., 1}.

    ``spectrum`` collects the exact (closed-form) values of analytic specs.
    Specs without a closed form only have a tail minimum; they are listed as
    approximate and count as violations when no allowed value lies within
    1/n_max. Valuation-set subgroups are not analytic: their values are
    reported as witnesses and kept out of the check.
    """
    allowed = tuple(Fraction(k, S.d) for k in range(S.d + 1))
    tol = Fraction(1, n_max)
    entries = []
    violations = []
    witnesses = []
    approximate = []
    for name, spec in specs.items():
        rep = liminf_estimate(density_sequence(S, spec, n_max, budget, name), tail_fraction)
        exact = rep.exact_value is not None
        source = rep.provenance if exact else "tail-minimum"
        analytic = not isinstance(spec, ValuationSet)
        entries.append(SpectrumEntry(name, spec_kind(spec), rep.value, source, analytic, exact, rep))
        if not analytic:
            witnesses.append(name)
        elif exact:
            if rep.value not in allowed:
                violations.append(f"{name}: {rep.value} not in {{0, 1/{S.d}, ..., 1}}")
        else:
            approximate.append(name)
            if min(abs(rep.value - v) for v in allowed) > tol:
                violations.append(f"{name}: tail minimum {rep.value} is farther than {tol} from {{0, 1/{S.d}, ..., 1}}")
    spectrum = tuple(sorted({e.value for e in entries if e.analytic and e.exact}))
    return SpectrumReport(S.d, n_max, tuple(entries), spectrum, allowed, tuple(violations), tuple(witnesses), tuple(approximate))


__all__ = [
    "DensityRow",
    "DimensionReport",
    "InvarianceReport",
    "InvarianceRow",
    "MainTheoremResult",
    "NotASubgroupError",
    "SpectrumEntry",
    "SpectrumReport",
    "density_sequence",
    "liminf_estimate",
    "main_theorem_check",
    "sandwich_constants",
    "spectrum_scan",
    "std_invariance_check",
    "transported_log_index",
]
