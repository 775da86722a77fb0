"""Scenario files: YAML documents describing a standard group and a battery
of subgroups and chart transforms.

See the README for the schema. Every error carries the dotted path of the
offending field and, when known, its line in the file.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from pathlib import Path

import yaml

from .group_law import (
    ChartTransform,
    FormalGroupLaw,
    LawError,
    StandardGroupPresentation,
    builtin_law,
)
from .ring_core import RingDescriptor, TruncatedElement, check_level, filtration_exponent, variable_names
from .subgroups import DEFAULT_BUDGET, Generated, ModuleSpan, SubgroupSpec, ValuationSet, check_spec

FORMATS = ("csv", "json", "both")


class ScenarioError(ValueError):
    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.line = line
        where = f"line {line}, " if line else ""
        super().__init__(f"{where}{path or '<root>'}: {message}")


@dataclass(frozen=True)
class Scenario:
    ring: RingDescriptor
    d: int
    level: int
    trunc: int
    law: FormalGroupLaw
    subgroups: dict[str, SubgroupSpec]
    transforms: dict[str, ChartTransform]
    n_max: int
    budget: int
    out_dir: str | None = None
    out_format: str = "both"
    strict_p2: bool = True
    warnings: tuple[str, ...] = field(default=())

    @property
    def presentation(self) -> StandardGroupPresentation:
        return StandardGroupPresentation(self.ring, self.d, self.level, self.law, self.trunc, strict_p2=self.strict_p2)

    @property
    def oracle_enabled(self) -> bool:
        return self.ring.q ** (self.d * filtration_exponent(self.ring, self.level, 1)) <= self.budget


# --- line lookup ---------------------------------------------------------------


def _lines(node) -> dict[tuple, int]:
    """Map each key path in the composed YAML tree to its 1-based line."""
    out: dict[tuple, int] = {}

    def walk(n, path):
        out[path] = n.start_mark.line + 1
        if isinstance(n, yaml.MappingNode):
            for k, v in n.value:
                walk(v, path + (k.value,))
                out[path + (k.value,)] = k.start_mark.line + 1
        elif isinstance(n, yaml.SequenceNode):
            for i, v in enumerate(n.value):
                walk(v, path + (i,))

    if node is not None:
        walk(node, ())
    return out


class _Ctx:
    def __init__(self, lines: dict[tuple, int]):
        self.lines = lines

    def error(self, path: tuple, message: str) -> ScenarioError:
        text = ".".join(str(p) if not isinstance(p, int) else f"[{p}]" for p in path).replace(".[", "[")
        line = None
        for k in range(len(path), -1, -1):
            if path[:k] in self.lines:
                line = self.lines[path[:k]]
                break
        return ScenarioError(text, message, line)

    def get(self, data: dict, path: tuple, key: str, kind, default=...):
        if key not in data:
            if default is ...:
                raise self.error(path, f"missing required field {key!r}")
            return default
        v = data[key]
        if kind is int and (isinstance(v, bool) or not isinstance(v, int)):
            raise self.error(path + (key,), f"expected an integer, got {v!r}")
        if kind is not int and not isinstance(v, kind):
            raise self.error(path + (key,), f"expected {getattr(kind, '__name__', kind)}, got {type(v).__name__}")
        return v


# --- polynomial strings --------------------------------------------------------

_TERM_SPLIT = re.compile(r"\s*([+-])\s*")
_FACTOR = re.compile(r"^([A-Za-z]\w*)(?:\^(\d+))?$")


def parse_polynomial(text: str | int, names: list[str]) -> dict[tuple[int, ...], int]:
    """Parse ``"t + 3*t1*t2^2 - X1*Y2"`` into {exponent vector: integer coefficient}.

    Integer factors multiply the coefficient; a leading minus negates it.
    Coefficients are returned as plain integers and interpreted by the
    caller's coefficient ring (an F_q encoding, or a residue mod p^M).
    """
    if isinstance(text, bool):
        raise ValueError(f"not a polynomial: {text!r}")
    if isinstance(text, int):
        return {(0,) * len(names): text} if text else {}
    s = str(text).strip()
    if not s:
        raise ValueError("empty expression")
    if s[0] not in "+-":
        s = "+" + s
    pieces = _TERM_SPLIT.split(s)[1:]
    out: dict[tuple[int, ...], int] = {}
    index = {n: i for i, n in enumerate(names)}
    for sign, body in zip(pieces[0::2], pieces[1::2]):
        coeff = -1 if sign == "-" else 1
        exps = [0] * len(names)
        for factor in body.split("*"):
            factor = factor.strip()
            if factor.isdigit():
                coeff *= int(factor)
                continue
            m = _FACTOR.match(factor)
            if not m or m.group(1) not in index:
                raise ValueError(f"unknown factor {factor!r} (expected one of {', '.join(names)} or an integer)")
            exps[index[m.group(1)]] += int(m.group(2) or 1)
        key = tuple(exps)
        out[key] = out.get(key, 0) + coeff
    return {k: v for k, v in out.items() if v}


def parse_element(ring: RingDescriptor, trunc: int, value) -> TruncatedElement:
    if ring.is_padic:
        if isinstance(value, bool):
            raise ValueError(f"not an integer: {value!r}")
        if isinstance(value, int):
            return ring.constant(value, trunc)
        poly = parse_polynomial(value, ["p"])
        total = sum(c * ring.p**e[0] for e, c in poly.items())
        return ring.constant(total, trunc)
    poly = parse_polynomial(value, variable_names(ring.num_vars))
    return ring.from_terms(poly, trunc)


def law_variable_names(d: int) -> list[str]:
    if d == 1:
        return ["X", "Y"]
    return [f"X{i}" for i in range(1, d + 1)] + [f"Y{i}" for i in range(1, d + 1)]


def transform_variable_names(d: int) -> list[str]:
    return ["X"] if d == 1 else [f"X{i}" for i in range(1, d + 1)]


def _series_table(ctx: _Ctx, path: tuple, comp, names: list[str]) -> dict:
    """One series component: a polynomial string, a mapping from monomial
    strings to coefficients, or a list of [exponent vector, coefficient] pairs."""
    if isinstance(comp, (str, int)) and not isinstance(comp, bool):
        try:
            return parse_polynomial(comp, names)
        except ValueError as exc:
            raise ctx.error(path, str(exc)) from None
    if isinstance(comp, list):
        if any(not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], list) for pair in comp):
            raise ctx.error(path, "expected a list of [exponent vector, coefficient] pairs")
        comp = {tuple(e): c for e, c in comp}
    if isinstance(comp, dict):
        out: dict = {}
        for key, c in comp.items():
            if isinstance(c, bool) or not isinstance(c, int):
                raise ctx.error(path + (key,), f"coefficient must be an integer, got {c!r}")
            if isinstance(key, (list, tuple)):
                mono = tuple(key)
                if len(mono) != len(names) or any(not isinstance(e, int) or e < 0 for e in mono):
                    raise ctx.error(path, f"exponent vector {list(key)} must have {len(names)} nonnegative entries")
                terms = {mono: 1}
            else:
                try:
                    terms = parse_polynomial(key, names)
                except ValueError as exc:
                    raise ctx.error(path + (key,), str(exc)) from None
                if len(terms) != 1 or next(iter(terms.values())) != 1:
                    raise ctx.error(path + (key,), f"key {key!r} must be a single monomial")
            (mono,) = terms
            out[mono] = out.get(mono, 0) + c
        return out
    raise ctx.error(path, "expected a polynomial string, a monomial-coefficient mapping or a list of pairs")


# --- sections --------------------------------------------------------------------


def _parse_ring(ctx: _Ctx, data) -> RingDescriptor:
    path = ("ring",)
    if not isinstance(data, dict):
        raise ctx.error(path, "expected a mapping with kind and p")
    kind = ctx.get(data, path, "kind", str)
    p = ctx.get(data, path, "p", int)
    try:
        if kind in ("padic", "Zp"):
            if "vars" in data:
                raise ctx.error(path + ("vars",), "p-adic rings take no variables")
            return RingDescriptor.padic(p)
        if kind in ("power_series", "PowerSeries"):
            q = ctx.get(data, path, "q", int, p)
            r = ctx.get(data, path, "vars", int, 1)
            return RingDescriptor.power_series(p, q, r)
    except ScenarioError:
        raise
    except ValueError as exc:
        raise ctx.error(path, str(exc)) from None
    raise ctx.error(path + ("kind",), f"unknown ring kind {kind!r} (padic or power_series)")


def _parse_law(ctx: _Ctx, data, ring: RingDescriptor, d: int, trunc: int) -> FormalGroupLaw:
    path = ("law",)
    try:
        if isinstance(data, str):
            return builtin_law(data, ring, d, trunc)
        if isinstance(data, dict) and "name" in data:
            return builtin_law(ctx.get(data, path, "name", str), ring, d, trunc)
        if isinstance(data, dict) and "components" in data:
            comps = ctx.get(data, path, "components", list)
            if len(comps) != d:
                raise ctx.error(path + ("components",), f"{len(comps)} components given, d = {d}")
            names = law_variable_names(d)
            tables = [_series_table(ctx, path + ("components", i), c, names) for i, c in enumerate(comps)]
            return FormalGroupLaw.from_coefficients(ring, d, trunc, tables, data.get("label", "custom"))
    except LawError as exc:
        raise ctx.error(path, str(exc)) from None
    raise ctx.error(path, "expected a builtin name or a mapping with 'name' or 'components'")


def _parse_point(ctx: _Ctx, path: tuple, value, ring: RingDescriptor, d: int, trunc: int):
    if not isinstance(value, list) or len(value) != d:
        raise ctx.error(path, f"expected a list of {d} coordinates")
    coords = []
    for j, c in enumerate(value):
        try:
            coords.append(parse_element(ring, trunc, c))
        except ValueError as exc:
            raise ctx.error(path + (j,), str(exc)) from None
    return tuple(coords)


def _parse_subgroup(ctx: _Ctx, path: tuple, data, ring, d, trunc) -> SubgroupSpec:
    if not isinstance(data, dict) or len(data) != 1:
        raise ctx.error(path, "expected exactly one of generated, module_span, valuation_set")
    (kind, body), = data.items()
    if kind in ("generated", "module_span"):
        if not isinstance(body, list):
            raise ctx.error(path + (kind,), "expected a list of points")
        gens = tuple(_parse_point(ctx, path + (kind, i), g, ring, d, trunc) for i, g in enumerate(body))
        try:
            return Generated(gens) if kind == "generated" else ModuleSpan(gens)
        except ValueError as exc:
            raise ctx.error(path + (kind,), str(exc)) from None
    if kind == "valuation_set":
        p = path + (kind,)
        if not isinstance(body, dict):
            raise ctx.error(p, "expected a mapping with period (and optional preperiod, coordinate)")
        period = ctx.get(body, p, "period", list)
        pre = ctx.get(body, p, "preperiod", list, [])
        coord = ctx.get(body, p, "coordinate", int, 1)
        try:
            return ValuationSet(tuple(period), tuple(pre), coord)
        except (ValueError, TypeError) as exc:
            raise ctx.error(p, str(exc)) from None
    raise ctx.error(path, f"unknown subgroup kind {kind!r}")


def _parse_transform(ctx: _Ctx, path: tuple, data, ring, d, trunc, name) -> ChartTransform:
    try:
        if data == "identity":
            return ChartTransform.identity(ring, d, trunc, label=name)
        if not isinstance(data, dict):
            raise ctx.error(path, "expected 'identity' or a mapping with scale, linear or series")
        restrict = ctx.get(data, path, "restrict", int, 0)
        kinds = [k for k in ("scale", "linear", "series") if k in data]
        if len(kinds) != 1:
            raise ctx.error(path, "give exactly one of scale, linear, series")
        kind = kinds[0]
        if kind == "scale":
            return ChartTransform.scaling(ring, d, trunc, ctx.get(data, path, "scale", int), restrict, label=name)
        if kind == "linear":
            mat = ctx.get(data, path, "linear", list)
            if len(mat) != d or any(not isinstance(r, list) or len(r) != d for r in mat):
                raise ctx.error(path + ("linear",), f"expected a {d}x{d} integer matrix")
            return replace(ChartTransform.linear(ring, d, trunc, mat, label=name), restrict=restrict)
        comps = ctx.get(data, path, "series", list)
        if len(comps) != d:
            raise ctx.error(path + ("series",), f"{len(comps)} components given, d = {d}")
        names = transform_variable_names(d)
        tables = [_series_table(ctx, path + ("series", i), c, names) for i, c in enumerate(comps)]
        return ChartTransform.from_coefficients(ring, d, trunc, tables, restrict, label=name)
    except LawError as exc:
        raise ctx.error(path, str(exc)) from None


_TOP_KEYS = {"ring", "d", "level", "trunc", "law", "subgroups", "transforms", "n_max", "budget", "outputs", "strict_p2"}


def parse_scenario(text: str) -> Scenario:
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        line = exc.problem_mark.line + 1 if exc.problem_mark else None
        raise ScenarioError("", f"YAML syntax error: {exc.problem}", line) from None
    ctx = _Ctx(_lines(node))
    if not isinstance(data, dict):
        raise ctx.error((), "scenario must be a mapping")
    unknown = sorted(set(data) - _TOP_KEYS, key=str)
    if unknown:
        raise ctx.error((unknown[0],), f"unknown field (allowed: {', '.join(sorted(_TOP_KEYS))})")
    ring = _parse_ring(ctx, ctx.get(data, (), "ring", dict))
    d = ctx.get(data, (), "d", int)
    if d < 1:
        raise ctx.error(("d",), "d must be >= 1")
    level = ctx.get(data, (), "level", int)
    strict = ctx.get(data, (), "strict_p2", bool, True)
    try:
        check_level(ring, level, strict)
    except ValueError as exc:
        raise ctx.error(("level",), str(exc)) from None
    trunc = ctx.get(data, (), "trunc", int)
    if trunc <= level + 1:
        raise ctx.error(("trunc",), f"trunc must exceed level + 1 = {level + 1}")
    if "law" not in data:
        raise ctx.error((), "missing required field 'law'")
    law = _parse_law(ctx, data["law"], ring, d, trunc)
    n_max = ctx.get(data, (), "n_max", int, min(8, trunc - level - 1))
    if not 1 <= n_max < trunc - level:
        raise ctx.error(("n_max",), f"n_max must lie in 1..{trunc - level - 1} (n_max < trunc - level)")
    budget = ctx.get(data, (), "budget", int, DEFAULT_BUDGET)
    if budget < 1:
        raise ctx.error(("budget",), "budget must be positive")

    S = StandardGroupPresentation(ring, d, level, law, trunc, strict_p2=strict)
    subgroups: dict[str, SubgroupSpec] = {}
    for name, body in (ctx.get(data, (), "subgroups", dict, {}) or {}).items():
        spec = _parse_subgroup(ctx, ("subgroups", name), body, ring, d, trunc)
        try:
            check_spec(S, spec)
        except ValueError as exc:
            raise ctx.error(("subgroups", name), str(exc)) from None
        subgroups[str(name)] = spec
    transforms: dict[str, ChartTransform] = {}
    for name, body in (ctx.get(data, (), "transforms", dict, {}) or {}).items():
        transforms[str(name)] = _parse_transform(ctx, ("transforms", name), body, ring, d, trunc, str(name))

    outputs = ctx.get(data, (), "outputs", dict, {}) or {}
    out_dir = ctx.get(outputs, ("outputs",), "dir", str, None)
    fmt = ctx.get(outputs, ("outputs",), "format", str, "both")
    if fmt not in FORMATS:
        raise ctx.error(("outputs", "format"), f"format must be one of {', '.join(FORMATS)}")

    scenario = Scenario(ring, d, level, trunc, law, subgroups, transforms, n_max, budget, out_dir, fmt, strict)
    if not scenario.oracle_enabled:
        need = ring.q ** (d * filtration_exponent(ring, level, 1))
        note = f"budget {budget} is below |S:S_1| = {need}; oracle commands are disabled"
        scenario = replace(scenario, warnings=(note,))
    return scenario


def load_scenario(path: str | Path) -> Scenario:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError("", f"cannot read {path}: {exc.strerror}") from None
    return parse_scenario(text)
