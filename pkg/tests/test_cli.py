from __future__ import annotations

import csv
import json
import subprocess
import sys
from pathlib import Path

import pytest

from stdhdim.cli import main
from stdhdim.scenario import ScenarioError, parse_polynomial, parse_scenario

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"

HEIS = """\
ring: {kind: power_series, p: 2}
d: 3
level: 1
trunc: 12
law: heisenberg
n_max: 8
subgroups:
  trivial: {generated: []}
  center: {module_span: [[0, 0, t]]}
  plane_xz: {module_span: [[t, 0, 0], [0, 0, t]]}
  full: {module_span: [[t, 0, 0], [0, t, 0], [0, 0, t]]}
  bad_plane: {module_span: [[t, 0, 0], [0, t, 0]]}
transforms:
  identity: identity
"""

LINE = """\
ring: {kind: power_series, p: 2}
d: 1
level: 1
trunc: 12
law: {LAW}
n_max: 8
subgroups:
  full: {module_span: [[t]]}
  evens: {valuation_set: {period: [1, 0]}}
transforms:
  identity: identity
  scale_t: {scale: 1}
  square: {series: ["X + X^2"]}
"""


def write(tmp_path, text, name="s.yaml"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


# --- polynomial strings and scenarios ----------------------------------------------------


def test_parse_polynomial():
    assert parse_polynomial("t + t^2", ["t"]) == {(1,): 1, (2,): 1}
    assert parse_polynomial("t1*t2 - 2*t1^3", ["t1", "t2"]) == {(1, 1): 1, (3, 0): -2}
    assert parse_polynomial("X1*Y2 + X3", ["X1", "X2", "X3", "Y1", "Y2", "Y3"]) == {(1, 0, 0, 0, 1, 0): 1, (0, 0, 1, 0, 0, 0): 1}
    assert parse_polynomial(0, ["t"]) == {}
    assert parse_polynomial("t + t", ["t"]) == {(1,): 2}
    with pytest.raises(ValueError):
        parse_polynomial("s", ["t"])


def test_parse_heisenberg_scenario():
    sc = parse_scenario(HEIS)
    assert sc.d == 3 and sc.level == 1 and sc.trunc == 12 and sc.n_max == 8
    assert set(sc.subgroups) == {"trivial", "center", "plane_xz", "full", "bad_plane"}
    assert sc.presentation.law.describe() == "heisenberg"
    assert sc.oracle_enabled and not sc.warnings


def test_parse_coefficient_table_forms():
    base = "ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\n"
    a = parse_scenario(base + 'law: {components: ["X + Y + X*Y"]}\n').law
    b = parse_scenario(base + "law: {components: [{X: 1, Y: 1, X*Y: 1}]}\n").law
    c = parse_scenario(base + "law: {components: [[[[1, 0], 1], [[0, 1], 1], [[1, 1], 1]]]}\n").law
    assert a.components == b.components == c.components


def test_parse_padic_elements():
    text = "ring: {kind: padic, p: 3}\nd: 2\nlevel: 1\ntrunc: 6\nlaw: additive(2)\nsubgroups:\n  w: {module_span: [[3, 'p^2 + p']]}\n"
    sc = parse_scenario(text)
    (g,) = sc.subgroups["w"].gens
    assert [c.value for c in g] == [3, 12]


@pytest.mark.parametrize(
    "text,where",
    [
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\nfoo: 1\n", "foo"),
        ("ring: {kind: power_series, p: 4}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\n", "ring"),
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 0\ntrunc: 6\nlaw: additive\n", "level"),
        ("ring: {kind: power_series, p: 2}\nd: 2\nlevel: 1\ntrunc: 6\nlaw: heisenberg\n", "law"),
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\nsubgroups:\n  h: {module_span: [[1]]}\n", "subgroups.h"),
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\nsubgroups:\n  h: {module_span: [[s]]}\n", "subgroups.h.module_span[0][0]"),
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\nn_max: 9\n", "n_max"),
        ("ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 6\nlaw: additive\ntransforms:\n  x: {series: ['X^2']}\n", "transforms.x"),
    ],
)
def test_parse_errors_name_the_field(text, where):
    with pytest.raises(ScenarioError) as info:
        parse_scenario(text)
    assert info.value.path == where
    assert info.value.line is not None


def test_yaml_syntax_error_has_line():
    with pytest.raises(ScenarioError) as info:
        parse_scenario("ring: {kind: power_series\nd: 1\n")
    assert info.value.line is not None


def test_low_budget_disables_oracle():
    sc = parse_scenario(HEIS + "budget: 4\n")
    assert not sc.oracle_enabled and "oracle commands are disabled" in sc.warnings[0]


# --- commands -----------------------------------------------------------------------


def test_validate_heisenberg_ok(tmp_path, capsys):
    text = HEIS.replace("  bad_plane: {module_span: [[t, 0, 0], [0, t, 0]]}\n", "")
    code, out, _ = run(["validate", "--scenario", write(tmp_path, text)], capsys)
    assert code == 0 and "law heisenberg: ok" in out


def test_validate_bad_plane(tmp_path, capsys):
    code, out, _ = run(["validate", "--scenario", write(tmp_path, HEIS)], capsys)
    assert code == 1
    assert "subgroup bad_plane: NOT A SUBGROUP" in out and "(t, 0, 0) * (0, t, 0) = (t, t, t^2)" in out


def test_validate_bad_law(capsys):
    code, out, _ = run(["validate", "--scenario", str(SCENARIOS / "bad_law.yaml")], capsys)
    assert code == 1 and "X^2 has no Y factor" in out and "mixed-monomial" in out


def test_parse_error_exit_code(tmp_path, capsys):
    code, _, err = run(["validate", "--scenario", write(tmp_path, "ring: 3\n")], capsys)
    assert code == 3 and "ring" in err
    code, _, err = run(["validate", "--scenario", str(tmp_path / "missing.yaml")], capsys)
    assert code == 3


def test_hdim_center(tmp_path, capsys):
    code, out, _ = run(["hdim", "--scenario", write(tmp_path, HEIS), "--subgroup", "center", "--out", str(tmp_path / "o")], capsys)
    assert code == 0
    assert out.strip().splitlines()[-3] == "liminf = 1/3, predicted = 1/3, PASS"
    rows = list(csv.DictReader((tmp_path / "o" / "hdim_center.csv").open()))
    assert [r["c_decimal"] for r in rows] == ["0.333333"] * 8
    assert list(rows[0]) == ["n", "log_index_H", "log_index_G", "c_num", "c_den", "c_decimal"]
    data = json.loads((tmp_path / "o" / "hdim_center.json").read_text())
    assert data["main_theorem"]["passed"] and data["kspan_rank"] == 1


def test_hdim_full_and_evens(tmp_path, capsys):
    path = write(tmp_path, LINE.replace("{LAW}", "additive"))
    code, out, _ = run(["hdim", "--scenario", path, "--subgroup", "evens"], capsys)
    assert code == 0 and "liminf = 1/2 (periodic formula)" in out
    code, out, _ = run(["hdim", "--scenario", path, "--subgroup", "full"], capsys)
    assert code == 0 and "liminf = 1, predicted = 1, PASS" in out


def test_hdim_budget_exit(tmp_path, capsys):
    text = "ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 14\nlaw: multiplicative\nn_max: 12\nbudget: 64\nsubgroups:\n  g: {generated: [[t], [t^3], [t^5]]}\n"
    code, out, _ = run(["hdim", "--scenario", write(tmp_path, text)], capsys)
    assert code == 2 and "budget exhausted at n=8; last computed n=7" in out


def test_hdim_format_json_only(tmp_path, capsys):
    out_dir = tmp_path / "o"
    run(["hdim", "--scenario", write(tmp_path, HEIS), "--subgroup", "trivial", "--out", str(out_dir), "--format", "json", "--n-max", "5"], capsys)
    assert sorted(p.name for p in out_dir.iterdir()) == ["hdim_trivial.json"]
    assert len(json.loads((out_dir / "hdim_trivial.json").read_text())["rows"]) == 5


def test_unknown_subgroup(tmp_path, capsys):
    code, _, err = run(["hdim", "--scenario", write(tmp_path, HEIS), "--subgroup", "nope"], capsys)
    assert code == 3 and "unknown subgroup" in err


def test_oracle_commands(tmp_path, capsys):
    path = write(tmp_path, HEIS)
    code, out, _ = run(["oracle", "--scenario", path, "--subgroup", "center", "--n", "4", "--out", str(tmp_path / "o")], capsys)
    assert code == 0 and "4/4 matches" in out
    rows = list(csv.DictReader((tmp_path / "o" / "oracle_center.csv").open()))
    assert [r["match"] for r in rows] == ["True"] * 4
    code, out, _ = run(["oracle", "--scenario", path, "--subgroup", "full", "--n", "3"], capsys)
    assert code == 0 and "n=3: fast=9 oracle=9" in out
    diag = "ring: {kind: power_series, p: 2}\nd: 2\nlevel: 1\ntrunc: 8\nlaw: additive(2)\nsubgroups:\n  diag: {module_span: [[t, t]]}\n"
    code, out, _ = run(["oracle", "--scenario", write(tmp_path, diag, "d.yaml"), "--subgroup", "diag", "--n", "5"], capsys)
    assert code == 0 and "5/5 matches" in out


def test_oracle_disabled_by_budget(tmp_path, capsys):
    code, _, err = run(["oracle", "--scenario", write(tmp_path, HEIS + "budget: 4\n"), "--subgroup", "center"], capsys)
    assert code == 2 and "oracle" in err


@pytest.mark.parametrize("tname,ab", [("identity", "a = 0, b = 0"), ("scale_t", "a = 0, b = 0"), ("square", "a = 0, b = 0")])
def test_invariance_command(tmp_path, capsys, tname, ab):
    path = write(tmp_path, LINE.replace("{LAW}", "multiplicative"))
    code, out, _ = run(["invariance", "--scenario", path, "--transform", tname, "--subgroup", "evens"], capsys)
    assert code == 0 and f"sandwich: {ab}" in out and out.strip().endswith("PASS")


def test_spectrum_commands(tmp_path, capsys):
    text = HEIS.replace("  bad_plane: {module_span: [[t, 0, 0], [0, t, 0]]}\n", "")
    code, out, _ = run(["spectrum", "--scenario", write(tmp_path, text)], capsys)
    assert code == 0 and "spectrum = {0, 1/3, 2/3, 1}" in out
    code, out, _ = run(["spectrum", "--scenario", str(SCENARIOS / "additive_d2.yaml"), "--out", str(tmp_path / "o")], capsys)
    assert code == 0 and "spectrum = {0, 1/2, 1}" in out
    empty = "ring: {kind: power_series, p: 2}\nd: 1\nlevel: 1\ntrunc: 8\nlaw: additive\n"
    code, out, _ = run(["spectrum", "--scenario", write(tmp_path, empty, "e.yaml")], capsys)
    assert code == 0 and "spectrum = {}" in out


def test_spectrum_witness_flagged(tmp_path, capsys):
    code, out, _ = run(["spectrum", "--scenario", write(tmp_path, LINE.replace("{LAW}", "additive"))], capsys)
    assert code == 0
    assert "evens: 1/2 (periodic-formula)  [non-analytic witness, excluded]" in out
    assert "spectrum = {1}" in out


def test_outputs_are_deterministic(tmp_path, capsys):
    path = str(SCENARIOS / "heisenberg.yaml")
    for d in ("a", "b"):
        for cmd in (["hdim"], ["spectrum"], ["oracle", "--subgroup", "center", "--n", "3"]):
            assert main(cmd + ["--scenario", path, "--out", str(tmp_path / d)]) == 0
    capsys.readouterr()
    files_a = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files_a == sorted(p.name for p in (tmp_path / "b").iterdir())
    assert len(files_a) == 11
    for name in files_a:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_console_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "stdhdim.cli", "spectrum", "--scenario", str(SCENARIOS / "additive_d2.yaml"), "--format", "csv", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert (tmp_path / "spectrum.csv").exists() and not (tmp_path / "spectrum.json").exists()
