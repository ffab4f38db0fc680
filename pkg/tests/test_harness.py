import re

import numpy as np
import pytest
from pydantic import ValidationError

from fvelab.config import get_settings
from fvelab.models.schemas import ERROR_COLUMNS, StudyConfig
from fvelab.services.harness import (
    GOLDEN_STUDIES,
    compare_golden,
    finest_reliable_order,
    format_markdown,
    format_study_frame,
    golden_study,
    load_golden,
    load_scheme_source,
    problem_preset,
    report_to_frame,
    run_level,
    run_study,
    write_study_csv,
)
from fvelab.services.scheme import design_method_I, preset
from fvelab.utils.exceptions import (
    GoldenShapeError,
    ParameterError,
    SingularSystemError,
    StudyLevelError,
    UnknownPresetError,
)

CSV_HEADER = ("h,err_h1,eoc_h1,err_l2,eoc_l2,err_ui_h1,eoc_ui_h1,"
              "err_ui_l2,eoc_ui_l2,err_p1,eoc_p1,err_p0,eoc_p0")


@pytest.fixture(scope="module")
def study_4_1():
    config = StudyConfig(scheme="preset:scheme-4-1", problem="example-6-1", levels=[4, 8, 16])
    return run_study(config)


@pytest.fixture(scope="module")
def study_3_1():
    config = StudyConfig(scheme="preset:scheme-3-1", problem="example-6-1", levels=[4, 8, 16])
    return run_study(config)


def _reliable_order(report, column):
    order = finest_reliable_order(report, column)
    assert order is not None, f"every order of {column} is at the round-off floor"
    return order


# problems

def test_example_6_1_strong_residual():
    problem = problem_preset("example-6-1")
    x = np.linspace(0.0, 1.0, 101)
    residual = problem.f(x) - (2 * np.sin(x) + np.cos(x) + np.sin(x))
    assert np.max(np.abs(residual)) < 1e-12
    assert (problem.a, problem.b, problem.g_a) == (0.0, 1.0, 0.0)


def test_example_6_2_strong_residual():
    problem = problem_preset("example-6-2")
    x = np.linspace(0.0, 1.0, 101)
    flux_derivative = np.exp(x) * np.cos(x) - np.exp(x) * np.sin(x)
    expected = -flux_derivative + np.sin(x) * np.cos(x) + 3 * np.sin(x)
    assert np.max(np.abs(problem.f(x) - expected)) < 1e-12


def test_problem_aliases():
    x = np.linspace(0.0, 1.0, 11)
    for alias in ("example-6-3", "example-6-4"):
        np.testing.assert_array_equal(problem_preset(alias).f(x), problem_preset("example-6-1").f(x))


def test_poisson_polynomial_problem():
    problem = problem_preset("poisson-poly-3")
    x = np.linspace(0.0, 1.0, 11)
    np.testing.assert_allclose(problem.f(x), -6 * x, atol=1e-14)
    assert problem.g_b == 1.0


@pytest.mark.parametrize("name", ["poisson-poly-0", "poisson-poly-13", "poisson-poly-x", "example-7-1"])
def test_unknown_problems(name):
    with pytest.raises(UnknownPresetError):
        problem_preset(name)


def test_scheme_sources(tmp_path):
    assert load_scheme_source("preset:scheme-4-1") == preset("scheme-4-1")
    with pytest.raises(ParameterError):
        load_scheme_source("file:" + str(tmp_path / "missing.json"))
    with pytest.raises(ParameterError):
        load_scheme_source("scheme-4-1")
    with pytest.raises(UnknownPresetError):
        load_scheme_source("preset:scheme-9-9")


def test_study_config_validation():
    with pytest.raises(ParameterError):
        StudyConfig(scheme="preset:gauss-2", problem="example-6-1", levels=[4, 2])
    with pytest.raises(ParameterError):
        StudyConfig(scheme="preset:gauss-2", problem="example-6-1", levels=[4])
    with pytest.raises(ValidationError):
        StudyConfig(scheme="preset:gauss-2", problem="example-6-1", levels=[2, 4], columns=["err_h2"])


# single levels

def test_run_level_reports_every_column():
    report = run_level(preset("scheme-3-1"), problem_preset("example-6-1"), 4)
    assert report.n == 4
    assert report.h == pytest.approx(0.25)
    for column in ERROR_COLUMNS:
        assert 0.0 < getattr(report, column) < 1e-2
    assert report.solver_residual < 1e-12


def test_run_level_without_value_points():
    report = run_level(design_method_I(3, [0.5]), problem_preset("example-6-1"), 4)
    assert report.err_p0 is None
    assert 0.0 < report.err_p1 < 0.1


def test_run_level_wraps_numerical_failures(monkeypatch):
    def failing_solve(problem, mesh, spec):
        raise SingularSystemError("pivot vanished", row=0, volume=(1, 1))

    monkeypatch.setattr("fvelab.services.harness.fve_solve", failing_solve)
    with pytest.raises(StudyLevelError) as info:
        run_level(preset("scheme-3-1"), problem_preset("example-6-1"), 8)
    assert info.value.level == 8


# convergence studies

def test_polynomial_study_is_exact():
    report = run_study(StudyConfig(scheme="preset:scheme-3-1", problem="poisson-poly-3", levels=[2, 4]))
    for row in report.rows:
        assert row.err_h1 < 1e-9 and row.err_l2 < 1e-9


@pytest.mark.slow
def test_scheme_4_1_orders(study_4_1):
    k = 4
    assert _reliable_order(study_4_1, "err_h1") == pytest.approx(k, abs=0.2)
    assert _reliable_order(study_4_1, "err_l2") == pytest.approx(k + 1, abs=0.2)
    assert _reliable_order(study_4_1, "err_ui_h1") == pytest.approx(k + 1, abs=0.3)
    assert _reliable_order(study_4_1, "err_ui_l2") == pytest.approx(k + 2, abs=0.35)
    assert _reliable_order(study_4_1, "err_p1") >= k + 0.8
    assert _reliable_order(study_4_1, "err_p0") >= k + 1.7


@pytest.mark.slow
def test_scheme_3_1_orders(study_3_1):
    k = 3
    assert _reliable_order(study_3_1, "err_h1") == pytest.approx(k, abs=0.1)
    assert _reliable_order(study_3_1, "err_l2") == pytest.approx(k + 1, abs=0.1)
    assert _reliable_order(study_3_1, "err_ui_h1") == pytest.approx(4, abs=0.25)
    # no value superconvergence without the 3-3-order condition
    assert _reliable_order(study_3_1, "err_ui_l2") == pytest.approx(4, abs=0.25)
    assert _reliable_order(study_3_1, "err_p1") >= k + 0.8
    assert _reliable_order(study_3_1, "err_p0") <= k + 1.3


@pytest.mark.slow
def test_errors_decrease_monotonically(study_4_1):
    for column in ("err_h1", "err_l2", "err_ui_h1", "err_ui_l2"):
        values = [getattr(row, column) for row in study_4_1.rows]
        flags = study_4_1.floor_limited[column][1:]
        assert all(b < a for a, b, limited in zip(values, values[1:], flags) if not limited)


@pytest.mark.slow
def test_study_metadata(study_4_1):
    assert study_4_1.quad_points == 7
    assert study_4_1.metadata["k"] == 4
    assert study_4_1.metadata["max_order"] == 4
    assert study_4_1.metadata["label"] == "scheme-4-1"
    assert len(study_4_1.metadata["solver_residuals"]) == 3
    assert all(study_4_1.eocs[column][0] is None for column in ERROR_COLUMNS)
    assert study_4_1.floor == pytest.approx(get_settings().eoc_floor)
    assert all(study_4_1.floor_limited[column][0] is False for column in ERROR_COLUMNS)


@pytest.mark.slow
def test_round_off_floor_is_flagged(study_4_1):
    # ||u_h - u_I||_0 of the quartic scheme drops below 1e-12 at N = 16
    assert study_4_1.rows[-1].err_ui_l2 < study_4_1.floor
    assert study_4_1.floor_limited["err_ui_l2"][-1] is True
    assert study_4_1.floor_limited["err_h1"] == [False, False, False]
    assert "~" in format_markdown(study_4_1).splitlines()[-1]


def test_parallel_levels_match_sequential(monkeypatch):
    config = StudyConfig(scheme="preset:gauss-2", problem="example-6-1", levels=[2, 4, 8])
    sequential = run_study(config)
    monkeypatch.setattr(get_settings(), "study_workers", 3)
    parallel = run_study(config)
    assert [row.n for row in parallel.rows] == [2, 4, 8]
    assert parallel.rows == sequential.rows


# output formats

@pytest.mark.slow
def test_study_csv(study_4_1, tmp_path):
    path = tmp_path / "out" / "study.csv"
    write_study_csv(study_4_1, str(path))
    lines = path.read_text().splitlines()
    assert lines[0] == CSV_HEADER
    assert len(lines) == 4
    first = lines[1].split(",")
    assert first[0] == "2.5000E-01"
    assert re.fullmatch(r"\d\.\d{4}E[+-]\d{2}", first[1])
    assert first[2] == ""
    second = lines[2].split(",")
    assert re.fullmatch(r"\d+\.\d{4}", second[2])


@pytest.mark.slow
def test_study_csv_is_deterministic(study_4_1, tmp_path):
    write_study_csv(study_4_1, str(tmp_path / "a.csv"))
    write_study_csv(study_4_1, str(tmp_path / "b.csv"))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


@pytest.mark.slow
def test_markdown_table(study_4_1):
    text = format_markdown(study_4_1)
    lines = text.splitlines()
    assert lines[0].startswith("| h | |u-u_h|_1 | Order |")
    assert lines[2].startswith("| 1/4 | ")
    assert "\\" in lines[2]
    assert lines[3].startswith("| 1/8 | ")
    assert len(lines) == 5


@pytest.mark.slow
def test_formatted_frame(study_4_1):
    frame = format_study_frame(study_4_1)
    assert list(frame.columns) == CSV_HEADER.split(",")
    assert frame["eoc_h1"].iloc[0] == ""


# golden tables

def test_golden_registry():
    assert set(GOLDEN_STUDIES) == {"table-2", "table-3", "table-4", "table-5"}
    config = golden_study("table-2")
    assert config.scheme == "preset:scheme-3-1"
    assert config.levels == [2, 4, 8, 16, 32]
    with pytest.raises(UnknownPresetError):
        golden_study("table-9")


def test_load_golden():
    table = load_golden("table-4")
    assert len(table) == 4
    assert list(table.columns)[:3] == ["h", "err_h1", "eoc_h1"]
    assert table["err_h1"].iloc[0] == pytest.approx(6.5281e-02)
    assert np.isnan(table["eoc_h1"].iloc[0])
    with pytest.raises(UnknownPresetError):
        load_golden("table-9")


@pytest.mark.slow
def test_compare_golden_against_itself(study_4_1):
    golden = report_to_frame(study_4_1)
    diff = compare_golden(study_4_1, golden)
    assert diff.passed
    reliable = sum(not f for column in ("err_ui_h1", "err_ui_l2") for f in study_4_1.floor_limited[column][1:])
    assert diff.checked_cells == 2 * 3 + reliable


@pytest.mark.slow
def test_compare_golden_reports_mismatches(study_4_1):
    golden = report_to_frame(study_4_1)
    golden.loc[1, "err_h1"] *= 1.1
    golden.loc[1, "eoc_ui_h1"] += 1.0
    diff = compare_golden(study_4_1, golden)
    assert not diff.passed
    found = {(m.row, m.column, m.kind) for m in diff.mismatches}
    assert found == {(1, "err_h1", "value"), (1, "eoc_ui_h1", "rate")}


@pytest.mark.slow
def test_compare_golden_skips_floor_limited_orders(study_4_1):
    golden = report_to_frame(study_4_1)
    golden.loc[2, "eoc_ui_l2"] += 1.0
    assert compare_golden(study_4_1, golden).passed
    rates = compare_golden(study_4_1, golden, kinds=("rate",), finest_only=True)
    assert rates.passed
    assert rates.checked_cells == 2


@pytest.mark.slow
def test_compare_golden_shape_errors(study_4_1):
    golden = report_to_frame(study_4_1)
    with pytest.raises(GoldenShapeError):
        compare_golden(study_4_1, golden.iloc[:2])
    shifted = golden.copy()
    shifted["h"] = shifted["h"] * 2
    with pytest.raises(GoldenShapeError):
        compare_golden(study_4_1, shifted)


@pytest.fixture(scope="module")
def golden_reports():
    return {name: run_study(golden_study(name)) for name in sorted(GOLDEN_STUDIES)}


@pytest.mark.golden
@pytest.mark.xfail(strict=True, reason="shipped magnitudes of |u-u_h| are not reproduced by the benchmark problems")
@pytest.mark.parametrize("name", sorted(GOLDEN_STUDIES))
def test_reproduces_published_values(golden_reports, name):
    diff = compare_golden(golden_reports[name], load_golden(name), kinds=("value",))
    assert diff.passed, diff.mismatches


@pytest.mark.golden
@pytest.mark.parametrize("name", sorted(GOLDEN_STUDIES))
def test_reproduces_published_orders(golden_reports, name):
    diff = compare_golden(golden_reports[name], load_golden(name), rate_tol=0.35, kinds=("rate",), finest_only=True)
    assert diff.checked_cells == 2
    assert diff.passed, diff.mismatches
