"""
Benchmark problems, convergence studies and golden-table comparison.
"""

import math
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from fvelab.config import get_settings
from fvelab.models.schemas import (
    ERROR_COLUMNS,
    ErrorReport,
    GoldenDiff,
    GoldenMismatch,
    SchemeSpec,
    StudyConfig,
    StudyReport,
)
from fvelab.services.analysis import (
    h1_seminorm_difference,
    h1_seminorm_error,
    l2_difference,
    l2_error,
    eoc,
    finest_reliable_index,
    floor_limited,
    superconv_point_errors,
)
from fvelab.services.assembly import BvpProblem, check_coercivity, fve_solve
from fvelab.services.mesh import uniform_mesh
from fvelab.services.mmd import build_superclose
from fvelab.services.scheme import load_scheme, max_orthogonality_order, preset, reference_dual_points
from fvelab.utils.exceptions import (
    GoldenShapeError,
    InvalidProblemError,
    NumericalError,
    StudyLevelError,
    UnknownPresetError,
)
from fvelab.utils.logger import setup_logger
from fvelab.utils.validators import parse_scheme_source, quadrature_points

logger = setup_logger(__name__)

GOLDEN_DIR = os.path.join(os.path.dirname(os.path.dirname(__file__)), "data", "golden")

COLUMN_LABELS = {
    "err_h1": "|u-u_h|_1",
    "err_l2": "||u-u_h||_0",
    "err_ui_h1": "|u_h-u_I|_1",
    "err_ui_l2": "||u_h-u_I||_0",
    "err_p1": "max P1 |u'-u_h'|",
    "err_p0": "max P0 |u-u_h|",
}

VALUE_COLUMNS = ["err_h1", "err_l2"]
RATE_COLUMNS = ["eoc_ui_h1", "eoc_ui_l2"]

GOLDEN_STUDIES: Dict[str, Tuple[str, str, List[int]]] = {
    "table-2": ("preset:scheme-3-1", "example-6-1", [2, 4, 8, 16, 32]),
    "table-3": ("preset:scheme-5-1", "example-6-2", [2, 3, 4, 5, 6]),
    "table-4": ("preset:scheme-4-1", "example-6-3", [2, 4, 8, 16]),
    "table-5": ("preset:scheme-6-1", "example-6-4", [2, 3, 4, 5]),
}

PROBLEM_ALIASES = {"example-6-3": "example-6-1", "example-6-4": "example-6-1"}


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _const(value: float):
    return lambda x: np.full_like(np.asarray(x, dtype=float), value)


def _poisson_poly(k: int) -> BvpProblem:
    def d2u(x):
        x = np.asarray(x, dtype=float)
        return k * (k - 1) * x ** (k - 2) if k >= 2 else np.zeros_like(x)

    return BvpProblem.manufactured(
        p=_const(1.0), dp=_zero, q=_zero, r=_zero,
        u=lambda x: np.asarray(x, dtype=float) ** k,
        du=lambda x: k * np.asarray(x, dtype=float) ** (k - 1),
        d2u=d2u,
        dq=_zero,
        name=f"poisson-poly-{k}",
    )


def problem_preset(name: str) -> BvpProblem:
    """
    Built-in benchmark problem on (0, 1) with a known exact solution.

    Args:
        name: example-6-1 (aliases example-6-3, example-6-4), example-6-2 or poisson-poly-<k>

    Raises:
        UnknownPresetError: If the name is not recognized
    """
    canonical = PROBLEM_ALIASES.get(name, name)
    if canonical == "example-6-1":
        problem = BvpProblem.manufactured(
            p=_const(2.0), dp=_zero, q=_const(1.0), r=_const(1.0),
            u=np.sin, du=np.cos, d2u=lambda x: -np.sin(x),
            dq=_zero, coercive=True, name=name,
        )
    elif canonical == "example-6-2":
        problem = BvpProblem.manufactured(
            p=np.exp, dp=np.exp, q=np.sin, r=_const(3.0),
            u=np.sin, du=np.cos, d2u=lambda x: -np.sin(x),
            dq=np.cos, coercive=True, name=name,
        )
    elif canonical.startswith("poisson-poly-"):
        suffix = canonical[len("poisson-poly-"):]
        if not suffix.isdigit() or not 1 <= int(suffix) <= 12:
            raise UnknownPresetError(f"poisson-poly-<k> needs an integer 1 <= k <= 12, got '{name}'")
        problem = _poisson_poly(int(suffix))
    else:
        raise UnknownPresetError(
            f"Unknown problem '{name}', expected example-6-1..example-6-4 or poisson-poly-<k>"
        )
    check_coercivity(problem)
    return problem


def load_scheme_source(source: str) -> SchemeSpec:
    """Resolve 'preset:<name>' or 'file:<path>' to a scheme"""
    kind, value = parse_scheme_source(source)
    if kind == "preset":
        return preset(value)
    return load_scheme(value)


def run_level(spec: SchemeSpec, problem: BvpProblem, N: int) -> ErrorReport:
    """All error columns of one uniform refinement level"""
    k = spec.k
    mesh = uniform_mesh(N, problem.a, problem.b)
    try:
        solution = fve_solve(problem, mesh, spec)
        superclose = build_superclose(problem.u, problem.du, mesh, spec)
        err_p1, err_p0 = superconv_point_errors(solution, problem.u, problem.du, mesh, spec)
    except NumericalError as e:
        logger.error(f"Refinement level N={N} failed: {e}")
        raise StudyLevelError(f"Refinement level N={N} failed: {e}", level=N) from e

    report = ErrorReport(
        n=N,
        h=mesh.h,
        err_h1=h1_seminorm_error(problem.du, solution, mesh, k),
        err_l2=l2_error(problem.u, solution, mesh, k),
        err_ui_h1=h1_seminorm_difference(solution, superclose, mesh, k),
        err_ui_l2=l2_difference(solution, superclose, mesh, k),
        err_p1=err_p1,
        err_p0=err_p0,
        solver_residual=solution.residual,
    )
    logger.debug(f"N={N}: |u-u_h|_1={report.err_h1:.4e}, ||u-u_h||_0={report.err_l2:.4e}")
    return report


def _orders(values: List[Optional[float]], hs: List[float]) -> List[Optional[float]]:
    values = [float("nan") if v is None else v for v in values]
    return [None] + [o if math.isfinite(o) else None for o in eoc(values, hs)]


def error_scale(problem: BvpProblem, samples: int = 257) -> float:
    """max(|u|, |u'|) sampled on [a, b]"""
    x = np.linspace(problem.a, problem.b, samples)
    return max(float(np.max(np.abs(problem.u(x)))), float(np.max(np.abs(problem.du(x)))))


def finest_reliable_order(report: StudyReport, column: str) -> Optional[float]:
    """Order of the finest level pair above the round-off floor"""
    index = finest_reliable_index(report.floor_limited[column][1:])
    return None if index is None else report.eocs[column][index + 1]


def run_study(config: StudyConfig) -> StudyReport:
    """
    Solve on every refinement level and collect errors with their EOCs.

    Levels run in a thread pool when FVELAB_STUDY_WORKERS > 1; rows stay
    ordered by N.

    Raises:
        StudyLevelError: If a level fails numerically
        InvalidProblemError: If the problem has no exact solution
    """
    spec = load_scheme_source(config.scheme)
    problem = problem_preset(config.problem)
    if not problem.has_exact:
        raise InvalidProblemError(f"Problem '{config.problem}' has no exact solution for a study")

    workers = max(1, get_settings().study_workers)
    logger.info(
        f"Running study: scheme={config.scheme}, problem={config.problem}, "
        f"levels={config.levels}, workers={workers}"
    )
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(lambda N: run_level(spec, problem, N), config.levels))
    else:
        rows = [run_level(spec, problem, N) for N in config.levels]

    hs = [row.h for row in rows]
    eocs = {column: _orders([getattr(row, column) for row in rows], hs) for column in ERROR_COLUMNS}

    floor = get_settings().eoc_floor * error_scale(problem)
    flags = {
        column: [False] + floor_limited([getattr(row, column) for row in rows], floor)
        for column in ERROR_COLUMNS
    }
    limited = sorted(column for column, marks in flags.items() if any(marks))
    if limited:
        logger.info(f"Orders at the round-off floor {floor:.1e} in columns {limited}")

    max_order, witness = max_orthogonality_order(reference_dual_points(spec).G)
    report = StudyReport(
        scheme=config.scheme,
        problem=config.problem,
        quad_points=quadrature_points(spec.k),
        rows=rows,
        eocs=eocs,
        floor=floor,
        floor_limited=flags,
        metadata={
            "label": spec.label,
            "k": spec.k,
            "max_order": max_order,
            "witness": witness.tolist() if witness is not None else None,
            "columns": list(config.columns),
            "solver_residuals": [row.solver_residual for row in rows],
        },
    )
    logger.info(f"Study finished with {len(rows)} levels")
    return report


def _columns(report: StudyReport) -> List[str]:
    return report.metadata.get("columns") or list(ERROR_COLUMNS)


def report_to_frame(report: StudyReport) -> pd.DataFrame:
    """Numeric table: h, then each error column followed by its EOC"""
    data = {"h": [row.h for row in report.rows]}
    for column in _columns(report):
        data[column] = [np.nan if getattr(row, column) is None else getattr(row, column) for row in report.rows]
        data["eoc_" + column[4:]] = [np.nan if o is None else o for o in report.eocs[column]]
    return pd.DataFrame(data)


def _format_error(value: Optional[float]) -> str:
    if value is None or math.isnan(value):
        return ""
    return f"{value:.4E}"


def _format_order(value) -> str:
    return "" if value is None or (isinstance(value, float) and math.isnan(value)) else f"{value:.4f}"


def format_study_frame(report: StudyReport) -> pd.DataFrame:
    """The numeric table rendered as strings, errors at 5 significant digits"""
    frame = report_to_frame(report)
    out = pd.DataFrame({"h": frame["h"].map(_format_error)})
    for column in frame.columns[1:]:
        formatter = _format_order if column.startswith("eoc_") else _format_error
        out[column] = frame[column].map(formatter)
    return out


def write_study_csv(report: StudyReport, path: str) -> None:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    format_study_frame(report).to_csv(path, index=False)
    logger.info(f"Wrote study CSV to {path}")


def format_markdown(report: StudyReport) -> str:
    """Markdown table in the usual error / order layout, h shown as 1/N"""
    columns = _columns(report)
    header = ["h"]
    for column in columns:
        header += [COLUMN_LABELS[column], "Order"]
    lines = ["| " + " | ".join(header) + " |", "|" + "---|" * len(header)]
    for i, row in enumerate(report.rows):
        cells = [f"1/{row.n}"]
        for column in columns:
            order = _format_order(report.eocs[column][i]) or "\\"
            if report.floor_limited.get(column, [False] * len(report.rows))[i]:
                order = "~" + order
            cells += [_format_error(getattr(row, column)) or "-", order]
        lines.append("| " + " | ".join(cells) + " |")
    return "\n".join(lines) + "\n"


def load_golden(name: str) -> pd.DataFrame:
    """Shipped reference table table-2 .. table-5 (FVELAB_GOLDEN_DIR overrides the location)"""
    directory = get_settings().golden_dir or GOLDEN_DIR
    path = os.path.join(directory, f"{name}.csv")
    if not os.path.exists(path):
        raise UnknownPresetError(f"No golden table '{name}' in {directory}")
    return pd.read_csv(path, comment="#")


def golden_study(name: str) -> StudyConfig:
    """Study configuration reproducing a shipped reference table"""
    if name not in GOLDEN_STUDIES:
        raise UnknownPresetError(f"Unknown golden table '{name}', available: {sorted(GOLDEN_STUDIES)}")
    scheme, problem, levels = GOLDEN_STUDIES[name]
    return StudyConfig(scheme=scheme, problem=problem, levels=levels)


def compare_golden(report: StudyReport, golden: pd.DataFrame,
                   value_tol: float = 0.02, rate_tol: float = 0.25,
                   kinds: Sequence[str] = ("value", "rate"), finest_only: bool = False) -> GoldenDiff:
    """
    Compare a study with a reference table.

    Error columns of u - u_h are compared cell by cell in relative terms;
    the u_h - u_I columns only by their orders, since u_I is not unique.
    Orders flagged as floor-limited are skipped, and with `finest_only`
    only the finest remaining level pair of each order column is checked.

    Raises:
        GoldenShapeError: If the row count or the h column differ
    """
    frame = report_to_frame(report)
    if len(frame) != len(golden):
        raise GoldenShapeError(f"Study has {len(frame)} rows, golden table has {len(golden)}")
    if not np.allclose(frame["h"].to_numpy(), golden["h"].to_numpy(), rtol=1e-9, atol=0.0):
        raise GoldenShapeError("Study and golden table differ in the h column")

    mismatches: List[GoldenMismatch] = []
    checked = 0
    for column in VALUE_COLUMNS if "value" in kinds else []:
        if column not in golden.columns or column not in frame.columns:
            continue
        for i, (expected, actual) in enumerate(zip(golden[column], frame[column])):
            checked += 1
            if abs(actual - expected) > value_tol * abs(expected):
                mismatches.append(GoldenMismatch(row=i, column=column, expected=expected, actual=actual, kind="value"))
    for column in RATE_COLUMNS if "rate" in kinds else []:
        if column not in golden.columns or column not in frame.columns:
            continue
        flags = report.floor_limited.get("err_" + column[4:], [False] * len(golden))
        rows = [i for i in range(1, len(golden)) if not flags[i]]
        if finest_only:
            rows = rows[-1:]
        for i in rows:
            expected, actual = float(golden[column].iloc[i]), float(frame[column].iloc[i])
            checked += 1
            if math.isnan(actual) or abs(actual - expected) > rate_tol:
                mismatches.append(GoldenMismatch(
                    row=i, column=column, expected=expected,
                    actual=None if math.isnan(actual) else actual, kind="rate",
                ))

    for m in mismatches:
        logger.warning(f"Golden mismatch row {m.row} column {m.column}: expected {m.expected}, got {m.actual}")
    return GoldenDiff(passed=not mismatches, checked_cells=checked, mismatches=mismatches)
