from fvelab.services.refelem import (
    QuadratureRule,
    MPolynomial,
    gauss_legendre,
    legendre_eval,
    legendre_deriv_eval,
    m_poly,
    m_eval,
    m_deriv_eval,
    integrate,
)
from fvelab.services.scheme import (
    ReferenceLayout,
    reference_dual_points,
    max_orthogonality_order,
    check_orthogonality,
    quadrature_weights,
    design_method_I,
    design_method_II,
    quartic_family,
    quintic_family,
    preset,
    function_value_points,
    lagrange_nodes,
    design,
    save_scheme,
    load_scheme,
)
from fvelab.services.mesh import PrimaryMesh, DualMesh, uniform_mesh, mesh_from_points, dual_mesh
from fvelab.services.banded_solver import BandedSystem, solve, dense_solve
from fvelab.services.assembly import (
    BvpProblem,
    TrialSpace,
    FveSolution,
    check_coercivity,
    assemble,
    fve_solve,
    flux_residuals,
)
from fvelab.services.mmd import (
    ElementMCoefficients,
    SuperclosePoly,
    element_m_coefficients,
    mmd_shape_coefficients,
    shape_polynomial,
    build_superclose,
)
from fvelab.services.analysis import (
    DiscreteTestFunction,
    h1_seminorm_error,
    l2_error,
    h1_seminorm_difference,
    l2_difference,
    superconv_point_errors,
    eoc,
    floor_limited,
    error_profile,
    dual_norms,
    pi_T_star,
    discrete_g_seminorm,
    inf_sup_estimate,
)
from fvelab.services.harness import (
    problem_preset,
    load_scheme_source,
    run_level,
    run_study,
    finest_reliable_order,
    compare_golden,
    report_to_frame,
    write_study_csv,
    format_markdown,
    load_golden,
    golden_study,
)

__all__ = [
    "QuadratureRule",
    "MPolynomial",
    "gauss_legendre",
    "legendre_eval",
    "legendre_deriv_eval",
    "m_poly",
    "m_eval",
    "m_deriv_eval",
    "integrate",
    "ReferenceLayout",
    "reference_dual_points",
    "max_orthogonality_order",
    "check_orthogonality",
    "quadrature_weights",
    "design_method_I",
    "design_method_II",
    "quartic_family",
    "quintic_family",
    "preset",
    "function_value_points",
    "lagrange_nodes",
    "design",
    "save_scheme",
    "load_scheme",
    "PrimaryMesh",
    "DualMesh",
    "uniform_mesh",
    "mesh_from_points",
    "dual_mesh",
    "BandedSystem",
    "solve",
    "dense_solve",
    "BvpProblem",
    "TrialSpace",
    "FveSolution",
    "check_coercivity",
    "assemble",
    "fve_solve",
    "flux_residuals",
    "ElementMCoefficients",
    "SuperclosePoly",
    "element_m_coefficients",
    "mmd_shape_coefficients",
    "shape_polynomial",
    "build_superclose",
    "DiscreteTestFunction",
    "h1_seminorm_error",
    "l2_error",
    "h1_seminorm_difference",
    "l2_difference",
    "superconv_point_errors",
    "eoc",
    "floor_limited",
    "error_profile",
    "dual_norms",
    "pi_T_star",
    "discrete_g_seminorm",
    "inf_sup_estimate",
    "problem_preset",
    "load_scheme_source",
    "run_level",
    "run_study",
    "finest_reliable_order",
    "compare_golden",
    "report_to_frame",
    "write_study_csv",
    "format_markdown",
    "load_golden",
    "golden_study",
]
