"""Neumann eigenvalue solvers and isoperimetric inequality checks on rank-1 symmetric spaces."""

__version__ = "0.1.0"

from .geometry import (
    MAX_COMPACT_BALL_RADIUS,
    ModeConstants,
    Space,
    ball_volume,
    curvature_trace,
    curvature_trace_deriv,
    density,
    gradient_bound,
    gradient_sum,
    mode_constants,
    parse_space,
    radius_from_volume,
    sphere_area,
    standard_spaces,
)
from .radial import (
    AnnulusMode,
    AnnulusModes,
    BallEig,
    RadialProfile,
    SolverError,
    euclidean_ball_constant,
    monotonicity_defect,
    plateau_extension,
    solve_annulus,
    solve_ball,
    solve_ball_rayleigh,
)
from .mesh import (
    CircleCurve,
    EllipseCurve,
    GeometryError,
    Mesh,
    MeshQualityError,
    PeanutCurve,
    PolylineCurve,
    mesh_domain,
    read_mesh,
    write_mesh,
)
from .fem import (
    ConformalModel,
    ConvergenceError,
    SpectrumResult,
    assemble,
    build_model,
    curved_area,
    quadrature,
    solve_spectrum,
)
from .verify import (
    CenterError,
    CheckResult,
    TrialSetup,
    VerificationReport,
    build_trial_setup,
    candidate_eigenvalues,
    check_chain,
    check_main_inequality,
    lemma_report,
    orthogonalize,
    select_center,
    trial_bound_check,
)
from .pipeline import parse_domain, replay_report, run_from_config, run_verify
