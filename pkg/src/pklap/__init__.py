"""Periodic solutions of anisotropic discrete p(k)-Laplacian systems.

The package finds m-periodic critical points of the discrete action

    J(u) = sum_k |du(k)|^p(k) / p(k)  +  lambda * (- sum_k F(k, u(k+1), u(k)))

and checks, on samples, the hypotheses that guarantee such points exist.
"""

from .analysis import (
    HOLDS,
    INCONCLUSIVE,
    VIOLATED,
    BoundProfile,
    CheckReport,
    GrowthProfile,
    LambdaStarEstimate,
    Thresholds,
    anticoercivity_probe,
    check_b2_b3,
    check_bounds,
    check_c1,
    check_c2,
    check_c3,
    check_growth,
    lambda_star_estimate,
    rng_for,
    thresholds,
    xi_constant,
)
from .core import (
    EvaluationError,
    ExponentFunction,
    Nonlinearity,
    PeriodicSequence,
    Problem,
    SolutionRecord,
    euclidean_norm,
    in_Y,
    project_W,
    project_Y,
    wrap_index,
)
from .functional import (
    SpectralSummary,
    action,
    gradient,
    gradient_fd,
    hessian_fd,
    morse_summary,
    mu,
    potential,
)
from .nonlinearities import (
    BUILTIN_NAMES,
    BuiltinSpec,
    make_builtin,
    make_example1,
    make_example2,
    make_example3,
    make_power,
)
from .operators import Residual, forward_difference, phi_p, residual
from .solvers import (
    SolutionSet,
    SolverConfig,
    SweepResult,
    deflated_solve,
    find_multiple,
    lambda_sweep,
    minimize,
    mountain_pass,
    newton_solve,
    subspace_basis,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NAMES",
    "BoundProfile",
    "BuiltinSpec",
    "CheckReport",
    "EvaluationError",
    "ExponentFunction",
    "GrowthProfile",
    "HOLDS",
    "INCONCLUSIVE",
    "LambdaStarEstimate",
    "Nonlinearity",
    "PeriodicSequence",
    "Problem",
    "Residual",
    "SolutionRecord",
    "SolutionSet",
    "SolverConfig",
    "SpectralSummary",
    "SweepResult",
    "Thresholds",
    "VIOLATED",
    "action",
    "anticoercivity_probe",
    "check_b2_b3",
    "check_bounds",
    "check_c1",
    "check_c2",
    "check_c3",
    "check_growth",
    "deflated_solve",
    "euclidean_norm",
    "find_multiple",
    "forward_difference",
    "gradient",
    "gradient_fd",
    "hessian_fd",
    "in_Y",
    "lambda_star_estimate",
    "lambda_sweep",
    "make_builtin",
    "make_example1",
    "make_example2",
    "make_example3",
    "make_power",
    "minimize",
    "morse_summary",
    "mountain_pass",
    "mu",
    "newton_solve",
    "phi_p",
    "potential",
    "project_W",
    "project_Y",
    "residual",
    "rng_for",
    "subspace_basis",
    "thresholds",
    "wrap_index",
    "xi_constant",
]
