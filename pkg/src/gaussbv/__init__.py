"""Gaussian bounded-variation calculus on tensor-grid truncations.

The library computes Gaussian total variation and perimeter through four
independent characterizations (dual, semigroup, relaxation, smooth), evolves
fields under the heat and Ornstein-Uhlenbeck semigroups, verifies the coarea
and isoperimetric identities, solves quadratic-fidelity convex variational
problems, and runs Wiener-space Monte Carlo for classical path examples.
"""

from .gauss import (
    CameronMartinShift,
    GaussianMeasure,
    QuadratureRule,
    build_quadrature,
    cameron_martin_density,
    gaussian_cdf,
    gaussian_cdf_inverse,
    gaussian_density,
    isoperimetric_profile,
    sample_gaussian,
    standard_measure,
)
from .fields import (
    GridField,
    HMeasureDecomposition,
    HVectorField,
    adjoint_derivative,
    const_field,
    divergence_h,
    field_from_function,
    gradient,
    integrate,
    integrate_h_norm,
    interp_at,
    llogl_gauge,
    load_csv,
    save_csv,
    uniform_grid,
)
from .semigroup import (
    SemigroupParams,
    commutation_residual,
    contraction_coefficient,
    heat_apply,
    ou_apply,
    ou_gradient,
    ou_l1_bound_check,
)
from .bv import (
    DEFAULT_SCHEDULE,
    DensityClassification,
    IndicatorSet,
    TVReport,
    box_perimeter_growth,
    coarea_check,
    density_classify,
    isoperimetric_check,
    minkowski_content,
    perimeter,
    slicing_check,
    sobolev_isoperimetric_check,
    tv_directional,
    tv_dual,
    tv_relaxation,
    tv_semigroup,
    tv_smooth,
)
from .cylinder import (
    CylinderProjection,
    conditional_expectation,
    monotonicity_check,
    rotation_invariance_check,
    tower_check,
)
from .wiener import (
    DomainGeometry,
    PathEnsemble,
    RunningMaxStats,
    ensemble_to_csv,
    hino_uchida_estimator,
    ou_process,
    running_max_stats,
    sample_brownian,
    sample_pinned,
)
from .variational import (
    ConvexIntegrand,
    VariationalSolution,
    conjugate,
    convexity_check,
    functional_eval,
    geometric_levelset_check,
    quadratic_integrand,
    recession,
    relaxed_perimeter,
    rof_minimize,
    sqrt1p_integrand,
    tv_integrand,
    zero_integrand,
)

__version__ = "0.1.0"
