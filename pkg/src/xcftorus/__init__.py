"""Cross curvature flow of rotationally symmetric metrics on the solid torus."""
__version__ = "0.1.0"

from .diagnostics import (
    DiagnosticsRecord,
    RunMonitor,
    check_bounds,
    check_J_monotone,
    compute_J,
    curvature_rhs_oracle,
    transport_identity_residual,
)
from .errors import (
    CurvatureSignViolation,
    EllipticityLost,
    Infeasible,
    InvalidParam,
    MaxStepsExceeded,
    NonFinite,
    PositivityLost,
    XCFError,
)
from .flow import FlowConfig, FlowState, boundary_values, evolve, stable_dt, step, xcf_rhs
from .geometry import (
    CurvatureField,
    MetricProfile,
    RadialGrid,
    arclength,
    core_slope,
    curvatures,
    d_ds,
    validate_smoothness,
    volume_weight,
)
from .initial_data import (
    TwoPiParams,
    cusp_annulus,
    hyperbolic_tube,
    kappa_tube,
    make_two_pi_metric,
    validate_negative_curvature,
)
