"""Numerical explorer for a slice of meromorphic maps with two asymptotic values.

The slice is parameterized by (rho, lambda): rho is the multiplier of the
attracting fixed point at 0, lambda the preferred asymptotic value, and
mu = lambda*rho/(rho - 2*lambda) the other one.  The package evaluates the
map and its inverse branches, classifies parameters into shift locus /
M_lambda / M_mu, computes Koenigs linearizers and the S_* tie curve, solves
virtual cycle parameters, renders parameter and dynamic planes, and serves
everything over a CLI and an HTTP tile service.
"""

from .classifier import (
    ClassifierBudget,
    CycleInfo,
    Itinerary,
    Kind,
    ParamClass,
    classify,
    classify_grid,
    classify_lambda,
    cycle_itinerary,
    detect_cycle,
)
from .centers import (
    EnumerationResult,
    MarkedAV,
    Rect,
    VirtualCenter,
    enumerate_centers,
    prepole,
    solve_virtual_center,
    virtual_cycle,
)
from .errors import (
    BranchAmbiguity,
    CompositionThroughOmittedValue,
    ContinuationStuck,
    DomainError,
    MerosliceError,
    NewtonDivergence,
    NotInBasin,
    NotSLambda,
    NotShiftLocus,
    OmittedValue,
    PoleProximity,
    SeedEscaped,
    SingularParameter,
    TraceLost,
)
from .family import (
    OrbitRecord,
    ParamPoint,
    Verdict,
    derive_mu,
    eval_f,
    eval_f_prime,
    inverse_branch,
    invert,
    iterate,
    pole_k,
    schwarzian_check,
    warmup,
)
from .koenigs import (
    KoenigsFrame,
    ModelFrame,
    SPart,
    eval_E,
    find_model_parameter,
    koenigs_frame,
    koenigs_value,
    koenigs_value_and_deriv,
    koenigs_value_at,
    s_partition,
    trace_s_star,
)
from .render import (
    ColorMap,
    RenderResult,
    RenderSpec,
    Tile,
    Viewport,
    png_bytes,
    render_dynamic_plane,
    render_parameter_plane,
    render_tile,
    save_render,
)

__version__ = "0.1.0"
