"""Desk-scale workbench for L1 stability experiments on hyperbolic conservation laws."""

from .envelope import PiecewiseLinearFunction, convex_envelope
from .fields import (
    MeasureField,
    PiecewiseConstantField,
    RarefactionFan,
    Shock,
    WaveFan,
    l1_distance,
    total_variation,
)
from .fluxes import (
    FluxFunction,
    average_speed,
    burgers,
    cubic,
    euler_mass_momentum,
    p_system,
    p_system_inflection,
    p_system_power,
    scalar_flux,
)
from .classify import (
    Classification,
    JumpKind,
    JumpRecord,
    classify_from_states,
    classify_jump,
    scan_rarefaction_free,
)
from .scalar import (
    SamplingSequence,
    TimedField,
    front_tracking_evolve,
    glimm_evolve,
    solve_riemann_scalar,
    track_shock_path,
)
from .transport import (
    CoefficientField,
    LinearRiemannSolution,
    SmoothBump,
    TransportSolution,
    riemann_linear,
    solve_linear_cauchy,
    volpert_product,
    weak_form_residual,
)
from .stability import (
    CharacteristicData,
    DecayLedger,
    WeightField,
    characteristic_components,
    characteristic_flux,
    decay_terms_scalar,
    dominance_test,
    evolve_weights,
    weighted_norm,
)
from .systems import (
    AveragedMatrix,
    HugoniotPoint,
    averaged_eigen_monotonicity,
    averaged_matrix,
    front_tracking_2x2,
    hugoniot_curve,
    scan_rarefaction_free_systems,
    solve_riemann_2x2,
)
from .dlm import (
    PathFamily,
    generalized_hugoniot_residual,
    model_system,
    nc_product,
    solve_nc_riemann,
    superposition_check_conservative,
    superposition_check_nonconservative,
)
from .wavefronts import FrontSnapshot, FrontState, Trajectory

__version__ = "0.1.0"
