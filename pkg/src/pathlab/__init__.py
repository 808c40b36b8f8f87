"""Signature-based path synthesis and diagnostics.

Marcus signatures of cadlag paths in the truncated tensor algebra, a
whitened low-rank feature geometry with streaming precision updates, a
jump-diffusion sampler descending a moving MMD target, kernel herding,
entropic reweighting, and statistical-bound verification harnesses.
"""

from .bounds import (
    BoundReport,
    generalization_bound_rhs,
    generalization_trial,
    projection_error_probe,
    rademacher_bound,
    rademacher_mc,
    support_radius,
)
from .bridge import GibbsTilt, moment_residual, solve_bridge
from .errors import (
    DenominatorDegenerate,
    DepthExceeded,
    DimensionMismatch,
    EmptyCandidates,
    EmptyEnsemble,
    FullSpaceTooLarge,
    GridOutsideSupport,
    HorizonExceeded,
    NegativeDuration,
    NonMonotoneTime,
    PathlabError,
    ProxyGridGap,
    RankDeficient,
    SwitchOutsideHorizon,
    TimeLetterForbidden,
    TraceTooShort,
)
from .flow import (
    EnsembleState,
    FlowConfig,
    ParticleState,
    ProxyTrajectory,
    dissipation_report,
    drift,
    emm_step,
    flow_geometry,
    intensity,
    jump_gain,
    mmd_loss,
    run_flow,
    score,
    select_jump,
    stability_monitor,
)
from .geometry import (
    Geometry,
    NystromBasis,
    PrecisionState,
    basis_from_series,
    build_basis,
    covariance_update,
    decay,
    project,
    resync,
    sherman_morrison_update,
    spectral_tail,
    whitened_inner,
    whitened_norm,
)
from .herding import HerdingResult, RateReport, herd, herding_rate_report
from .paths import (
    CadlagPath,
    PathEnsemble,
    expected_signature,
    marcus_signature,
    read_ensemble_csv,
    read_path_csv,
    rectilinear_interpolate,
    restrict,
    signature_extend,
    terminal_gradient,
    value_at,
    write_ensemble_csv,
    write_path_csv,
)
from .rng import stream
from .synthgen import (
    MertonParams,
    RegimeSwitchParams,
    actor_path,
    build_proxy,
    gen_merton,
    gen_regime_switch,
)
from .tensor import (
    TensorSeries,
    Word,
    concat_product,
    exp_level1,
    flatten,
    inner_product,
    shuffle_product,
    unflatten,
)

__version__ = "0.1.0"
