"""Covariance-based device-activity detection in multi-cell massive MIMO."""

from .errors import (
    CovactError,
    NumericalError,
    ParameterError,
    SingularCovarianceError,
)
from .geometry import (
    CellLayout,
    DevicePlacement,
    GainTensor,
    PathLossModel,
    build_hex_layout,
    compute_gains,
    lemma3_ring_contributions,
    lemma3_sum,
    place_devices,
)
from .signatures import (
    LiftedSignatures,
    SignatureSet,
    build_lift,
    hermitian_embedding,
    sample_sphere_sequences,
)
from .simulation import (
    ActivityPattern,
    CovarianceSet,
    model_covariance,
    sample_activity,
    sample_covariance,
    simulate_received,
)
from .solver import (
    SolveResult,
    SolverOptions,
    SolverState,
    coordinate_update,
    gradient,
    init_state,
    objective,
    solve,
    threshold,
)
from .consistency import (
    ConsistencyVerdict,
    NullspaceBasis,
    check_consistency,
    common_nullspace,
    cone_feasibility,
)
from .error_analysis import (
    ErrorSample,
    FisherModel,
    RocCurve,
    empirical_roc,
    fisher_info,
    pinv_sample,
    predict_roc,
    sign_constrained_qp,
)

__version__ = "0.1.0"
