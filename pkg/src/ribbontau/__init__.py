"""ribbontau: solvable multi-matrix models on embedded graphs.

Character-expansion partition functions for corner-matrix models over
U(N), SU(N) and the Gaussian GL(N) ensemble, an independent Monte Carlo
Haar oracle for every underlying Schur-function integral identity, and
KP checks for the hypergeometric tau-function specializations.
"""

from .partitions import (
    CellContentWeight,
    Partition,
    PartitionCapError,
    content_product,
    enumerate_partitions,
    hooks_and_contents,
    shift_partition,
)
from .symfun import (
    DegreeError,
    PowerSums,
    SpectralMatrix,
    power_sums_constant,
    power_sums_infinity,
    power_sums_of_matrix,
    scale_power_sums,
    schur_content_value,
    schur_from_power_sums,
    schur_p_infinity,
)
from .ribbon import (
    GraphValidationError,
    MonodromyWord,
    RibbonGraph,
    build_graph,
    dual,
    euler_characteristic,
    faces,
    monodromy_words,
)
from .model import (
    CornerAssignment,
    Dressing,
    Group,
    ModelSpec,
    ScopeError,
    SingularMatrixError,
    TruncationPolicy,
    WeightConvention,
    bgw_series,
    gauge_spectrum_check,
    hciz_series,
    monodromy_matrix,
    schur_moment,
    z_series,
)
from .mc import (
    IdentityCase,
    MCEstimate,
    VerificationReport,
    estimate,
    sample_ginibre,
    sample_special_unitary,
    sample_unitary,
    verify,
    verify_battery,
)
from .tau import (
    Directive,
    HypTauSpec,
    KPResidual,
    RationalContentWeight,
    SpecializationPlan,
    apply_specialization,
    bgw_q_decomposition,
    hyp_tau,
    kp_residual,
)

__version__ = "0.1.0"
