"""Numerical toolkit for certifying genuine high-dimensional steering.

Computes steering and incompatibility robustness with certified SDP gaps,
evaluates universal incompatibility bounds and their parent-measurement
constructions, and converts robustness violations into one-sided
device-independent Schmidt-number certificates.
"""

from .bounds import BoundValue, crossover_k, h_best, h_cloning, h_pair, \
    h_recursive, sr_ceiling, table1
from .certify import (
    Certificate,
    ThresholdResult,
    certified_schmidt_number,
    fig3_data,
    lhs_norm,
    noise_threshold,
    noise_threshold_pairs,
    sr_lower_from_correlations,
    witness_cloning,
    witness_pairs,
    witness_power_two,
    witness_three,
)
from .errors import SteercertError
from .linalg import HermMatrix, herm_eig, is_psd, kron, min_eig, \
    partial_trace_first, psd_sqrt, real_embed
from .parent import (
    ParentMeasurement,
    operator_inequality_check,
    parent_pair_rank1,
    parent_recursive,
    verify_parent,
)
from .quantum import (
    Assemblage,
    BipartiteState,
    MeasurementSet,
    Povm,
    isotropic_state,
    make_assemblage,
    maximally_entangled,
    mub_bases,
    mub_measurements,
    povm_from_basis,
    transpose_measurements,
)
from .sdp import (
    SdpSolution,
    incompatibility_eta_g,
    incompatibility_robustness,
    lhs_membership,
    sr_bisection_oracle,
    steering_robustness,
)

__version__ = "0.1.0"
