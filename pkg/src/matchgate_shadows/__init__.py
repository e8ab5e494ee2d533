"""Fermionic classical shadows in the Majorana-permutation (matchgate) ensemble.

Exact channel coefficients, Pfaffian-based free-fermion simulation,
single-shot estimators for Majorana monomials / Gaussian fidelities / X-type
overlaps, reduced measurement ensembles, and a Slater-determinant learner,
all cross-validated against a dense brute-force oracle at small mode counts.
"""

from .channel import (
    ChannelInversionError,
    DataFormatError,
    EstimatorConfig,
    ShadowSample,
    aggregate,
    apply_channel,
    apply_inverse,
    collect_shadows,
    estimate_fidelity,
    estimate_gamma,
    estimate_xtype,
    predicted_second_moment,
    read_shadows,
    shadow_norm_bound,
    write_shadows,
)
from .coefficients import (
    InverseDiagDecomposition,
    XTypeDecomposition,
    channel_eigenvalue,
    channel_eigenvalue_of_degree,
    inverse_diag_decomposition,
    joint_eigenvalue,
    moment_weight,
    projector_norm_bound,
    xtype_decomposition,
    xtype_norm_bound,
    xtype_norm_bound_halved,
)
from .ensembles import (
    PerfectMatching,
    enumerate_matchings,
    matching_of,
    representative_permutation,
    sample_matching_representative,
    sample_uniform_permutation,
)
from .gaussian import (
    CovarianceState,
    SlaterDescriptor,
    UnphysicalStateError,
    apply_permutation,
    basis_state,
    covariance_of_slater,
    expect_diag_gaussian_op,
    expect_xtype_gaussian_op,
    fidelity_slaters,
    pfaffian,
    sample_bits,
    vacuum,
)
from .learner import (
    LearnReport,
    RdmEstimate,
    end_to_end_learn,
    estimate_R,
    gershgorin_intervals,
    learn_slater,
    required_samples,
)
from .majorana import (
    CoefficientMap,
    InvalidSequenceError,
    bin_of,
    coefficient_at_product,
    diag_matrix_element,
    gamma_product,
    is_diagonal,
    normalize,
    permute,
    seq_of,
)

__version__ = "0.1.0"
