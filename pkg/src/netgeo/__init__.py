"""Complexity entropy of networks from the volume of their Gaussian statistical manifold."""
from .graph import (
    Network,
    NetworkParseError,
    Permutation,
    clique_network,
    find_isomorphism_bruteforce,
    parse_network,
    permute_network,
    to_edge_list,
    verify_isomorphism,
)
from .linalg import PDReport, adjugate, determinant, inverse, pd_test
from .fisher import (
    IntegrandCore,
    MetricEvaluation,
    covariance_at,
    fisher_entry_mc_oracle,
    fisher_matrix,
    fisher_matrix_lemma1,
    integrand_core,
)
from .volume import (
    EntropyResult,
    KappaRecord,
    LogBase,
    McConfig,
    Sampler,
    VolumeEstimate,
    calibrate_kappa,
    entropy,
    estimate_volume,
    monotonicity_check,
    simplex_table,
    upsilon,
)
from .lowdim import (
    QuadratureResult,
    bessel_k0,
    remark4_check,
    v2_diag_quadrature,
    v2_offdiag_quadrature,
    varphi,
)

__version__ = "0.1.0"
