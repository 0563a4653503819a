"""Relative-entropy resource measures for finite-dimensional quantum states.

Computes the relative-entropy distance from a state to several free-state
families (separable, partition-separable, PPT, the trace-norm-ball family
behind the Rains bound, single references), produces certified lower bounds
through a dual variational formula, evaluates the closed-form divergence
from the closest Gaussian state on truncated Fock spaces, and provides
explicit energy-constrained continuity bounds.
"""

__version__ = "0.1.0"

from ._core import backend as core_backend
from .bounds import (
    BoundRequest,
    ExplicitSpectrum,
    OscillatorSpec,
    bipartite_bound,
    bipartite_bound_oscillator,
    entropy_ceiling,
    g_min,
    g_oscillator,
    gibbs_solve,
    multipartite_bound_sqrt,
    multipartite_bound_t,
)
from .entropy import (
    EntropyReport,
    ExtendedReal,
    almost_convexity_gap,
    binary_entropy,
    g_func,
    log_trace_exp,
    petz_dual_value,
    relative_entropy,
    von_neumann_entropy,
)
from .errors import (
    DimensionError,
    InfeasibleStartError,
    LeakageError,
    NotHermitianError,
    NotPSDError,
    ProjectionError,
    RelentError,
    StateFileError,
    SupportMismatchError,
)
from .freesets import (
    FreeSetSpec,
    PiSep,
    Ppt,
    ProductState,
    RainsSet,
    Sep,
    SingleState,
    is_ppt,
    pi_sep_lmo,
    ppt_project,
    rains_project,
    sep_lmo,
    separable_witness_from_pure,
)
from .gaussian import (
    FockRep,
    MomentData,
    gaussian_entropy,
    moments,
    quadrature_ops,
    relent_non_gaussianity,
    symplectic_eigenvalues,
)
from .operators import (
    EigenSystem,
    HermitianOp,
    SupportInfo,
    eig_hermitian,
    identity,
    loewner_log_frechet,
    matrix_exp,
    matrix_log_support,
    partial_trace,
    partial_transpose,
    pure_state,
    schmidt_decompose,
    tensor,
    trace_norm,
)
from .solver import (
    DualCertificate,
    SolveResult,
    SolverConfig,
    auto_candidate_X,
    certify,
    dual_certificate,
    minimize_primal,
    minimizer_continuity_probe,
    rains_bound,
    two_copy_subadditivity_check,
)
from .stateio import load_state, save_state
