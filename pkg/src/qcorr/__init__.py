"""Trace-norm quantum, classical and total correlations of two-qubit states."""

__version__ = "0.1.0"

from .degeneracy import (
    AmbiguityWitness,
    DegeneracyReport,
    ambiguity_witness,
    c_profile,
    scan_degenerate_directions,
)
from .estimators import CorrelationTransformer, DegeneracyDetector
from .frameworks import (
    ClosedFormReference,
    CorrelationTriple,
    OptimizerSettings,
    c_at,
    c_prime_at,
    closed_form_bell,
    closest_product_search,
    closest_product_to_single_axis_classical,
    evaluate_all_frameworks,
    independent_optimization,
    maximize_c,
    minimize_q,
    q_at,
    total,
)
from .linalg import (
    eigenvalues_hermitian,
    partial_trace,
    pauli_compose,
    pauli_decompose,
    tensor_product,
    trace_norm_distance,
)
from .measurement import local_measure, projector
from .states import (
    TwoQubitState,
    UnphysicalStateError,
    as_state,
    build_bell_diagonal,
    build_rho_star,
    marginal_product,
    sort_correlations,
)
