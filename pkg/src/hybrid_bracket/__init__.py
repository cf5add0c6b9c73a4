"""Hybrid quasiclassical-quantum brackets and Heisenberg-picture evolution."""

from .algebra import (
    DimensionMismatch,
    HybridObservable,
    ResidualReport,
    abt_bracket,
    adjoint,
    anderson_bracket,
    commutator,
    evaluate_at,
    generators,
    jacobiator,
    partial_derivative,
    poisson,
    product_rule_check,
    random_observable,
    sweep_identity,
)
from .dynamics import (
    CanonicalReport,
    TaylorSolution,
    canonical_scan,
    evaluate_trajectory,
    taylor_evolve,
)
from .oracle import (
    MomentumCouplingParams,
    compare_with_quasiclassical,
    evolve_full_quantum,
    mean_field_trajectory,
)
from .states import (
    BranchSet,
    ClassicalEnsemble,
    HybridState,
    QuantumState,
    bin_branches,
    branch_decompose,
    expectation,
    spin_state,
)

__version__ = "0.1.0"
