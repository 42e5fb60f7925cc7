"""Fermionic mode algebra, parity superselection and no-signalling checks."""

from carlock.expr import (
    LadderOp,
    Monomial,
    OperatorExpr,
    ParityClass,
    add,
    adjoint,
    ann,
    anticommutator,
    commutator,
    cre,
    even_odd_split,
    format_expr,
    identity,
    multiply,
    normal_order,
    parity_of,
    scale,
    support,
)
from carlock.fock import (
    DensityMatrix,
    Eigendecomposition,
    FockBasisState,
    OutcomeDistribution,
    StateVector,
    apply_expr,
    eigendecompose,
    expectation,
    exponentiate_hermitian,
    jw_matrix,
    load_state,
    measure,
    prepare,
    vacuum,
)
from carlock.locality import (
    LocalUnitary,
    ModePartition,
    build_witness,
    disjoint_commutation_check,
    paper_example,
    reduced_state,
    signalling_deviation,
    ssr_derivation_report,
    subalgebra_basis,
)
from carlock.parity import operator_ssr_allowed, parity_operator, ssr_dephase, state_ssr_check
from carlock.parsing import ExprSyntaxError, parse_expr

__version__ = "0.1.0"
