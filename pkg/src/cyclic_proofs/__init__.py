"""Finite cyclic pre-proofs, trace structures and the global trace condition."""

from .core import (
    Algebra, AlgebraFailure, LabelledGraph, NotWellFounded, PreProof, ProofSystem, RuleInstance,
    ValidationReport, Violation, is_well_founded, labelled_graph, solve, validate_preproof,
)
from .trace import (
    GtcVerdict, Lasso, ProofSystemMorphism, TraceMatrix, TraceStep, TraceStructure, brute_force_gtc,
    check_recursive_via_gtc, compose, decide_gtc, pullback_trace_structure, reindex_preproof, step_matrix,
)
from .ordinal import (
    Ordinal, RefutationCertificate, build_lifted_graph, decide_gtc_via_lift, lasso_heights, lifted_edge_ok,
    ord_compare, ord_succ, ord_sup, ord_sup_plus_one, parse_ordinal, refute_gtc_via_lift, verify_refutation,
)
