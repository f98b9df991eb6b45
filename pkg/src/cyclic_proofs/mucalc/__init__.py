"""Modal mu-calculus: syntax, LTS semantics and a cyclic sequent calculus."""

from .calculus import (
    MarkedSequent, NotAProof, Sequent, SoundnessReport, apply_rule, infer_rule_instance, marked_sequents,
    mu_proof_system, mu_trace_structure, nu_thread_check, sequent, soundness_harness,
    validate_rule_instance, validity_algebra,
)
from .fixtures import FIXTURES, build_preproof, fixture
from .semantics import (
    LTS, LTSFormatError, Valuation, ValuationBudgetExceeded, approximant_semantics, is_valid_sequent,
    parse_lts, semantics,
)
from .syntax import (
    And, Box, Diamond, Formula, FormulaSyntaxError, Mu, NProp, Nu, Or, Prop, RenamingWarning, Var,
    canonical, free_vars, negate, parse_formula, render, unfold,
)
