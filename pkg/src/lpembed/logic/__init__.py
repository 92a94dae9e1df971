"""Continuous-logic kernel: syntax, parsing, interpretations, evaluation and theories."""

from lpembed.logic.evaluate import EvaluationError, QuantifierBudget, TruthValue, evaluate
from lpembed.logic.language import L_BANACH, L_BLATTICE, L_LPC, Language, Symbol
from lpembed.logic.models import Interpretation, LatticeModel
from lpembed.logic.parser import FormulaSyntaxError, parse_formula, parse_term
from lpembed.logic.syntax import SubscriptError, to_text
from lpembed.logic.theories import (
    Sentence,
    TheoryReport,
    axioms_T_lp_real,
    build_Tn_model,
    check_theory,
    sentences_phi_psi_gamma,
    theory_T_n,
)

__all__ = [
    "EvaluationError",
    "FormulaSyntaxError",
    "Interpretation",
    "L_BANACH",
    "L_BLATTICE",
    "L_LPC",
    "Language",
    "LatticeModel",
    "QuantifierBudget",
    "Sentence",
    "SubscriptError",
    "Symbol",
    "TheoryReport",
    "TruthValue",
    "axioms_T_lp_real",
    "build_Tn_model",
    "check_theory",
    "evaluate",
    "parse_formula",
    "parse_term",
    "sentences_phi_psi_gamma",
    "theory_T_n",
    "to_text",
]
