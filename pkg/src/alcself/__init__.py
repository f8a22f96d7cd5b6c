"""Reduction compiler from alternating Turing machines to ALCself knowledge
bases and conjunctive queries, with finite-model tools to check it.
"""

from .atm import (Atm, Branch, Configuration, RunNode, Transition, find_accepting_run,
                  inject_tape_fault, is_accepting_oracle, is_valid_quasi_run, m_acc, m_rej,
                  quasi_successors, successors, validate_atm)
from .cq import Cq, exists_match, expand_path, find_homomorphism, find_matches
from .dl import Gci, Interpretation, KnowledgeBase, check_gci, check_kb, eval_concept
from .errors import AlcSelfError, BudgetExceeded, ParseError, ValidationError
from .reduction import ReductionBundle, reduce

__version__ = "0.1.0"

__all__ = [
    "AlcSelfError", "Atm", "Branch", "BudgetExceeded", "Configuration", "Cq", "Gci",
    "Interpretation", "KnowledgeBase", "ParseError", "ReductionBundle", "RunNode", "Transition",
    "ValidationError", "check_gci", "check_kb", "eval_concept", "exists_match", "expand_path",
    "find_accepting_run", "find_homomorphism", "find_matches", "inject_tape_fault",
    "is_accepting_oracle", "is_valid_quasi_run", "m_acc", "m_rej", "quasi_successors", "reduce",
    "successors", "validate_atm",
]
