"""Exact reasoning for a many-valued modal logic of probability.

Formulas mix Łukasiewicz and product connectives, a 1/2 constant, modal
boxes per agent, and probability atoms ``Pr(term)`` over Boolean terms.
"""

from .model import (CanonicalModel, LBoxModel, ProbModel, SIModel, example1, load_model,
                    model_from_dict, model_to_dict, validate)
from .modelcheck import evaluate, evaluate_all
from .reductions import (canonicalize, delta_embed, eliminate_constants, lbox_bridge,
                         load_chain, markov_to_frame, parse_classical, path_value, MarkovChain)
from .syntax import analyze, formula_str, parse, print_formula
from .tableau import Budget, EntailmentQuery, Verdict, decide, prove

__version__ = "0.1.0"

__all__ = [
    "Budget", "CanonicalModel", "EntailmentQuery", "LBoxModel", "MarkovChain", "ProbModel",
    "SIModel", "Verdict", "analyze", "canonicalize", "decide", "delta_embed",
    "eliminate_constants", "evaluate", "evaluate_all", "example1", "formula_str",
    "lbox_bridge", "load_chain", "load_model", "markov_to_frame", "model_from_dict",
    "model_to_dict", "parse", "parse_classical", "path_value", "print_formula", "prove",
    "validate",
]
