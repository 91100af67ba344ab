"""Nanophrases over virtual and welded homotopy data, their rewriting moves,
and Milnor-type invariants computed through the Magnus expansion."""

from .core import (
    EMPTY, HomotopyData, InvalidPhrase, Nanophrase, ParseError, canonical_form, check,
    isomorphic, parse_homotopy_data, parse_nanophrase, phrase_from_json, phrase_to_json,
    render_homotopy_data, render_nanophrase, validate,
)
from .forest import build_forest, oracle_check, subforest_counts
from .homotopy import builtin, builtin_virtual, builtin_welded, linking_matrix
from .invariants import IndexSequence, Invariants, Residue, StabilizationError, delta, mu, mu_bar
from .magnus import MagnusSeries, PhraseData, SignedLetter, SignedWord, component_series, eta_word, rho_expand
from .moves import MoveError, MoveSite, apply_move, enumerate_sites, random_walk, replay

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
