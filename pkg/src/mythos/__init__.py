"""Description-logic conflict detection between health claims and trusted knowledge."""

from importlib import resources
from pathlib import Path

from .antipatterns import PatternMatch, detect_antipatterns
from .errors import (
    FixtureMissingError, KnowledgeBaseError, KRSSSyntaxError, MythosError, NTriplesSyntaxError,
    PreconditionError, ResourceLimitError, TranslationError, UnknownIndividualError, UnsafeRuleError,
)
from .ingest import Graph, fetch_translation, normalize_fred, normalize_with_log, parse_ntriples
from .justify import Justification, justify_inconsistency, justify_unsat, verbalize
from .krss import load_kb, parse_concept, parse_kb, serialize_kb
from .model import (
    BOTTOM, TOP, GCI, And, Atom, ConceptAssertion, DataAssertion, Disjoint, Equiv, Exists, Facet,
    ForAll, KnowledgeBase, Not, OneOf, Or, RoleAssertion, RoleDecl, nnf,
)
from .pipeline import ConflictReport, CorpusEntry, check_claim, merge, run_corpus, summarize
from .rules import ConceptAtom, QualityAtom, RoleAtom, Rule, Var, apply_rules
from .semantics import Interpretation, brute_force_consistent
from .tableau import (
    Reasoner, find_model, instance_of, is_coherent, is_consistent, is_satisfiable, subsumes,
)

__version__ = "0.1.0"


def data_path(*parts: str) -> Path:
    """Path to a file shipped in the package's ``data`` directory."""
    return Path(str(resources.files(__name__).joinpath("data", *parts)))


__all__ = [name for name in dir() if not name.startswith("_") and name not in ("resources", "Path")]
