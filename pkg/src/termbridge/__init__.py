"""termbridge: a logic-term engine and a dynamic host-value runtime joined by
a bi-translation kernel and a bidirectional call API with three-valued
(true / false / undefined) query results."""

from .bridge import Bridge, QueryFlags
from .engine import (
    Answer,
    Budget,
    KnowledgeBase,
    consult_text,
    findall_terms,
    solve,
    unify,
    wfs_evaluate,
)
from .errors import BridgeError, HostError, TermSyntaxError
from .hostrt import HostRuntime
from .hostvals import HostObject, ObjectRegistry, ObjRef, value_hash
from .reader import parse_program, parse_term
from .terms import (
    Atom,
    Compound,
    Float,
    Int,
    Term,
    Var,
    compare_terms,
    mklist,
    write_term,
)
from .xlate import (
    XlateConfig,
    normalize_term,
    roundtrip_check,
    term_to_value,
    value_to_term,
)

__version__ = "0.1.0"

__all__ = [
    "Answer",
    "Atom",
    "Bridge",
    "BridgeError",
    "Budget",
    "Compound",
    "Float",
    "HostError",
    "HostObject",
    "HostRuntime",
    "Int",
    "KnowledgeBase",
    "ObjRef",
    "ObjectRegistry",
    "QueryFlags",
    "Term",
    "TermSyntaxError",
    "Var",
    "XlateConfig",
    "compare_terms",
    "consult_text",
    "findall_terms",
    "mklist",
    "normalize_term",
    "parse_program",
    "parse_term",
    "roundtrip_check",
    "solve",
    "term_to_value",
    "unify",
    "value_hash",
    "value_to_term",
    "wfs_evaluate",
    "write_term",
]
