"""Error taxonomy shared by the term model, translation kernel, engine and bridge.

Every failure that crosses the bridge boundary is wrapped into a single
BridgeError carrying an origin tag, a kind, and backtraces from both sides.
"""

from __future__ import annotations


class TermError(Exception):
    """Base class for term-level failures."""

    kind = "term"


class TermSyntaxError(TermError):
    """Malformed textual term. Carries a 1-based character offset."""

    kind = "syntax"

    def __init__(self, reason: str, offset: int):
        super().__init__(f"syntax error at char {offset}: {reason}")
        self.reason = reason
        self.offset = offset


class TermLimitError(TermError):
    """A structural limit was exceeded (arity, integer width)."""

    kind = "limit"


class InstantiationFault(TermError):
    """An unbound variable appeared where a ground term is required."""

    kind = "instantiation"


class DomainFault(TermError):
    """A term outside the translatable/expected domain. Names the offender."""

    kind = "domain"


class DepthLimitExceeded(TermError):
    """Structure nesting exceeded the configured traversal depth limit."""

    kind = "depth_limit"


class UnhashableValue(TermError):
    """A host value that cannot serve as a set element or map key."""

    kind = "unhashable"


class DanglingHandle(TermError):
    """An object handle that is unknown or already released."""

    kind = "dangling_handle"


class EngineError(Exception):
    """Base class for goal-evaluation failures."""

    kind = "engine"


class BudgetExceeded(EngineError):
    kind = "budget_exceeded"


class ExistenceFault(EngineError):
    """Call to a predicate with no clauses and no builtin."""

    kind = "existence"


class EvaluationFault(EngineError):
    """Arithmetic evaluation failure: non-numeric input or overflow."""

    kind = "evaluation"


class TabledNegationFault(EngineError):
    """tnot/1 applied to a goal whose predicate is not tabled."""

    kind = "permission"


class FlounderingFault(EngineError):
    """A negative or tabled subgoal was insufficiently instantiated."""

    kind = "floundering"


class FlagFault(EngineError):
    """Undecodable query-flag integer."""

    kind = "flag"


class HostError(Exception):
    """Failure raised inside the host runtime, with a host-side backtrace.

    Never allowed to escape as a crash; the bridge converts it to a
    BridgeError carrying both backtraces.
    """

    def __init__(self, kind: str, message: str, backtrace: list[str] | None = None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message
        self.backtrace = list(backtrace or [])


class BridgeError(Exception):
    """The single error type surfaced by bridge operations."""

    def __init__(
        self,
        origin: str,
        kind: str,
        message: str,
        logic_backtrace: list[str] | None = None,
        host_backtrace: list[str] | None = None,
    ):
        super().__init__(f"[{origin}:{kind}] {message}")
        self.origin = origin
        self.kind = kind
        self.message = message
        self.logic_backtrace = list(logic_backtrace or [])
        self.host_backtrace = list(host_backtrace or [])
