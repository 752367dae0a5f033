"""Exception hierarchy for the toolkit.

Every error raised on purpose derives from GraphfaError so the CLI can map
failures to exit codes without pattern-matching messages.
"""


class GraphfaError(Exception):
    """Base class for all toolkit errors."""


class InvariantViolation(GraphfaError):
    """A structural invariant of a symbol, graph or automaton does not hold."""


class TypeMismatch(GraphfaError):
    """Interface arities do not line up (concatenation, regex typing)."""


class ChainMismatch(TypeMismatch):
    """Adjacent factors of a concatenation have incompatible types."""


class AltTypeMismatch(TypeMismatch):
    """Branches of an alternation have different types."""


class StarNotSquare(TypeMismatch):
    """Star applied to an expression whose front and rear arities differ."""


class EmptyExpression(GraphfaError):
    """An empty group `()` or an empty regex body."""


class EpsilonLanguage(GraphfaError):
    """The regex accepts only the empty word; there is nothing to compile."""


class ParseError(GraphfaError):
    """Syntax error in a text input; carries line/column when known."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f" (line {line}" + (f", column {column}" if column is not None else "") + ")"
        super().__init__(message + where)


class SemanticError(GraphfaError):
    """Well-formed input that references undeclared names or breaks arities."""


class MixedRankSubset(GraphfaError):
    """A reachable powerset subset mixes states of different ranks."""


class SubsetConflict(GraphfaError):
    """A powerset subset has outgoing atoms sharing (label, front) but not rear.

    The pipeline catches this and feeds the offending transitions back into
    disambiguation; reaching the user it means the input automaton could not
    be made deterministic within the round cap.
    """

    def __init__(self, message, transitions=()):
        super().__init__(message)
        self.transitions = tuple(transitions)


class UncertifiedDfa(GraphfaError):
    """Linear recognition was requested on a DFA without TS+FEC certificates."""


class BudgetExhausted(GraphfaError):
    """The backtracking recognizer hit its step budget (not a reject)."""


class SizeLimitExceeded(GraphfaError):
    """iso_check refused a graph above its size bound."""


class VersionMismatch(GraphfaError):
    """A compiled DFA file declares an unsupported format version."""


class ChecksumMismatch(GraphfaError):
    """A compiled DFA file's content does not match its recorded checksum."""


class ReportMismatch(GraphfaError):
    """An analysis report was applied to a DFA with a different digest."""


class InternalError(GraphfaError):
    """An internal invariant failed; indicates a bug, not bad input."""
