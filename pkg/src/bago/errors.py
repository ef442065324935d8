"""Exception hierarchy and checked multiplicity arithmetic.

Multiplicities live in the unsigned 64-bit range. Evaluation never wraps or
saturates: any intermediate product or sum above U64_MAX raises
MultiplicityOverflow so that cross-checks cannot silently diverge.
"""

U64_MAX = 2**64 - 1


class BagoError(Exception):
    """Base class for every error raised by this package."""


class ParseError(BagoError):
    """Malformed input text (TBox, ABox, query, graph, or answer tuple)."""

    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            where = f"line {line}" + (f", col {col}" if col is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)


class SafetyViolation(ParseError):
    """A query variable whose equality class touches no concept/role atom."""


class RepeatedAnswerVariable(ParseError):
    """An answer variable listed more than once in a query head."""


class NotRooted(BagoError):
    """Query has a Gaifman component with no answer variable or individual."""


class UnsupportedTBoxKind(BagoError):
    """Operation is defined for core TBoxes only (no role axioms)."""


class UnsatisfiableOntology(BagoError):
    """Certain answers over an unsatisfiable ontology are refused."""


class MultiplicityOverflow(BagoError):
    """A multiplicity left the unsigned 64-bit range during evaluation."""


class IllFormedQuery(BagoError):
    """A bag-algebra query node violates its variable side conditions."""


class ArityMismatch(BagoError):
    """Binary bag operation applied to answer bags of different arities."""


class InvalidGraph(BagoError):
    """Graph input violates the reduction's shape requirements."""


class MultipleAnchors(BagoError):
    """A variable cluster links outward to two distinct individuals."""


class CrosscheckMismatch(BagoError):
    """The chase and rewriting evaluation paths disagree."""


class RewriteLimitExceeded(BagoError):
    """Query has too many existential variables for subset enumeration."""


class InternalStructureError(BagoError):
    """An internal invariant failed (e.g. no linking atom for a rooted query)."""


def checked_add(a, b):
    c = a + b
    if c > U64_MAX:
        raise MultiplicityOverflow(f"sum {a} + {b} exceeds the 64-bit range")
    return c


def checked_mul(a, b):
    c = a * b
    if c > U64_MAX:
        raise MultiplicityOverflow(f"product {a} * {b} exceeds the 64-bit range")
    return c
