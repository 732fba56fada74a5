"""Exception hierarchy shared by the tree, tower, grope and certificate modules."""

from typing import Optional


class GropeTowerError(Exception):
    """Base class for every failure raised by this package"""


class ValidationError(GropeTowerError, ValueError):
    """Malformed input data: bad labels, unresolved ids, inconsistent payloads"""


class BracketSyntaxError(GropeTowerError, ValueError):
    """Bracket text that does not match the grammar"""

    def __init__(self, text: str, loc: int, detail: Optional[str] = None):
        self.text = text
        self.loc = loc
        # Reported positions are byte offsets into the UTF-8 encoding.
        self.offset = len(text[:loc].encode("utf-8"))
        self.detail = detail or "syntax error"
        super().__init__(f"{self.detail} at offset {self.offset}")


class InvalidEdgeError(ValidationError):
    """An EdgeRef that does not index an edge of the tree"""


class NotUnivalentError(ValidationError):
    """A vertex expected to be a leaf is not univalent"""


class InvalidSiteError(ValidationError):
    """An IHX site that does not belong to the tree"""


class PreconditionError(GropeTowerError):
    """An operation was applied outside of its precondition"""


class BudgetExhausted(GropeTowerError):
    """A bounded search stopped before reaching its closure"""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial
