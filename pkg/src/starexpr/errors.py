"""Shared exception types."""


class StarexprError(Exception):
    """Base class for all errors raised by this package."""


class TheoryMismatchError(StarexprError):
    """Values or operators from different branching theories were mixed."""


class UnboundVariableError(StarexprError):
    """A term was evaluated with a variable missing from the environment."""


class ParseError(StarexprError):
    """Syntax error in an expression, with a character position."""

    def __init__(self, message, position):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class DocumentError(StarexprError):
    """A system/labelling document violates its schema."""


class LayeringError(StarexprError):
    """A labelling operation was run on an ill-layered input."""


class LimitExceededError(StarexprError):
    """A guarded brute-force operation was asked to exceed its bound."""
