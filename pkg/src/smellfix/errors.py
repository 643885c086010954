"""Exception hierarchy."""

from __future__ import annotations


class SmellfixError(Exception):
    pass


class UnbalancedDelimiters(SmellfixError):
    """Braces, parens or brackets in a file cannot be matched."""

    def __init__(self, file: str, line: int, detail: str = "") -> None:
        self.file = file
        self.line = line
        self.detail = detail
        msg = f"{file}:{line}: unbalanced delimiters"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class RefactoringError(SmellfixError):
    pass


class AlreadyDocumented(RefactoringError):
    pass


class NoMessageOverload(RefactoringError):
    pass


class NonExtractable(RefactoringError):
    pass


class MissingDeclaration(RefactoringError):
    pass


class OverlappingEdits(RefactoringError):
    pass


class ReparseFailure(RefactoringError):
    """The refactored text no longer parses; nothing was written."""
