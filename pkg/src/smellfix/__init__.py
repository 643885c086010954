"""Detect and refactor Assertion Roulette and Duplicate Assert smells in JUnit 4 tests."""

from smellfix.detectors import (
    SmellInstance,
    SmellKind,
    SmellReport,
    build_report,
    detect,
    detect_assertion_roulette,
    detect_duplicate_assert,
    normalize_arg,
)
from smellfix.errors import (
    AlreadyDocumented,
    MissingDeclaration,
    NoMessageOverload,
    NonExtractable,
    OverlappingEdits,
    RefactoringError,
    ReparseFailure,
    SmellfixError,
    UnbalancedDelimiters,
)
from smellfix.lexer import Token, TokenKind, lex
from smellfix.model import (
    ArgSpan,
    AssertionCall,
    ClassDecl,
    MethodDecl,
    Span,
    Statement,
    StatementKind,
    TestFileModel,
)
from smellfix.parser import extract_assertions, has_explanation_message, parse_test_file
from smellfix.refactoring import (
    DEFAULT_MESSAGE,
    Edit,
    ExtractionPlan,
    FixPlanner,
    Patch,
    apply_patches,
    partition_patches,
    plan_ar_fix,
    plan_da_fix,
    render_extraction,
)

__version__ = "0.1.0"

__all__ = [
    "AlreadyDocumented",
    "ArgSpan",
    "AssertionCall",
    "ClassDecl",
    "DEFAULT_MESSAGE",
    "Edit",
    "ExtractionPlan",
    "FixPlanner",
    "MethodDecl",
    "MissingDeclaration",
    "NoMessageOverload",
    "NonExtractable",
    "OverlappingEdits",
    "Patch",
    "RefactoringError",
    "ReparseFailure",
    "SmellInstance",
    "SmellKind",
    "SmellReport",
    "SmellfixError",
    "Span",
    "Statement",
    "StatementKind",
    "TestFileModel",
    "Token",
    "TokenKind",
    "UnbalancedDelimiters",
    "apply_patches",
    "build_report",
    "detect",
    "detect_assertion_roulette",
    "detect_duplicate_assert",
    "extract_assertions",
    "has_explanation_message",
    "lex",
    "normalize_arg",
    "parse_test_file",
    "partition_patches",
    "plan_ar_fix",
    "plan_da_fix",
    "render_extraction",
]
