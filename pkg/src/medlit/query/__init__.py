"""SQL-dialect query engine for the document store."""

from .ast import Query
from .evaluator import (
    UNDEFINED,
    canon_key,
    evaluate,
    like_match,
    projection_columns,
    resolve_path,
    values_equal,
)
from .parser import parse_query, validate

__all__ = [
    "Query",
    "UNDEFINED",
    "canon_key",
    "evaluate",
    "like_match",
    "parse_query",
    "projection_columns",
    "resolve_path",
    "validate",
    "values_equal",
]
