"""Evaluation of parsed queries over plain-JSON documents.

The value domain is JSON plus UNDEFINED, which arises only during
evaluation (missing field, bad path step, index out of range). Any
comparison touching UNDEFINED is false and projecting UNDEFINED omits
the field. There is no implicit coercion: '1' = 1 is false, and booleans
never equal numbers.
"""

from __future__ import annotations

import re
from typing import Any, Iterable, Iterator, Mapping

from .ast import (
    And,
    ArraySubquery,
    CollectionSource,
    Eq,
    Expr,
    Index,
    Join,
    Like,
    Literal,
    Path,
    Query,
    ValueProjection,
)


class _Undefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "UNDEFINED"

    def __bool__(self):
        return False


UNDEFINED = _Undefined()


def resolve_path(value: Any, segments: Iterable[str]) -> Any:
    """Field-by-field descent; any miss or non-object step is UNDEFINED."""
    current = value
    for segment in segments:
        if isinstance(current, Mapping) and segment in current:
            current = current[segment]
        else:
            return UNDEFINED
    return current


def like_match(pattern: str, candidate: str) -> bool:
    """SQL LIKE: % matches any run, _ exactly one char, case-sensitive."""
    parts = []
    for ch in pattern:
        if ch == "%":
            parts.append(".*")
        elif ch == "_":
            parts.append(".")
        else:
            parts.append(re.escape(ch))
    return re.fullmatch("".join(parts), candidate, flags=re.DOTALL) is not None


def values_equal(a: Any, b: Any) -> bool:
    """Deep equality without cross-type coercion (bools are not numbers)."""
    if a is UNDEFINED or b is UNDEFINED:
        return False
    if isinstance(a, bool) or isinstance(b, bool):
        return isinstance(a, bool) and isinstance(b, bool) and a == b
    if isinstance(a, (int, float)) and isinstance(b, (int, float)):
        return float(a) == float(b)
    if type(a) is not type(b):
        # Remaining comparable kinds: None, str, list, dict.
        return False
    if isinstance(a, list):
        return len(a) == len(b) and all(values_equal(x, y) for x, y in zip(a, b))
    if isinstance(a, dict):
        return a.keys() == b.keys() and all(values_equal(a[k], b[k]) for k in a)
    return a == b


def canon_key(value: Any) -> Any:
    """Hashable canonical form used for DISTINCT (numbers unified to float)."""
    if value is UNDEFINED:
        return ("undefined",)
    if isinstance(value, bool):
        return ("bool", value)
    if isinstance(value, (int, float)):
        return ("num", float(value))
    if isinstance(value, str):
        return ("str", value)
    if value is None:
        return ("null",)
    if isinstance(value, list):
        return ("arr", tuple(canon_key(v) for v in value))
    if isinstance(value, dict):
        return ("obj", tuple((k, canon_key(v)) for k, v in value.items()))
    raise TypeError(f"unsupported value {value!r}")


def _truthy(value: Any) -> bool:
    return value is True


def _eval_expr(expr: Expr, env: Mapping[str, Any]) -> Any:
    if isinstance(expr, Literal):
        return expr.value
    if isinstance(expr, Path):
        if expr.head not in env:
            return UNDEFINED
        return resolve_path(env[expr.head], expr.segments)
    if isinstance(expr, Eq):
        left = _eval_expr(expr.left, env)
        right = _eval_expr(expr.right, env)
        return values_equal(left, right)
    if isinstance(expr, Like):
        operand = _eval_expr(expr.operand, env)
        if not isinstance(operand, str):
            return False
        return like_match(expr.pattern, operand)
    if isinstance(expr, And):
        return _truthy(_eval_expr(expr.left, env)) and _truthy(_eval_expr(expr.right, env))
    if isinstance(expr, Index):
        base = _eval_expr(expr.base, env)
        if isinstance(base, list) and 0 <= expr.index < len(base):
            return base[expr.index]
        return UNDEFINED
    if isinstance(expr, ArraySubquery):
        return _eval_subquery(expr.query, env)
    raise TypeError(f"unknown expression node {expr!r}")


def _bindings(query: Query, env: dict[str, Any], docs: Iterable[Any] | None) -> Iterator[dict[str, Any]]:
    """All (root x joins) environments for one query, in document order."""
    if isinstance(query.source, CollectionSource):
        assert docs is not None
        roots: Iterable[Any] = docs
    else:
        value = resolve_path(env.get(query.source.path.head, UNDEFINED), query.source.path.segments)
        roots = value if isinstance(value, list) else ()

    def extend(envs: Iterator[dict[str, Any]], join: Join) -> Iterator[dict[str, Any]]:
        for e in envs:
            arr = _eval_expr(join.path, e)
            if not isinstance(arr, list):
                continue
            for element in arr:
                child = dict(e)
                child[join.alias] = element
                yield child

    def root_envs() -> Iterator[dict[str, Any]]:
        for doc in roots:
            child = dict(env)
            child[query.source.alias] = doc
            yield child

    envs: Iterator[dict[str, Any]] = root_envs()
    for join in query.joins:
        envs = extend(envs, join)
    return envs


def _project(query: Query, env: Mapping[str, Any]) -> Any:
    if isinstance(query.projection, ValueProjection):
        return _eval_expr(query.projection.expr, env)
    row: dict[str, Any] = {}
    for position, item in enumerate(query.projection.items, start=1):
        value = _eval_expr(item.expr, env)
        if value is UNDEFINED:
            continue
        name = item.output_name(position)
        if name in row:
            name = f"${position}"
        row[name] = value
    return row


def _run(query: Query, env: dict[str, Any], docs: Iterable[Any] | None) -> list[Any]:
    rows: list[Any] = []
    seen: set = set()
    for binding in _bindings(query, env, docs):
        if query.predicate is not None and not _truthy(_eval_expr(query.predicate, binding)):
            continue
        row = _project(query, binding)
        if row is UNDEFINED:
            # A VALUE projection of a missing field yields no row at all,
            # keeping subquery arrays free of undefined elements.
            continue
        if query.distinct:
            key = canon_key(row)
            if key in seen:
                continue
            seen.add(key)
        rows.append(row)
    return rows


def _eval_subquery(query: Query, env: Mapping[str, Any]) -> list[Any]:
    return _run(query, dict(env), docs=None)


def evaluate(query: Query, documents: Iterable[Mapping[str, Any]]) -> list[Any]:
    """Run a validated query over the given documents.

    Returns dict rows for a SELECT list, bare values for SELECT VALUE.
    The result order is a pure function of (document order, query).
    """
    return _run(query, {}, docs=documents)


def projection_columns(query: Query) -> list[str] | None:
    """Static output column names; None for a VALUE projection."""
    if isinstance(query.projection, ValueProjection):
        return None
    return [
        item.output_name(position)
        for position, item in enumerate(query.projection.items, start=1)
    ]
