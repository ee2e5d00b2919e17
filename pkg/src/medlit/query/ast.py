"""AST for the document-SQL dialect.

The surface covers exactly what corpus exploration needs: SELECT with
DISTINCT and VALUE projections, a root collection binding, array-unnesting
JOINs, AND/equality/LIKE predicates, correlated ARRAY subqueries and
integer indexing.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union


@dataclass(frozen=True)
class Path:
    """Dotted path rooted at an alias: `e.links` -> head "e", segments ("links",)."""

    head: str
    segments: tuple[str, ...] = ()

    def to_sql(self) -> str:
        return ".".join((self.head, *self.segments))


@dataclass(frozen=True)
class Literal:
    value: Union[str, float, int, bool, None]

    def to_sql(self) -> str:
        if self.value is None:
            return "null"
        if self.value is True:
            return "true"
        if self.value is False:
            return "false"
        if isinstance(self.value, str):
            return "'" + self.value.replace("'", "''") + "'"
        return repr(self.value)


@dataclass(frozen=True)
class Eq:
    left: "Expr"
    right: "Expr"

    def to_sql(self) -> str:
        return f"{self.left.to_sql()} = {self.right.to_sql()}"


@dataclass(frozen=True)
class Like:
    operand: "Expr"
    pattern: str

    def to_sql(self) -> str:
        return f"{self.operand.to_sql()} LIKE '" + self.pattern.replace("'", "''") + "'"


@dataclass(frozen=True)
class And:
    left: "Expr"
    right: "Expr"

    def to_sql(self) -> str:
        return f"{self.left.to_sql()} AND {self.right.to_sql()}"


@dataclass(frozen=True)
class Index:
    base: "Expr"
    index: int

    def to_sql(self) -> str:
        return f"{self.base.to_sql()}[{self.index}]"


@dataclass(frozen=True)
class ArraySubquery:
    query: "Query"

    def to_sql(self) -> str:
        return f"ARRAY({self.query.to_sql()})"


Expr = Union[Path, Literal, Eq, Like, And, Index, ArraySubquery]


@dataclass(frozen=True)
class SelectItem:
    expr: Expr
    alias: str | None = None

    def output_name(self, position: int) -> str:
        """Projected field name: alias, else last path segment, else $N."""
        if self.alias:
            return self.alias
        if isinstance(self.expr, Path):
            return self.expr.segments[-1] if self.expr.segments else self.expr.head
        return f"${position}"

    def to_sql(self) -> str:
        sql = self.expr.to_sql()
        if self.alias:
            sql += f" AS {self.alias}"
        return sql


@dataclass(frozen=True)
class SelectList:
    items: tuple[SelectItem, ...]

    def to_sql(self) -> str:
        return ", ".join(item.to_sql() for item in self.items)


@dataclass(frozen=True)
class ValueProjection:
    expr: Expr

    def to_sql(self) -> str:
        return f"VALUE {self.expr.to_sql()}"


@dataclass(frozen=True)
class CollectionSource:
    """Top-level FROM: `FROM papers p`."""

    collection: str
    alias: str

    def to_sql(self) -> str:
        return f"{self.collection} {self.alias}"


@dataclass(frozen=True)
class PathSource:
    """Subquery FROM binding an enclosing array: `FROM l IN e.links`."""

    alias: str
    path: Path

    def to_sql(self) -> str:
        return f"{self.alias} IN {self.path.to_sql()}"


@dataclass(frozen=True)
class Join:
    """`JOIN e IN p.entities`: unnests the array at `path` under `alias`."""

    alias: str
    path: Path

    def to_sql(self) -> str:
        return f"JOIN {self.alias} IN {self.path.to_sql()}"


@dataclass(frozen=True)
class Query:
    projection: Union[SelectList, ValueProjection]
    source: Union[CollectionSource, PathSource]
    joins: tuple[Join, ...] = ()
    predicate: Expr | None = None
    distinct: bool = False

    def to_sql(self) -> str:
        parts = ["SELECT"]
        if self.distinct:
            parts.append("DISTINCT")
        parts.append(self.projection.to_sql())
        parts.append("FROM")
        parts.append(self.source.to_sql())
        for join in self.joins:
            parts.append(join.to_sql())
        if self.predicate is not None:
            parts.append("WHERE")
            parts.append(self.predicate.to_sql())
        return " ".join(parts)

    def aliases(self) -> tuple[str, ...]:
        root = self.source.alias
        return (root, *(j.alias for j in self.joins))
