"""Tokenizer, recursive-descent parser and semantic checks for the dialect.

Grammar (keywords case-insensitive, identifiers case-sensitive,
`--` starts a line comment)::

    query       := SELECT [DISTINCT] projection FROM source join* [WHERE expr]
    projection  := VALUE expr | select_item ("," select_item)*
    select_item := expr [AS ident]
    source      := ident ident            -- collection + alias (top level)
                 | ident IN path          -- array binding (subqueries)
    join        := JOIN ident IN path
    expr        := cmp (AND cmp)*
    cmp         := postfix [("=" postfix) | (LIKE string)]
    postfix     := primary ("[" integer "]")*
    primary     := literal | ARRAY "(" query ")" | path
    path        := ident ("." ident)*
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import QuerySemanticError, QuerySyntaxError
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
    PathSource,
    Query,
    SelectItem,
    SelectList,
    ValueProjection,
)

KEYWORDS = {
    "SELECT",
    "DISTINCT",
    "VALUE",
    "FROM",
    "JOIN",
    "IN",
    "WHERE",
    "AND",
    "LIKE",
    "AS",
    "ARRAY",
    "TRUE",
    "FALSE",
    "NULL",
}

_PUNCT = {",", ".", "(", ")", "[", "]", "="}


@dataclass(frozen=True)
class Token:
    kind: str  # KEYWORD, IDENT, STRING, NUMBER, punctuation literal, EOF
    value: str | float | int | None
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    i = 0
    line = 1
    col = 1
    n = len(text)

    def advance(k: int):
        nonlocal i, line, col
        for _ in range(k):
            if text[i] == "\n":
                line += 1
                col = 1
            else:
                col += 1
            i += 1

    while i < n:
        ch = text[i]
        if ch in " \t\r\n":
            advance(1)
            continue
        if ch == "-" and text.startswith("--", i):
            j = text.find("\n", i)
            advance((j if j != -1 else n) - i)
            continue
        start_line, start_col = line, col
        if ch == "'":
            value = []
            advance(1)
            closed = False
            while i < n:
                if text[i] == "'":
                    if i + 1 < n and text[i + 1] == "'":
                        value.append("'")
                        advance(2)
                        continue
                    advance(1)
                    closed = True
                    break
                value.append(text[i])
                advance(1)
            if not closed:
                raise QuerySyntaxError("unterminated string literal", start_line, start_col)
            tokens.append(Token("STRING", "".join(value), start_line, start_col))
            continue
        if ch.isdigit():
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            raw = text[i:j]
            advance(j - i)
            num: float | int
            if "." in raw:
                if raw.count(".") > 1:
                    raise QuerySyntaxError(f"malformed number {raw!r}", start_line, start_col)
                num = float(raw)
            else:
                num = int(raw)
            tokens.append(Token("NUMBER", num, start_line, start_col))
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            advance(j - i)
            if word.upper() in KEYWORDS:
                tokens.append(Token("KEYWORD", word.upper(), start_line, start_col))
            else:
                tokens.append(Token("IDENT", word, start_line, start_col))
            continue
        if ch in _PUNCT:
            advance(1)
            tokens.append(Token(ch, ch, start_line, start_col))
            continue
        raise QuerySyntaxError(f"unexpected character {ch!r}", line, col)
    tokens.append(Token("EOF", None, line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def _fail(self, message: str, expected: tuple[str, ...] = ()):
        tok = self.current
        raise QuerySyntaxError(message, tok.line, tok.column, expected)

    def _accept_keyword(self, word: str) -> bool:
        tok = self.current
        if tok.kind == "KEYWORD" and tok.value == word:
            self.pos += 1
            return True
        return False

    def _expect_keyword(self, word: str) -> None:
        if not self._accept_keyword(word):
            self._fail(f"expected {word}", (word,))

    def _accept(self, kind: str) -> Token | None:
        if self.current.kind == kind:
            tok = self.current
            self.pos += 1
            return tok
        return None

    def _expect(self, kind: str) -> Token:
        tok = self._accept(kind)
        if tok is None:
            self._fail(f"expected {kind}, found {self._describe(self.current)}", (kind,))
        return tok

    @staticmethod
    def _describe(tok: Token) -> str:
        if tok.kind == "EOF":
            return "end of input"
        return repr(tok.value)

    def parse_query(self, *, top_level: bool) -> Query:
        self._expect_keyword("SELECT")
        distinct = self._accept_keyword("DISTINCT")
        if self._accept_keyword("VALUE"):
            projection: SelectList | ValueProjection = ValueProjection(self.parse_expr())
        else:
            items = [self.parse_select_item()]
            while self._accept(","):
                items.append(self.parse_select_item())
            projection = SelectList(tuple(items))
        self._expect_keyword("FROM")
        source = self.parse_source(top_level=top_level)
        joins: list[Join] = []
        while self._accept_keyword("JOIN"):
            alias = self._expect("IDENT").value
            self._expect_keyword("IN")
            joins.append(Join(alias, self.parse_path()))
        predicate = None
        if self._accept_keyword("WHERE"):
            predicate = self.parse_expr()
        return Query(
            projection=projection,
            source=source,
            joins=tuple(joins),
            predicate=predicate,
            distinct=distinct,
        )

    def parse_source(self, *, top_level: bool):
        first = self._expect("IDENT").value
        if self._accept_keyword("IN"):
            return PathSource(alias=first, path=self.parse_path())
        alias_tok = self._accept("IDENT")
        if alias_tok is None:
            self._fail("expected alias after collection name", ("IDENT", "IN"))
        if not top_level:
            # Subqueries can only range over arrays reachable from an
            # enclosing alias, not over the collection again.
            raise QuerySemanticError(
                f"subquery FROM must bind an enclosing path, got collection {first!r}"
            )
        return CollectionSource(collection=first, alias=alias_tok.value)

    def parse_select_item(self) -> SelectItem:
        expr = self.parse_expr()
        alias = None
        if self._accept_keyword("AS"):
            alias = self._expect("IDENT").value
        return SelectItem(expr, alias)

    def parse_expr(self) -> Expr:
        left = self.parse_comparison()
        while self._accept_keyword("AND"):
            right = self.parse_comparison()
            left = And(left, right)
        return left

    def parse_comparison(self) -> Expr:
        left = self.parse_postfix()
        if self._accept("="):
            return Eq(left, self.parse_postfix())
        if self._accept_keyword("LIKE"):
            pattern_tok = self.current
            if pattern_tok.kind != "STRING":
                self._fail("LIKE pattern must be a string literal", ("STRING",))
            self.pos += 1
            return Like(left, pattern_tok.value)
        return left

    def parse_postfix(self) -> Expr:
        expr = self.parse_primary()
        while self._accept("["):
            idx_tok = self._expect("NUMBER")
            if not isinstance(idx_tok.value, int) or idx_tok.value < 0:
                raise QuerySyntaxError(
                    "array index must be a nonnegative integer", idx_tok.line, idx_tok.column
                )
            self._expect("]")
            expr = Index(expr, idx_tok.value)
        return expr

    def parse_primary(self) -> Expr:
        tok = self.current
        if tok.kind == "STRING":
            self.pos += 1
            return Literal(tok.value)
        if tok.kind == "NUMBER":
            self.pos += 1
            return Literal(tok.value)
        if tok.kind == "KEYWORD" and tok.value in ("TRUE", "FALSE", "NULL"):
            self.pos += 1
            return Literal({"TRUE": True, "FALSE": False, "NULL": None}[tok.value])
        if tok.kind == "KEYWORD" and tok.value == "ARRAY":
            self.pos += 1
            self._expect("(")
            sub = self.parse_query(top_level=False)
            self._expect(")")
            return ArraySubquery(sub)
        if tok.kind == "IDENT":
            return self.parse_path()
        self._fail(
            f"expected expression, found {self._describe(tok)}",
            ("STRING", "NUMBER", "ARRAY", "IDENT"),
        )

    def parse_path(self) -> Path:
        head = self._expect("IDENT").value
        segments: list[str] = []
        while self._accept("."):
            segments.append(self._expect("IDENT").value)
        return Path(head, tuple(segments))


def parse_query(text: str) -> Query:
    """Parse and semantically validate a query string."""
    parser = _Parser(tokenize(text))
    query = parser.parse_query(top_level=True)
    trailing = parser.current
    if trailing.kind != "EOF":
        raise QuerySyntaxError(
            f"unexpected input after query: {parser._describe(trailing)}",
            trailing.line,
            trailing.column,
        )
    validate(query)
    return query


def validate(query: Query, enclosing: frozenset[str] = frozenset()) -> None:
    """Check alias uniqueness (shadowing included) and path-head visibility."""
    scope = set()
    for alias in query.aliases():
        if alias in scope or alias in enclosing:
            raise QuerySemanticError(f"duplicate alias {alias!r}")
        scope.add(alias)

    visible_now: set[str] = set(enclosing)
    if isinstance(query.source, PathSource):
        if query.source.path.head not in visible_now:
            raise QuerySemanticError(
                f"unknown alias {query.source.path.head!r} in FROM {query.source.to_sql()}"
            )
    visible_now.add(query.source.alias)
    for join in query.joins:
        if join.path.head not in visible_now:
            raise QuerySemanticError(f"unknown alias {join.path.head!r} in {join.to_sql()}")
        visible_now.add(join.alias)

    full_scope = frozenset(visible_now)

    def check_expr(expr: Expr) -> None:
        if isinstance(expr, Path):
            if expr.head not in full_scope:
                raise QuerySemanticError(f"unknown alias {expr.head!r} in path {expr.to_sql()}")
        elif isinstance(expr, (Eq, And)):
            check_expr(expr.left)
            check_expr(expr.right)
        elif isinstance(expr, Like):
            check_expr(expr.operand)
        elif isinstance(expr, Index):
            check_expr(expr.base)
        elif isinstance(expr, ArraySubquery):
            validate(expr.query, enclosing=full_scope)
        # literals need no checking

    if isinstance(query.projection, ValueProjection):
        check_expr(query.projection.expr)
    else:
        seen_aliases = set()
        for item in query.projection.items:
            check_expr(item.expr)
            if item.alias is not None:
                if item.alias in seen_aliases:
                    raise QuerySemanticError(f"duplicate projection alias {item.alias!r}")
                seen_aliases.add(item.alias)
    if query.predicate is not None:
        check_expr(query.predicate)
