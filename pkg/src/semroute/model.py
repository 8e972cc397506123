"""Core value, event, subscription, and advertisement types with text forms.

Events are lists of attribute-value pairs; subscriptions are conjunctions of
predicates; advertisements share the predicate syntax but are read
disjunctively (they describe the space of pairs a publisher may emit).

Text grammar (whitespace insignificant outside quotes):

    event      := "{" pair ("," pair)* "}"
    pair       := "(" attr "," value ")"
    sub / adv  := predicate ("AND" predicate)*
    predicate  := "(" attr op value ")"
    attr       := bareword | quoted-string          (lowercased)
    value      := quoted-string | integer | "true" | "false"
    op         := "=" | "!=" | "<" | "<=" | ">" | ">="

Attribute names and string values are canonicalized to lowercase at parse
time.  Integers are exact signed 64-bit; there is no floating point.
Ordering operators apply to integer values only.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from typing import Iterator, Union

INT_MIN = -(2**63)
INT_MAX = 2**63 - 1

_BAREWORD_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*\Z")


class ParseError(ValueError):
    """Raised on malformed entity text; carries the offending position."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class ValueKind(enum.Enum):
    STRING = "string"
    INT = "int"
    BOOL = "bool"


@dataclass(frozen=True)
class Value:
    """A string, integer, or boolean attribute value.

    The explicit kind tag keeps values of different kinds unequal even where
    Python's own equality would conflate them (``True == 1``).
    """

    kind: ValueKind
    data: Union[str, int, bool]

    @staticmethod
    def string(text: str) -> "Value":
        text = text.lower()
        if not text:
            raise ValueError("string values must be non-empty")
        return Value(ValueKind.STRING, text)

    @staticmethod
    def integer(number: int) -> "Value":
        if not (INT_MIN <= number <= INT_MAX):
            raise ValueError(f"integer out of 64-bit range: {number}")
        return Value(ValueKind.INT, int(number))

    @staticmethod
    def boolean(flag: bool) -> "Value":
        return Value(ValueKind.BOOL, bool(flag))

    @property
    def is_int(self) -> bool:
        return self.kind is ValueKind.INT

    @property
    def is_string(self) -> bool:
        return self.kind is ValueKind.STRING


class RelOp(enum.Enum):
    EQ = "="
    NE = "!="
    LT = "<"
    LE = "<="
    GT = ">"
    GE = ">="

    @property
    def is_ordering(self) -> bool:
        return self in (RelOp.LT, RelOp.LE, RelOp.GT, RelOp.GE)

    def holds(self, left: Value, right: Value) -> bool:
        """Evaluate ``left op right``.

        Equality and inequality compare across kinds (values of different
        kinds are simply unequal).  Ordering operators are defined on
        integers only; any other kind makes the relation false.
        """
        if self is RelOp.EQ:
            return left == right
        if self is RelOp.NE:
            return left != right
        if not (left.is_int and right.is_int):
            return False
        a, b = left.data, right.data
        if self is RelOp.LT:
            return a < b
        if self is RelOp.LE:
            return a <= b
        if self is RelOp.GT:
            return a > b
        return a >= b


@dataclass(frozen=True)
class Pair:
    attribute: str
    value: Value


@dataclass(frozen=True)
class Predicate:
    attribute: str
    op: RelOp
    value: Value


@dataclass(frozen=True)
class Event:
    """An ordered list of attribute-value pairs.

    The parser rejects duplicate attribute names; events built directly (for
    example by semantic augmentation) may carry several pairs per attribute.
    """

    pairs: tuple[Pair, ...]

    def __iter__(self) -> Iterator[Pair]:
        return iter(self.pairs)

    def attributes(self) -> set[str]:
        return {p.attribute for p in self.pairs}


@dataclass(frozen=True)
class Subscription:
    """A conjunction of predicates; the id is an opaque routing token."""

    predicates: tuple[Predicate, ...]
    id: str = field(default="", compare=False)


@dataclass(frozen=True)
class Advertisement:
    """A disjunctive predicate set announcing future publications."""

    predicates: tuple[Predicate, ...]
    id: str = field(default="", compare=False)


Entity = Union[Event, Subscription, Advertisement]

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<punct>[{}(),])
  | (?P<op>!=|<=|>=|=|<|>)
  | (?P<int>-?[0-9]+)
  | (?P<quoted>"(?:[^"\\]|\\.)*")
  | (?P<bare>[A-Za-z_][A-Za-z0-9_\-]*)
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    text: str
    position: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", pos)
        if m.lastgroup != "ws":
            tokens.append(_Token(m.lastgroup, m.group(), pos))
        pos = m.end()
    tokens.append(_Token("eof", "", len(text)))
    return tokens


def _unquote(token: _Token) -> str:
    body = token.text[1:-1]
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch == "\\" and i + 1 < len(body):
            out.append(body[i + 1])
            i += 2
        else:
            out.append(ch)
            i += 1
    return "".join(out)


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.index = 0

    def peek(self) -> _Token:
        return self.tokens[self.index]

    def advance(self) -> _Token:
        tok = self.tokens[self.index]
        if tok.kind != "eof":
            self.index += 1
        return tok

    def expect_punct(self, symbol: str) -> _Token:
        tok = self.peek()
        if tok.kind != "punct" or tok.text != symbol:
            raise ParseError(f"expected {symbol!r}", tok.position)
        return self.advance()

    def expect_eof(self) -> None:
        tok = self.peek()
        if tok.kind != "eof":
            raise ParseError(f"unexpected trailing input {tok.text!r}", tok.position)

    def attribute(self) -> str:
        tok = self.peek()
        if tok.kind == "bare":
            self.advance()
            return tok.text.lower()
        if tok.kind == "quoted":
            self.advance()
            name = _unquote(tok).lower()
            if not name:
                raise ParseError("empty attribute name", tok.position)
            return name
        raise ParseError("expected attribute name", tok.position)

    def value(self) -> Value:
        tok = self.peek()
        if tok.kind == "quoted":
            self.advance()
            text = _unquote(tok)
            if not text:
                raise ParseError("empty string value", tok.position)
            return Value.string(text)
        if tok.kind == "int":
            self.advance()
            number = int(tok.text)
            if not (INT_MIN <= number <= INT_MAX):
                raise ParseError("integer out of 64-bit range", tok.position)
            return Value.integer(number)
        if tok.kind == "bare" and tok.text.lower() in ("true", "false"):
            self.advance()
            return Value.boolean(tok.text.lower() == "true")
        raise ParseError("expected value", tok.position)

    def pair(self) -> Pair:
        self.expect_punct("(")
        attr = self.attribute()
        self.expect_punct(",")
        val = self.value()
        self.expect_punct(")")
        return Pair(attr, val)

    def predicate(self) -> Predicate:
        open_tok = self.expect_punct("(")
        attr = self.attribute()
        tok = self.peek()
        if tok.kind != "op":
            raise ParseError("expected relational operator", tok.position)
        self.advance()
        op = RelOp(tok.text)
        val = self.value()
        self.expect_punct(")")
        if op.is_ordering and not val.is_int:
            raise ParseError(
                f"ordering operator {op.value!r} requires an integer value",
                open_tok.position,
            )
        return Predicate(attr, op, val)


def parse_event(text: str) -> Event:
    """Parse ``{(attr, value), ...}`` into a canonical event."""
    parser = _Parser(text)
    open_tok = parser.expect_punct("{")
    if parser.peek().kind == "punct" and parser.peek().text == "}":
        raise ParseError("empty event", open_tok.position)
    pairs = [parser.pair()]
    while parser.peek().text == ",":
        parser.advance()
        pairs.append(parser.pair())
    parser.expect_punct("}")
    parser.expect_eof()
    seen = set()
    for p in pairs:
        if p.attribute in seen:
            raise ParseError(f"duplicate attribute {p.attribute!r}", 0)
        seen.add(p.attribute)
    return Event(tuple(pairs))


def _parse_predicates(text: str, what: str) -> tuple[Predicate, ...]:
    parser = _Parser(text)
    if parser.peek().kind == "eof":
        raise ParseError(f"empty {what}", 0)
    predicates = [parser.predicate()]
    while True:
        tok = parser.peek()
        if tok.kind == "bare" and tok.text.upper() == "AND":
            parser.advance()
            predicates.append(parser.predicate())
        else:
            break
    parser.expect_eof()
    return tuple(predicates)


def parse_subscription(text: str, sub_id: str | None = None) -> Subscription:
    """Parse ``(attr op value) AND ...`` into a subscription.

    The id defaults to the canonical rendered text, which is stable across
    runs and unique per content.
    """
    predicates = _parse_predicates(text, "subscription")
    canonical = _render_predicates(predicates)
    return Subscription(predicates, id=sub_id if sub_id is not None else canonical)


def parse_advertisement(text: str, adv_id: str | None = None) -> Advertisement:
    """Parse the subscription grammar into an advertisement."""
    predicates = _parse_predicates(text, "advertisement")
    canonical = _render_predicates(predicates)
    return Advertisement(predicates, id=adv_id if adv_id is not None else canonical)


def _render_attr(name: str) -> str:
    if _BAREWORD_RE.match(name):
        return name
    return '"' + name.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render_value(value: Value) -> str:
    if value.kind is ValueKind.STRING:
        text = value.data
        return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'
    if value.kind is ValueKind.BOOL:
        return "true" if value.data else "false"
    return str(value.data)


def _render_predicates(predicates: tuple[Predicate, ...]) -> str:
    parts = [
        f"({_render_attr(p.attribute)} {p.op.value} {_render_value(p.value)})"
        for p in predicates
    ]
    return " AND ".join(parts)


def render_pair(pair: Pair) -> str:
    return f"({_render_attr(pair.attribute)}, {_render_value(pair.value)})"


def render(entity: Entity) -> str:
    """Canonical text of an entity; parsing it back yields an equal entity."""
    if isinstance(entity, Event):
        return "{" + ", ".join(render_pair(p) for p in entity.pairs) + "}"
    if isinstance(entity, (Subscription, Advertisement)):
        return _render_predicates(entity.predicates)
    raise TypeError(f"cannot render {type(entity).__name__}")
