"""Semantic knowledge: synonym groups, a concept hierarchy, mapping functions.

A knowledge base is loaded from a JSON document and never mutated afterwards,
so a single instance can be shared by every broker in a simulation.

Document format::

    {
      "synonyms": [{"root": "vehicle", "members": ["car", "automobile"]}],
      "hierarchy": [{"child": "book", "parent": "printed material"}],
      "mappings": [
        {
          "name": "f1",
          "inputs": ["work experience", "graduation date"],
          "guard": {"attribute": "work experience", "op": "=", "value": true},
          "output": "professional experience",
          "body": {"kind": "years_since", "input": "graduation date"}
        }
      ],
      "reference_year": 2003
    }

All terms are lowercase.  Hierarchy terms and every attribute or string value
inside a mapping must already be in root-term form; the loader rejects
synonym members there instead of normalizing twice.

Mapping bodies are a closed set of combinators so evaluation always
terminates: RENAME copies an input value under a new attribute, CONST emits
a fixed value, LINEAR computes scale*x + offset over one integer input, and
YEARS_SINCE computes reference_year - x.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Union

from .model import INT_MAX, INT_MIN, Event, Pair, Predicate, RelOp, Value
from .syntactic import match_pair


class KnowledgeError(ValueError):
    """Raised for malformed or inconsistent knowledge documents."""


class MappingEvaluationError(RuntimeError):
    """Raised when a mapping body cannot produce a representable value."""

    def __init__(self, function_name: str, detail: str):
        super().__init__(f"mapping {function_name!r}: {detail}")
        self.function_name = function_name


@dataclass(frozen=True)
class SynonymGroup:
    root: str
    members: frozenset[str]


@dataclass(frozen=True)
class Rename:
    input: str


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class Linear:
    input: str
    scale: int
    offset: int


@dataclass(frozen=True)
class YearsSince:
    input: str


MappingBody = Union[Rename, Const, Linear, YearsSince]


@dataclass(frozen=True)
class MappingFunction:
    name: str
    inputs: tuple[str, ...]
    guard: Optional[Predicate]
    output: str
    body: MappingBody


class KnowledgeBase:
    """Immutable synonym/hierarchy/mapping store.

    Instances compare and hash by identity, which lets pure functions over
    (entity, kb) arguments be memoized cheaply.
    """

    def __init__(
        self,
        synonyms: Iterable[SynonymGroup] = (),
        hierarchy: Iterable[tuple[str, str]] = (),
        mappings: Iterable[MappingFunction] = (),
        reference_year: int = 0,
    ):
        self.synonyms = tuple(synonyms)
        self.hierarchy = tuple(hierarchy)
        self.mappings = tuple(mappings)
        self.reference_year = int(reference_year)
        self._root: dict[str, str] = {}
        self._parent: dict[str, str] = {}
        self._validate()
        self._ancestor_cache: dict[str, tuple[str, ...]] = {}
        self._parents_with_children = frozenset(self._parent.values())

    def _validate(self) -> None:
        for group in self.synonyms:
            if group.root in group.members:
                raise KnowledgeError(
                    f"synonym root {group.root!r} listed among its members"
                )
            for term in (group.root, *sorted(group.members)):
                if term in self._root:
                    raise KnowledgeError(f"term {term!r} in two synonym groups")
                self._root[term] = group.root

        for child, parent in self.hierarchy:
            for term in (child, parent):
                if self.root_term(term) != term:
                    raise KnowledgeError(
                        f"hierarchy term {term!r} is not in root form"
                    )
            if child == parent:
                raise KnowledgeError(f"self-edge on {child!r}")
            if child in self._parent:
                raise KnowledgeError(f"term {child!r} has multiple parents")
            self._parent[child] = parent
        for start in self._parent:
            seen = {start}
            node = start
            while node in self._parent:
                node = self._parent[node]
                if node in seen:
                    raise KnowledgeError(f"hierarchy cycle through {node!r}")
                seen.add(node)

        for f in self.mappings:
            if not f.inputs:
                raise KnowledgeError(f"mapping {f.name!r} has no inputs")
            if len(set(f.inputs)) != len(f.inputs):
                raise KnowledgeError(f"mapping {f.name!r} repeats an input")
            if f.output in f.inputs:
                raise KnowledgeError(
                    f"mapping {f.name!r} output is also an input"
                )
            for attr in (*f.inputs, f.output):
                self._require_root_form(f.name, attr)
            if f.guard is not None:
                if f.guard.attribute not in f.inputs:
                    raise KnowledgeError(
                        f"mapping {f.name!r} guard attribute is not an input"
                    )
                self._require_root_form(f.name, f.guard.attribute)
                if f.guard.value.is_string:
                    self._require_root_form(f.name, f.guard.value.data)
            if isinstance(f.body, (Rename, Linear, YearsSince)):
                if f.body.input not in f.inputs:
                    raise KnowledgeError(
                        f"mapping {f.name!r} body input is not a declared input"
                    )
            if isinstance(f.body, Const) and f.body.value.is_string:
                self._require_root_form(f.name, f.body.value.data)
            if isinstance(f.body, Linear):
                for n in (f.body.scale, f.body.offset):
                    if not (INT_MIN <= n <= INT_MAX):
                        raise KnowledgeError(
                            f"mapping {f.name!r} coefficient out of range"
                        )

    def _require_root_form(self, owner: str, term: str) -> None:
        if self.root_term(term) != term:
            raise KnowledgeError(
                f"mapping {owner!r} uses non-root term {term!r}"
            )

    @classmethod
    def empty(cls) -> "KnowledgeBase":
        return cls()

    def root_term(self, term: str) -> str:
        """Group root for synonym members and roots; other terms unchanged."""
        return self._root.get(term, term)

    def ancestors(self, term: str) -> tuple[str, ...]:
        """Strict ancestors of a root-form term, nearest first."""
        cached = self._ancestor_cache.get(term)
        if cached is not None:
            return cached
        chain = []
        node = term
        while node in self._parent:
            node = self._parent[node]
            chain.append(node)
        result = tuple(chain)
        self._ancestor_cache[term] = result
        return result

    def is_descendant_or_equal(self, t1: str, t2: str) -> bool:
        """True iff t1 equals t2 or t2 is a strict ancestor of t1."""
        return t1 == t2 or t2 in self.ancestors(t1)

    def comparable(self, t1: str, t2: str) -> bool:
        """True iff the terms lie on one hierarchy path (either direction)."""
        return self.is_descendant_or_equal(t1, t2) or self.is_descendant_or_equal(
            t2, t1
        )

    def has_relative(self, term: str) -> bool:
        """True iff the term has a strict ancestor or a strict descendant."""
        return bool(self.ancestors(term)) or term in self._parents_with_children

    def without_mappings(self) -> "KnowledgeBase":
        if not self.mappings:
            return self
        return KnowledgeBase(
            self.synonyms, self.hierarchy, (), self.reference_year
        )


def _json_value(raw: object, where: str) -> Value:
    if isinstance(raw, bool):
        return Value.boolean(raw)
    if isinstance(raw, int):
        if not (INT_MIN <= raw <= INT_MAX):
            raise KnowledgeError(f"{where}: integer out of range")
        return Value.integer(raw)
    if isinstance(raw, str):
        if not raw:
            raise KnowledgeError(f"{where}: empty string value")
        return Value.string(raw)
    raise KnowledgeError(f"{where}: unsupported value {raw!r}")


def _parse_guard(raw: object, where: str) -> Predicate:
    if not isinstance(raw, dict):
        raise KnowledgeError(f"{where}: guard must be an object")
    try:
        attr = raw["attribute"]
        op_text = raw["op"]
        value = raw["value"]
    except KeyError as missing:
        raise KnowledgeError(f"{where}: guard missing key {missing}") from None
    if not isinstance(attr, str) or not attr:
        raise KnowledgeError(f"{where}: guard attribute must be a string")
    try:
        op = RelOp(op_text)
    except ValueError:
        raise KnowledgeError(f"{where}: unknown guard operator {op_text!r}") from None
    val = _json_value(value, where)
    if op.is_ordering and not val.is_int:
        raise KnowledgeError(f"{where}: ordering guard requires an integer")
    return Predicate(attr.lower(), op, val)


def _parse_body(raw: object, where: str) -> MappingBody:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise KnowledgeError(f"{where}: body must be an object with a kind")
    kind = raw["kind"]
    if kind == "rename":
        return Rename(str(raw["input"]).lower())
    if kind == "const":
        if "value" not in raw:
            raise KnowledgeError(f"{where}: const body needs a value")
        return Const(_json_value(raw["value"], where))
    if kind == "linear":
        try:
            return Linear(
                str(raw["input"]).lower(), int(raw["scale"]), int(raw["offset"])
            )
        except (KeyError, TypeError, ValueError):
            raise KnowledgeError(
                f"{where}: linear body needs input/scale/offset"
            ) from None
    if kind == "years_since":
        return YearsSince(str(raw["input"]).lower())
    raise KnowledgeError(f"{where}: unknown mapping body kind {kind!r}")


def load_knowledge(document: Union[bytes, str, dict]) -> KnowledgeBase:
    """Parse, validate, and freeze a knowledge document."""
    if isinstance(document, (bytes, str)):
        try:
            data = json.loads(document)
        except json.JSONDecodeError as err:
            raise KnowledgeError(f"invalid JSON: {err}") from None
    else:
        data = document
    if not isinstance(data, dict):
        raise KnowledgeError("knowledge document must be a JSON object")

    known = {"synonyms", "hierarchy", "mappings", "reference_year"}
    unknown = set(data) - known
    if unknown:
        raise KnowledgeError(f"unknown keys: {sorted(unknown)}")

    groups = []
    for i, raw in enumerate(data.get("synonyms", [])):
        where = f"synonyms[{i}]"
        if not isinstance(raw, dict) or "root" not in raw or "members" not in raw:
            raise KnowledgeError(f"{where}: need root and members")
        members = raw["members"]
        if not isinstance(members, list) or not all(
            isinstance(m, str) and m for m in members
        ):
            raise KnowledgeError(f"{where}: members must be non-empty strings")
        if len(set(members)) != len(members):
            raise KnowledgeError(f"{where}: duplicate member")
        groups.append(
            SynonymGroup(str(raw["root"]).lower(), frozenset(m.lower() for m in members))
        )

    edges = []
    for i, raw in enumerate(data.get("hierarchy", [])):
        where = f"hierarchy[{i}]"
        if not isinstance(raw, dict) or "child" not in raw or "parent" not in raw:
            raise KnowledgeError(f"{where}: need child and parent")
        edges.append((str(raw["child"]).lower(), str(raw["parent"]).lower()))

    mappings = []
    for i, raw in enumerate(data.get("mappings", [])):
        where = f"mappings[{i}]"
        if not isinstance(raw, dict):
            raise KnowledgeError(f"{where}: must be an object")
        try:
            name = raw["name"]
            inputs = raw["inputs"]
            output = raw["output"]
            body_raw = raw["body"]
        except KeyError as missing:
            raise KnowledgeError(f"{where}: missing key {missing}") from None
        if not isinstance(inputs, list) or not all(
            isinstance(a, str) and a for a in inputs
        ):
            raise KnowledgeError(f"{where}: inputs must be non-empty strings")
        guard = _parse_guard(raw["guard"], where) if "guard" in raw else None
        mappings.append(
            MappingFunction(
                name=str(name),
                inputs=tuple(a.lower() for a in inputs),
                guard=guard,
                output=str(output).lower(),
                body=_parse_body(body_raw, where),
            )
        )

    reference_year = data.get("reference_year", 0)
    if isinstance(reference_year, bool) or not isinstance(reference_year, int):
        raise KnowledgeError("reference_year must be an integer")

    return KnowledgeBase(groups, edges, mappings, reference_year)


def apply_mapping(
    f: MappingFunction,
    event: Union[Event, Iterable[Pair]],
    reference_year: int,
) -> Optional[Pair]:
    """Evaluate one mapping function against an event's pairs.

    Every input attribute must be present; when an attribute occurs several
    times (augmented events), the first occurrence is bound.  Returns None
    when an input is absent, the guard fails, or an arithmetic body meets a
    non-integer input.
    """
    pairs = list(event)
    bound: dict[str, Pair] = {}
    for attr in f.inputs:
        match = next((p for p in pairs if p.attribute == attr), None)
        if match is None:
            return None
        bound[attr] = match
    if f.guard is not None and not match_pair(bound[f.guard.attribute], f.guard):
        return None

    body = f.body
    if isinstance(body, Rename):
        return Pair(f.output, bound[body.input].value)
    if isinstance(body, Const):
        return Pair(f.output, body.value)

    source = bound[body.input].value
    if not source.is_int:
        return None
    if isinstance(body, Linear):
        result = body.scale * source.data + body.offset
    else:
        result = reference_year - source.data
    try:
        return Pair(f.output, Value.integer(result))
    except ValueError:
        raise MappingEvaluationError(
            f.name, f"result {result} exceeds the 64-bit range"
        ) from None
