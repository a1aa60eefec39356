"""Script expressions used by descriptor attributes.

    expr := term ('+' term)*
    term := IDENT '.' IDENT | "'" any-but-quote* "'"

A literal cannot contain a single quote; there are no escapes.
"""
import re
from dataclasses import dataclass
from typing import Dict, Mapping, Tuple, Union

from app.errors import EmptyExpression, ScriptSyntaxError, UnboundVariable, UnknownField

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")


@dataclass(frozen=True)
class FieldRef:
    variable: str
    field: str

    def __str__(self) -> str:
        return f"{self.variable}.{self.field}"


@dataclass(frozen=True)
class Literal:
    text: str

    def __str__(self) -> str:
        return f"'{self.text}'"


Term = Union[FieldRef, Literal]


@dataclass(frozen=True)
class ScriptExpr:
    terms: Tuple[Term, ...]

    def __post_init__(self):
        if not self.terms:
            raise EmptyExpression("script has no terms")

    def __str__(self) -> str:
        return " + ".join(str(t) for t in self.terms)

    @property
    def field_refs(self) -> Tuple[FieldRef, ...]:
        return tuple(t for t in self.terms if isinstance(t, FieldRef))

    @property
    def single_field(self) -> Union[FieldRef, None]:
        """The field when the script is exactly one field reference."""
        if len(self.terms) == 1 and isinstance(self.terms[0], FieldRef):
            return self.terms[0]
        return None


def _skip_ws(text: str, pos: int) -> int:
    while pos < len(text) and text[pos].isspace():
        pos += 1
    return pos


def _parse_term(text: str, pos: int) -> Tuple[Term, int]:
    if text[pos] == "'":
        end = text.find("'", pos + 1)
        if end < 0:
            raise ScriptSyntaxError("unterminated string literal", pos, text)
        return Literal(text[pos + 1:end]), end + 1

    m = _IDENT.match(text, pos)
    if not m:
        raise ScriptSyntaxError("expected field reference or string literal", pos, text)
    variable = m.group(0)
    pos = m.end()
    if pos >= len(text) or text[pos] != ".":
        raise ScriptSyntaxError(f"field reference {variable!r} has no '.field' part", pos, text)
    m = _IDENT.match(text, pos + 1)
    if not m:
        raise ScriptSyntaxError(f"missing field name after '{variable}.'", pos + 1, text)
    return FieldRef(variable, m.group(0)), m.end()


def parse_script(text: str) -> ScriptExpr:
    pos = _skip_ws(text, 0)
    if pos >= len(text):
        raise EmptyExpression("empty script expression")

    terms = []
    while True:
        term, pos = _parse_term(text, pos)
        terms.append(term)
        pos = _skip_ws(text, pos)
        if pos >= len(text):
            break
        if text[pos] != "+":
            raise ScriptSyntaxError("expected '+'", pos, text)
        plus = pos
        pos = _skip_ws(text, pos + 1)
        if pos >= len(text):
            raise ScriptSyntaxError("dangling '+'", plus, text)
    return ScriptExpr(tuple(terms))


def evaluate_script(expr: ScriptExpr, bindings: Mapping[str, Mapping[str, str]]) -> str:
    out = []
    for term in expr.terms:
        if isinstance(term, Literal):
            out.append(term.text)
            continue
        record = bindings.get(term.variable)
        if record is None:
            raise UnboundVariable(f"variable {term.variable!r} is not bound")
        if term.field not in record:
            raise UnknownField(f"{term.variable!r} has no field {term.field!r}")
        out.append(record[term.field])
    return "".join(out)


def referenced_fields(expr: ScriptExpr) -> Dict[str, Tuple[str, ...]]:
    """variable -> fields, each in first-reference order."""
    refs: Dict[str, list] = {}
    for ref in expr.field_refs:
        fields = refs.setdefault(ref.variable, [])
        if ref.field not in fields:
            fields.append(ref.field)
    return {k: tuple(v) for k, v in refs.items()}
