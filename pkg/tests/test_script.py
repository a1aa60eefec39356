import random

import pytest

from app.errors import EmptyExpression, ScriptError, ScriptSyntaxError, UnboundVariable, UnknownField
from app.logic.script import FieldRef, Literal, evaluate_script, parse_script, referenced_fields


def test_single_field():
    expr = parse_script("person.gender")
    assert expr.terms == (FieldRef("person", "gender"),)
    assert expr.single_field == FieldRef("person", "gender")


def test_concatenation_with_literal_and_line_break():
    expr = parse_script("person.givenName + ' ' +\n                \tperson.familyName")
    assert expr.terms == (FieldRef("person", "givenName"), Literal(" "), FieldRef("person", "familyName"))
    assert expr.single_field is None
    assert str(expr) == "person.givenName + ' ' + person.familyName"


def test_evaluate_concatenates_in_order():
    expr = parse_script("person.givenName + ' ' + person.familyName")
    assert evaluate_script(expr, {"person": {"givenName": "Mary", "familyName": "Murphy"}}) == "Mary Murphy"


def test_literal_only():
    assert evaluate_script(parse_script("'IE'"), {}) == "IE"


@pytest.mark.parametrize("text", ["", "   ", "\n\t"])
def test_empty(text):
    with pytest.raises(EmptyExpression):
        parse_script(text)


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("person.givenName + 'x", "unterminated"),
        ("person", "has no '.field' part"),
        ("person.", "missing field name"),
        ("person.age person.gender", "expected '+'"),
        ("person.age +", "dangling '+'"),
        ("+ person.age", "expected field reference"),
    ],
)
def test_syntax_errors(text, fragment):
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script(text)
    assert fragment in str(exc.value)


def test_syntax_error_position():
    with pytest.raises(ScriptSyntaxError) as exc:
        parse_script("person.age person.gender")
    assert exc.value.position == 11
    assert "column 12" in str(exc.value)


def test_unbound_variable():
    with pytest.raises(UnboundVariable):
        evaluate_script(parse_script("other.age"), {"person": {"age": "30"}})


def test_unknown_field():
    with pytest.raises(UnknownField):
        evaluate_script(parse_script("person.height"), {"person": {"age": "30"}})


def test_referenced_fields_dedupes_in_order():
    expr = parse_script("p.b + p.a + ' ' + p.b + q.c")
    assert referenced_fields(expr) == {"p": ("b", "a"), "q": ("c",)}


def test_random_text_parses_or_raises_script_error():
    rng = random.Random(20130901)
    pieces = ["person", "self", ".", "gender", "_9", "+", "'", " ", "\n", "\"", "é", "1"]
    parsed = 0
    for _ in range(5000):
        text = "".join(rng.choice(pieces) for _ in range(rng.randint(0, 12)))
        try:
            expr = parse_script(text)
        except ScriptError:
            continue
        parsed += 1
        assert parse_script(str(expr)) == expr
    assert parsed > 0
