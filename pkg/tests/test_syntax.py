"""Parser, printer and AST helper tests."""

import pytest
from hypothesis import given

from tierlang.syntax import (
    Assign,
    If,
    OpApp,
    OracleCall,
    ParseError,
    Program,
    Seq,
    Skip,
    Var,
    While,
    assigned_vars,
    cmd_to_json,
    has_oracle_call,
    literal_op_name,
    literal_word,
    parse,
    pretty,
    program_size,
    program_to_json,
    variables_of,
)

from .strategies import programs


ADD_SOURCE = """
while (gt0(x)) {
  x := pred(x);
  y := suc1(y)
}
return y
"""


def test_parse_add_shape():
    p = parse(ADD_SOURCE)
    assert p.return_var == "y"
    loop = p.body
    assert isinstance(loop, While)
    assert loop.guard == OpApp("gt0", (Var("x"),))
    body = loop.body
    assert isinstance(body, Seq)
    assert body.first == Assign("x", OpApp("pred", (Var("x"),)))
    assert body.rest == Assign("y", OpApp("suc1", (Var("y"),)))


def test_numerals_are_unary_words():
    p = parse("x := 3 return x")
    assert p.body == Assign("x", OpApp(literal_op_name("111")))
    assert parse("x := 0 return x").body.value == OpApp(literal_op_name(""))


def test_string_literals_are_raw_words():
    p = parse('x := "1001" return x')
    assert p.body.value == OpApp(literal_op_name("1001"))
    assert literal_word(p.body.value.op) == "1001"


def test_bad_string_literal_rejected():
    with pytest.raises(ParseError):
        parse('x := "102" return x')


def test_oracle_call_parses_with_pipe():
    p = parse("y := phi(x | y) return y")
    assert p.body.value == OracleCall(Var("x"), Var("y"))
    assert has_oracle_call(p)
    assert not has_oracle_call(parse("x := 1 return x"))


def test_custom_oracle_name_is_recorded():
    p = parse("y := ask(x | y) return y")
    assert p.oracle_name == "ask"
    assert isinstance(p.body.value, OracleCall)


def test_mixed_oracle_names_rejected():
    with pytest.raises(ParseError):
        parse("y := ask(x | y); z := tell(x | y) return y")


def test_sequencing_is_right_associated():
    p = parse("x := 1; y := 1; z := 1 return x")
    assert isinstance(p.body, Seq)
    assert not isinstance(p.body.first, Seq)
    assert isinstance(p.body.rest, Seq)


def test_if_requires_else():
    with pytest.raises(ParseError):
        parse("if (gt0(x)) { skip } return x")


def test_parse_error_carries_position():
    with pytest.raises(ParseError) as exc:
        parse("while gt0(x) { skip } return x")
    assert exc.value.line == 1


def test_missing_return_rejected():
    with pytest.raises(ParseError):
        parse("x := 1")


def test_program_size_counts_every_node():
    # while + gt0 + x + seq + 2*(assign + target + op + var) + return var
    assert program_size(parse(ADD_SOURCE)) == 13
    assert program_size(parse("skip return x")) == 2
    assert program_size(parse("x := phi(x | y) return x")) == 6


def test_variables_in_first_occurrence_order():
    p = parse("y := x; z := y return z")
    assert variables_of(p) == ("y", "x", "z")
    assert assigned_vars(p.body) == frozenset({"y", "z"})


def test_variables_includes_return_only_var():
    assert variables_of(parse("skip return q")) == ("q",)


@given(programs(allow_oracle=True))
def test_pretty_parse_round_trip(p: Program):
    assert parse(pretty(p)) == p


@given(programs(allow_oracle=True))
def test_json_export_is_total(p: Program):
    doc = program_to_json(p)
    assert doc["return"] == p.return_var
    assert isinstance(doc["body"], dict)


def test_cmd_json_tags():
    c = parse("if (gt0(x)) { skip } else { x := 1 } return x").body
    doc = cmd_to_json(c)
    assert doc["node"] == "if"
    assert doc["then"]["node"] == "skip"


def test_pretty_prints_literal_sugar():
    assert "3" in pretty(parse("x := 3 return x"))
    assert '"10"' in pretty(parse('x := "10" return x'))


def test_comments_are_ignored():
    p = parse("# doubles nothing\nx := 1  # trailing\nreturn x")
    assert p.body == Assign("x", OpApp(literal_op_name("1")))
