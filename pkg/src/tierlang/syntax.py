"""Abstract and concrete syntax for the tier language.

The language is a minimal imperative while-language over binary words.
Expressions are variables, operator applications, and calls to a single
oracle symbol; the oracle is always queried through the truncate-pad
form ``phi(data | bound)``.  A program is a command followed by
``return x``.

Words are plain Python strings over the alphabet {0, 1}.  Integer
literals are sugar for unary words (``3`` means ``111``) and string
literals are raw words (``"101"``).  Both parse to nullary operator
applications so that the AST has exactly three expression forms.
"""

from __future__ import annotations

from dataclasses import dataclass

KEYWORDS = frozenset({"skip", "if", "else", "while", "return"})

LITERAL_PREFIX = "lit:"


def literal_op_name(word: str) -> str:
    """Registry name of the nullary operator denoting a word literal."""
    return LITERAL_PREFIX + word


def literal_word(op_name: str) -> str | None:
    """Inverse of literal_op_name, or None for ordinary operators."""
    if op_name.startswith(LITERAL_PREFIX):
        return op_name[len(LITERAL_PREFIX):]
    return None


class ParseError(Exception):
    """Syntax or arity error, with 1-based source position."""

    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Expr:
    pass


@dataclass(frozen=True)
class Var(Expr):
    name: str


@dataclass(frozen=True)
class OpApp(Expr):
    op: str
    args: tuple[Expr, ...] = ()


@dataclass(frozen=True)
class OracleCall(Expr):
    """Oracle query phi(data | bound): data truncate-padded to |bound|."""

    data: Expr
    bound: Expr


@dataclass(frozen=True)
class Cmd:
    pass


@dataclass(frozen=True)
class Skip(Cmd):
    pass


@dataclass(frozen=True)
class Assign(Cmd):
    target: str
    value: Expr


@dataclass(frozen=True)
class Seq(Cmd):
    """Right-associated sequencing; `first` is never itself a Seq."""

    first: Cmd
    rest: Cmd


@dataclass(frozen=True)
class If(Cmd):
    guard: Expr
    then: Cmd
    orelse: Cmd


@dataclass(frozen=True)
class While(Cmd):
    guard: Expr
    body: Cmd


@dataclass(frozen=True)
class Program:
    body: Cmd
    return_var: str
    oracle_name: str = "phi"


def program_size(p: Program) -> int:
    """AST node count.

    Every command node, operator application, oracle call, and variable
    occurrence (including assignment targets and the return variable)
    counts one.  ``skip return x`` has size 2.
    """
    return _cmd_size(p.body) + 1


def _expr_size(e: Expr) -> int:
    if isinstance(e, Var):
        return 1
    if isinstance(e, OpApp):
        return 1 + sum(_expr_size(a) for a in e.args)
    if isinstance(e, OracleCall):
        return 1 + _expr_size(e.data) + _expr_size(e.bound)
    raise TypeError(f"not an expression: {e!r}")


def _cmd_size(c: Cmd) -> int:
    if isinstance(c, Skip):
        return 1
    if isinstance(c, Assign):
        return 2 + _expr_size(c.value)
    if isinstance(c, Seq):
        return 1 + _cmd_size(c.first) + _cmd_size(c.rest)
    if isinstance(c, If):
        return 1 + _expr_size(c.guard) + _cmd_size(c.then) + _cmd_size(c.orelse)
    if isinstance(c, While):
        return 1 + _expr_size(c.guard) + _cmd_size(c.body)
    raise TypeError(f"not a command: {c!r}")


def variables_of(node: Program | Cmd | Expr) -> tuple[str, ...]:
    """All variable names, in order of first occurrence."""
    seen: dict[str, None] = {}

    def walk_expr(e: Expr) -> None:
        if isinstance(e, Var):
            seen.setdefault(e.name)
        elif isinstance(e, OpApp):
            for a in e.args:
                walk_expr(a)
        elif isinstance(e, OracleCall):
            walk_expr(e.data)
            walk_expr(e.bound)

    def walk_cmd(c: Cmd) -> None:
        if isinstance(c, Assign):
            seen.setdefault(c.target)
            walk_expr(c.value)
        elif isinstance(c, Seq):
            walk_cmd(c.first)
            walk_cmd(c.rest)
        elif isinstance(c, If):
            walk_expr(c.guard)
            walk_cmd(c.then)
            walk_cmd(c.orelse)
        elif isinstance(c, While):
            walk_expr(c.guard)
            walk_cmd(c.body)

    if isinstance(node, Program):
        walk_cmd(node.body)
        seen.setdefault(node.return_var)
    elif isinstance(node, Cmd):
        walk_cmd(node)
    else:
        walk_expr(node)
    return tuple(seen)


def assigned_vars(c: Cmd) -> frozenset[str]:
    """Variables written by the command (assignment targets)."""
    if isinstance(c, Assign):
        return frozenset({c.target})
    if isinstance(c, Seq):
        return assigned_vars(c.first) | assigned_vars(c.rest)
    if isinstance(c, If):
        return assigned_vars(c.then) | assigned_vars(c.orelse)
    if isinstance(c, While):
        return assigned_vars(c.body)
    return frozenset()


def has_oracle_call(node: Program | Cmd | Expr) -> bool:
    if isinstance(node, Program):
        return has_oracle_call(node.body)
    if isinstance(node, OracleCall):
        return True
    if isinstance(node, OpApp):
        return any(has_oracle_call(a) for a in node.args)
    if isinstance(node, Seq):
        return has_oracle_call(node.first) or has_oracle_call(node.rest)
    if isinstance(node, Assign):
        return has_oracle_call(node.value)
    if isinstance(node, If):
        return (has_oracle_call(node.guard) or has_oracle_call(node.then)
                or has_oracle_call(node.orelse))
    if isinstance(node, While):
        return has_oracle_call(node.guard) or has_oracle_call(node.body)
    return False


# --- Lexer ---------------------------------------------------------------

_SYMBOLS = {
    ":=": "ASSIGN",
    ";": "SEMI",
    "(": "LPAREN",
    ")": "RPAREN",
    "{": "LBRACE",
    "}": "RBRACE",
    ",": "COMMA",
    "|": "BAR",
}


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(source: str) -> list[_Token]:
    toks: list[_Token] = []
    line, col = 1, 1
    i, n = 0, len(source)
    while i < n:
        ch = source[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and source[i] != "\n":
                i += 1
            continue
        if source.startswith(":=", i):
            toks.append(_Token("ASSIGN", ":=", line, col))
            i += 2
            col += 2
            continue
        if ch in _SYMBOLS:
            toks.append(_Token(_SYMBOLS[ch], ch, line, col))
            i += 1
            col += 1
            continue
        if ch == '"':
            j = i + 1
            while j < n and source[j] != '"':
                if source[j] == "\n":
                    raise ParseError("unterminated word literal", line, col)
                j += 1
            if j >= n:
                raise ParseError("unterminated word literal", line, col)
            word = source[i + 1:j]
            if any(c not in "01" for c in word):
                raise ParseError(f'word literal "{word}" has symbols outside 0/1',
                                 line, col)
            toks.append(_Token("STRING", word, line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit():
            j = i
            while j < n and source[j].isdigit():
                j += 1
            toks.append(_Token("INT", source[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (source[j].isalnum() or source[j] == "_"):
                j += 1
            word = source[i:j]
            kind = "KEYWORD" if word in KEYWORDS else "IDENT"
            toks.append(_Token(kind, word, line, col))
            col += j - i
            i = j
            continue
        raise ParseError(f"unexpected character {ch!r}", line, col)
    toks.append(_Token("EOF", "", line, col))
    return toks


# --- Parser --------------------------------------------------------------


class _Parser:
    def __init__(self, tokens: list[_Token], registry):
        self.toks = tokens
        self.pos = 0
        self.registry = registry
        self.oracle_name: str | None = None

    def peek(self) -> _Token:
        return self.toks[self.pos]

    def next(self) -> _Token:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def expect(self, kind: str, value: str | None = None) -> _Token:
        t = self.peek()
        if t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            raise ParseError(f"expected {want!r}, found {t.value!r}", t.line, t.col)
        return self.next()

    def fail(self, message: str) -> None:
        t = self.peek()
        raise ParseError(message, t.line, t.col)

    def parse_program(self) -> Program:
        body = self.parse_cmd()
        self.expect("KEYWORD", "return")
        ret = self.expect("IDENT")
        self.expect("EOF")
        return Program(body, ret.value, self.oracle_name or "phi")

    def parse_cmd(self) -> Cmd:
        first = self.parse_simple_cmd()
        if self.peek().kind == "SEMI":
            self.next()
            rest = self.parse_cmd()
            return Seq(first, rest)
        return first

    def parse_simple_cmd(self) -> Cmd:
        t = self.peek()
        if t.kind == "KEYWORD" and t.value == "skip":
            self.next()
            return Skip()
        if t.kind == "KEYWORD" and t.value == "if":
            self.next()
            self.expect("LPAREN")
            guard = self.parse_expr()
            self.expect("RPAREN")
            self.expect("LBRACE")
            then = self.parse_cmd()
            self.expect("RBRACE")
            self.expect("KEYWORD", "else")
            self.expect("LBRACE")
            orelse = self.parse_cmd()
            self.expect("RBRACE")
            return If(guard, then, orelse)
        if t.kind == "KEYWORD" and t.value == "while":
            self.next()
            self.expect("LPAREN")
            guard = self.parse_expr()
            self.expect("RPAREN")
            self.expect("LBRACE")
            body = self.parse_cmd()
            self.expect("RBRACE")
            return While(guard, body)
        if t.kind == "IDENT":
            name = self.next().value
            self.expect("ASSIGN")
            value = self.parse_expr()
            return Assign(name, value)
        self.fail(f"expected a command, found {t.value!r}")

    def parse_expr(self) -> Expr:
        t = self.peek()
        if t.kind == "INT":
            self.next()
            return OpApp(literal_op_name("1" * int(t.value)))
        if t.kind == "STRING":
            self.next()
            return OpApp(literal_op_name(t.value))
        if t.kind == "IDENT":
            name_tok = self.next()
            if self.peek().kind != "LPAREN":
                return Var(name_tok.value)
            self.next()
            if self.peek().kind == "RPAREN":
                self.next()
                return self._op_app(name_tok, ())
            first = self.parse_expr()
            if self.peek().kind == "BAR":
                self.next()
                bound = self.parse_expr()
                self.expect("RPAREN")
                return self._oracle_call(name_tok, first, bound)
            args = [first]
            while self.peek().kind == "COMMA":
                self.next()
                args.append(self.parse_expr())
            self.expect("RPAREN")
            return self._op_app(name_tok, tuple(args))
        self.fail(f"expected an expression, found {t.value!r}")

    def _op_app(self, name_tok: _Token, args: tuple[Expr, ...]) -> OpApp:
        name = name_tok.value
        if name not in self.registry:
            raise ParseError(f"unknown operator {name!r}", name_tok.line, name_tok.col)
        spec = self.registry.lookup(name)
        if spec.arity != len(args):
            raise ParseError(
                f"operator {name!r} expects {spec.arity} argument(s), got {len(args)}",
                name_tok.line, name_tok.col)
        return OpApp(name, args)

    def _oracle_call(self, name_tok: _Token, data: Expr, bound: Expr) -> OracleCall:
        name = name_tok.value
        if self.oracle_name is None:
            self.oracle_name = name
        elif self.oracle_name != name:
            raise ParseError(
                f"second oracle symbol {name!r}; the program already queries "
                f"{self.oracle_name!r}", name_tok.line, name_tok.col)
        return OracleCall(data, bound)


def parse(source: str, registry=None) -> Program:
    """Parse a program, checking operator arities against the registry."""
    if registry is None:
        from .operators import builtin_registry
        registry = builtin_registry()
    return _Parser(_tokenize(source), registry).parse_program()


def parse_cmd(source: str, registry=None) -> Cmd:
    """Parse a bare command (no `return`); used by tests and tooling."""
    if registry is None:
        from .operators import builtin_registry
        registry = builtin_registry()
    p = _Parser(_tokenize(source), registry)
    cmd = p.parse_cmd()
    p.expect("EOF")
    return cmd


# --- Pretty printer ------------------------------------------------------


def pretty_expr(e: Expr, oracle_name: str = "phi") -> str:
    if isinstance(e, Var):
        return e.name
    if isinstance(e, OpApp):
        word = literal_word(e.op)
        if word is not None:
            if set(word) <= {"1"}:
                return str(len(word))
            return f'"{word}"'
        inner = ", ".join(pretty_expr(a, oracle_name) for a in e.args)
        return f"{e.op}({inner})"
    if isinstance(e, OracleCall):
        return (f"{oracle_name}({pretty_expr(e.data, oracle_name)} | "
                f"{pretty_expr(e.bound, oracle_name)})")
    raise TypeError(f"not an expression: {e!r}")


def pretty_cmd(c: Cmd, indent: int = 0, oracle_name: str = "phi") -> str:
    pad = "  " * indent
    if isinstance(c, Skip):
        return f"{pad}skip"
    if isinstance(c, Assign):
        return f"{pad}{c.target} := {pretty_expr(c.value, oracle_name)}"
    if isinstance(c, Seq):
        return (f"{pretty_cmd(c.first, indent, oracle_name)};\n"
                f"{pretty_cmd(c.rest, indent, oracle_name)}")
    if isinstance(c, If):
        return (f"{pad}if ({pretty_expr(c.guard, oracle_name)}) {{\n"
                f"{pretty_cmd(c.then, indent + 1, oracle_name)}\n"
                f"{pad}}} else {{\n"
                f"{pretty_cmd(c.orelse, indent + 1, oracle_name)}\n"
                f"{pad}}}")
    if isinstance(c, While):
        return (f"{pad}while ({pretty_expr(c.guard, oracle_name)}) {{\n"
                f"{pretty_cmd(c.body, indent + 1, oracle_name)}\n"
                f"{pad}}}")
    raise TypeError(f"not a command: {c!r}")


def pretty(p: Program) -> str:
    return f"{pretty_cmd(p.body, 0, p.oracle_name)}\nreturn {p.return_var}\n"


# --- JSON export ---------------------------------------------------------


def expr_to_json(e: Expr) -> dict:
    if isinstance(e, Var):
        return {"node": "var", "name": e.name}
    if isinstance(e, OpApp):
        return {"node": "op", "op": e.op, "args": [expr_to_json(a) for a in e.args]}
    if isinstance(e, OracleCall):
        return {"node": "oracle", "data": expr_to_json(e.data),
                "bound": expr_to_json(e.bound)}
    raise TypeError(f"not an expression: {e!r}")


def cmd_to_json(c: Cmd) -> dict:
    if isinstance(c, Skip):
        return {"node": "skip"}
    if isinstance(c, Assign):
        return {"node": "assign", "target": c.target, "value": expr_to_json(c.value)}
    if isinstance(c, Seq):
        return {"node": "seq", "first": cmd_to_json(c.first), "rest": cmd_to_json(c.rest)}
    if isinstance(c, If):
        return {"node": "if", "guard": expr_to_json(c.guard),
                "then": cmd_to_json(c.then), "else": cmd_to_json(c.orelse)}
    if isinstance(c, While):
        return {"node": "while", "guard": expr_to_json(c.guard),
                "body": cmd_to_json(c.body)}
    raise TypeError(f"not a command: {c!r}")


def program_to_json(p: Program) -> dict:
    return {"body": cmd_to_json(p.body), "return": p.return_var,
            "oracle": p.oracle_name}
