"""Reference implementations of typability by direct enumeration.

This module re-derives tier typability straight from the typing rules,
without clauses or solvers, so it can serve as an independent cross-check
for the encoding in `inference`.  It is exponential in places and meant for
small programs only.

`derivable` decides one judgement by structural recursion, absorbing the
tier-lifting rule into a "some introduction tier below" search.
`typable_bounded` quantifies over every environment and triple up to a tier
cap.  `enumerate_family` builds every program up to a size bound over a
fixed stock of variables and operators, one representative per variable
renaming class.
"""

from __future__ import annotations

import itertools

from .operators import Positive, Registry, builtin_registry
from .syntax import (
    Assign,
    Cmd,
    Expr,
    If,
    OpApp,
    OracleCall,
    Program,
    Seq,
    Skip,
    Var,
    While,
    program_size,
    variables_of,
)


def expr_tiers(
    e: Expr,
    gamma: dict[str, int],
    inner: int,
    outer: int,
    registry: Registry,
    memo: dict | None = None,
) -> frozenset[int]:
    """All tiers at which the expression types under the given channels."""
    if memo is None:
        memo = {}
    key = (id(e), inner, outer)
    hit = memo.get(key)
    if hit is not None:
        return hit

    if isinstance(e, Var):
        out = frozenset({gamma[e.name]})
    elif isinstance(e, OpApp):
        spec = registry.lookup(e.op)
        positive = isinstance(spec.classification, Positive)
        tiers: set[int] = set()
        arg_sets = [
            expr_tiers(a, gamma, inner, outer, registry, memo) for a in e.args
        ]
        if spec.arity == 0:
            top = inner - 1 if positive else inner
            tiers.update(range(top + 1))
        else:
            for combo in itertools.product(*arg_sets):
                if max(combo) > inner:
                    continue
                top = min(combo)
                if positive:
                    top = min(top, inner - 1)
                tiers.update(range(top + 1))
        out = frozenset(tiers)
    elif isinstance(e, OracleCall):
        data = expr_tiers(e.data, gamma, inner, outer, registry, memo)
        bound = expr_tiers(e.bound, gamma, inner, outer, registry, memo)
        if outer in bound:
            out = frozenset(t for t in data if t < inner and t <= outer)
        else:
            out = frozenset()
    else:
        raise TypeError(f"not an expression: {e!r}")

    memo[key] = out
    return out


def derivable(
    c: Cmd,
    gamma: dict[str, int],
    tier: int,
    inner: int,
    outer: int,
    registry: Registry | None = None,
    _memo: dict | None = None,
    _expr_memo: dict | None = None,
) -> bool:
    """Is the judgement (tier, inner, outer) derivable for this command?

    Tier lifting is folded in: a judgement holds when some rule introduces
    the command at a tier at most `tier`.
    """
    if registry is None:
        registry = builtin_registry()
    if _memo is None:
        _memo = {}
    if _expr_memo is None:
        _expr_memo = {}
    if tier < 0:
        return False
    key = (id(c), tier, inner, outer)
    hit = _memo.get(key)
    if hit is not None:
        return hit

    def guard_tiers(e: Expr, out_channel: int) -> frozenset[int]:
        return expr_tiers(e, gamma, inner, out_channel, registry, _expr_memo)

    if isinstance(c, Skip):
        ans = True
    elif isinstance(c, Assign):
        target = gamma[c.target]
        value = expr_tiers(c.value, gamma, inner, outer, registry, _expr_memo)
        ans = target <= tier and any(target <= tv for tv in value)
    elif isinstance(c, Seq):
        ans = derivable(
            c.first, gamma, tier, inner, outer, registry, _memo, _expr_memo
        ) and derivable(
            c.rest, gamma, tier, inner, outer, registry, _memo, _expr_memo
        )
    elif isinstance(c, If):
        guard = guard_tiers(c.guard, outer)
        ans = any(
            t in guard
            and derivable(c.then, gamma, t, inner, outer, registry, _memo, _expr_memo)
            and derivable(c.orelse, gamma, t, inner, outer, registry, _memo, _expr_memo)
            for t in range(tier + 1)
        )
    elif isinstance(c, While):
        # The two loop rules split on the conclusion's outer tier: sealing
        # concludes outer 0, the plain rule keeps outer >= the loop tier, so
        # strictly inside any loop body (outer >= 1) only the plain rule
        # fires and sealing never nests.
        ans = False
        for t in range(1, tier + 1):
            if outer == 0:
                ok = t in guard_tiers(c.guard, t) and derivable(
                    c.body, gamma, t, t, t, registry, _memo, _expr_memo
                )
            else:
                ok = (
                    t <= outer
                    and t in guard_tiers(c.guard, outer)
                    and derivable(
                        c.body, gamma, t, t, outer, registry, _memo, _expr_memo
                    )
                )
            if ok:
                ans = True
                break
    else:
        raise TypeError(f"not a command: {c!r}")

    _memo[key] = ans
    return ans


def program_derivable(
    program: Program,
    gamma: dict[str, int],
    triple: tuple[int, int, int],
    registry: Registry | None = None,
) -> bool:
    tier, inner, outer = triple
    return derivable(program.body, gamma, tier, inner, outer, registry)


def typable_bounded(
    program: Program,
    cap: int,
    registry: Registry | None = None,
) -> bool:
    """Does any environment and triple with tiers <= cap type the program?"""
    if registry is None:
        registry = builtin_registry()
    names = variables_of(program)
    body = program.body
    for values in itertools.product(range(cap + 1), repeat=len(names)):
        gamma = dict(zip(names, values))
        memo: dict = {}
        expr_memo: dict = {}
        for inner in range(cap + 1):
            for outer in range(cap + 1):
                if derivable(
                    body, gamma, cap, inner, outer, registry, memo, expr_memo
                ):
                    return True
    return False


def typing_table(
    program: Program,
    cap: int,
    registry: Registry | None = None,
) -> frozenset[tuple[tuple[tuple[str, int], ...], tuple[int, int, int]]]:
    """Every (environment, triple) pair with tiers <= cap that types the
    program.  Environments are rendered as sorted item tuples."""
    if registry is None:
        registry = builtin_registry()
    names = variables_of(program)
    body = program.body
    found = set()
    for values in itertools.product(range(cap + 1), repeat=len(names)):
        gamma = dict(zip(names, values))
        memo: dict = {}
        expr_memo: dict = {}
        frozen = tuple(sorted(gamma.items()))
        for tier in range(cap + 1):
            for inner in range(cap + 1):
                for outer in range(cap + 1):
                    if derivable(
                        body, gamma, tier, inner, outer, registry, memo, expr_memo
                    ):
                        found.add((frozen, (tier, inner, outer)))
    return frozenset(found)


def enumerate_family(
    max_size: int,
    var_names: tuple[str, ...] = ("x", "y", "z"),
    op_names: tuple[str, ...] = ("pred", "suc1", "gt0"),
    registry: Registry | None = None,
) -> list[Program]:
    """Every program of size <= max_size over the given stock, up to
    variable renaming.

    Size is the node count from `program_size`.  The return variable is
    always the first stock name, and only programs whose variables appear
    in stock order are kept, so each renaming class shows up once.
    """
    if registry is None:
        registry = builtin_registry()
    specs = [registry.lookup(name) for name in op_names]
    body_max = max_size - 1

    exprs: dict[int, list[Expr]] = {s: [] for s in range(1, body_max + 1)}
    for v in var_names:
        exprs[1].append(Var(v))
    for spec in specs:
        if spec.arity == 0:
            exprs[1].append(OpApp(spec.name))
    for size in range(2, body_max + 1):
        for spec in specs:
            if spec.arity == 0:
                continue
            for parts in _compositions(size - 1, spec.arity):
                for args in itertools.product(*(exprs[p] for p in parts)):
                    exprs[size].append(OpApp(spec.name, args))

    cmds: dict[int, list[Cmd]] = {s: [] for s in range(1, body_max + 1)}
    plain: dict[int, list[Cmd]] = {s: [] for s in range(1, body_max + 1)}

    def register(size: int, c: Cmd) -> None:
        cmds[size].append(c)
        if not isinstance(c, Seq):
            plain[size].append(c)

    register(1, Skip())
    for size in range(3, body_max + 1):
        for v in var_names:
            for e in exprs[size - 2]:
                register(size, Assign(v, e))
        for gsize, bsize in _compositions(size - 1, 2):
            for guard in exprs[gsize]:
                for body in cmds[bsize]:
                    register(size, While(guard, body))
        for first_size, rest_size in _compositions(size - 1, 2):
            for first in plain[first_size]:
                for rest in cmds[rest_size]:
                    register(size, Seq(first, rest))
        if size >= 4:
            for gsize, tsize, esize in _compositions(size - 1, 3):
                for guard in exprs[gsize]:
                    for then in cmds[tsize]:
                        for orelse in cmds[esize]:
                            register(size, If(guard, then, orelse))

    out: list[Cmd] = []
    programs = []
    for size in range(1, body_max + 1):
        out.extend(cmds[size])
    for body in out:
        p = Program(body, var_names[0])
        used = variables_of(p)
        if used == var_names[: len(used)]:
            programs.append(p)
    return programs


def _compositions(total: int, parts: int):
    """Ways to write total as an ordered sum of `parts` positive integers."""
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for head in range(1, total - parts + 2):
        for tail in _compositions(total - head, parts - 1):
            yield (head,) + tail
