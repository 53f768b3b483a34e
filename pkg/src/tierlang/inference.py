"""Tier inference by reduction to 2-SAT.

Tiers live on the ladder 0 < 1 < ... < t_max.  Every syntactic entity that
carries a tier (variable, command node, operator or oracle expression) gets a
record of t_max+1 boolean threshold bits; bit i of record r means "the tier
of r is at most i".  Records are monotone (bit i implies bit i+1) and bit
t_max is pinned true, so a satisfying assignment denotes exactly one tier per
record: the least i whose bit is set.

Order facts between records become binary clauses over threshold bits:

    a <= b      (-b_i  or a_i)         for every i
    a == b      both directions of <=
    a <  b      (-b_{i+1} or a_i)      for every i < t_max, plus unit -b_0

Each typing rule is a conjunction of such facts except the choice between the
two while rules.  That choice is global: the rule that seals the outer
channel to 0 is only available when the whole program types with outer tier
0, so encoding is attempted twice.  Mode "outer zero" pins the root outer
channel to 0 and lets each top-level loop bound the oracle channel with its
own tier; the other mode pins the root outer channel above 0 and treats
top-level loops exactly like nested ones.  Either attempt is a pure 2-SAT
instance.

All emitted clauses are implications between bits or unit literals, so
models are closed under union and a greatest model exists.  Greatest in
"at most" bits means pointwise least in tiers, which is the assignment
inference wants to report.  The solver finds it by propagating falsity
backwards from the negative unit literals; strongly connected components of
the implication graph decide satisfiability first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .operators import Positive, Registry, builtin_registry
from .syntax import (
    Assign,
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

# A path addresses one occurrence of a node: child tags from the root command
# down.  Sequencing uses "first"/"rest", loops "guard"/"body", conditionals
# "guard"/"then"/"else", assignments "value", oracle calls "data"/"bound",
# operator arguments their integer position.
Path = tuple


@dataclass
class ClauseSet:
    """Width-<=2 CNF over DIMACS-style signed integer literals."""

    num_vars: int = 0
    clauses: list[tuple[int, ...]] = field(default_factory=list)

    def add(self, *lits: int) -> None:
        if not 1 <= len(lits) <= 2:
            raise ValueError("clauses must have one or two literals")
        self.clauses.append(lits)

    def __len__(self) -> int:
        return len(self.clauses)


@dataclass
class Encoding:
    """A tier-typing problem compiled to clauses, with its symbol table."""

    program: Program
    t_max: int
    clause_set: ClauseSet
    var_records: dict[str, int]
    node_records: dict[Path, int]
    root_in: int
    root_out: int
    outer_zero: bool
    record_names: list[str]

    @property
    def num_records(self) -> int:
        return len(self.record_names)

    def bit(self, record: int, i: int) -> int:
        """DIMACS variable for "tier of record <= i"."""
        if not 0 <= i <= self.t_max:
            raise IndexError(f"threshold {i} outside 0..{self.t_max}")
        return record * (self.t_max + 1) + i + 1


class _Builder:
    def __init__(self, t_max: int) -> None:
        self.t_max = t_max
        self.names: list[str] = []
        self.clauses = ClauseSet()

    def bit(self, record: int, i: int) -> int:
        return record * (self.t_max + 1) + i + 1

    def new_record(self, name: str) -> int:
        r = len(self.names)
        self.names.append(name)
        for i in range(self.t_max):
            self.clauses.add(-self.bit(r, i), self.bit(r, i + 1))
        self.clauses.add(self.bit(r, self.t_max))
        return r

    def leq(self, a: int, b: int) -> None:
        """Tier of a is at most tier of b."""
        for i in range(self.t_max + 1):
            self.clauses.add(-self.bit(b, i), self.bit(a, i))

    def eq(self, a: int, b: int) -> None:
        self.leq(a, b)
        self.leq(b, a)

    def lt(self, a: int, b: int) -> None:
        """Tier of a is strictly below tier of b."""
        for i in range(self.t_max):
            self.clauses.add(-self.bit(b, i + 1), self.bit(a, i))
        self.clauses.add(-self.bit(b, 0))

    def pin(self, record: int, tier: int) -> None:
        """Force an exact tier."""
        self.clauses.add(self.bit(record, tier))
        if tier > 0:
            self.clauses.add(-self.bit(record, tier - 1))

    def pin_at_most(self, record: int, tier: int) -> None:
        self.clauses.add(self.bit(record, tier))

    def pin_positive(self, record: int) -> None:
        self.clauses.add(-self.bit(record, 0))


def encode(
    program: Program,
    *,
    t_max: int | None = None,
    registry: Registry | None = None,
    gamma: dict[str, int] | None = None,
    triple: tuple[int, int, int] | None = None,
    outer_zero: bool | None = None,
) -> Encoding:
    """Compile the typing constraints of a program to a 2-SAT instance.

    Free knobs may be pinned: `gamma` fixes variable tiers, `triple` fixes
    the root command judgement (tier, inner channel, outer channel).  When a
    triple is given its outer component selects the encoding mode; otherwise
    `outer_zero` does (default True).  `t_max` defaults to the program size,
    which is an upper bound on any tier a typing can need, and is raised as
    needed to cover pinned values.
    """
    if registry is None:
        registry = builtin_registry()
    if t_max is None:
        t_max = program_size(program)
    if gamma:
        known = set(variables_of(program))
        for name in gamma:
            if name not in known:
                raise ValueError(f"gamma mentions unknown variable {name!r}")
        t_max = max(t_max, *gamma.values())
    if triple is not None:
        if len(triple) != 3 or min(triple) < 0:
            raise ValueError(f"bad triple {triple!r}")
        t_max = max(t_max, *triple)
        outer_zero = triple[2] == 0
    elif outer_zero is None:
        outer_zero = True

    b = _Builder(t_max)
    var_records = {x: b.new_record(f"var {x}") for x in variables_of(program)}
    root_in = b.new_record("root inner channel")
    root_out = b.new_record("root outer channel")
    node_records: dict[Path, int] = {}

    def path_name(path: Path) -> str:
        return "/".join(str(tag) for tag in path) if path else "root"

    def expr(e, path: Path, in_ref: int, out_ref: int) -> int:
        if isinstance(e, Var):
            # Leaves alias the variable record; the rule for variables puts
            # no constraint on either channel.
            return var_records[e.name]
        if isinstance(e, OpApp):
            spec = registry.lookup(e.op)
            rec = b.new_record(f"op {e.op} at {path_name(path)}")
            node_records[path] = rec
            for i, arg in enumerate(e.args):
                arec = expr(arg, path + (i,), in_ref, out_ref)
                b.leq(rec, arec)
                b.leq(arec, in_ref)
            if spec.arity == 0:
                b.leq(rec, in_ref)
            if isinstance(spec.classification, Positive):
                b.lt(rec, in_ref)
            return rec
        if isinstance(e, OracleCall):
            rec = b.new_record(f"oracle at {path_name(path)}")
            node_records[path] = rec
            drec = expr(e.data, path + ("data",), in_ref, out_ref)
            brec = expr(e.bound, path + ("bound",), in_ref, out_ref)
            b.eq(rec, drec)
            b.eq(brec, out_ref)
            b.lt(rec, in_ref)
            b.leq(rec, out_ref)
            return rec
        raise TypeError(f"not an expression: {e!r}")

    def cmd(c, path: Path, in_ref: int, out_ref: int, nested: bool) -> int:
        if isinstance(c, Skip):
            rec = b.new_record(f"skip at {path_name(path)}")
            node_records[path] = rec
            b.pin(rec, 0)
            return rec
        if isinstance(c, Assign):
            rec = b.new_record(f"assign {c.target} at {path_name(path)}")
            node_records[path] = rec
            b.eq(rec, var_records[c.target])
            erec = expr(c.value, path + ("value",), in_ref, out_ref)
            b.leq(var_records[c.target], erec)
            return rec
        if isinstance(c, Seq):
            rec = b.new_record(f"seq at {path_name(path)}")
            node_records[path] = rec
            first = cmd(c.first, path + ("first",), in_ref, out_ref, nested)
            rest = cmd(c.rest, path + ("rest",), in_ref, out_ref, nested)
            b.leq(first, rec)
            b.leq(rest, rec)
            return rec
        if isinstance(c, If):
            rec = b.new_record(f"if at {path_name(path)}")
            node_records[path] = rec
            grec = expr(c.guard, path + ("guard",), in_ref, out_ref)
            b.eq(grec, rec)
            then = cmd(c.then, path + ("then",), in_ref, out_ref, nested)
            orelse = cmd(c.orelse, path + ("else",), in_ref, out_ref, nested)
            b.leq(then, rec)
            b.leq(orelse, rec)
            return rec
        if isinstance(c, While):
            rec = b.new_record(f"while at {path_name(path)}")
            node_records[path] = rec
            b.pin_positive(rec)
            if nested or not outer_zero:
                bound_ref = out_ref
                b.leq(rec, bound_ref)
            else:
                # Sealed mode: the loop's own tier bounds the oracle channel
                # of everything inside it.
                bound_ref = rec
            grec = expr(c.guard, path + ("guard",), in_ref, bound_ref)
            b.eq(grec, rec)
            body = cmd(c.body, path + ("body",), rec, bound_ref, True)
            b.leq(body, rec)
            return rec
        raise TypeError(f"not a command: {c!r}")

    root_rec = cmd(program.body, (), root_in, root_out, False)

    if outer_zero:
        b.pin(root_out, 0)
    else:
        b.pin_positive(root_out)
    if gamma:
        for name, tier in gamma.items():
            b.pin(var_records[name], tier)
    if triple is not None:
        t, inner, outer = triple
        b.pin_at_most(root_rec, t)
        b.pin(root_in, inner)
        b.pin(root_out, outer)

    b.clauses.num_vars = len(b.names) * (t_max + 1)
    return Encoding(
        program=program,
        t_max=t_max,
        clause_set=b.clauses,
        var_records=var_records,
        node_records=node_records,
        root_in=root_in,
        root_out=root_out,
        outer_zero=outer_zero,
        record_names=b.names,
    )


def solve_2sat(clause_set: ClauseSet, *, verify: bool = True) -> list[bool] | None:
    """Satisfy a width-<=2 CNF, or return None.

    Satisfiability is decided on the implication graph: the instance is
    unsatisfiable iff some variable shares a strongly connected component
    with its negation.  For instances whose binary clauses all pair one
    positive with one negative literal (implications between variables, the
    only kind this package emits) the returned model is the greatest one:
    every variable is true unless falsity forces it, where falsity seeds at
    negative unit clauses and flows from the consequent of an implication to
    its antecedent.  Other instances get the usual assignment read off the
    condensation order.
    """
    n = clause_set.num_vars
    if n == 0:
        return []
    for cl in clause_set.clauses:
        if any(lit == 0 or abs(lit) > n for lit in cl):
            raise ValueError(f"literal out of range in {cl!r}")

    # Literal node ids: variable v occupies 2(v-1) (positive) and 2(v-1)+1
    # (negative); XOR with 1 negates.
    def node(lit: int) -> int:
        return 2 * (abs(lit) - 1) + (0 if lit > 0 else 1)

    src: list[int] = []
    dst: list[int] = []
    implicational = True
    for cl in clause_set.clauses:
        if len(cl) == 1:
            (a,) = cl
            src.append(node(-a))
            dst.append(node(a))
        else:
            a, b = cl
            if (a > 0) == (b > 0):
                implicational = False
            src.append(node(-a))
            dst.append(node(b))
            src.append(node(-b))
            dst.append(node(a))

    order = 2 * n
    graph = csr_matrix(
        (np.ones(len(src), dtype=np.int8), (np.array(src), np.array(dst))),
        shape=(order, order),
    )
    _, labels = connected_components(graph, directed=True, connection="strong")
    paired = labels.reshape(n, 2)
    if bool(np.any(paired[:, 0] == paired[:, 1])):
        return None

    if implicational:
        assignment = _greatest_model(clause_set, n)
    else:
        assignment = _condensation_model(clause_set, labels, graph, n)
    if verify:
        for cl in clause_set.clauses:
            if not any(assignment[abs(lit) - 1] == (lit > 0) for lit in cl):
                raise AssertionError(f"model does not satisfy {cl!r}")
    return assignment


def _greatest_model(clause_set: ClauseSet, n: int) -> list[bool]:
    # Backward closure of falsity: clause (-q or p) says q implies p, so p
    # false forces q false.  Anything not forced stays true.
    back: dict[int, list[int]] = {}
    seeds: list[int] = []
    for cl in clause_set.clauses:
        if len(cl) == 1:
            if cl[0] < 0:
                seeds.append(-cl[0])
        else:
            a, b = cl
            consequent, antecedent = (a, -b) if a > 0 else (b, -a)
            back.setdefault(consequent, []).append(antecedent)
    false: set[int] = set()
    queue = deque(seeds)
    while queue:
        v = queue.popleft()
        if v in false:
            continue
        false.add(v)
        queue.extend(back.get(v, ()))
    return [v + 1 not in false for v in range(n)]


def _condensation_model(
    clause_set: ClauseSet, labels: np.ndarray, graph: csr_matrix, n: int
) -> list[bool]:
    # Kahn order on the component DAG; a literal is true when its component
    # comes after its negation's.
    comp_count = int(labels.max()) + 1
    coo = graph.tocoo()
    edges = {
        (int(labels[u]), int(labels[v]))
        for u, v in zip(coo.row, coo.col)
        if labels[u] != labels[v]
    }
    succs: dict[int, list[int]] = {}
    indeg = [0] * comp_count
    for u, v in edges:
        succs.setdefault(u, []).append(v)
        indeg[v] += 1
    queue = deque(c for c in range(comp_count) if indeg[c] == 0)
    rank = [0] * comp_count
    seen = 0
    while queue:
        c = queue.popleft()
        rank[c] = seen
        seen += 1
        for d in succs.get(c, ()):
            indeg[d] -= 1
            if indeg[d] == 0:
                queue.append(d)
    if seen != comp_count:
        raise AssertionError("implication graph condensation is cyclic")
    return [
        rank[labels[2 * v]] > rank[labels[2 * v + 1]] for v in range(n)
    ]


@dataclass(frozen=True)
class TierSolution:
    """Concrete tiers decoded from a satisfying assignment."""

    var_tiers: dict[str, int]
    node_tiers: dict[Path, int]
    root_in: int
    root_out: int

    @property
    def root_tier(self) -> int:
        return self.node_tiers[()]

    @property
    def triple(self) -> tuple[int, int, int]:
        return (self.root_tier, self.root_in, self.root_out)


def decode(encoding: Encoding, assignment: list[bool]) -> TierSolution:
    """Read tiers out of a model: least set threshold bit per record."""

    def tier_of(record: int) -> int:
        base = encoding.bit(record, 0) - 1
        bits = assignment[base : base + encoding.t_max + 1]
        tier = next(i for i, set_ in enumerate(bits) if set_)
        if not all(bits[tier:]):
            raise AssertionError(
                f"record {encoding.record_names[record]} is not monotone"
            )
        return tier

    return TierSolution(
        var_tiers={x: tier_of(r) for x, r in encoding.var_records.items()},
        node_tiers={p: tier_of(r) for p, r in encoding.node_records.items()},
        root_in=tier_of(encoding.root_in),
        root_out=tier_of(encoding.root_out),
    )


def to_dimacs(encoding: Encoding) -> str:
    """Render the instance in DIMACS CNF, with a record legend in comments."""
    lines = [
        f"c tier encoding, t_max={encoding.t_max},"
        f" mode={'outer-zero' if encoding.outer_zero else 'outer-positive'}"
    ]
    width = encoding.t_max + 1
    for r, name in enumerate(encoding.record_names):
        lines.append(f"c record {r} vars {r * width + 1}..{(r + 1) * width} {name}")
    cs = encoding.clause_set
    lines.append(f"p cnf {cs.num_vars} {len(cs)}")
    lines.extend(" ".join(str(lit) for lit in cl) + " 0" for cl in cs.clauses)
    return "\n".join(lines) + "\n"


def _contains_while(c) -> bool:
    if isinstance(c, While):
        return True
    if isinstance(c, Seq):
        return _contains_while(c.first) or _contains_while(c.rest)
    if isinstance(c, If):
        return _contains_while(c.then) or _contains_while(c.orelse)
    return False


def typable(
    program: Program,
    *,
    t_max: int | None = None,
    registry: Registry | None = None,
) -> bool:
    """Typability verdict only, tuned for bulk comparisons.

    Emits the same constraints as `encode` but straight into the backward
    implication lists that falsity propagation needs, materializing no
    clauses: for these implicational instances the encoding is
    unsatisfiable exactly when propagating falsity back from the negative
    unit literals reaches a positive unit.  Tests cross-check this path
    against solve_2sat on the full encoding.

    Without loops the two encoding modes only disagree on the root outer
    pin, and any typing can be shifted onto outer tier 0, so only the
    sealed mode is tried then.
    """
    if registry is None:
        registry = builtin_registry()
    if t_max is None:
        t_max = program_size(program)
    modes = (True, False) if _contains_while(program.body) else (True,)
    return any(
        _mode_verdict(program, t_max, registry, outer_zero) for outer_zero in modes
    )


def _mode_verdict(
    program: Program, t_max: int, registry: Registry, outer_zero: bool
) -> bool:
    width = t_max + 1
    back: list[list[int]] = []
    seeds: list[int] = []
    pos_units: list[int] = []

    def new_record() -> int:
        base = len(back)
        back.extend([] for _ in range(width))
        for i in range(t_max):
            back[base + i + 1].append(base + i)
        pos_units.append(base + t_max)
        return base

    def leq(a: int, b: int) -> None:
        for i in range(width):
            back[a + i].append(b + i)

    def eq(a: int, b: int) -> None:
        leq(a, b)
        leq(b, a)

    def lt(a: int, b: int) -> None:
        for i in range(t_max):
            back[a + i].append(b + i + 1)
        seeds.append(b)

    var_records = {x: new_record() for x in variables_of(program)}
    root_in = new_record()
    root_out = new_record()

    def expr(e, in_ref: int, out_ref: int) -> int:
        if isinstance(e, Var):
            return var_records[e.name]
        if isinstance(e, OpApp):
            spec = registry.lookup(e.op)
            rec = new_record()
            for arg in e.args:
                arec = expr(arg, in_ref, out_ref)
                leq(rec, arec)
                leq(arec, in_ref)
            if spec.arity == 0:
                leq(rec, in_ref)
            if isinstance(spec.classification, Positive):
                lt(rec, in_ref)
            return rec
        if isinstance(e, OracleCall):
            rec = new_record()
            eq(rec, expr(e.data, in_ref, out_ref))
            eq(expr(e.bound, in_ref, out_ref), out_ref)
            lt(rec, in_ref)
            leq(rec, out_ref)
            return rec
        raise TypeError(f"not an expression: {e!r}")

    def cmd(c, in_ref: int, out_ref: int, nested: bool) -> int:
        if isinstance(c, Skip):
            rec = new_record()
            pos_units.append(rec)
            return rec
        if isinstance(c, Assign):
            rec = var_records[c.target]
            leq(rec, expr(c.value, in_ref, out_ref))
            return rec
        if isinstance(c, Seq):
            rec = new_record()
            leq(cmd(c.first, in_ref, out_ref, nested), rec)
            leq(cmd(c.rest, in_ref, out_ref, nested), rec)
            return rec
        if isinstance(c, If):
            grec = expr(c.guard, in_ref, out_ref)
            leq(cmd(c.then, in_ref, out_ref, nested), grec)
            leq(cmd(c.orelse, in_ref, out_ref, nested), grec)
            return grec
        if isinstance(c, While):
            rec = new_record()
            seeds.append(rec)
            if nested or not outer_zero:
                bound_ref = out_ref
                leq(rec, bound_ref)
            else:
                bound_ref = rec
            eq(expr(c.guard, in_ref, bound_ref), rec)
            leq(cmd(c.body, rec, bound_ref, True), rec)
            return rec
        raise TypeError(f"not a command: {c!r}")

    cmd(program.body, root_in, root_out, False)
    if outer_zero:
        pos_units.append(root_out)
    else:
        seeds.append(root_out)

    false = bytearray(len(back))
    stack = seeds
    while stack:
        bit = stack.pop()
        if false[bit]:
            continue
        false[bit] = 1
        stack.extend(back[bit])
    return not any(false[u] for u in pos_units)


@dataclass(frozen=True)
class InferenceResult:
    """A typing found by inference, with solver bookkeeping."""

    gamma: dict[str, int]
    triple: tuple[int, int, int]
    derivation: object
    outer_zero: bool
    t_max: int
    clause_count: int
    num_bool_vars: int

    def to_json(self) -> dict:
        payload = {
            "typable": True,
            "gamma": dict(sorted(self.gamma.items())),
            "triple": list(self.triple),
            "t_max": self.t_max,
            "clauses": self.clause_count,
        }
        return payload


def infer(
    program: Program,
    *,
    t_max: int | None = None,
    registry: Registry | None = None,
    with_derivation: bool = True,
) -> InferenceResult | None:
    """Find a tier typing with pointwise least tiers, or None.

    Both encoding modes are tried, sealed outer channel first, so programs
    typable at outer tier 0 report that typing.  The result is re-checked by
    rebuilding and validating a full derivation unless `with_derivation` is
    switched off.
    """
    if registry is None:
        registry = builtin_registry()
    for outer_zero in (True, False):
        encoding = encode(
            program,
            t_max=t_max,
            registry=registry,
            outer_zero=outer_zero,
        )
        model = solve_2sat(encoding.clause_set)
        if model is None:
            continue
        solution = decode(encoding, model)
        derivation = None
        if with_derivation:
            from .tiers import check

            derivation = check(
                program,
                solution.var_tiers,
                solution.triple,
                registry=registry,
                t_max=encoding.t_max,
            )
            if derivation is None:
                raise AssertionError(
                    "inferred typing failed its own derivation check"
                )
        return InferenceResult(
            gamma=solution.var_tiers,
            triple=solution.triple,
            derivation=derivation,
            outer_zero=outer_zero,
            t_max=encoding.t_max,
            clause_count=len(encoding.clause_set),
            num_bool_vars=encoding.clause_set.num_vars,
        )
    return None
