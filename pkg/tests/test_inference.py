"""Constraint compiler and 2-SAT solver tests.

The solver is cross-checked against exhaustive assignment search on small
random instances, and the fused verdict path against the clause pipeline
on random programs.
"""

import itertools
import random

import pytest
from hypothesis import given, settings

from tierlang.inference import (
    ClauseSet,
    decode,
    encode,
    infer,
    solve_2sat,
    to_dimacs,
    typable,
)
from tierlang.syntax import parse, program_size

from .strategies import programs


def brute_sat(clause_set: ClauseSet):
    n = clause_set.num_vars
    for bits in itertools.product([False, True], repeat=n):
        model = list(bits)
        if all(
            any(model[abs(l) - 1] == (l > 0) for l in clause)
            for clause in clause_set.clauses
        ):
            yield model


def random_instance(rng, implicational: bool) -> ClauseSet:
    n = rng.randint(1, 8)
    cs = ClauseSet(num_vars=n)
    for _ in range(rng.randint(0, 14)):
        if implicational and rng.random() < 0.8:
            a, b = rng.randint(1, n), rng.randint(1, n)
            cs.add(a, -b)
        elif rng.random() < 0.25:
            cs.add(rng.choice([1, -1]) * rng.randint(1, n))
        else:
            a = rng.choice([1, -1]) * rng.randint(1, n)
            b = rng.choice([1, -1]) * rng.randint(1, n)
            cs.add(a, b)
    return cs


@pytest.mark.parametrize("implicational", [True, False])
def test_solver_agrees_with_exhaustive_search(implicational):
    rng = random.Random(7 if implicational else 8)
    for trial in range(300):
        cs = random_instance(rng, implicational)
        models = list(brute_sat(cs))
        got = solve_2sat(cs)
        if not models:
            assert got is None, f"trial {trial}: solver found a bogus model"
        else:
            assert got is not None, f"trial {trial}: solver missed all models"
            assert got in models


def test_implicational_instances_get_the_greatest_model():
    rng = random.Random(9)
    checked = 0
    for _ in range(300):
        cs = random_instance(rng, True)
        if any(len(c) == 2 and (c[0] > 0) == (c[1] > 0) for c in cs.clauses):
            continue  # mixed-sign 2-clauses only on this path
        got = solve_2sat(cs)
        if got is None:
            continue
        for model in brute_sat(cs):
            assert all(not m or g for m, g in zip(model, got))
        checked += 1
    assert checked > 50


def test_unit_conflict_is_unsat():
    cs = ClauseSet(num_vars=1)
    cs.add(1)
    cs.add(-1)
    assert solve_2sat(cs) is None


def test_empty_instance_is_sat():
    assert solve_2sat(ClauseSet(num_vars=3)) == [True, True, True]


ADD_SRC = """
while (gt0(x)) { x := pred(x); y := suc1(y) }
return y
"""

BLOWUP_SRC = """
while (gt0(x)) { x := pred(x); y := suc1(suc1(y)); x := maxlen(x, y) }
return y
"""


def test_add_infers_minimal_typing():
    result = infer(parse(ADD_SRC))
    assert result is not None
    assert result.gamma == {"x": 1, "y": 0}
    assert result.triple == (1, 1, 0)
    assert result.outer_zero


def test_growing_loop_is_untypable():
    p = parse(BLOWUP_SRC)
    assert infer(p) is None
    assert not typable(p)


def test_corpus_verdicts_and_typings(corpus):
    for entry in corpus.values():
        result = infer(entry.program(), t_max=entry.t_max)
        if entry.typable:
            assert result is not None, entry.name
            assert result.gamma == entry.gamma, entry.name
            assert result.triple == entry.triple, entry.name
        else:
            assert result is None, entry.name


def test_tier_budget_can_squeeze_out_typings(corpus):
    p = corpus["three_tiers"].program()
    assert infer(p, t_max=2) is not None
    assert infer(p, t_max=1) is None
    assert typable(p, t_max=2) and not typable(p, t_max=1)


def test_shared_bound_needs_open_outer_channel(corpus):
    result = infer(corpus["shared_bound"].program())
    assert result is not None
    assert not result.outer_zero
    assert result.triple[2] >= 1


def test_pinned_gamma_changes_the_verdict():
    p = parse(ADD_SRC)
    enc = encode(p, gamma={"x": 1, "y": 0}, triple=(1, 1, 0))
    assert solve_2sat(enc.clause_set) is not None
    enc = encode(p, gamma={"x": 0, "y": 0}, triple=(1, 1, 0))
    assert solve_2sat(enc.clause_set) is None


def test_decode_reports_node_and_var_tiers():
    p = parse(ADD_SRC)
    enc = encode(p)
    model = solve_2sat(enc.clause_set)
    sol = decode(enc, model)
    assert sol.var_tiers == {"x": 1, "y": 0}
    assert sol.triple == (1, 1, 0)
    assert () in sol.node_tiers  # root command path


def test_infer_result_json_shape():
    doc = infer(parse(ADD_SRC)).to_json()
    assert doc["typable"] is True
    assert doc["gamma"] == {"x": 1, "y": 0}
    assert doc["triple"] == [1, 1, 0]


def test_dimacs_header_matches_instance():
    enc = encode(parse(ADD_SRC))
    text = to_dimacs(enc)
    lines = text.splitlines()
    header = next(l for l in lines if l.startswith("p cnf"))
    _, _, nvars, nclauses = header.split()
    assert int(nvars) == enc.clause_set.num_vars
    body = [l for l in lines if l and not l.startswith(("c", "p"))]
    assert len(body) == int(nclauses) == len(enc.clause_set.clauses)
    assert all(l.endswith(" 0") for l in body)


def test_clause_growth_is_quadratic_at_worst(corpus):
    # clause count stays within 50 * n^2 * t_max across the whole corpus
    for entry in corpus.values():
        p = entry.program()
        enc = encode(p, t_max=entry.t_max)
        n = program_size(p)
        t = entry.t_max if entry.t_max is not None else n
        assert len(enc.clause_set.clauses) <= 50 * n * n * t, entry.name


@given(programs(allow_oracle=True))
@settings(max_examples=120)
def test_fast_verdict_matches_clause_pipeline(p):
    expected = infer(p, with_derivation=False) is not None
    assert typable(p) == expected


def test_inference_scales_down_with_explicit_t_max():
    p = parse(ADD_SRC)
    small = infer(p, t_max=2)
    assert small is not None and small.gamma == {"x": 1, "y": 0}
