import json
import random
from pathlib import Path

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mlrepair.minilang import (
    FuelExhausted,
    Normal,
    ParseError,
    PerOccurrence,
    RuntimeFault,
    TypeCheckError,
    Uniform,
    execute,
    execute_with_overrides,
    parse,
    pretty_print,
    run_quiet,
)
from mlrepair.minilang.ast import If, While, child_blocks
from progen import random_args, random_program, random_source

CORPUS = Path(__file__).resolve().parents[1] / "corpus"
CORPUS_FILES = sorted(CORPUS.glob("*/*.ml"))

MAX3 = """
fn max3(a: int, b: int, c: int) -> int {
  let m: int = a;
  if (b > m) { m = b; }
  if (c > m) { m = c; }
  return m;
}
"""


def lines_of(program):
    return [(s.nid, s.line) for s in program.statements()]


def test_minimal_program():
    p = parse("fn id(x: int) -> int { return x; }")
    assert p.function_names() == ["id"]
    assert len(list(p.statements())) == 1


def test_undeclared_variable():
    with pytest.raises(TypeCheckError, match="undeclared variable y"):
        parse("fn f() -> int { return y; }")


@pytest.mark.parametrize("src,msg", [
    ("fn f( -> int {}", "expected identifier"),
    ("fn f() -> int { let x: int = 1; }", "missing return"),
    ("fn f() -> int { return true; }", "type mismatch"),
    ("fn f(a: int[]) -> bool { return a; }", "type mismatch"),
])
def test_parse_errors_carry_position(src, msg):
    with pytest.raises(ParseError, match=msg) as info:
        parse(src)
    assert info.value.line >= 1


def test_twin_guard_has_two_functions():
    p = parse((CORPUS / "twin_guard" / "program.ml").read_text())
    assert len(p.functions) == 2
    tests = json.loads((CORPUS / "twin_guard" / "tests.json").read_text())["tests"]
    called = {a["call"]["fn"] for t in tests for a in t["assertions"]}
    assert called <= set(p.function_names())


def test_canonical_layout():
    text = pretty_print(parse("fn id(x: int) -> int{return x;}"))
    assert text.splitlines() == ["fn id(x: int) -> int {", "  return x;", "}"]


@pytest.mark.parametrize("path", CORPUS_FILES, ids=lambda p: f"{p.parent.name}/{p.name}")
def test_corpus_roundtrip(path):
    p = parse(path.read_text())
    text = pretty_print(p)
    assert text == path.read_text()  # the corpus is stored canonically
    q = parse(text)
    assert q == p and lines_of(q) == lines_of(p)
    assert pretty_print(q) == text


def test_statement_lines_match_text():
    p = parse(MAX3)
    text = pretty_print(p).splitlines()
    for s in p.statements():
        assert text[s.line - 1].strip().split(" ")[0] in {"let", "if", "m", "return"}


def test_max3():
    term, _ = execute(parse(MAX3), "max3", (1, 2, 3))
    assert term == Normal(3)


def test_div_by_zero():
    p = parse("fn div(a: int, b: int) -> int { return a / b; }")
    term, trace = execute(p, "div", (1, 0))
    assert isinstance(term, RuntimeFault) and term.kind == "DivByZero"
    assert term.node_id == trace.events[-1].node_id


def test_index_out_of_bounds_and_abort():
    p = parse("""
fn get(a: int[], i: int) -> int { return a[i]; }
fn stop() -> int { abort("no"); }
""")
    assert execute(p, "get", ((1, 2), 2))[0].kind == "IndexOutOfBounds"
    term = execute(p, "stop", ())[0]
    assert term.kind == "Abort" and term.message == "no"


def test_fuel_exhaustion():
    p = parse("fn loop_forever() -> int { while (true) { } return 0; }")
    term, _ = execute(p, "loop_forever", (), fuel=100)
    assert isinstance(term, FuelExhausted)


def test_empty_schedule_is_identity():
    p = parse(MAX3)
    assert execute_with_overrides(p, "max3", (3, 1, 2), {}) == execute(p, "max3", (3, 1, 2))


def test_per_occurrence_falls_through():
    p = parse("""
fn count(n: int) -> int {
  let i: int = 0;
  while (i < n) { i = i + 1; }
  return i;
}
""")
    guard = next(s for s in p.statements() if isinstance(s, While))
    term, trace = execute_with_overrides(p, "count", (0,), {guard.nid: PerOccurrence((True,))}, fuel=10)
    assert term == Normal(1)
    outcomes = [(e.branch_outcome, e.real_outcome, e.forced) for e in trace.events if e.kind == "branch"]
    assert outcomes == [(True, False, True), (False, False, False)]


def test_uniform_override_records_real_outcome():
    p = parse(MAX3)
    first = next(s for s in p.statements() if isinstance(s, If))
    term, trace = execute_with_overrides(p, "max3", (1, 5, 0), {first.nid: Uniform(False)})
    assert term == Normal(1)
    ev = next(e for e in trace.events if e.node_id == first.nid)
    assert ev.branch_outcome is False and ev.real_outcome is True and ev.forced


def test_dup_flag_angelic_witness():
    from mlrepair.harness import load_bug

    bug = load_bug(CORPUS / "dup_flag")
    # the late conditional on the insertion path
    guard = bug.buggy.stmt_at("add_or_update", 11)
    assert isinstance(guard, If) and pretty_print(bug.buggy).splitlines()[10].strip() == "if (sorted) {"
    failing = [t for t in bug.suite if not all(
        a.accepts(execute(bug.buggy, a.fn, a.args)[0]) for a in t.assertions)]
    assert failing
    for t in failing:
        for a in t.assertions:
            term, _ = execute_with_overrides(bug.buggy, a.fn, a.args, {guard.nid: Uniform(False)})
            assert a.accepts(term)


# -- properties over random programs --


def parents(program):
    """Map each statement id to its enclosing guard's id (or None)."""
    out = {}

    def walk(block, owner):
        for s in block:
            out[s.nid] = owner
            for sub in child_blocks(s):
                walk(sub, s.nid)

    for fn in program.functions:
        walk(fn.body, None)
    return out


def check_trace(program, trace):
    index = program.node_index()
    owner = parents(program)
    for i, e in enumerate(trace.events):
        assert e.step == i
        assert e.node_id in index
        assert (e.kind == "branch") == (e.branch_outcome is not None)
        assert isinstance(index[e.node_id], (If, While)) or e.kind == "stmt"
        assert all(d < i for d in e.deps)
        if owner[e.node_id] is not None:
            # the governing branch event is an execution of the enclosing guard
            assert e.ctrl is not None and e.ctrl < i
            gov = trace.events[e.ctrl]
            assert gov.kind == "branch" and gov.node_id == owner[e.node_id]
    if isinstance(trace.termination, RuntimeFault):
        assert trace.termination.node_id == trace.events[-1].node_id


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 10**9))
def test_roundtrip_random(seed):
    p = random_program(seed)
    text = pretty_print(p)
    q = parse(text)
    assert q == p and lines_of(q) == lines_of(p)
    assert pretty_print(q) == text
    assert len({n.nid for n in p.nodes()}) == sum(1 for _ in p.nodes())


@settings(max_examples=1000, deadline=None)
@given(st.integers(0, 10**9))
def test_override_neutrality_and_determinism_random(seed):
    p = random_program(seed)
    rng = random.Random(seed)
    for fn in p.function_names():
        args = random_args(p, fn, rng)
        plain = execute(p, fn, args, 3000)
        assert execute_with_overrides(p, fn, args, {}, 3000) == plain
        assert execute(p, fn, args, 3000) == plain
        quiet, cov, _ = run_quiet(p, fn, args, 3000)
        assert quiet == plain[0] and cov == plain[1].coverage()
        check_trace(p, plain[1])


def test_override_neutrality_on_corpus_tests():
    from mlrepair.harness import load_bug

    for d in sorted(CORPUS.iterdir()):
        bug = load_bug(d, check=False)
        for prog in (bug.buggy, bug.fixed):
            for t in bug.suite:
                for a in t.assertions:
                    plain = execute(prog, a.fn, a.args)
                    assert execute_with_overrides(prog, a.fn, a.args, {}) == plain
                    check_trace(prog, plain[1])


def test_generator_is_seeded():
    assert random_source(11) == random_source(11)
