import math
import random
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from mlrepair.faultloc import (
    EPC,
    Counts,
    NoChain,
    RankEntry,
    Ranking,
    Spectrum,
    chains_for,
    collect_spectrum,
    compute_epc,
    epc_intersections,
    line_assumption,
    localize,
    merge_intersections_into_ranking,
    ochiai_score,
    rank,
)
from mlrepair.harness import load_bug, load_corpus
from mlrepair.minilang import NodeId, execute, parse
from mlrepair.patchmodel import PatchClass
from mlrepair.repair import prepare_suite
from mlrepair.testkit import run_suite

CORPUS = Path(__file__).resolve().parents[1] / "corpus"


def n(i, fn="f"):
    return NodeId(fn, i)


def reference_ochiai(ef, ep, F):
    # written against the cosine form: |A∩B| / sqrt(|A|·|B|)
    if ef == 0:
        return 0.0
    return ef / ((F ** 0.5) * ((ef + ep) ** 0.5))


def test_ochiai_examples():
    assert abs(ochiai_score(2, 0, 2) - 1.0) < 1e-12
    assert abs(ochiai_score(1, 1, 2) - 0.5) < 1e-12
    assert abs(ochiai_score(0, 5, 2) - 0.0) < 1e-12
    assert ochiai_score(0, 0, 3) == 0.0


@given(st.integers(1, 50), st.integers(0, 50), st.integers(0, 50))
def test_ochiai_bounds_and_monotonicity(F, ef, ep):
    ef = min(ef, F)
    s = ochiai_score(ef, ep, F)
    assert 0.0 <= s <= 1.0
    if ef < F:
        assert ochiai_score(ef + 1, ep, F) > s
    if ef > 0:
        assert ochiai_score(ef, ep + 1, F) < s


def synthetic_spectrum(seed=7):
    rng = random.Random(seed)
    F, P = 4, 6
    counts, lines = {}, {}
    for i in range(10):
        ef, ep = rng.randint(0, F), rng.randint(0, P)
        counts[n(i)] = Counts(ef, ep, F - ef, P - ep)
        lines[n(i)] = i + 2
    return Spectrum(counts, F, P, lines)


def test_score_table_matches_reference():
    spec = synthetic_spectrum()
    ranking = rank(spec)
    table = {e.node: e.score for e in ranking}
    for nid, c in spec.counts.items():
        if c.ef + c.ep == 0:
            assert nid not in table
        else:
            assert abs(table[nid] - reference_ochiai(c.ef, c.ep, spec.failing)) < 1e-12
    keys = [(-e.score, e.line, e.fn) for e in ranking]
    assert keys == sorted(keys)


def test_rank_examples():
    spec = Spectrum({n(0): Counts(1, 3, 0, 0), n(1): Counts(1, 0, 0, 3)}, 1, 3, {n(0): 2, n(1): 5})
    r = rank(spec)
    assert [e.node for e in r] == [n(1), n(0)]
    assert [e.score for e in r] == [1.0, 0.5]
    tie = Spectrum({n(0): Counts(1, 1, 0, 0), n(1): Counts(1, 1, 0, 0)}, 1, 1, {n(0): 9, n(1): 4})
    assert [e.line for e in rank(tie)] == [4, 9]
    with pytest.raises(ValueError):
        rank(Spectrum({}, 0, 1, {}))


def test_spectrum_trivial_cases():
    p = parse("fn f(a: int) -> int { let b: int = a; return b; }")
    from mlrepair.testkit import Assertion, TestCase

    ok = TestCase("ok", (Assertion("f", (1,), 1),))
    bad = TestCase("bad", (Assertion("f", (1,), 2),))
    s = collect_spectrum(p, [ok])
    assert all((c.ef, c.ep) == (0, 1) for c in s.counts.values())
    s = collect_spectrum(p, [ok, bad])
    assert all((c.ef, c.ep, c.nf, c.np) == (1, 1, 0, 0) for c in s.counts.values())


@pytest.mark.parametrize("bug", load_corpus(CORPUS), ids=lambda b: b.id)
def test_spectrum_recount(bug):
    spec = collect_spectrum(bug.buggy, bug.suite)
    ef, ep = {}, {}
    for t in bug.suite:
        covered, passed = set(), True
        for a in t.assertions:
            term, trace = execute(bug.buggy, a.fn, a.args)
            covered |= {e.node_id for e in trace.events}
            if not a.accepts(term):
                passed = False
                break
        for nid in covered:
            bucket = ep if passed else ef
            bucket[nid] = bucket.get(nid, 0) + 1
    for nid, c in spec.counts.items():
        assert (c.ef, c.ep) == (ef.get(nid, 0), ep.get(nid, 0))
        assert c.ef + c.nf == spec.failing and c.ep + c.np == spec.passing


def test_twin_guard_defects_are_covered_by_failing_tests():
    bug = load_bug(CORPUS / "twin_guard")
    suite = prepare_suite(bug, True, True, 0)
    spec = collect_spectrum(bug.buggy, suite)
    for fn, line in bug.faulty_lines:
        assert spec[bug.buggy.stmt_at(fn, line).nid].ef >= 1


def test_dup_flag_faulty_lines_rank_high():
    bug = load_bug(CORPUS / "dup_flag")
    ranking = localize(bug.buggy, bug.suite)
    top = {(e.fn, e.line) for e in ranking[:20]}
    assert set(bug.faulty_lines) <= top


# -- chains --

STRAIGHT = """
fn f(x: int) -> int {
  let a: int = x;
  let b: int = a + 1;
  return b;
}
"""


def test_epc_straight_line():
    p = parse(STRAIGHT)
    stmts = list(p.statements())
    _, trace = execute(p, "f", (1,))
    epc = compute_epc(p, trace, stmts[0].nid, "t")
    assert epc.chain == tuple(s.nid for s in stmts)
    assert compute_epc(p, trace, stmts[-1].nid).chain == (stmts[-1].nid,)


def test_epc_no_chain():
    p = parse("""
fn f(x: int) -> int {
  let a: int = 5;
  let b: int = x;
  return b;
}
""")
    stmts = list(p.statements())
    _, trace = execute(p, "f", (1,))
    with pytest.raises(NoChain):
        compute_epc(p, trace, stmts[0].nid)


def check_chain(epc, trace):
    events = trace.events
    assert epc.chain[0] == epc.seed
    assert epc.chain[-1] == events[-1].node_id
    assert events[epc.steps[0]].node_id == epc.seed and epc.steps[-1] == len(events) - 1
    for a, b in zip(epc.steps, epc.steps[1:]):
        assert a in events[b].deps or events[b].ctrl == a
    executed = trace.coverage()
    assert set(epc.chain) <= executed


def test_dup_flag_chain_reaches_late_conditional():
    bug = load_bug(CORPUS / "dup_flag")
    report = run_suite(bug.buggy, bug.suite)
    seed = bug.buggy.stmt_at("add_or_update", 8).nid
    late = bug.buggy.stmt_at("add_or_update", 11).nid
    chains = chains_for(bug.buggy, report, [seed])
    assert chains
    for c in chains:
        check_chain(c, report.result(c.run).trace)
        assert late in c.chain


@pytest.mark.parametrize("bug", load_corpus(CORPUS), ids=lambda b: b.id)
def test_chain_invariants_on_corpus(bug):
    report = run_suite(bug.buggy, bug.suite)
    for r in report.results:
        if r.passed:
            continue
        for nid in sorted(r.trace.coverage()):
            try:
                epc = compute_epc(bug.buggy, r.trace, nid, r.name)
            except NoChain:
                continue
            check_chain(epc, r.trace)


def test_intersections():
    a = EPC(n(0), "t", (n(0), n(1), n(2)))
    b = EPC(n(1), "t", (n(1), n(2), n(3)))
    c = EPC(n(5), "t", (n(5), n(6)))
    assert epc_intersections([a, b]) == {n(1), n(2)}
    assert epc_intersections([a, c]) == set()
    with pytest.raises(ValueError):
        epc_intersections([a])


def relevant_bugs():
    return [b for b in load_corpus(CORPUS) if b.expected_class == PatchClass.RELEVANT]


@pytest.mark.parametrize("bug", relevant_bugs(), ids=lambda b: b.id)
def test_relevant_bugs_have_chain_intersections(bug):
    report = run_suite(bug.buggy, bug.suite)
    seeds = [bug.buggy.stmt_at(fn, line).nid for fn, line in bug.faulty_lines]
    chains = chains_for(bug.buggy, report, seeds)
    by_run = {}
    for c in chains:
        by_run.setdefault(c.run, []).append(c)
    hits = [run for run, cs in by_run.items()
            if len({c.seed for c in cs}) >= 2 and epc_intersections(cs)]
    assert hits


# -- merging and Line_Assumption --


def entries(*triples):
    return Ranking(RankEntry(n(i), line, s) for i, line, s in triples)


def test_merge_noop_when_intersections_already_listed():
    r = entries((0, 2, 0.9), (1, 3, 0.8), (2, 4, 0.7))
    chains = [EPC(n(0), "t", (n(0), n(1))), EPC(n(1), "t", (n(1),))]
    assert merge_intersections_into_ranking(r, 3, chains) == r


def test_merge_inserts_with_contributor_score():
    p = parse(STRAIGHT)
    stmts = list(p.statements())
    s = [x.nid for x in stmts]
    r = Ranking([RankEntry(s[0], stmts[0].line, 0.8), RankEntry(s[1], stmts[1].line, 0.3)])
    chains = [EPC(s[0], "t", (s[0], s[2])), EPC(s[1], "t", (s[1], s[2]))]
    merged = merge_intersections_into_ranking(r, 2, chains, p)
    assert [(e.node, e.score) for e in merged] == [(s[0], 0.8), (s[2], 0.8), (s[1], 0.3)]
    assert merged[1].line == stmts[2].line == 4
    with pytest.raises(ValueError):
        merge_intersections_into_ranking(r, 0, chains)


def test_merge_on_dup_flag_reaches_late_conditional():
    bug = load_bug(CORPUS / "dup_flag")
    report = run_suite(bug.buggy, bug.suite)
    ranking = line_assumption(localize(bug.buggy, bug.suite, report=report), bug.faulty_lines, bug.buggy)
    k = 2
    chains = chains_for(bug.buggy, report, ranking.nodes()[:k])
    merged = merge_intersections_into_ranking(ranking, k, chains, bug.buggy)
    late = bug.buggy.stmt_at("add_or_update", 11).nid
    assert merged.position(late) is not None and merged.position(late) <= 20


def test_line_assumption():
    r = entries((0, 2, 0.9), (1, 5, 0.8), (2, 7, 0.1))
    assert line_assumption(r, []) == r
    head = line_assumption(r, [("f", 2), ("f", 5)])
    assert [(e.node, e.score) for e in head] == [(n(0), 1.0), (n(1), 1.0), (n(2), 0.1)]
    moved = line_assumption(r, [("f", 7), ("f", 5)])
    assert [e.node for e in moved] == [n(1), n(2), n(0)]


def test_line_assumption_adds_unexecuted_lines():
    p = parse("""
fn f(x: int) -> int {
  if (x > 100) {
    return 0;
  }
  return x;
}
""")
    r = Ranking([RankEntry(s.nid, s.line, 0.5) for s in p.statements() if s.line != 3])
    out = line_assumption(r, [("f", 3)], p)
    assert out[0].line == 3 and out[0].score == 1.0 and len(out) == len(r) + 1
    with pytest.raises(ValueError):
        line_assumption(r, [("f", 99)], p)


def test_ranking_export_shape():
    bug = load_bug(CORPUS / "single_a")
    data = localize(bug.buggy, bug.suite).to_json()
    assert data and set(data[0]) == {"fn", "line", "node", "score"}
    assert math.isclose(max(d["score"] for d in data), data[0]["score"])
