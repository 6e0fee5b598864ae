"""Tests, suite execution, purification, augmentation and differential checks."""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

from .minilang.ast import ARRAY, BOOL, INT, Program
from .minilang.interp import (
    DEFAULT_FUEL,
    ERROR_KINDS,
    ExecTrace,
    FuelExhausted,
    Normal,
    RuntimeFault,
    Termination,
    execute,
    run_quiet,
    value_type,
    values_equal,
)

log = logging.getLogger(__name__)

# -- values on the wire ---------------------------------------------------------


def value_to_json(v) -> dict:
    if isinstance(v, bool):
        return {"bool": v}
    if isinstance(v, int):
        return {"int": v}
    if isinstance(v, tuple):
        return {"array": list(v)}
    return {"unit": None}


def value_from_json(obj: dict):
    if "int" in obj:
        return int(obj["int"])
    if "bool" in obj:
        return bool(obj["bool"])
    if "array" in obj:
        return tuple(int(x) for x in obj["array"])
    if "unit" in obj:
        return None
    raise ValueError(f"not a value: {obj!r}")


def termination_to_json(t: Termination) -> dict:
    if isinstance(t, Normal):
        return value_to_json(t.value)
    if isinstance(t, RuntimeFault):
        return {"error": t.kind}
    return {"error": "FuelExhausted"}


# -- tests ------------------------------------------------------------------------


@dataclass(frozen=True)
class ExpectedError:
    kind: str


@dataclass(frozen=True)
class Assertion:
    fn: str
    args: tuple
    expect: Union[int, bool, tuple, None, ExpectedError]

    def accepts(self, t: Termination) -> bool:
        if isinstance(self.expect, ExpectedError):
            return isinstance(t, RuntimeFault) and t.kind == self.expect.kind
        return isinstance(t, Normal) and values_equal(t.value, self.expect)

    @property
    def key(self) -> tuple:
        return (self.fn, tuple((type(a).__name__, a) for a in self.args))

    def to_json(self) -> dict:
        if isinstance(self.expect, ExpectedError):
            expect = {"error": self.expect.kind}
        else:
            expect = value_to_json(self.expect)
        return {
            "call": {"fn": self.fn, "args": [value_to_json(a) for a in self.args]},
            "expect": expect,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Assertion":
        call = obj["call"]
        exp = obj["expect"]
        if "error" in exp:
            if exp["error"] not in ERROR_KINDS:
                raise ValueError(f"unknown error kind {exp['error']!r}")
            expect = ExpectedError(exp["error"])
        else:
            expect = value_from_json(exp)
        return cls(call["fn"], tuple(value_from_json(a) for a in call["args"]), expect)


@dataclass(frozen=True)
class TestCase:
    name: str
    assertions: tuple

    __test__ = False  # not a pytest class

    def __post_init__(self):
        if not self.assertions:
            raise ValueError(f"test {self.name} has no assertions")

    def to_json(self) -> dict:
        return {"name": self.name, "assertions": [a.to_json() for a in self.assertions]}

    @classmethod
    def from_json(cls, obj: dict) -> "TestCase":
        return cls(obj["name"], tuple(Assertion.from_json(a) for a in obj["assertions"]))


def load_tests(path: Union[str, Path]) -> list[TestCase]:
    data = json.loads(Path(path).read_text())
    return [TestCase.from_json(t) for t in data["tests"]]


def dump_tests(suite: Sequence[TestCase]) -> str:
    return json.dumps({"tests": [t.to_json() for t in suite]}, indent=2) + "\n"


def validate_suite(program: Program, suite: Iterable[TestCase]) -> None:
    """Raise ValueError when an assertion does not fit the program's signatures."""
    fns = {f.name: f for f in program.functions}
    for t in suite:
        for a in t.assertions:
            fn = fns.get(a.fn)
            if fn is None:
                raise ValueError(f"test {t.name} calls unknown function {a.fn}")
            if len(fn.params) != len(a.args):
                raise ValueError(f"test {t.name}: wrong arity for {a.fn}")
            for p, v in zip(fn.params, a.args):
                if value_type(v) != p.type:
                    raise ValueError(f"test {t.name}: argument {p.name} of {a.fn} must be {p.type}")


# -- running --------------------------------------------------------------------


@dataclass(frozen=True)
class TestResult:
    name: str
    passed: bool
    failed_index: Optional[int] = None
    observed: Optional[Termination] = None
    trace: Optional[ExecTrace] = None
    coverage: frozenset = field(default=frozenset(), repr=False)

    __test__ = False

    @property
    def status(self) -> str:
        return "Pass" if self.passed else "Fail"


@dataclass(frozen=True)
class SuiteReport:
    results: tuple
    executed: int = 0  # assertion executions

    @property
    def passing(self) -> int:
        return sum(r.passed for r in self.results)

    @property
    def failing(self) -> int:
        return len(self.results) - self.passing

    def failing_names(self) -> list[str]:
        return [r.name for r in self.results if not r.passed]

    def passing_names(self) -> list[str]:
        return [r.name for r in self.results if r.passed]

    def result(self, name: str) -> TestResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def all_pass(self) -> bool:
        return all(r.passed for r in self.results)


def run_test(program: Program, test: TestCase, fuel: int = DEFAULT_FUEL, traces: bool = True) -> tuple[TestResult, int]:
    """Run one test, stopping at its first failing assertion."""
    covered: set = set()
    for k, a in enumerate(test.assertions):
        if traces:
            term, trace = execute(program, a.fn, a.args, fuel)
            cov = trace.coverage()
        else:
            term, cov, _ = run_quiet(program, a.fn, a.args, fuel)
            trace = None
        covered |= cov
        if not a.accepts(term):
            return TestResult(test.name, False, k, term, trace, frozenset(covered)), k + 1
    return TestResult(test.name, True, coverage=frozenset(covered)), len(test.assertions)


def run_suite(
    program: Program,
    suite: Sequence[TestCase],
    fuel: int = DEFAULT_FUEL,
    traces: bool = True,
) -> SuiteReport:
    """Run every test in order. Runtime errors count as mismatches unless the
    assertion expects that error kind."""
    if not suite:
        raise ValueError("empty test suite")
    results = []
    executed = 0
    for t in suite:
        r, n = run_test(program, t, fuel, traces)
        results.append(r)
        executed += n
    return SuiteReport(tuple(results), executed)


def purify(suite: Sequence[TestCase]) -> list[TestCase]:
    """Split every test into one test per assertion, named ``<name>#k``.

    Assertions that an earlier failure would have masked now run on their own.
    """
    out = []
    for t in suite:
        for k, a in enumerate(t.assertions):
            out.append(TestCase(f"{t.name}#{k}", (a,)))
    return out


# -- input domains --------------------------------------------------------------


@dataclass(frozen=True)
class IntDomain:
    lo: int
    hi: int

    def sample(self, rng: random.Random) -> int:
        return rng.randint(self.lo, self.hi)

    def to_json(self) -> dict:
        return {"int": [self.lo, self.hi]}


@dataclass(frozen=True)
class BoolDomain:
    values: tuple = (False, True)

    def sample(self, rng: random.Random) -> bool:
        return self.values[rng.randrange(len(self.values))]

    def to_json(self) -> dict:
        if self.values == (False, True):
            return {"bool": True}
        return {"bool": list(self.values)}


@dataclass(frozen=True)
class ArrayDomain:
    min_len: int
    max_len: int
    lo: int
    hi: int

    def sample(self, rng: random.Random) -> tuple:
        n = rng.randint(self.min_len, self.max_len)
        return tuple(rng.randint(self.lo, self.hi) for _ in range(n))

    def to_json(self) -> dict:
        return {"array": {"len": [self.min_len, self.max_len], "int": [self.lo, self.hi]}}


Domain = Union[IntDomain, BoolDomain, ArrayDomain]
InputDomains = dict  # function name -> list of Domain, one per parameter

_DOMAIN_TYPES = {IntDomain: INT, BoolDomain: BOOL, ArrayDomain: ARRAY}


def domain_from_json(obj: dict) -> Domain:
    if "int" in obj:
        lo, hi = obj["int"]
        return IntDomain(int(lo), int(hi))
    if "bool" in obj:
        spec = obj["bool"]
        if spec is True:
            return BoolDomain()
        return BoolDomain(tuple(bool(x) for x in spec))
    if "array" in obj:
        spec = obj["array"]
        lo_len, hi_len = spec.get("len", [0, 4])
        lo, hi = spec.get("int", [-5, 5])
        return ArrayDomain(int(lo_len), int(hi_len), int(lo), int(hi))
    raise ValueError(f"not a domain: {obj!r}")


def domains_from_json(obj: dict) -> InputDomains:
    return {fn: [domain_from_json(d) for d in params] for fn, params in obj.items()}


def domains_to_json(domains: InputDomains) -> dict:
    return {fn: [d.to_json() for d in params] for fn, params in domains.items()}


def check_domains(program: Program, domains: InputDomains) -> None:
    for fn_name, params in domains.items():
        fn = program.function(fn_name)
        if len(fn.params) != len(params):
            raise ValueError(f"domains for {fn_name} do not cover every parameter")
        for p, d in zip(fn.params, params):
            if _DOMAIN_TYPES[type(d)] != p.type:
                raise ValueError(f"domain for {fn_name}.{p.name} has the wrong type")


def sample_args(domains: InputDomains, fn: str, rng: random.Random) -> tuple:
    return tuple(d.sample(rng) for d in domains[fn])


def same_outcome(a: Termination, b: Termination) -> bool:
    """Values must be equal; errors need only agree on their kind."""
    return a.matches(b)


def expectation(t: Termination):
    if isinstance(t, Normal):
        return t.value
    return ExpectedError(t.kind)


# -- augmentation -----------------------------------------------------------------


@dataclass
class AugmentReport:
    tests: list
    sampled: int = 0
    oracle_diverged: int = 0  # samples skipped because the oracle ran out of fuel


def augment_report(
    buggy: Program,
    oracle: Program,
    domains: InputDomains,
    budget: int = 500,
    max_new: int = 8,
    seed: int = 0,
    existing: Sequence[TestCase] = (),
    include_passing: bool = False,
    fuel: int = DEFAULT_FUEL,
) -> AugmentReport:
    check_domains(buggy, domains)
    check_domains(oracle, domains)
    rng = random.Random(seed)
    fns = sorted(domains)
    seen = {a.key for t in existing for a in t.assertions}
    report = AugmentReport([])
    if not fns:
        return report
    for i in range(budget):
        if len(report.tests) >= max_new:
            break
        fn = fns[i % len(fns)]
        args = sample_args(domains, fn, rng)
        report.sampled += 1
        key = Assertion(fn, args, None).key
        if key in seen:
            continue
        seen.add(key)
        expected, _, _ = run_quiet(oracle, fn, args, fuel)
        if isinstance(expected, FuelExhausted):
            report.oracle_diverged += 1
            continue
        observed, _, _ = run_quiet(buggy, fn, args, fuel)
        if same_outcome(observed, expected) and not include_passing:
            continue
        name = f"aug_{fn}_{len(report.tests)}"
        report.tests.append(TestCase(name, (Assertion(fn, args, expectation(expected)),)))
    if report.oracle_diverged:
        log.warning("augment: oracle diverged on %d samples", report.oracle_diverged)
    return report


def augment(
    buggy: Program,
    oracle: Program,
    domains: InputDomains,
    budget: int = 500,
    max_new: int = 8,
    seed: int = 0,
    **kwargs,
) -> list[TestCase]:
    """Random tests, labeled by ``oracle``, on which ``buggy`` disagrees.

    Inputs already exercised by ``existing`` tests are not generated again.
    """
    return augment_report(buggy, oracle, domains, budget, max_new, seed, **kwargs).tests


# -- differential checking -----------------------------------------------------------


@dataclass(frozen=True)
class Equivalent:
    trials: int

    def __bool__(self) -> bool:
        return True


@dataclass(frozen=True)
class CounterExample:
    fn: str
    args: tuple
    candidate: Termination
    reference: Termination

    def __bool__(self) -> bool:
        return False


def differential_check(
    candidate: Program,
    reference: Program,
    domains: InputDomains,
    trials: int = 1000,
    seed: int = 0,
    fuel: int = DEFAULT_FUEL,
) -> Union[Equivalent, CounterExample]:
    """Compare two programs on ``trials`` seeded random inputs per function."""
    check_domains(candidate, domains)
    check_domains(reference, domains)
    rng = random.Random(seed)
    for fn in sorted(domains):
        for _ in range(trials):
            args = sample_args(domains, fn, rng)
            ref, _, _ = run_quiet(reference, fn, args, fuel)
            got, _, _ = run_quiet(candidate, fn, args, fuel)
            if not same_outcome(got, ref):
                return CounterExample(fn, args, got, ref)
    return Equivalent(trials)
