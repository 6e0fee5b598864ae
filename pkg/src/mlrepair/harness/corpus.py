"""Bug corpus format, loading and statistics."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal
from pathlib import Path
from typing import Union

from ..minilang import ParseError, Program, parse
from ..patchmodel import PatchClass, ast_diff, classify
from ..testkit import InputDomains, check_domains, domains_from_json, load_tests, run_suite, validate_suite

FILES = ("program.ml", "fixed.ml", "tests.json", "meta.json")


class CorpusError(Exception):
    """A bug directory violates the corpus format or one of its invariants."""


_LABELS = {c.value.lower(): c for c in PatchClass}


def parse_label(text: str) -> PatchClass:
    key = text.replace("_", "").replace("-", "").replace(" ", "").lower()
    if key not in _LABELS:
        raise CorpusError(f"unknown patch class {text!r}")
    return _LABELS[key]


@dataclass(frozen=True)
class BugMeta:
    expected_class: PatchClass
    faulty_lines: tuple  # (function, line) pairs in the buggy program
    domains: InputDomains = field(hash=False)
    notes: str = ""


@dataclass(frozen=True)
class BugEntry:
    id: str
    buggy: Program
    fixed: Program
    suite: tuple
    meta: BugMeta

    @property
    def domains(self) -> InputDomains:
        return self.meta.domains

    @property
    def faulty_lines(self) -> tuple:
        return self.meta.faulty_lines

    @property
    def expected_class(self) -> PatchClass:
        return self.meta.expected_class

    def ground_truth(self):
        return ast_diff(self.buggy, self.fixed)


def _parse_file(path: Path) -> Program:
    try:
        return parse(path.read_text())
    except ParseError as e:
        raise CorpusError(f"{path.name}: {e}") from e


def load_bug(directory: Union[str, Path], check: bool = True) -> BugEntry:
    d = Path(directory)
    if not d.is_dir():
        raise CorpusError(f"{d} is not a directory")
    for name in FILES:
        if not (d / name).is_file():
            raise CorpusError(f"{d.name}: missing {name}")
    buggy = _parse_file(d / "program.ml")
    fixed = _parse_file(d / "fixed.ml")
    try:
        suite = tuple(load_tests(d / "tests.json"))
        raw = json.loads((d / "meta.json").read_text())
        meta = BugMeta(
            parse_label(raw["expected_class"]),
            tuple((x["fn"], int(x["line"])) for x in raw.get("faulty_lines", [])),
            domains_from_json(raw.get("domains", {})),
            raw.get("notes", ""),
        )
        bug_id = raw.get("id", d.name)
    except (KeyError, ValueError, TypeError) as e:
        raise CorpusError(f"{d.name}: malformed corpus file: {e}") from e
    bug = BugEntry(bug_id, buggy, fixed, suite, meta)
    if check:
        check_bug(bug)
    return bug


def check_bug(bug: BugEntry) -> None:
    """Raise CorpusError naming the first violated invariant."""
    try:
        validate_suite(bug.buggy, bug.suite)
        validate_suite(bug.fixed, bug.suite)
        check_domains(bug.buggy, bug.domains)
        check_domains(bug.fixed, bug.domains)
    except (ValueError, KeyError) as e:
        raise CorpusError(f"{bug.id}: {e}") from e
    for fn, line in bug.faulty_lines:
        if bug.buggy.stmt_at(fn, line) is None:
            raise CorpusError(f"{bug.id}: faulty line {fn}:{line} is not a statement")
    if not run_suite(bug.fixed, bug.suite, traces=False).all_pass:
        raise CorpusError(f"{bug.id}: fixed program fails its suite")
    if run_suite(bug.buggy, bug.suite, traces=False).all_pass:
        raise CorpusError(f"{bug.id}: buggy program passes its suite")
    verdict = classify(bug.ground_truth(), bug.buggy)
    if verdict != bug.expected_class:
        raise CorpusError(f"{bug.id}: label {bug.expected_class} but the patch classifies as {verdict}")


def bug_dirs(corpus_dir: Union[str, Path]) -> list[Path]:
    root = Path(corpus_dir)
    if not root.is_dir():
        raise CorpusError(f"{root} is not a directory")
    return sorted(p for p in root.iterdir() if (p / "meta.json").is_file())


def load_corpus(corpus_dir: Union[str, Path]) -> list[BugEntry]:
    return [load_bug(p) for p in bug_dirs(corpus_dir)]


def percentage(count: int, total: int) -> float:
    """count/total as a percentage, rounded half-up to 2 decimals."""
    if total <= 0:
        raise ValueError("total must be positive")
    exact = Decimal(count) * 100 / Decimal(total)
    return float(exact.quantize(Decimal("0.01"), rounding=ROUND_HALF_UP))


@dataclass(frozen=True)
class StatRow:
    cls: PatchClass
    count: int
    percentage: float

    def to_json(self) -> dict:
        return {"class": self.cls.value, "count": self.count, "percentage": self.percentage}


def stats(corpus_dir: Union[str, Path]) -> list[StatRow]:
    bugs = load_corpus(corpus_dir)
    if not bugs:
        raise CorpusError("empty corpus")
    counts = dict.fromkeys(PatchClass, 0)
    for bug in bugs:
        counts[classify(bug.ground_truth(), bug.buggy)] += 1
    return [StatRow(c, n, percentage(n, len(bugs))) for c, n in counts.items()]


def format_stats(rows: list[StatRow]) -> str:
    lines = [f"{'class':<16}{'count':>6}{'share':>9}"]
    for r in rows:
        lines.append(f"{r.cls.value:<16}{r.count:>6}{r.percentage:>8.2f}%")
    return "\n".join(lines)
