"""Repair strategies: greedy generate-and-validate (s1) and angelic guard
synthesis (s2)."""

from .guard import (
    AngelicWitness,
    Mode,
    NoAngelicValue,
    NoSynthesis,
    S2Config,
    SynthesisSpec,
    angelic_search,
    candidate_locations,
    collect_snapshots,
    s2_repair,
    synthesize_condition,
)
from .mutations import KINDS, MutationOperator, apply_mutation, enumerate_mutations, statement_mutations
from .result import STATUSES, FitnessState, Iteration, RepairResult, prepare_suite
from .search import S1Config, evaluate_fitness, s1_repair

__all__ = [
    "AngelicWitness",
    "FitnessState",
    "Iteration",
    "KINDS",
    "Mode",
    "MutationOperator",
    "NoAngelicValue",
    "NoSynthesis",
    "RepairResult",
    "S1Config",
    "S2Config",
    "STATUSES",
    "SynthesisSpec",
    "angelic_search",
    "apply_mutation",
    "candidate_locations",
    "collect_snapshots",
    "enumerate_mutations",
    "evaluate_fitness",
    "prepare_suite",
    "s1_repair",
    "s2_repair",
    "statement_mutations",
    "synthesize_condition",
]
