"""MiniLang: a small statically typed imperative language with a tracing
interpreter."""

from .ast import NodeId, Program
from .errors import ParseError, TypeCheckError
from .interp import (
    DEFAULT_FUEL,
    ConditionOverrideSchedule,
    ExecTrace,
    FuelExhausted,
    Normal,
    PerOccurrence,
    RuntimeFault,
    Termination,
    TraceEvent,
    Uniform,
    execute,
    execute_with_overrides,
    run_quiet,
    values_equal,
)
from .parser import parse
from .printer import pretty_print, renumber

__all__ = [
    "DEFAULT_FUEL",
    "ConditionOverrideSchedule",
    "ExecTrace",
    "FuelExhausted",
    "NodeId",
    "Normal",
    "ParseError",
    "PerOccurrence",
    "Program",
    "RuntimeFault",
    "Termination",
    "TraceEvent",
    "TypeCheckError",
    "Uniform",
    "execute",
    "execute_with_overrides",
    "parse",
    "pretty_print",
    "renumber",
    "run_quiet",
    "values_equal",
]
