"""STRIPS-subset PDDL: model types, parsing, serialization, semantics."""

from .model import (
    ActionSchema,
    Atom,
    DomainModel,
    GroundAction,
    ModelError,
    Plan,
    PlanStep,
    PredicateSchema,
    ProblemInstance,
    State,
    atom_sort_key,
    make_state,
)
from .parser import ParseError, parse, parse_domain, parse_plan, parse_problem
from .semantics import (
    RELAXATION_ORDER,
    GroundTask,
    Inapplicable,
    RelaxationMode,
    all_ground_actions,
    ground,
    step,
)
from .writer import serialize, serialize_domain, serialize_plan, serialize_problem

__all__ = [
    "ActionSchema",
    "Atom",
    "DomainModel",
    "GroundAction",
    "GroundTask",
    "Inapplicable",
    "ModelError",
    "ParseError",
    "Plan",
    "PlanStep",
    "PredicateSchema",
    "ProblemInstance",
    "RELAXATION_ORDER",
    "RelaxationMode",
    "State",
    "all_ground_actions",
    "atom_sort_key",
    "ground",
    "make_state",
    "parse",
    "parse_domain",
    "parse_plan",
    "parse_problem",
    "serialize",
    "serialize_domain",
    "serialize_plan",
    "serialize_problem",
    "step",
]
