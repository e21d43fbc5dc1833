"""Canonical PDDL serialization.

Declaration order is preserved; atom sets are emitted sorted by
(predicate, args) so repeated serialization is byte-stable and
``parse(serialize(x))`` is structurally equal to ``x``.
"""

from __future__ import annotations

from .model import (
    ROOT_TYPE,
    ActionSchema,
    Atom,
    DomainModel,
    Plan,
    ProblemInstance,
    atom_sort_key,
)


def _atom(atom: Atom) -> str:
    return str(atom)


def _typed_names(pairs) -> str:
    pairs = list(pairs)
    if all(typ == ROOT_TYPE for _, typ in pairs):
        return " ".join(name for name, _ in pairs)
    # Mixed lists need every run typed explicitly: a bare name would be
    # absorbed into the following "- type" group on re-parse.
    parts: list[str] = []
    run: list[str] = []
    run_type: str | None = None
    for name, typ in pairs:
        if typ != run_type and run:
            parts.append(" ".join(run) + f" - {run_type}")
            run = []
        run_type = typ
        run.append(name)
    parts.append(" ".join(run) + f" - {run_type}")
    return " ".join(parts)


def _conjunction(atoms: frozenset[Atom], negated: frozenset[Atom] = frozenset()) -> str:
    rendered = [_atom(a) for a in sorted(atoms, key=atom_sort_key)]
    rendered += [f"(not {_atom(a)})" for a in sorted(negated, key=atom_sort_key)]
    if not rendered:
        return "(and)"
    if len(rendered) == 1 and not negated:
        return rendered[0]
    return "(and " + " ".join(rendered) + ")"


def _action(action: ActionSchema) -> str:
    lines = [f"  (:action {action.name}"]
    lines.append(f"    :parameters ({_typed_names(action.params)})")
    lines.append(f"    :precondition {_conjunction(action.pre)}")
    lines.append(f"    :effect {_conjunction(action.add, action.delete)})")
    return "\n".join(lines)


def serialize_domain(domain: DomainModel) -> str:
    requirements = ":strips :typing" if domain.types else ":strips"
    lines = [f"(define (domain {domain.name})", f"  (:requirements {requirements})"]
    if domain.types:
        lines.append(f"  (:types {_typed_names(domain.types)})")
    preds = " ".join(
        "(" + p.name + ("" if not p.params else " " + _typed_names(p.params)) + ")"
        for p in domain.predicates
    )
    lines.append(f"  (:predicates {preds})")
    for action in domain.actions:
        lines.append(_action(action))
    return "\n".join(lines) + ")\n"


def serialize_problem(instance: ProblemInstance) -> str:
    lines = [
        f"(define (problem {instance.id})",
        f"  (:domain {instance.domain_name})",
        f"  (:objects {_typed_names(instance.objects)})",
    ]
    init = " ".join(_atom(a) for a in sorted(instance.init, key=atom_sort_key))
    lines.append(f"  (:init {init})")
    lines.append(f"  (:goal {_conjunction(instance.goal)})")
    return "\n".join(lines) + ")\n"


def serialize_plan(plan: Plan) -> str:
    return "".join(str(step) + "\n" for step in plan.steps)


def serialize(model) -> str:
    """Serialize a domain, problem, or plan back to PDDL text."""
    if isinstance(model, DomainModel):
        return serialize_domain(model)
    if isinstance(model, ProblemInstance):
        return serialize_problem(model)
    if isinstance(model, Plan):
        return serialize_plan(model)
    raise TypeError(f"cannot serialize {type(model).__name__}")
