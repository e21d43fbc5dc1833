"""Typed model for the STRIPS-with-typing subset of PDDL.

All values are immutable after construction and safe to share across
threads.  Validation happens eagerly: a constructed ``DomainModel`` or
``ProblemInstance`` is guaranteed internally consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

ROOT_TYPE = "object"


class ModelError(ValueError):
    """A model value violates a structural invariant."""


def _check_name(name: str, what: str) -> None:
    if not name or any(c.isspace() or c in "()?;" for c in name):
        raise ModelError(f"invalid {what} name: {name!r}")


@dataclass(frozen=True, order=True)
class Atom:
    """A predicate applied to arguments.

    Arguments starting with ``?`` are variables (lifted atom); otherwise
    they are object names (ground atom).
    """

    predicate: str
    args: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        _check_name(self.predicate, "predicate")
        for a in self.args:
            _check_name(a.lstrip("?"), "argument")

    @property
    def is_ground(self) -> bool:
        return not any(a.startswith("?") for a in self.args)

    def substitute(self, binding: dict[str, str]) -> "Atom":
        """Replace variables by their bound objects; unbound variables stay."""
        return Atom(self.predicate, tuple(binding.get(a, a) for a in self.args))

    def __str__(self) -> str:
        return "(" + " ".join((self.predicate,) + self.args) + ")"


# A state is the set of ground atoms that are true (closed world).
State = frozenset[Atom]


def make_state(atoms) -> State:
    state = frozenset(atoms)
    for atom in state:
        if not atom.is_ground:
            raise ModelError(f"state atom is not ground: {atom}")
    return state


@dataclass(frozen=True)
class PredicateSchema:
    """Declared fluent: name plus ordered (variable, type) parameters."""

    name: str
    params: tuple[tuple[str, str], ...] = ()

    def __post_init__(self) -> None:
        _check_name(self.name, "predicate")
        variables = [v for v, _ in self.params]
        if len(set(variables)) != len(variables):
            raise ModelError(f"predicate {self.name}: duplicate parameter variables")
        for v, t in self.params:
            if not v.startswith("?"):
                raise ModelError(f"predicate {self.name}: parameter {v!r} must start with '?'")
            _check_name(t, "type")

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class ActionSchema:
    """Lifted action: parameters, conjunctive precondition, add/delete effects."""

    name: str
    params: tuple[tuple[str, str], ...]
    pre: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]

    def __post_init__(self) -> None:
        _check_name(self.name, "action")
        variables = [v for v, _ in self.params]
        if len(set(variables)) != len(variables):
            raise ModelError(f"action {self.name}: duplicate parameter variables")
        declared = set(variables)
        for group, atoms in (("precondition", self.pre), ("add effect", self.add), ("delete effect", self.delete)):
            for atom in atoms:
                for a in atom.args:
                    if a.startswith("?") and a not in declared:
                        raise ModelError(f"action {self.name}: {group} uses undeclared variable {a}")
                    if not a.startswith("?"):
                        raise ModelError(f"action {self.name}: constants in {group} are not supported ({atom})")
        clash = self.add & self.delete
        if clash:
            raise ModelError(f"action {self.name}: atoms appear as both add and delete effect: "
                             + ", ".join(sorted(map(str, clash))))

    @property
    def arity(self) -> int:
        return len(self.params)


@dataclass(frozen=True)
class DomainModel:
    """A lifted STRIPS domain: type hierarchy, predicates, actions."""

    name: str
    types: tuple[tuple[str, str], ...] = ()  # (type, parent), declaration order
    predicates: tuple[PredicateSchema, ...] = ()
    actions: tuple[ActionSchema, ...] = ()
    predicate_map: dict[str, PredicateSchema] = field(init=False, compare=False, repr=False)
    action_map: dict[str, ActionSchema] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        _check_name(self.name, "domain")
        pmap: dict[str, PredicateSchema] = {}
        for p in self.predicates:
            if p.name in pmap:
                raise ModelError(f"duplicate predicate {p.name}")
            pmap[p.name] = p
        amap: dict[str, ActionSchema] = {}
        for a in self.actions:
            if a.name in amap:
                raise ModelError(f"duplicate action {a.name}")
            amap[a.name] = a
        object.__setattr__(self, "predicate_map", pmap)
        object.__setattr__(self, "action_map", amap)
        tmap = dict(self.types)
        if len(tmap) != len(self.types):
            raise ModelError("duplicate type declaration")
        for t, parent in self.types:
            if parent != ROOT_TYPE and parent not in tmap:
                raise ModelError(f"type {t} has undeclared parent {parent}")
        for action in self.actions:
            types_in_scope = dict(action.params)
            for atom in action.pre | action.add | action.delete:
                self._check_atom_schema(atom, types_in_scope, f"action {action.name}")
            for _, t in action.params:
                self._check_type_known(t, f"action {action.name}")
        for p in self.predicates:
            for _, t in p.params:
                self._check_type_known(t, f"predicate {p.name}")

    def _check_type_known(self, t: str, where: str) -> None:
        if t != ROOT_TYPE and t not in dict(self.types):
            raise ModelError(f"{where}: unknown type {t}")

    def _check_atom_schema(self, atom: Atom, var_types: dict[str, str], where: str) -> None:
        schema = self.predicate_map.get(atom.predicate)
        if schema is None:
            raise ModelError(f"{where}: unknown predicate {atom.predicate}")
        if len(atom.args) != schema.arity:
            raise ModelError(f"{where}: {atom} has arity {len(atom.args)}, "
                             f"predicate {atom.predicate} expects {schema.arity}")
        for arg, (_, want) in zip(atom.args, schema.params):
            if arg.startswith("?"):
                have = var_types.get(arg, ROOT_TYPE)
                if not self.is_subtype(have, want):
                    raise ModelError(f"{where}: {atom} argument {arg} has type {have}, expected {want}")

    def is_subtype(self, t: str, ancestor: str) -> bool:
        """True when *t* equals or descends from *ancestor* in the hierarchy."""
        if ancestor == ROOT_TYPE:
            return True
        tmap = dict(self.types)
        while t != ROOT_TYPE:
            if t == ancestor:
                return True
            t = tmap.get(t, ROOT_TYPE)
        return False

    def check_ground_atom(self, atom: Atom, objects: dict[str, str], where: str) -> None:
        """Validate a ground atom against this domain and an object table."""
        schema = self.predicate_map.get(atom.predicate)
        if schema is None:
            raise ModelError(f"{where}: unknown predicate {atom.predicate}")
        if len(atom.args) != schema.arity:
            raise ModelError(f"{where}: {atom} has arity {len(atom.args)}, "
                             f"predicate {atom.predicate} expects {schema.arity}")
        for arg, (_, want) in zip(atom.args, schema.params):
            if arg.startswith("?"):
                raise ModelError(f"{where}: {atom} is not ground")
            if arg not in objects:
                raise ModelError(f"{where}: {atom} refers to undeclared object {arg}")
            if not self.is_subtype(objects[arg], want):
                raise ModelError(f"{where}: {atom} argument {arg} has type {objects[arg]}, expected {want}")


@dataclass(frozen=True)
class ProblemInstance:
    """One planning problem: objects, initial state, goal atoms."""

    id: str
    domain_name: str
    objects: tuple[tuple[str, str], ...]  # (object, type), declaration order
    init: State
    goal: frozenset[Atom]

    def __post_init__(self) -> None:
        _check_name(self.id, "problem")
        names = [n for n, _ in self.objects]
        if len(set(names)) != len(names):
            raise ModelError(f"problem {self.id}: duplicate object declaration")

    @property
    def object_map(self) -> dict[str, str]:
        return dict(self.objects)

    def validate_against(self, domain: DomainModel) -> None:
        """Check every atom against the domain's predicates and this object table."""
        if self.domain_name != domain.name:
            raise ModelError(f"problem {self.id} is for domain {self.domain_name}, got {domain.name}")
        objects = self.object_map
        for t in objects.values():
            domain._check_type_known(t, f"problem {self.id}")
        for atom in self.init:
            domain.check_ground_atom(atom, objects, f"problem {self.id} init")
        for atom in self.goal:
            domain.check_ground_atom(atom, objects, f"problem {self.id} goal")


@dataclass(frozen=True, order=True)
class PlanStep:
    """One plan line: an action name applied to object names.

    Deliberately unresolved -- a step may name a wrong arity or an unknown
    action, and the validator must be able to diagnose that rather than
    fail at construction.
    """

    name: str
    args: tuple[str, ...] = ()

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class GroundAction:
    """An action schema under a total variable->object substitution."""

    name: str
    args: tuple[str, ...]
    pre: frozenset[Atom]
    add: frozenset[Atom]
    delete: frozenset[Atom]

    @property
    def step(self) -> PlanStep:
        return PlanStep(self.name, self.args)

    def __str__(self) -> str:
        return "(" + " ".join((self.name,) + self.args) + ")"


@dataclass(frozen=True)
class Plan:
    """An ordered sequence of plan steps; may be empty."""

    steps: tuple[PlanStep, ...] = ()

    def __len__(self) -> int:
        return len(self.steps)

    def __iter__(self):
        return iter(self.steps)

    def __str__(self) -> str:
        return "\n".join(str(s) for s in self.steps)


def atom_sort_key(atom: Atom) -> tuple[str, tuple[str, ...]]:
    """Canonical ordering: predicate name first, then args lexicographically."""
    return (atom.predicate, atom.args)
