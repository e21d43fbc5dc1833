"""Bijective renaming of actions, predicates, and objects.

Renaming is purely syntactic: a standard planner (and this toolkit's
validator and searches) cannot tell a mapped domain from the original.
Two variants ship: the fixed misleading table, and fresh random
alphanumeric names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

from .generate import Dataset
from .pddl import (
    ActionSchema,
    Atom,
    DomainModel,
    Plan,
    PlanStep,
    PredicateSchema,
    ProblemInstance,
)
from .resources import deceptive_table
from .util import derive_rng


class ObfuscationError(ValueError):
    """A rename table does not cover or fit the given model."""


def _check_bijection(mapping: dict[str, str], what: str) -> None:
    values = list(mapping.values())
    if len(set(values)) != len(values):
        raise ObfuscationError(f"{what} map is not a bijection")


@dataclass(frozen=True)
class ObfuscationMap:
    """Three per-namespace bijections plus the domain's own name."""

    kind: str  # deceptive | randomized | identity
    action_names: dict[str, str]
    predicate_names: dict[str, str]
    object_names: dict[str, str]
    domain_names: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in ("deceptive", "randomized", "identity"):
            raise ObfuscationError(f"unknown map kind {self.kind!r}")
        _check_bijection(self.action_names, "action")
        _check_bijection(self.predicate_names, "predicate")
        _check_bijection(self.object_names, "object")
        _check_bijection(self.domain_names, "domain")
        new_names = (list(self.action_names.values())
                     + list(self.predicate_names.values())
                     + list(self.object_names.values()))
        if len(set(new_names)) != len(new_names):
            raise ObfuscationError("renamed namespaces collide")

    def inverse(self) -> "ObfuscationMap":
        return ObfuscationMap(
            kind=self.kind,
            action_names={v: k for k, v in self.action_names.items()},
            predicate_names={v: k for k, v in self.predicate_names.items()},
            object_names={v: k for k, v in self.object_names.items()},
            domain_names={v: k for k, v in self.domain_names.items()},
        )

    def _lookup(self, table: dict[str, str], name: str, what: str) -> str:
        try:
            return table[name]
        except KeyError:
            raise ObfuscationError(f"{what} {name!r} is not covered by the map") from None

    def action(self, name: str) -> str:
        return self._lookup(self.action_names, name, "action")

    def predicate(self, name: str) -> str:
        return self._lookup(self.predicate_names, name, "predicate")

    def object(self, name: str) -> str:
        return self._lookup(self.object_names, name, "object")

    def domain(self, name: str) -> str:
        return self.domain_names.get(name, name)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "actions": dict(sorted(self.action_names.items())),
            "predicates": dict(sorted(self.predicate_names.items())),
            "objects": dict(sorted(self.object_names.items())),
            "domains": dict(sorted(self.domain_names.items())),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ObfuscationMap":
        return cls(
            kind=data["kind"],
            action_names=dict(data["actions"]),
            predicate_names=dict(data["predicates"]),
            object_names=dict(data["objects"]),
            domain_names=dict(data.get("domains", {})),
        )

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n",
                              encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "ObfuscationMap":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def identity_map(domain: DomainModel, objects=()) -> ObfuscationMap:
    return ObfuscationMap(
        kind="identity",
        action_names={a.name: a.name for a in domain.actions},
        predicate_names={p.name: p.name for p in domain.predicates},
        object_names={o: o for o in objects},
    )


def deceptive_map(domain: DomainModel, table: dict | None = None) -> ObfuscationMap:
    """Cut the shipped misleading table down to *domain*'s names.

    The table carries aliases for common spelling variants, so the
    restriction to one domain is what must form a bijection.
    """
    data = table if table is not None else deceptive_table()
    actions = {}
    for a in domain.actions:
        if a.name not in data["actions"]:
            raise ObfuscationError(f"action {a.name!r} is not covered by the deceptive table")
        actions[a.name] = data["actions"][a.name]
    predicates = {}
    for p in domain.predicates:
        if p.name not in data["predicates"]:
            raise ObfuscationError(f"predicate {p.name!r} is not covered by the deceptive table")
        predicates[p.name] = data["predicates"][p.name]
    return ObfuscationMap(
        kind="deceptive",
        action_names=actions,
        predicate_names=predicates,
        object_names=dict(data["objects"]),
        domain_names=dict(data.get("domains", {})),
    )


def randomized_map(domain: DomainModel, objects, rng_seed: int) -> ObfuscationMap:
    """Fresh ``o`` + 8 hex char names for every action, predicate, and object.

    *objects* is an object table (name -> type mapping or iterable of
    names), typically one instance's objects or a dataset-wide union.
    """
    rng = derive_rng(rng_seed, "obfuscation")
    used: set[str] = set()

    def fresh() -> str:
        while True:
            name = "o" + "".join(rng.choice("0123456789abcdef") for _ in range(8))
            if name not in used:
                used.add(name)
                return name

    object_names = sorted(objects)
    return ObfuscationMap(
        kind="randomized",
        action_names={a.name: fresh() for a in domain.actions},
        predicate_names={p.name: fresh() for p in domain.predicates},
        object_names={o: fresh() for o in object_names},
        domain_names={domain.name: fresh()},
    )


def _map_atom(m: ObfuscationMap, atom: Atom) -> Atom:
    args = tuple(a if a.startswith("?") else m.object(a) for a in atom.args)
    return Atom(m.predicate(atom.predicate), args)


def apply_map(m: ObfuscationMap, x):
    """Structure-preserving rename of a domain, problem, or plan."""
    if isinstance(x, DomainModel):
        return DomainModel(
            name=m.domain(x.name),
            types=x.types,
            predicates=tuple(
                PredicateSchema(m.predicate(p.name), p.params) for p in x.predicates
            ),
            actions=tuple(
                ActionSchema(
                    name=m.action(a.name),
                    params=a.params,
                    pre=frozenset(_map_lifted(m, atom) for atom in a.pre),
                    add=frozenset(_map_lifted(m, atom) for atom in a.add),
                    delete=frozenset(_map_lifted(m, atom) for atom in a.delete),
                )
                for a in x.actions
            ),
        )
    if isinstance(x, ProblemInstance):
        return replace(
            x,
            domain_name=m.domain(x.domain_name),
            objects=tuple((m.object(o), t) for o, t in x.objects),
            init=frozenset(_map_atom(m, a) for a in x.init),
            goal=frozenset(_map_atom(m, a) for a in x.goal),
        )
    if isinstance(x, Plan):
        return Plan(tuple(
            PlanStep(m.action(s.name), tuple(m.object(a) for a in s.args)) for s in x.steps
        ))
    raise TypeError(f"cannot apply a rename map to {type(x).__name__}")


def _map_lifted(m: ObfuscationMap, atom: Atom) -> Atom:
    return Atom(m.predicate(atom.predicate), atom.args)


def obfuscate_dataset(dataset: Dataset, m: ObfuscationMap, new_kind: str) -> Dataset:
    """Rename a whole dataset; instance ids move to the new kind's prefix."""
    domain = apply_map(m, dataset.domain)
    instances = []
    for index, instance in enumerate(dataset.instances):
        mapped = apply_map(m, instance)
        mapped = replace(mapped, id=f"{new_kind}-{index}")
        mapped.validate_against(domain)
        instances.append(mapped)
    provenance = dict(dataset.provenance)
    provenance["domain_kind"] = new_kind
    provenance["obfuscation"] = {"kind": m.kind, "source_kind":
                                 dataset.provenance.get("gen_spec", {}).get("domain_kind")}
    return Dataset(domain=domain, instances=tuple(instances),
                   optimal_lengths=dataset.optimal_lengths, provenance=provenance)
