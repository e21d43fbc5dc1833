"""Grounding and execution semantics, including the relaxation lattice.

``step`` is the single source of truth for action application; the
validator, the repair search, and the breadth-first certifier all reduce
to it (the searches via the bitmask encoding in :class:`GroundTask`).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from itertools import product

from .model import (
    ActionSchema,
    Atom,
    DomainModel,
    GroundAction,
    ModelError,
    ProblemInstance,
    State,
    atom_sort_key,
)


class RelaxationMode(str, Enum):
    """Model relaxations: drop delete effects, preconditions, or both."""

    NONE = "none"
    DELETE = "delete"
    PRECONDITION = "precondition"
    BOTH = "both"

    @property
    def ignores_deletes(self) -> bool:
        return self in (RelaxationMode.DELETE, RelaxationMode.BOTH)

    @property
    def ignores_preconditions(self) -> bool:
        return self in (RelaxationMode.PRECONDITION, RelaxationMode.BOTH)


# Pointwise relaxation order; NONE is strictest, BOTH most forgiving.
RELAXATION_ORDER: dict[RelaxationMode, frozenset[RelaxationMode]] = {
    RelaxationMode.NONE: frozenset(RelaxationMode),
    RelaxationMode.DELETE: frozenset({RelaxationMode.DELETE, RelaxationMode.BOTH}),
    RelaxationMode.PRECONDITION: frozenset({RelaxationMode.PRECONDITION, RelaxationMode.BOTH}),
    RelaxationMode.BOTH: frozenset({RelaxationMode.BOTH}),
}


@dataclass(frozen=True)
class Inapplicable:
    """Returned by :func:`step` when preconditions fail; carries the gap."""

    missing: frozenset[Atom]


def ground(schema: ActionSchema, binding: dict[str, str], objects: dict[str, str],
           domain: DomainModel) -> GroundAction:
    """Instantiate *schema* under a total, type-correct variable binding."""
    for var, typ in schema.params:
        if var not in binding:
            raise ModelError(f"action {schema.name}: no binding for {var}")
        obj = binding[var]
        if obj not in objects:
            raise ModelError(f"action {schema.name}: unknown object {obj}")
        if not domain.is_subtype(objects[obj], typ):
            raise ModelError(f"action {schema.name}: object {obj} of type {objects[obj]} "
                             f"does not fit parameter {var} of type {typ}")
    return GroundAction(
        name=schema.name,
        args=tuple(binding[v] for v, _ in schema.params),
        pre=frozenset(a.substitute(binding) for a in schema.pre),
        add=frozenset(a.substitute(binding) for a in schema.add),
        delete=frozenset(a.substitute(binding) for a in schema.delete),
    )


def step(state: State, action: GroundAction, mode: RelaxationMode = RelaxationMode.NONE):
    """Apply *action* in *state* under *mode*; return the new state or Inapplicable."""
    if not mode.ignores_preconditions:
        missing = action.pre - state
        if missing:
            return Inapplicable(missing=missing)
    if mode.ignores_deletes:
        return state | action.add
    return (state - action.delete) | action.add


def all_ground_actions(domain: DomainModel, instance: ProblemInstance) -> list[GroundAction]:
    """Every type-correct instantiation of every schema, canonically ordered."""
    objects = instance.object_map
    by_type: dict[str, list[str]] = {}
    out: list[GroundAction] = []
    for schema in domain.actions:
        pools = []
        for _, typ in schema.params:
            if typ not in by_type:
                by_type[typ] = sorted(o for o, t in instance.objects if domain.is_subtype(t, typ))
            pools.append(by_type[typ])
        for combo in product(*pools):
            binding = {v: o for (v, _), o in zip(schema.params, combo)}
            out.append(ground(schema, binding, objects, domain))
    return out


class GroundTask:
    """Bitmask encoding of a ground problem for the search-heavy callers.

    Atoms get integer bit positions; states and condition sets become
    ints, so applicability is a mask test and successor generation stays
    cheap even for a breadth-first sweep of the full state space.
    """

    def __init__(self, domain: DomainModel, instance: ProblemInstance):
        self.domain = domain
        self.instance = instance
        self.actions = all_ground_actions(domain, instance)
        self.atom_index: dict[Atom, int] = {}
        self.atoms: list[Atom] = []

        def index(atom: Atom) -> int:
            if atom not in self.atom_index:
                self.atom_index[atom] = len(self.atoms)
                self.atoms.append(atom)
            return self.atom_index[atom]

        for atom in sorted(instance.init, key=atom_sort_key):
            index(atom)
        for atom in sorted(instance.goal, key=atom_sort_key):
            index(atom)
        for action in self.actions:
            for atom in sorted(action.pre | action.add | action.delete, key=atom_sort_key):
                index(atom)

        self.pre_masks = [self._mask(a.pre) for a in self.actions]
        self.add_masks = [self._mask(a.add) for a in self.actions]
        self.del_masks = [self._mask(a.delete) for a in self.actions]
        self.init_mask = self._mask(instance.init)
        self.goal_mask = self._mask(instance.goal)
        self.action_index = {(a.name, a.args): i for i, a in enumerate(self.actions)}
        # achievers[bit] = indices of actions whose add effects set that bit
        self.achievers: dict[int, list[int]] = {}
        for i, add in enumerate(self.add_masks):
            rest = add
            while rest:
                bit = (rest & -rest).bit_length() - 1
                self.achievers.setdefault(bit, []).append(i)
                rest &= rest - 1

    def _mask(self, atoms) -> int:
        mask = 0
        for atom in atoms:
            mask |= 1 << self.atom_index[atom]
        return mask

    def mask_to_atoms(self, mask: int) -> list[Atom]:
        out = []
        while mask:
            bit = (mask & -mask).bit_length() - 1
            out.append(self.atoms[bit])
            mask &= mask - 1
        return sorted(out, key=atom_sort_key)

    def apply(self, state: int, action_idx: int) -> int:
        return (state & ~self.del_masks[action_idx]) | self.add_masks[action_idx]

    def applicable(self, state: int, action_idx: int) -> bool:
        pre = self.pre_masks[action_idx]
        return state & pre == pre

    def resolve_step(self, name: str, args: tuple[str, ...]) -> int | None:
        """Index of the ground action matching a plan step, if any."""
        return self.action_index.get((name, args))

    def atom_costs(self) -> list[int]:
        """Additive relaxed cost of each atom from the initial state.

        Initially true atoms cost 0; otherwise an atom costs 1 plus the
        summed costs of the cheapest achiever's preconditions, ignoring
        deletes.  Additivity is what gives the repair search a gradient:
        inserting an achiever trades a flawed atom for its preconditions
        at a strictly smaller total.  Relaxed-unreachable atoms get a
        large sentinel.
        """
        if not hasattr(self, "_atom_costs"):
            unreachable = 1 << 20
            costs = [unreachable] * len(self.atoms)
            rest = self.init_mask
            while rest:
                bit = (rest & -rest).bit_length() - 1
                costs[bit] = 0
                rest &= rest - 1
            acts = []
            for i in self.search_action_indices():
                pre_bits = []
                pre = self.pre_masks[i]
                while pre:
                    pre_bits.append((pre & -pre).bit_length() - 1)
                    pre &= pre - 1
                add_bits = []
                add = self.add_masks[i]
                while add:
                    add_bits.append((add & -add).bit_length() - 1)
                    add &= add - 1
                acts.append((pre_bits, add_bits))
            changed = True
            while changed:
                changed = False
                for pre_bits, add_bits in acts:
                    total = 1
                    for b in pre_bits:
                        c = costs[b]
                        if c >= unreachable:
                            total = unreachable
                            break
                        total += c
                    if total >= unreachable:
                        continue
                    for b in add_bits:
                        if total < costs[b]:
                            costs[b] = total
                            changed = True
            self._atom_costs = costs
        return self._atom_costs

    def search_action_indices(self) -> list[int]:
        """Actions whose static preconditions hold initially.

        An atom no effect ever touches is static; an action requiring a
        static atom absent from init can never become applicable, so the
        searches skip it.  Candidate plans may still contain such actions
        (random seeds sample the full pool) -- this filter only narrows
        what the searches *generate*.
        """
        if not hasattr(self, "_search_actions"):
            dynamic = 0
            for add, dele in zip(self.add_masks, self.del_masks):
                dynamic |= add | dele
            static = ~dynamic
            init = self.init_mask
            self._search_actions = [
                i for i, pre in enumerate(self.pre_masks)
                if pre & static & ~init == 0
            ]
        return self._search_actions
