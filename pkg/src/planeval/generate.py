"""Seeded benchmark generation: blocksworld and logistics datasets.

Instances are produced from per-instance RNG streams derived from
(seed, index), so identical specs give byte-identical datasets and
generation can be fanned out across workers.  Every emitted instance is
certified solvable by the exact breadth-first planner, which also
records the optimal plan length for the manifest.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from . import __version__
from .pddl import (
    Atom,
    DomainModel,
    GroundTask,
    Plan,
    ProblemInstance,
    make_state,
    parse_domain,
    parse_problem,
    serialize_domain,
    serialize_problem,
)
from .resources import BLOCK_PALETTE, domain_for_kind
from .util import canonical_json, derive_rng, stable_hash

UNSOLVABLE = "unsolvable"
BUDGET_EXCEEDED = "budget-exceeded"

DEFAULT_NODE_BUDGET = 2_000_000


class GenSpecError(ValueError):
    """The generation spec is malformed or infeasible."""


@dataclass(frozen=True)
class GenSpec:
    """Parameters for one dataset build."""

    domain_kind: str
    count: int
    rng_seed: int
    n_blocks: tuple[int, int] = (3, 5)
    goal_interaction: str = "mixed"  # positive | negative | none | mixed
    n_cities: tuple[int, int] = (1, 2)
    n_locations_per_city: tuple[int, int] = (2, 3)
    n_packages: tuple[int, int] = (1, 3)

    def __post_init__(self) -> None:
        if self.domain_kind not in ("blocksworld", "logistics"):
            raise GenSpecError(f"unknown domain kind {self.domain_kind!r}")
        if self.count < 1:
            raise GenSpecError("count must be >= 1")
        for name in ("n_blocks", "n_cities", "n_locations_per_city", "n_packages"):
            lo, hi = getattr(self, name)
            if not (1 <= lo <= hi):
                raise GenSpecError(f"{name} range {lo}..{hi} is empty or invalid")
        if self.goal_interaction not in ("positive", "negative", "none", "mixed"):
            raise GenSpecError(f"unknown goal interaction {self.goal_interaction!r}")
        if self.domain_kind == "blocksworld":
            if self.n_blocks[0] < 2:
                raise GenSpecError("blocksworld needs at least 2 blocks for any goal")
            if self.n_blocks[1] > len(BLOCK_PALETTE):
                raise GenSpecError(f"block palette has only {len(BLOCK_PALETTE)} names")

    def to_dict(self) -> dict:
        return {
            "domain_kind": self.domain_kind,
            "count": self.count,
            "rng_seed": self.rng_seed,
            "n_blocks": list(self.n_blocks),
            "goal_interaction": self.goal_interaction,
            "n_cities": list(self.n_cities),
            "n_locations_per_city": list(self.n_locations_per_city),
            "n_packages": list(self.n_packages),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GenSpec":
        known = {"domain_kind", "count", "rng_seed", "n_blocks", "goal_interaction",
                 "n_cities", "n_locations_per_city", "n_packages"}
        unknown = set(data) - known
        if unknown:
            raise GenSpecError(f"unknown spec fields: {sorted(unknown)}")
        kwargs = dict(data)
        for name in ("n_blocks", "n_cities", "n_locations_per_city", "n_packages"):
            if name in kwargs:
                kwargs[name] = tuple(kwargs[name])
        try:
            return cls(**kwargs)
        except TypeError as e:
            raise GenSpecError(str(e)) from None

    @property
    def hash(self) -> str:
        return stable_hash(self.to_dict())


@dataclass(frozen=True)
class Dataset:
    """A generated benchmark: domain, instances, and build provenance."""

    domain: DomainModel
    instances: tuple[ProblemInstance, ...]
    optimal_lengths: tuple[int, ...]
    provenance: dict = field(compare=False)

    def __post_init__(self) -> None:
        if len(self.instances) != len(self.optimal_lengths):
            raise ValueError("instances and optimal_lengths must align")


# ---------------------------------------------------------------------------
# Exact breadth-first planning


def _bfs(task: GroundTask, budget: int) -> tuple[int | str, Plan | None]:
    init = task.init_mask
    goal = task.goal_mask
    if init & goal == goal:
        return 0, Plan()
    action_ids = task.search_action_indices()
    pre = task.pre_masks
    add = task.add_masks
    dele = task.del_masks
    visited = {init}
    frontier = deque([init])
    parents: dict[int, tuple[int, int]] = {}
    depth_of = {init: 0}
    while frontier:
        state = frontier.popleft()
        for i in action_ids:
            p = pre[i]
            if state & p != p:
                continue
            new = (state & ~dele[i]) | add[i]
            if new in visited:
                continue
            visited.add(new)
            parents[new] = (state, i)
            depth_of[new] = depth_of[state] + 1
            if new & goal == goal:
                steps = []
                cur = new
                while cur != init:
                    prev, ai = parents[cur]
                    steps.append(task.actions[ai].step)
                    cur = prev
                return depth_of[new], Plan(tuple(reversed(steps)))
            if len(visited) > budget:
                return BUDGET_EXCEEDED, None
            frontier.append(new)
    return UNSOLVABLE, None


def certify_solvable(domain: DomainModel, instance: ProblemInstance,
                     budget: int = DEFAULT_NODE_BUDGET) -> int | str:
    """Exact optimal plan length via breadth-first search.

    Returns the length, or ``"unsolvable"`` / ``"budget-exceeded"``; the
    latter is a distinct outcome, not a failure.
    """
    instance.validate_against(domain)
    outcome, _ = _bfs(GroundTask(domain, instance), budget)
    return outcome


def solve_optimal(domain: DomainModel, instance: ProblemInstance,
                  budget: int = DEFAULT_NODE_BUDGET) -> Plan | None:
    """A shortest plan for *instance*, or None when unsolvable/over budget."""
    instance.validate_against(domain)
    _, plan = _bfs(GroundTask(domain, instance), budget)
    return plan


# ---------------------------------------------------------------------------
# Blocksworld


def enumerate_block_configs(blocks: tuple[str, ...]) -> list[tuple[tuple[str, ...], ...]]:
    """All arrangements of *blocks* into towers (each tower bottom-to-top).

    Built by inserting blocks one at a time at every possible position;
    each arrangement arises exactly once, so uniform choice over the
    returned list is uniform over legal configurations.
    """
    if len(blocks) > 8:
        raise GenSpecError("configuration enumeration supports at most 8 blocks")
    configs: list[tuple[tuple[str, ...], ...]] = [()]
    for block in blocks:
        nxt: list[tuple[tuple[str, ...], ...]] = []
        for cfg in configs:
            nxt.append(cfg + ((block,),))
            for t, tower in enumerate(cfg):
                for pos in range(len(tower) + 1):
                    grown = tower[:pos] + (block,) + tower[pos:]
                    nxt.append(cfg[:t] + (grown,) + cfg[t + 1:])
        configs = nxt
    return [tuple(sorted(cfg)) for cfg in configs]


def _config_atoms(config: tuple[tuple[str, ...], ...]) -> list[Atom]:
    atoms = [Atom("arm-empty")]
    for tower in config:
        atoms.append(Atom("on-table", (tower[0],)))
        atoms.append(Atom("clear", (tower[-1],)))
        for upper, lower in zip(tower[1:], tower):
            atoms.append(Atom("on", (upper, lower)))
    return atoms


def _blocksworld_goal(config, blocks, interaction, rng) -> frozenset[Atom]:
    if interaction == "positive":
        k = rng.randint(2, len(blocks))
        chain = rng.sample(blocks, k)
        return frozenset(Atom("on", (a, b)) for a, b in zip(chain, chain[1:]))
    if interaction == "negative":
        stacked = [a for a in _config_atoms(config) if a.predicate == "on"]
        count = rng.randint(1, len(stacked))
        chosen = rng.sample(sorted(stacked), count)
        return frozenset(Atom("on", (a.args[1], a.args[0])) for a in chosen)
    # independent subgoals over pairwise-disjoint blocks
    k = rng.randint(1, len(blocks) // 2)
    picked = rng.sample(blocks, 2 * k)
    return frozenset(Atom("on", (picked[2 * i], picked[2 * i + 1])) for i in range(k))


def _gen_blocksworld_instance(spec: GenSpec, index: int, domain: DomainModel) -> ProblemInstance:
    rng = derive_rng(spec.rng_seed, spec.domain_kind, index)
    n = rng.randint(*spec.n_blocks)
    blocks = list(BLOCK_PALETTE[:n])
    interaction = spec.goal_interaction
    if interaction == "mixed":
        interaction = rng.choice(["positive", "negative", "none"])
    configs = enumerate_block_configs(tuple(blocks))
    if interaction == "negative":
        configs = [c for c in configs if any(len(t) > 1 for t in c)]
    config = rng.choice(configs)
    goal = _blocksworld_goal(config, blocks, interaction, rng)
    instance = ProblemInstance(
        id=f"{spec.domain_kind}-{index}",
        domain_name=domain.name,
        objects=tuple((b, "object") for b in blocks),
        init=make_state(_config_atoms(config)),
        goal=goal,
    )
    instance.validate_against(domain)
    return instance


# ---------------------------------------------------------------------------
# Logistics


def _gen_logistics_instance(spec: GenSpec, index: int, domain: DomainModel) -> ProblemInstance:
    rng = derive_rng(spec.rng_seed, spec.domain_kind, index)
    n_cities = rng.randint(*spec.n_cities)
    locs_per_city = [rng.randint(*spec.n_locations_per_city) for _ in range(n_cities)]
    n_packages = rng.randint(*spec.n_packages)

    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    locations: list[str] = []
    for c in range(n_cities):
        city = f"city_{c}"
        objects.append((city, "city"))
        city_locs = [f"location_{c}_{l}" for l in range(locs_per_city[c])]
        locations.extend(city_locs)
        objects.extend((loc, "location") for loc in city_locs)
        init.extend(Atom("in-city", (loc, city)) for loc in city_locs)
        init.append(Atom("airport", (city_locs[0],)))  # one airport per city
        truck = f"truck_{c}"
        objects.append((truck, "truck"))
        init.append(Atom("at", (truck, rng.choice(city_locs))))
    airports = [f"location_{c}_0" for c in range(n_cities)]
    objects.append(("airplane_0", "airplane"))
    init.append(Atom("at", ("airplane_0", rng.choice(airports))))

    goal: list[Atom] = []
    for p in range(n_packages):
        pkg = f"package_{p}"
        objects.append((pkg, "package"))
        start = rng.choice(locations)
        init.append(Atom("at", (pkg, start)))
        if len(locations) > 1:
            dest = rng.choice([loc for loc in locations if loc != start])
        else:
            dest = start  # degenerate single-location world
        goal.append(Atom("at", (pkg, dest)))

    instance = ProblemInstance(
        id=f"{spec.domain_kind}-{index}",
        domain_name=domain.name,
        objects=tuple(objects),
        init=make_state(init),
        goal=frozenset(goal),
    )
    instance.validate_against(domain)
    return instance


# ---------------------------------------------------------------------------
# Dataset assembly and on-disk layout


def generate(spec: GenSpec, budget: int = DEFAULT_NODE_BUDGET) -> Dataset:
    """Build the dataset described by *spec*, certifying every instance."""
    domain = domain_for_kind(spec.domain_kind)
    gen = _gen_blocksworld_instance if spec.domain_kind == "blocksworld" else _gen_logistics_instance
    instances = []
    lengths = []
    for index in range(spec.count):
        instance = gen(spec, index, domain)
        outcome = certify_solvable(domain, instance, budget)
        if not isinstance(outcome, int):
            raise GenSpecError(f"generated instance {instance.id} was {outcome}; "
                               "shrink the spec ranges or raise the budget")
        instances.append(instance)
        lengths.append(outcome)
    provenance = {"gen_spec": spec.to_dict(), "gen_spec_hash": spec.hash,
                  "toolkit_version": __version__}
    return Dataset(domain=domain, instances=tuple(instances),
                   optimal_lengths=tuple(lengths), provenance=provenance)


def gen_blocksworld(spec: GenSpec, budget: int = DEFAULT_NODE_BUDGET) -> Dataset:
    if spec.domain_kind != "blocksworld":
        raise GenSpecError("spec is not a blocksworld spec")
    return generate(spec, budget)


def gen_logistics(spec: GenSpec, budget: int = DEFAULT_NODE_BUDGET) -> Dataset:
    if spec.domain_kind != "logistics":
        raise GenSpecError("spec is not a logistics spec")
    return generate(spec, budget)


def write_dataset(dataset: Dataset, out_dir: str | Path) -> Path:
    """Write domain, instances, manifest, and provenance; returns manifest path."""
    out = Path(out_dir)
    (out / "instances").mkdir(parents=True, exist_ok=True)
    (out / "domain.pddl").write_text(serialize_domain(dataset.domain), encoding="utf-8")
    kind = dataset.provenance.get("domain_kind") or dataset.provenance.get(
        "gen_spec", {}).get("domain_kind", dataset.domain.name)
    gen_hash = dataset.provenance.get("gen_spec_hash", "")
    lines = []
    for instance, length in zip(dataset.instances, dataset.optimal_lengths):
        rel = f"instances/{instance.id}.pddl"
        (out / rel).write_text(serialize_problem(instance), encoding="utf-8")
        lines.append(canonical_json({
            "id": instance.id,
            "domain_kind": kind,
            "problem_path": rel,
            "optimal_length": length,
            "gen_spec_hash": gen_hash,
        }))
    manifest = out / "manifest.jsonl"
    manifest.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    (out / "provenance.json").write_text(
        canonical_json(dataset.provenance) + "\n", encoding="utf-8")
    return manifest


def load_dataset(dir_path: str | Path) -> Dataset:
    """Reload a dataset previously written by :func:`write_dataset`."""
    root = Path(dir_path)
    domain = parse_domain((root / "domain.pddl").read_text(encoding="utf-8"))
    provenance = json.loads((root / "provenance.json").read_text(encoding="utf-8"))
    instances = []
    lengths = []
    for line in (root / "manifest.jsonl").read_text(encoding="utf-8").splitlines():
        entry = json.loads(line)
        text = (root / entry["problem_path"]).read_text(encoding="utf-8")
        instances.append(parse_problem(text, domain))
        lengths.append(entry["optimal_length"])
    return Dataset(domain=domain, instances=tuple(instances),
                   optimal_lengths=tuple(lengths), provenance=provenance)
