"""Stochastic local search that repairs flaws in a seed plan.

The search keeps a linear candidate plan and repeatedly addresses its
earliest flaw by inserting an establishing action, deleting a step that
breaks the needed atom, or deleting the flawed step.  One accepted move
is one search step, the unit reported in traces; plan-edit distance is
deliberately not part of the objective.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .pddl import (
    Atom,
    DomainModel,
    GroundTask,
    Plan,
    PlanStep,
    ProblemInstance,
    RelaxationMode,
    atom_sort_key,
)
from .util import derive_rng
from .validate import VALID, validate

UNSATISFIED_PRECONDITION = "unsatisfied-precondition"
UNMET_GOAL = "unmet-goal"


class RepairError(ValueError):
    """The request does not fit the instance (objects, actions, seed)."""


@dataclass(frozen=True)
class SeedKind:
    """Where the search starts: empty, random of a length, or a given plan."""

    kind: str
    length: int = 0
    plan: Plan | None = None

    @classmethod
    def empty(cls) -> "SeedKind":
        return cls(kind="empty")

    @classmethod
    def random(cls, length: int) -> "SeedKind":
        if length < 0:
            raise RepairError("random seed length must be >= 0")
        return cls(kind="random", length=length)

    @classmethod
    def provided(cls, plan: Plan) -> "SeedKind":
        return cls(kind="provided", plan=plan)

    @property
    def label(self) -> str:
        return self.kind


@dataclass(frozen=True)
class SearchConfig:
    max_steps: int = 500
    restart_extra_steps: int = 50
    restarts_allowed: int = 1
    rng_seed: int = 0
    noise: float = 0.1  # probability of taking a uniformly random neighbor

    def __post_init__(self) -> None:
        if min(self.max_steps, self.restart_extra_steps, self.restarts_allowed) < 0:
            raise ValueError("search budgets must be nonnegative")
        if not 0.0 <= self.noise <= 1.0:
            raise ValueError("noise must be a probability")


@dataclass(frozen=True)
class Flaw:
    """An unsatisfied precondition at a step, or an unmet goal atom."""

    kind: str
    atom: Atom
    step_index: int | None = None  # 1-based, None for goal flaws


@dataclass(frozen=True)
class RepairTrace:
    outcome: str  # solved | exhausted
    plan: Plan | None
    search_steps: int
    restarted: bool
    seed: SeedKind
    flaw_history_len: int

    @property
    def solved(self) -> bool:
        return self.outcome == "solved"

    def to_dict(self) -> dict:
        return {
            "outcome": self.outcome,
            "plan": [str(s) for s in self.plan.steps] if self.plan else None,
            "search_steps": self.search_steps,
            "restarted": self.restarted,
            "seed": self.seed.label,
            "flaw_history_len": self.flaw_history_len,
        }


def _resolve_plan(task: GroundTask, plan: Plan) -> list[int]:
    ids = []
    for plan_step in plan.steps:
        idx = task.resolve_step(plan_step.name, plan_step.args)
        if idx is None:
            raise RepairError(f"plan step {plan_step} is not a ground action of the instance")
        ids.append(idx)
    return ids


def _flaw_bits(task: GroundTask, plan_ids: list[int]) -> list[tuple[str, int, int]]:
    """(kind, 1-based step or 0, atom bit) triples, earliest step first.

    Execution-for-analysis: effects apply even where preconditions fail,
    so every step gets diagnosed in one sweep.
    """
    out = []
    state = task.init_mask
    for k, ai in enumerate(plan_ids, start=1):
        missing = task.pre_masks[ai] & ~state
        while missing:
            bit = (missing & -missing).bit_length() - 1
            out.append((UNSATISFIED_PRECONDITION, k, bit))
            missing &= missing - 1
        state = task.apply(state, ai)
    unmet = task.goal_mask & ~state
    while unmet:
        bit = (unmet & -unmet).bit_length() - 1
        out.append((UNMET_GOAL, 0, bit))
        unmet &= unmet - 1
    return out


def _flaw_count(task: GroundTask, plan_ids: list[int]) -> int:
    count = 0
    state = task.init_mask
    for ai in plan_ids:
        count += (task.pre_masks[ai] & ~state).bit_count()
        state = task.apply(state, ai)
    return count + (task.goal_mask & ~state).bit_count()


def _score(task: GroundTask, plan_ids: list[int]) -> tuple[int, int, int]:
    """(summed relaxed costs of flawed atoms, flaw count, plan length).

    Raw flaw count alone has no gradient: fixing a precondition surfaces
    the fixer's own preconditions and the count goes up before it comes
    down, so greedy walks every fix straight back.  Additive relaxed
    costs shrink along exactly those chains; the count and length keys
    only break ties.
    """
    costs = task.atom_costs()
    cost_sum = 0
    count = 0
    state = task.init_mask
    for ai in plan_ids:
        missing = task.pre_masks[ai] & ~state
        state = task.apply(state, ai)
        count += missing.bit_count()
        while missing:
            bit = (missing & -missing).bit_length() - 1
            cost_sum += costs[bit]
            missing &= missing - 1
    unmet = task.goal_mask & ~state
    count += unmet.bit_count()
    while unmet:
        bit = (unmet & -unmet).bit_length() - 1
        cost_sum += costs[bit]
        unmet &= unmet - 1
    return (cost_sum, count, len(plan_ids))


def detect_flaws(domain: DomainModel, instance: ProblemInstance, plan: Plan) -> list[Flaw]:
    """All flaws of *plan*: empty exactly when the plan is valid."""
    task = GroundTask(domain, instance)
    flaws = []
    for kind, step_idx, bit in _flaw_bits(task, _resolve_plan(task, plan)):
        flaws.append(Flaw(kind=kind, atom=task.atoms[bit],
                          step_index=step_idx if kind == UNSATISFIED_PRECONDITION else None))
    flaws.sort(key=lambda f: (f.step_index or math.inf, atom_sort_key(f.atom)))
    return flaws


def _neighbors(task: GroundTask, plan_ids: list[int],
               flaw: tuple[str, int, int], insertable: list[int]) -> list[tuple[str, int, int]]:
    """Moves addressing *flaw*: ('insert', pos, action) / ('delete', pos, -1)."""
    kind, step_k, bit = flaw
    mask = 1 << bit
    moves: list[tuple[str, int, int]] = []
    at = (step_k - 1) if kind == UNSATISFIED_PRECONDITION else len(plan_ids)
    for ai in task.achievers.get(bit, ()):
        if ai in insertable:
            moves.append(("insert", at, ai))
    for j in range(at):
        if task.del_masks[plan_ids[j]] & mask:
            moves.append(("delete", j, -1))
    if kind == UNSATISFIED_PRECONDITION:
        moves.append(("delete", at, -1))
    return moves


def _applied(plan_ids: list[int], move: tuple[str, int, int]) -> list[int]:
    op, pos, ai = move
    if op == "insert":
        return plan_ids[:pos] + [ai] + plan_ids[pos:]
    return plan_ids[:pos] + plan_ids[pos + 1:]


def repair(domain: DomainModel, instance: ProblemInstance, seed: SeedKind,
           config: SearchConfig = SearchConfig()) -> RepairTrace:
    """Run the flaw-repair search from *seed* until valid or out of budget.

    Deterministic in (domain, instance, seed, config); solved plans are
    re-validated before being returned.
    """
    instance.validate_against(domain)
    task = GroundTask(domain, instance)
    insertable_list = task.search_action_indices()
    insertable = set(insertable_list)

    if seed.kind == "empty":
        seed_ids: list[int] = []
    elif seed.kind == "random":
        rng = derive_rng(config.rng_seed, "seed-plan")
        seed_ids = [rng.randrange(len(task.actions)) for _ in range(seed.length)]
    elif seed.kind == "provided":
        if seed.plan is None:
            raise RepairError("provided seed has no plan")
        seed_ids = _resolve_plan(task, seed.plan)
    else:
        raise RepairError(f"unknown seed kind {seed.kind!r}")

    rng = derive_rng(config.rng_seed, "search", 0)
    plan_ids = list(seed_ids)
    steps = 0
    budget = config.max_steps
    restarts = 0
    flaw_history = 0
    visited = {tuple(plan_ids)}  # tabu: a pass never walks a fix straight back

    while True:
        flaws = _flaw_bits(task, plan_ids)
        flaw_history += 1
        if not flaws:
            plan = Plan(tuple(task.actions[i].step for i in plan_ids))
            report = validate(domain, instance, plan, RelaxationMode.NONE)
            if report.verdict != VALID:  # soundness is checked, not assumed
                raise AssertionError(f"repair produced an invalid plan: {report.verdict}")
            return RepairTrace(outcome="solved", plan=plan, search_steps=steps,
                               restarted=restarts > 0, seed=seed,
                               flaw_history_len=flaw_history)

        moves = _neighbors(task, plan_ids, flaws[0], insertable)
        out_of_budget = steps >= budget
        if moves and not out_of_budget:
            candidates = [(m, tuple(_applied(plan_ids, m))) for m in moves]
            fresh = [c for c in candidates if c[1] not in visited]
            pool = fresh if fresh else candidates
            if rng.random() < config.noise:
                move, result = pool[rng.randrange(len(pool))]
            else:
                scored = [(_score(task, list(result)), i) for i, (_, result) in enumerate(pool)]
                best = min(s for s, _ in scored)
                move, result = pool[rng.choice([i for s, i in scored if s == best])]
            plan_ids = list(result)
            visited.add(result)
            steps += 1
            continue

        if restarts < config.restarts_allowed:
            restarts += 1
            budget += config.restart_extra_steps
            rng = derive_rng(config.rng_seed, "search", restarts)
            plan_ids = list(seed_ids)
            visited = {tuple(plan_ids)}
            continue
        return RepairTrace(outcome="exhausted", plan=None, search_steps=steps,
                           restarted=restarts > 0, seed=seed,
                           flaw_history_len=flaw_history)


def random_seed_plan(domain: DomainModel, instance: ProblemInstance, length: int,
                     rng: random.Random | int) -> Plan:
    """Uniform ground actions, no applicability filtering, exact length."""
    if length < 0:
        raise RepairError("length must be >= 0")
    task = GroundTask(domain, instance)
    if not task.actions and length > 0:
        raise RepairError("domain grounds to no actions for this instance")
    if isinstance(rng, int):
        rng = derive_rng(rng, "random-plan")
    return Plan(tuple(task.actions[rng.randrange(len(task.actions))].step
                      for _ in range(length)))


def corrupt_plan(plan: Plan, fraction: float, rng: random.Random | int,
                 actions) -> Plan:
    """Replace ceil(fraction * len) uniformly chosen steps with random
    ground actions drawn from *actions* (a ground-action pool)."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError("fraction must be within [0, 1]")
    if isinstance(rng, int):
        rng = derive_rng(rng, "corrupt-plan")
    n = len(plan.steps)
    count = math.ceil(fraction * n)
    if count == 0:
        return plan
    actions = list(actions)
    chosen = set(rng.sample(range(n), count))
    steps = []
    for i, s in enumerate(plan.steps):
        if i in chosen:
            picked = actions[rng.randrange(len(actions))]
            steps.append(picked.step if hasattr(picked, "step") else picked)
        else:
            steps.append(s)
    return Plan(tuple(steps))
