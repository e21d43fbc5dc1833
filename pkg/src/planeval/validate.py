"""Sound plan validation with the relaxation lattice and repair diagnoses.

Validation stops at the first failing step and reports exactly one
fault, which is what the backprompt loop feeds back per round.
"""

from __future__ import annotations

from dataclasses import dataclass

from .pddl import (
    Atom,
    DomainModel,
    GroundAction,
    Inapplicable,
    ModelError,
    Plan,
    PlanStep,
    ProblemInstance,
    RELAXATION_ORDER,
    RelaxationMode,
    State,
    atom_sort_key,
    ground,
    step,
)
from .translate import DomainTemplates, render_atom_list, render_step

VALID = "valid"
INEXECUTABLE = "inexecutable"
NON_GOAL_REACHING = "non-goal-reaching"

EXIT_CODES = {VALID: 0, INEXECUTABLE: 2, NON_GOAL_REACHING: 3}


@dataclass(frozen=True)
class ValidationReport:
    """Outcome of validating one plan under one relaxation mode.

    ``missing`` is nonempty exactly for precondition failures; malformed
    steps (wrong arity, unknown action) also count as inexecutable but
    carry ``malformed`` text instead, in every mode.
    """

    verdict: str
    mode: RelaxationMode
    step_index: int | None = None  # 1-based failing step
    action: PlanStep | None = None
    missing: frozenset[Atom] = frozenset()
    unmet: frozenset[Atom] = frozenset()
    malformed: str | None = None
    trace: tuple[State, ...] | None = None

    def __post_init__(self) -> None:
        if self.verdict == INEXECUTABLE and not self.missing and self.malformed is None:
            raise ValueError("inexecutable reports need missing atoms or a malformed reason")
        if self.verdict == NON_GOAL_REACHING and not self.unmet:
            raise ValueError("non-goal-reaching reports need unmet goal atoms")

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.verdict]

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "mode": self.mode.value,
            "step": self.step_index,
            "action": str(self.action) if self.action else None,
            "missing": [str(a) for a in sorted(self.missing, key=atom_sort_key)],
            "unmet": [str(a) for a in sorted(self.unmet, key=atom_sort_key)],
            "malformed": self.malformed,
            "diagnosis": diagnose(self) if self.verdict != VALID else None,
        }


def _ground_step(domain: DomainModel, instance: ProblemInstance,
                 plan_step: PlanStep) -> GroundAction | str:
    """Resolve a plan step, or describe why it is malformed."""
    schema = domain.action_map.get(plan_step.name)
    if schema is None:
        return f"action {plan_step.name!r} is not part of the domain"
    if len(plan_step.args) != schema.arity:
        return (f"action {plan_step.name!r} takes {schema.arity} parameter(s) "
                f"but {len(plan_step.args)} were given")
    binding = {v: o for (v, _), o in zip(schema.params, plan_step.args)}
    try:
        return ground(schema, binding, instance.object_map, domain)
    except ModelError as e:
        return str(e)


def validate(domain: DomainModel, instance: ProblemInstance, plan: Plan,
             mode: RelaxationMode = RelaxationMode.NONE,
             keep_trace: bool = False) -> ValidationReport:
    """Execute *plan* from the initial state and classify the outcome."""
    instance.validate_against(domain)
    state = instance.init
    states = [state]
    for index, plan_step in enumerate(plan.steps, start=1):
        resolved = _ground_step(domain, instance, plan_step)
        if isinstance(resolved, str):
            return ValidationReport(
                verdict=INEXECUTABLE, mode=mode, step_index=index,
                action=plan_step, malformed=resolved,
                trace=tuple(states) if keep_trace else None,
            )
        outcome = step(state, resolved, mode)
        if isinstance(outcome, Inapplicable):
            return ValidationReport(
                verdict=INEXECUTABLE, mode=mode, step_index=index,
                action=plan_step, missing=outcome.missing,
                trace=tuple(states) if keep_trace else None,
            )
        state = outcome
        states.append(state)
    unmet = instance.goal - state
    if unmet:
        return ValidationReport(verdict=NON_GOAL_REACHING, mode=mode, unmet=frozenset(unmet),
                                trace=tuple(states) if keep_trace else None)
    return ValidationReport(verdict=VALID, mode=mode,
                            trace=tuple(states) if keep_trace else None)


def diagnose(report: ValidationReport, templates: DomainTemplates | None = None) -> str:
    """Deterministic fault text, ready to drop into a backprompt.

    With templates the atoms render as domain sentences; without, as
    PDDL literals.  Obfuscated inputs therefore yield diagnoses in the
    obfuscated vocabulary only.
    """
    if report.verdict == VALID:
        raise ValueError("diagnose called on a valid report")

    def atoms(atom_set) -> str:
        if templates is not None:
            return render_atom_list(atom_set, templates)
        ordered = sorted(atom_set, key=atom_sort_key)
        return ", ".join(str(a) for a in ordered)

    if report.verdict == INEXECUTABLE:
        action_text = (render_step(report.action, templates)
                       if templates is not None and report.malformed is None
                       else str(report.action))
        if report.malformed is not None:
            return (f"The plan is invalid: step {report.step_index} ({action_text}) "
                    f"is malformed: {report.malformed}.")
        return (f"The plan is invalid: step {report.step_index} ({action_text}) "
                f"cannot be executed because the following condition(s) do not hold "
                f"at that point: {atoms(report.missing)}.")
    return ("The plan executes but does not achieve the goal: the following goal "
            f"condition(s) remain unmet: {atoms(report.unmet)}.")


def relaxed_sweep(domain: DomainModel, instance: ProblemInstance,
                  plan: Plan) -> dict[RelaxationMode, ValidationReport]:
    """Validate under all four modes; checks the lattice as a postcondition."""
    reports = {mode: validate(domain, instance, plan, mode) for mode in RelaxationMode}
    for mode, report in reports.items():
        if report.verdict == VALID:
            for weaker in RELAXATION_ORDER[mode]:
                if reports[weaker].verdict != VALID:
                    raise AssertionError(
                        f"relaxation monotonicity violated: valid under {mode.value} "
                        f"but {reports[weaker].verdict} under {weaker.value}")
    return reports
