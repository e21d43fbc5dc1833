"""Template-based PDDL <-> natural language translation and prompt assembly.

Every prompt ends with a problem description and invites a plan
terminated by the plan-end tag; the extractor reads generated text back
into ground plans strictly by pattern, never by free-form understanding.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from .pddl import (
    Atom,
    DomainModel,
    Inapplicable,
    Plan,
    PlanStep,
    ProblemInstance,
    RelaxationMode,
    atom_sort_key,
    ground,
    serialize_domain,
    serialize_problem,
    step,
)
from .resources import template_data

PLAN_END_TAG = "[PLAN END]"
PLAN_MARKER = "[PLAN]"
STATEMENT_MARKER = "[STATEMENT]"

_SLOT_RE = re.compile(r"\{(\d+)\}")
_LIST_PREFIX_RE = re.compile(r"^(?:\d+[.):]|[-*•])\s*")
_ACTION_TAG_RE = re.compile(r"^\[action(?:\s+\d+)?\]\s*(.*)$", re.IGNORECASE)
_ANNOTATION_TAG_RE = re.compile(r"^\[(state|reason|verdict)\b", re.IGNORECASE)


class TemplateError(ValueError):
    """Templates do not cover the domain or are ambiguous."""


class TranslationError(ValueError):
    """A plan or phrase cannot be translated with the bound templates."""


def normalize_line(line: str) -> str:
    line = _LIST_PREFIX_RE.sub("", line.strip())
    line = " ".join(line.lower().split())
    return line.rstrip(".,;:")


@dataclass(frozen=True)
class PromptStyle:
    """Prompt configuration: surface form, shot count, state-tracking flag."""

    surface: str = "natural"  # natural | pddl
    shots: int = 1  # 0 | 1
    cot: bool = False

    def __post_init__(self) -> None:
        if self.surface not in ("natural", "pddl"):
            raise ValueError(f"unknown surface {self.surface!r}")
        if self.shots not in (0, 1):
            raise ValueError("shots must be 0 or 1")
        if self.cot and (self.surface != "natural" or self.shots != 1):
            raise ValueError("state-tracking prompts require the natural one-shot setting")

    @property
    def label(self) -> str:
        kind = "cot" if self.cot else ("one-shot" if self.shots else "zero-shot")
        return f"{self.surface}/{kind}"


@dataclass(frozen=True)
class DomainTemplates:
    """Per-domain sentence templates with positional ``{k}`` slots."""

    domain_name: str
    actions: dict[str, str]
    predicates: dict[str, str]
    preamble: str | None = None
    back_patterns: dict[str, re.Pattern] = field(init=False, compare=False, repr=False)

    def __post_init__(self) -> None:
        patterns = {}
        for name, template in self.actions.items():
            patterns[name] = _compile_pattern(template, f"action {name}")
        object.__setattr__(self, "back_patterns", patterns)

    @classmethod
    def from_dict(cls, data: dict) -> "DomainTemplates":
        return cls(
            domain_name=data["domain"],
            actions=dict(data["actions"]),
            predicates=dict(data["predicates"]),
            preamble=data.get("preamble"),
        )

    @classmethod
    def shipped(cls, name: str) -> "DomainTemplates":
        return cls.from_dict(template_data(name))

    def validate_for(self, domain: DomainModel) -> None:
        """Coverage, slot arity, and pairwise non-ambiguity checks."""
        if self.domain_name != domain.name:
            raise TemplateError(f"templates are for {self.domain_name!r}, not {domain.name!r}")
        for action in domain.actions:
            template = self.actions.get(action.name)
            if template is None:
                raise TemplateError(f"no sentence template for action {action.name}")
            _check_slots(template, action.arity, f"action {action.name}")
        for predicate in domain.predicates:
            template = self.predicates.get(predicate.name)
            if template is None:
                raise TemplateError(f"no sentence template for predicate {predicate.name}")
            _check_slots(template, predicate.arity, f"predicate {predicate.name}")
        for name, template in self.actions.items():
            arity = len(set(_SLOT_RE.findall(template)))
            probe = normalize_line(template.format(*[f"zz{i}zz" for i in range(arity)]))
            for other, pattern in self.back_patterns.items():
                if other != name and pattern.fullmatch(probe):
                    raise TemplateError(
                        f"ambiguous templates: phrase for {name!r} also matches {other!r}")


def _check_slots(template: str, arity: int, where: str) -> None:
    slots = [int(s) for s in _SLOT_RE.findall(template)]
    if sorted(set(slots)) != list(range(arity)):
        raise TemplateError(f"{where}: template slots {sorted(set(slots))} "
                            f"do not cover arity {arity}")
    if len(slots) != len(set(slots)):
        raise TemplateError(f"{where}: template repeats a slot")


def _compile_pattern(template: str, where: str) -> re.Pattern:
    # Matches against normalize_line output: lowercase, single spaces.
    pattern = ""
    last = 0
    for m in _SLOT_RE.finditer(template):
        pattern += re.escape(template[last:m.start()].lower())
        pattern += rf"(?P<a{m.group(1)}>[\w-]+)"
        last = m.end()
    pattern += re.escape(template[last:].lower())
    try:
        return re.compile(pattern)
    except re.error as e:
        raise TemplateError(f"{where}: bad pattern: {e}") from None


def mechanical_templates(domain: DomainModel) -> DomainTemplates:
    """Fallback word-for-word templates for domains without curated ones
    (randomized mystery datasets use these)."""

    def phrase(name: str, arity: int) -> str:
        return " ".join([name] + [f"object {{{i}}}" for i in range(arity)])

    return DomainTemplates(
        domain_name=domain.name,
        actions={a.name: phrase(a.name, a.arity) for a in domain.actions},
        predicates={p.name: phrase(p.name, p.arity) for p in domain.predicates},
        preamble=None,
    )


def templates_for_map(base: DomainTemplates, m) -> DomainTemplates:
    """Reuse a template grammar under a rename map (same slots, new words).

    Only sensible for curated tables whose renamed words still read as
    sentences; randomized maps should use :func:`mechanical_templates`.
    """
    return DomainTemplates(
        domain_name=m.domain(base.domain_name),
        actions={m.action(k): v for k, v in base.actions.items()},
        predicates={m.predicate(k): v for k, v in base.predicates.items()},
        preamble=base.preamble,
    )


# ---------------------------------------------------------------------------
# Rendering


def render_atom(atom: Atom, templates: DomainTemplates) -> str:
    template = templates.predicates.get(atom.predicate)
    if template is None:
        raise TranslationError(f"no template for predicate {atom.predicate}")
    return template.format(*atom.args)


def render_step(step_: PlanStep, templates: DomainTemplates) -> str:
    template = templates.actions.get(step_.name)
    if template is None:
        raise TranslationError(f"no template for action {step_.name}")
    return template.format(*step_.args)


def render_atom_list(atoms, templates: DomainTemplates) -> str:
    phrases = [render_atom(a, templates) for a in sorted(atoms, key=atom_sort_key)]
    if not phrases:
        return "nothing"
    if len(phrases) == 1:
        return phrases[0]
    return ", ".join(phrases[:-1]) + " and " + phrases[-1]


def domain_description(domain: DomainModel, templates: DomainTemplates) -> str:
    """The lifted domain description: curated preamble when the template
    file has one, otherwise generated fact-by-fact from the schemas."""
    if templates.preamble is not None:
        return templates.preamble
    lines = ["I am working with a set of objects. The following actions are available.", ""]
    for action in domain.actions:
        slot_args = [v.lstrip("?") for v, _ in action.params]
        phrase = templates.actions[action.name].format(*slot_args)

        def facts(atoms) -> str:
            rendered = [templates.predicates[a.predicate].format(*[x.lstrip("?") for x in a.args])
                        for a in sorted(atoms, key=atom_sort_key)]
            return ", ".join(rendered) if rendered else "nothing"

        lines.append(f'To perform "{phrase}", the following facts need to be true: '
                     f"{facts(action.pre)}.")
        lines.append(f"Once it is performed, the following facts will be true: "
                     f"{facts(action.add)}.")
        lines.append(f"Once it is performed, the following facts will be false: "
                     f"{facts(action.delete)}.")
        lines.append("")
    return "\n".join(lines).rstrip()


def plan_to_nl(plan: Plan, templates: DomainTemplates) -> str:
    return "\n".join(render_step(s, templates) for s in plan.steps)


def nl_to_plan(text: str, templates: DomainTemplates) -> Plan:
    """Inverse of :func:`plan_to_nl`; raises on any unmatched line."""
    steps = []
    for raw in text.split("\n"):
        line = normalize_line(raw)
        if not line:
            continue
        matched = _match_action_line(line, templates)
        if matched is None:
            raise TranslationError(f"no action phrase matches {raw.strip()!r}")
        steps.append(matched)
    return Plan(tuple(steps))


def _match_action_line(line: str, templates: DomainTemplates) -> PlanStep | None:
    for name, pattern in templates.back_patterns.items():
        m = pattern.fullmatch(line)
        if m:
            groups = m.groupdict()
            args = tuple(groups[f"a{i}"] for i in range(len(groups)))
            return PlanStep(name, args)
    return None


# ---------------------------------------------------------------------------
# Prompt assembly


@dataclass(frozen=True)
class PromptBundle:
    """Deterministic prompt text plus what the extractor needs back."""

    preamble: str
    example: str | None
    query: str
    plan_end_tag: str
    style: PromptStyle
    action_names: tuple[str, ...]

    def as_text(self) -> str:
        parts = [self.preamble]
        if self.example is not None:
            parts.append(self.example)
        parts.append(self.query)
        return "\n".join(parts)


def _statement_nl(instance: ProblemInstance, templates: DomainTemplates) -> str:
    init = render_atom_list(instance.init, templates)
    goal = render_atom_list(instance.goal, templates)
    return (f"{STATEMENT_MARKER}\nAs initial conditions I have that, {init}.\n"
            f"My goal is to have that {goal}.\n\nMy plan is as follows:\n\n{PLAN_MARKER}")


def _statement_pddl(instance: ProblemInstance) -> str:
    return f"{STATEMENT_MARKER}\n{serialize_problem(instance).rstrip()}\n\n{PLAN_MARKER}"


def build_prompt(domain: DomainModel, instance: ProblemInstance, style: PromptStyle,
                 example: tuple[ProblemInstance, Plan] | None = None,
                 templates: DomainTemplates | None = None) -> PromptBundle:
    """Assemble the full prompt for one instance under one configuration."""
    if (example is not None) != (style.shots == 1):
        raise ValueError("an example must be provided exactly for one-shot styles")
    if example is not None and example[0].domain_name != domain.name:
        raise ValueError(f"example instance belongs to domain {example[0].domain_name!r}")
    instance.validate_against(domain)

    if style.surface == "natural":
        if templates is None:
            raise TemplateError("natural-language prompts need domain templates")
        templates.validate_for(domain)
        preamble = domain_description(domain, templates)
        example_text = None
        if example is not None:
            ex_instance, ex_plan = example
            if style.cot:
                body = annotate_cot(domain, ex_instance, ex_plan, templates)
                tail = (f"{PLAN_END_TAG}\n{_cot_meta_explanation()}\n\n"
                        "Annotate your plan with the same state and reason tags.")
                example_text = f"{_statement_nl(ex_instance, templates)}\n{body}\n{tail}"
            else:
                body = plan_to_nl(ex_plan, templates)
                body = body + "\n" if body else ""
                example_text = f"{_statement_nl(ex_instance, templates)}\n{body}{PLAN_END_TAG}"
        query = _statement_nl(instance, templates)
    else:
        preamble = serialize_domain(domain).rstrip()
        example_text = None
        if example is not None:
            ex_instance, ex_plan = example
            body = "\n".join(str(s) for s in ex_plan.steps)
            body = body + "\n" if body else ""
            example_text = f"{_statement_pddl(ex_instance)}\n{body}{PLAN_END_TAG}"
        query = _statement_pddl(instance)

    return PromptBundle(
        preamble=preamble,
        example=example_text,
        query=query,
        plan_end_tag=PLAN_END_TAG,
        style=style,
        action_names=tuple(a.name for a in domain.actions),
    )


# ---------------------------------------------------------------------------
# State-tracking (chain-of-thought) annotation


def _cot_meta_explanation() -> str:
    return ("The plan above is valid: before each action all of its required "
            "facts were true, and after the final action every goal condition holds.")


def annotate_cot(domain: DomainModel, instance: ProblemInstance, plan: Plan,
                 templates: DomainTemplates) -> str:
    """Annotate each step with the prior state, the reason it applies, and
    the resulting state.  Refuses invalid plans: the annotation would
    assert falsehoods.
    """
    objects = instance.object_map
    state = instance.init
    lines = [f"[STATE 0] I have that, {render_atom_list(state, templates)}."]
    for k, plan_step in enumerate(plan.steps, start=1):
        schema = domain.action_map.get(plan_step.name)
        if schema is None or schema.arity != len(plan_step.args):
            raise TranslationError(f"step {k} ({plan_step}) does not fit the domain")
        binding = {v: o for (v, _), o in zip(schema.params, plan_step.args)}
        action = ground(schema, binding, objects, domain)
        result = step(state, action, RelaxationMode.NONE)
        if isinstance(result, Inapplicable):
            raise TranslationError(f"step {k} ({plan_step}) is not applicable; "
                                   "refusing to annotate an invalid plan")
        phrase = render_step(plan_step, templates)
        reason = render_atom_list(action.pre, templates) if action.pre else "no facts are required"
        lines.append(f"[ACTION {k}] {phrase}")
        lines.append(f"[REASON {k}] {phrase} is applicable because {reason}")
        lines.append(f"[STATE {k}] I have that, {render_atom_list(result, templates)}.")
        state = result
    if not instance.goal <= state:
        raise TranslationError("plan does not reach the goal; refusing to annotate")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Extraction


@dataclass(frozen=True)
class ExtractionFailure:
    """Why no plan could be read out of a response."""

    reason: str
    line: str | None = None


def extract_plan(response: str, bundle: PromptBundle,
                 templates: DomainTemplates | None = None) -> Plan | ExtractionFailure:
    """Read the candidate plan out of generated text.

    Text after the final prompt boundary and before the first plan-end
    tag is considered; each line must back-translate (natural surface)
    or parse as a ground action (pddl surface).  Annotation lines from
    state-tracking prompts are skipped.
    """
    text = response
    marker = text.rfind(PLAN_MARKER)
    if marker >= 0:
        text = text[marker + len(PLAN_MARKER):]
    tag = text.find(bundle.plan_end_tag)
    if tag >= 0:
        text = text[:tag]

    steps: list[PlanStep] = []
    saw_content = False
    for raw in text.split("\n"):
        stripped = raw.strip()
        if not stripped:
            continue
        if bundle.style.cot:
            m = _ACTION_TAG_RE.match(stripped)
            if m is None:
                continue  # state/reason/meta annotation
            stripped = m.group(1)
        elif _ANNOTATION_TAG_RE.match(stripped):
            continue
        saw_content = True
        line = normalize_line(stripped)
        if not line:
            continue
        parsed = _extract_line(line, bundle, templates)
        if parsed is None:
            return ExtractionFailure(reason="unparseable line", line=raw.strip())
        steps.append(parsed)
    if not saw_content and not steps:
        return ExtractionFailure(reason="no plan content before the plan-end tag")
    return Plan(tuple(steps))


def _extract_line(line: str, bundle: PromptBundle,
                  templates: DomainTemplates | None) -> PlanStep | None:
    if bundle.style.surface == "natural":
        if templates is None:
            return None
        return _match_action_line(line, templates)
    m = re.fullmatch(r"\(?\s*([\w-]+)((?:\s+[\w-]+)*)\s*\)?", line)
    if m is None:
        return None
    name = m.group(1)
    if name not in bundle.action_names:
        return None
    return PlanStep(name, tuple(m.group(2).split()))
