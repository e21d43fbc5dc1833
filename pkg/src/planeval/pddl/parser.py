"""Recursive-descent parser for the supported PDDL subset.

Supported: ``:strips`` and ``:typing`` requirements, conjunctive
preconditions, effects as conjunctions of literals.  Anything else
(negative preconditions, conditional effects, costs, constants, axioms)
is rejected with a positioned error, never silently dropped.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .model import (
    ROOT_TYPE,
    ActionSchema,
    Atom,
    DomainModel,
    ModelError,
    Plan,
    PlanStep,
    PredicateSchema,
    ProblemInstance,
    make_state,
)

SUPPORTED_REQUIREMENTS = {":strips", ":typing"}

_TOKEN_RE = re.compile(r"\(|\)|[^\s();]+")


class ParseError(ValueError):
    """Syntax or semantic error in PDDL text, with source position."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        where = f" at line {line}, column {column}" if line else ""
        super().__init__(f"{message}{where}")


@dataclass(frozen=True)
class _Token:
    text: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        comment = line.find(";")
        if comment >= 0:
            line = line[:comment]
        for m in _TOKEN_RE.finditer(line):
            tokens.append(_Token(m.group(0).lower(), lineno, m.start() + 1))
    return tokens


class _Reader:
    def __init__(self, tokens: list[_Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> _Token | None:
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def next(self) -> _Token:
        tok = self.peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", 0, 0)
            raise ParseError("unexpected end of input", last.line, last.column)
        self.pos += 1
        return tok

    def expect(self, text: str) -> _Token:
        tok = self.next()
        if tok.text != text:
            raise ParseError(f"expected {text!r}, got {tok.text!r}", tok.line, tok.column)
        return tok

    def at(self, text: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.text == text

    def name(self, what: str) -> _Token:
        tok = self.next()
        if tok.text in ("(", ")"):
            raise ParseError(f"expected {what}, got {tok.text!r}", tok.line, tok.column)
        return tok


def _parse_typed_names(r: _Reader, variables: bool) -> list[tuple[str, str]]:
    """Parse ``n1 n2 - type n3 ...`` until the closing paren; untyped = object."""
    out: list[tuple[str, str]] = []
    pending: list[_Token] = []
    while not r.at(")"):
        tok = r.name("a name")
        if tok.text == "-":
            if not pending:
                raise ParseError("type separator without names", tok.line, tok.column)
            type_tok = r.name("a type")
            out.extend((p.text, type_tok.text) for p in pending)
            pending = []
            continue
        if variables and not tok.text.startswith("?"):
            raise ParseError(f"expected a variable, got {tok.text!r}", tok.line, tok.column)
        if not variables and tok.text.startswith("?"):
            raise ParseError(f"expected an object name, got {tok.text!r}", tok.line, tok.column)
        pending.append(tok)
    out.extend((p.text, ROOT_TYPE) for p in pending)
    return out


def _parse_atom(r: _Reader) -> tuple[Atom, _Token]:
    open_tok = r.expect("(")
    head = r.name("a predicate name")
    if head.text in ("and", "not", "or", "forall", "exists", "when", "=", "imply"):
        raise ParseError(f"unsupported construct {head.text!r} (plain atom expected)",
                         head.line, head.column)
    args = []
    while not r.at(")"):
        args.append(r.name("an argument").text)
    r.expect(")")
    try:
        return Atom(head.text, tuple(args)), open_tok
    except ModelError as e:
        raise ParseError(str(e), head.line, head.column) from None


def _parse_conjunction(r: _Reader, allow_negation: bool) -> list[tuple[Atom, bool, _Token]]:
    """Parse an atom or ``(and ...)`` of literals.

    Returns (atom, negated, position) triples.  Negation is only legal
    where *allow_negation* is set (effects).
    """
    open_tok = r.expect("(")
    tok = r.peek()
    if tok is None:
        raise ParseError("unexpected end of input")
    if tok.text == "and":
        r.next()
        literals: list[tuple[Atom, bool, _Token]] = []
        while not r.at(")"):
            literals.extend(_parse_literal(r, allow_negation))
        r.expect(")")
        return literals
    r.pos -= 1  # re-read the '(' as part of a single literal
    return _parse_literal(r, allow_negation)


def _parse_literal(r: _Reader, allow_negation: bool) -> list[tuple[Atom, bool, _Token]]:
    open_tok = r.expect("(")
    tok = r.peek()
    if tok is None:
        raise ParseError("unexpected end of input")
    if tok.text == "not":
        if not allow_negation:
            raise ParseError("negative preconditions/goals are not supported", tok.line, tok.column)
        r.next()
        atom, pos = _parse_atom(r)
        r.expect(")")
        return [(atom, True, pos)]
    if tok.text in ("and", "or", "forall", "exists", "when", "imply", "=", "increase", "decrease", "assign"):
        raise ParseError(f"unsupported construct {tok.text!r}", tok.line, tok.column)
    r.pos -= 1
    atom, pos = _parse_atom(r)
    return [(atom, False, pos)]


def _parse_action(r: _Reader) -> ActionSchema:
    name_tok = r.name("an action name")
    params: list[tuple[str, str]] = []
    pre: list[tuple[Atom, bool, _Token]] = []
    add: list[Atom] = []
    delete: list[Atom] = []
    seen: set[str] = set()
    while not r.at(")"):
        key = r.name("an action section")
        if key.text in seen:
            raise ParseError(f"duplicate {key.text} section", key.line, key.column)
        seen.add(key.text)
        if key.text == ":parameters":
            r.expect("(")
            params = _parse_typed_names(r, variables=True)
            r.expect(")")
        elif key.text == ":precondition":
            pre = _parse_conjunction(r, allow_negation=False)
        elif key.text == ":effect":
            for atom, negated, _ in _parse_conjunction(r, allow_negation=True):
                (delete if negated else add).append(atom)
        else:
            raise ParseError(f"unsupported action section {key.text!r}", key.line, key.column)
    r.expect(")")
    try:
        return ActionSchema(
            name=name_tok.text,
            params=tuple(params),
            pre=frozenset(a for a, _, _ in pre),
            add=frozenset(add),
            delete=frozenset(delete),
        )
    except ModelError as e:
        raise ParseError(str(e), name_tok.line, name_tok.column) from None


def parse_domain(text: str) -> DomainModel:
    """Parse PDDL domain text into a validated :class:`DomainModel`."""
    r = _Reader(_tokenize(text))
    r.expect("(")
    r.expect("define")
    r.expect("(")
    r.expect("domain")
    name = r.name("a domain name").text
    r.expect(")")

    types: list[tuple[str, str]] = []
    predicates: list[PredicateSchema] = []
    actions: list[ActionSchema] = []
    while not r.at(")"):
        r.expect("(")
        section = r.name("a domain section")
        if section.text == ":requirements":
            while not r.at(")"):
                req = r.name("a requirement")
                if req.text not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(f"unsupported requirement {req.text}", req.line, req.column)
            r.expect(")")
        elif section.text == ":types":
            types = _parse_typed_names(r, variables=False)
            r.expect(")")
        elif section.text == ":predicates":
            while not r.at(")"):
                r.expect("(")
                pname = r.name("a predicate name")
                params = _parse_typed_names(r, variables=True)
                r.expect(")")
                try:
                    predicates.append(PredicateSchema(pname.text, tuple(params)))
                except ModelError as e:
                    raise ParseError(str(e), pname.line, pname.column) from None
            r.expect(")")
        elif section.text == ":action":
            actions.append(_parse_action(r))
        else:
            raise ParseError(f"unsupported domain section {section.text!r}",
                             section.line, section.column)
    r.expect(")")
    if r.peek() is not None:
        tok = r.peek()
        raise ParseError(f"trailing content {tok.text!r}", tok.line, tok.column)
    try:
        return DomainModel(name=name, types=tuple(types),
                           predicates=tuple(predicates), actions=tuple(actions))
    except ModelError as e:
        raise ParseError(str(e)) from None


def parse_problem(text: str, domain: DomainModel) -> ProblemInstance:
    """Parse PDDL problem text and validate it against *domain*."""
    r = _Reader(_tokenize(text))
    r.expect("(")
    r.expect("define")
    r.expect("(")
    r.expect("problem")
    pid = r.name("a problem name").text
    r.expect(")")

    domain_name: str | None = None
    objects: list[tuple[str, str]] = []
    init: list[Atom] = []
    goal: list[Atom] = []
    while not r.at(")"):
        r.expect("(")
        section = r.name("a problem section")
        if section.text == ":domain":
            domain_name = r.name("a domain name").text
            r.expect(")")
        elif section.text == ":requirements":
            while not r.at(")"):
                req = r.name("a requirement")
                if req.text not in SUPPORTED_REQUIREMENTS:
                    raise ParseError(f"unsupported requirement {req.text}", req.line, req.column)
            r.expect(")")
        elif section.text == ":objects":
            objects = _parse_typed_names(r, variables=False)
            r.expect(")")
        elif section.text == ":init":
            while not r.at(")"):
                atom, pos = _parse_atom(r)
                if not atom.is_ground:
                    raise ParseError(f"init atom {atom} is not ground", pos.line, pos.column)
                init.append(atom)
            r.expect(")")
        elif section.text == ":goal":
            for atom, negated, pos in _parse_conjunction(r, allow_negation=False):
                if not atom.is_ground:
                    raise ParseError(f"goal atom {atom} is not ground", pos.line, pos.column)
                goal.append(atom)
            r.expect(")")
        else:
            raise ParseError(f"unsupported problem section {section.text!r}",
                             section.line, section.column)
    r.expect(")")
    if r.peek() is not None:
        tok = r.peek()
        raise ParseError(f"trailing content {tok.text!r}", tok.line, tok.column)
    if domain_name is None:
        raise ParseError("problem is missing a (:domain ...) section")
    try:
        instance = ProblemInstance(
            id=pid,
            domain_name=domain_name,
            objects=tuple(objects),
            init=make_state(init),
            goal=frozenset(goal),
        )
        instance.validate_against(domain)
    except ModelError as e:
        raise ParseError(str(e)) from None
    return instance


def parse(text: str, kind: str, domain: DomainModel | None = None):
    """Parse *text* as a ``domain`` or ``problem``; problems need their domain."""
    if kind == "domain":
        return parse_domain(text)
    if kind == "problem":
        if domain is None:
            raise ValueError("parsing a problem requires its domain")
        return parse_problem(text, domain)
    raise ValueError(f"unknown kind {kind!r} (expected 'domain' or 'problem')")


def parse_plan(text: str) -> Plan:
    """Parse a plan file: one ``(name arg1 arg2)`` per line, ``;`` comments."""
    steps: list[PlanStep] = []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        comment = raw.find(";")
        if comment >= 0:
            raw = raw[:comment]
        line = raw.strip()
        if not line:
            continue
        m = re.fullmatch(r"\(\s*([^\s()]+)((?:\s+[^\s()]+)*)\s*\)", line)
        if m is None:
            raise ParseError(f"malformed plan step {line!r}", lineno, 1)
        steps.append(PlanStep(m.group(1).lower(), tuple(m.group(2).lower().split())))
    return Plan(tuple(steps))
