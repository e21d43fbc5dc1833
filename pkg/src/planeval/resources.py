"""Loaders for the domain files, translation templates, and rename tables
shipped as package data.  Everything here is plain data a user can copy
out and edit.
"""

from __future__ import annotations

import json
from importlib import resources

from .pddl import DomainModel, parse_domain

_DATA = resources.files(__package__) / "data"


def data_text(relpath: str) -> str:
    return (_DATA / relpath).read_text(encoding="utf-8")


def blocksworld_domain() -> DomainModel:
    return parse_domain(data_text("blocksworld.pddl"))


def logistics_domain() -> DomainModel:
    return parse_domain(data_text("logistics.pddl"))


def domain_for_kind(kind: str) -> DomainModel:
    if kind == "blocksworld":
        return blocksworld_domain()
    if kind == "logistics":
        return logistics_domain()
    raise ValueError(f"unknown domain kind {kind!r}")


def deceptive_table() -> dict:
    """The shipped misleading-rename table (aliases included for common
    spelling variants; a bijection is cut down to the target domain)."""
    return json.loads(data_text("deceptive_map.json"))


def template_data(name: str) -> dict:
    return json.loads(data_text(f"templates/{name}.json"))


# Block names drawn in palette order by the instance generator; the
# deceptive table must cover every name that can appear here.
BLOCK_PALETTE = (
    "red", "blue", "orange", "yellow", "white", "magenta",
    "black", "cyan", "green", "violet", "silver", "gold",
)
