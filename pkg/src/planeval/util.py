"""Small shared helpers: canonical JSON and deterministic RNG derivation."""

from __future__ import annotations

import hashlib
import json
import random


def canonical_json(value) -> str:
    """Stable single-line JSON: sorted keys, fixed separators."""
    return json.dumps(value, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def stable_hash(value) -> str:
    """Hex digest of the canonical JSON form of *value*."""
    return hashlib.sha256(canonical_json(value).encode("utf-8")).hexdigest()


def derive_rng(seed: int, *labels) -> random.Random:
    """An independent RNG stream for (seed, labels), stable across processes.

    Per-instance streams keep dataset builds order-independent when fanned
    out across workers.
    """
    material = ":".join([str(seed)] + [str(x) for x in labels])
    digest = hashlib.sha256(material.encode("utf-8")).digest()
    return random.Random(int.from_bytes(digest[:8], "big"))
