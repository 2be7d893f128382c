"""Seeded random quality models for property tests."""

from __future__ import annotations

import random

from qproc.catalog import CATALOG
from qproc.errors import DecompositionCycle
from qproc.model import QualityModel

# Awkward names on purpose: keywords, spaces, quotes, cross-kind collisions.
NAMES = [
    "A", "B", "Shaft", "Turning", "process", "product", "cause", "two words",
    'say "hi"', "Ünïcode", "x_1", "Gauge", "on", "model", "42",
]
ATTR_KEYS = ["description", "value", "unit", "critical", "done", "interval", "note", "weight"]


def random_scalar(rng: random.Random):
    pick = rng.randrange(6)
    if pick == 0:
        return rng.choice(["", "mm", "a \"quoted\" text", "tab\tand\nnewline", "ß∂ƒ", "[x = 1]"])
    if pick == 1:
        return rng.randint(-1000, 1000)
    if pick == 2:
        return rng.uniform(-1e3, 1e3)
    if pick == 3:
        return rng.choice([0.1, 1e-9, 2.5e20, -0.0, 3.0])
    return rng.random() < 0.5


def random_model(seed: int, max_entities: int = 30) -> QualityModel:
    rng = random.Random(seed)
    model = QualityModel(f"Gen{seed}")
    kinds = list(CATALOG.kinds)
    for _ in range(rng.randint(0, max_entities)):
        kind = rng.choice(kinds)
        name = rng.choice(NAMES)
        if model.find(kind, name) is not None:
            name = f"{name}{len(model.entities)}"
        attrs = {}
        for key in rng.sample(ATTR_KEYS, rng.randint(0, 2)):
            attrs[key] = random_scalar(rng)
        model.add_entity(kind, name, attrs)

    ids = list(model.entities)
    relations = list(CATALOG.relations.values())
    present = set()
    for _ in range(rng.randint(0, 2 * len(ids))):
        rel = rng.choice(relations)
        sources = [i for i in ids if CATALOG.conforms(model.entities[i].kind, rel.sources)]
        targets = [i for i in ids if CATALOG.conforms(model.entities[i].kind, rel.targets)]
        if not sources or not targets:
            continue
        src, tgt = rng.choice(sources), rng.choice(targets)
        if (rel.name, src, tgt) in present:
            continue
        try:
            model.add_link(rel.name, src, tgt)
        except DecompositionCycle:
            continue
        present.add((rel.name, src, tgt))
    return model
