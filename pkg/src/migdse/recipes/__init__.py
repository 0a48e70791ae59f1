"""The 30-entry recipe table and its application.

Ids are dense, stable, and used as training labels, so the table order below
must never change.  Every recipe is deterministic and function preserving.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from typing import Iterator

from ..mig import Mig, cleanup_dangling
from .balance import pass_balance
from .invert import pass_invert_opt
from .refactor import pass_refactor
from .resub import pass_resub
from .rewrite import pass_rewrite
from .sweep import pass_sweep

FAMILIES = ("Rewrite", "Resub", "Refactor", "Balance", "Sweep", "InvertOpt", "Composite")
NUM_RECIPES = 30


@dataclass(frozen=True)
class RecipeSpec:
    id: int
    family: str
    params: tuple[tuple[str, object], ...] = ()

    def param(self, name: str):
        return dict(self.params)[name]

    def describe(self) -> str:
        parts = [f"id={self.id}", f"family={self.family}"]
        for k, v in self.params:
            if isinstance(v, bool):
                v = "yes" if v else "no"
            elif isinstance(v, tuple):
                v = "+".join(str(x) for x in v)
            parts.append(f"{k}={v}")
        return " ".join(parts)


def _build_table() -> tuple[RecipeSpec, ...]:
    specs: list[RecipeSpec] = []

    def add(family, **params):
        specs.append(RecipeSpec(len(specs), family, tuple(params.items())))

    for rule_set in ("assoc", "dist", "all"):
        for allow in (False, True):
            add("Rewrite", rule_set=rule_set, allow_area_increase=allow)
    for leaves in (6, 8, 10, 12):
        for divisors in (8, 16):
            add("Resub", max_window_leaves=leaves, max_divisors=divisors)
    for cone in (4, 6, 8, 10):
        for allow in (False, True):
            add("Refactor", max_cone_inputs=cone, allow_area_increase=allow)
    add("Balance", mode="strict")
    add("Balance", mode="relaxed")
    add("Sweep")
    add("InvertOpt")

    def find(family, **params):
        want = tuple(params.items())
        return next(s.id for s in specs if s.family == family and s.params == want)

    composites = [
        (find("Sweep"), find("Rewrite", rule_set="all", allow_area_increase=False)),
        (find("Resub", max_window_leaves=10, max_divisors=16), find("Balance", mode="strict")),
        (find("Refactor", max_cone_inputs=6, allow_area_increase=False), find("Sweep")),
        (find("Rewrite", rule_set="all", allow_area_increase=True),
         find("Resub", max_window_leaves=8, max_divisors=8)),
    ]
    for steps in composites:
        add("Composite", steps=steps)
    assert len(specs) == NUM_RECIPES
    return tuple(specs)


RECIPES: tuple[RecipeSpec, ...] = _build_table()


def recipe_table() -> tuple[RecipeSpec, ...]:
    return RECIPES


def get_recipe(recipe_id: int) -> RecipeSpec:
    if not 0 <= recipe_id < NUM_RECIPES:
        raise ValueError(f"recipe id {recipe_id} out of range 0..{NUM_RECIPES - 1}")
    return RECIPES[recipe_id]


def manifest() -> str:
    """Line-oriented ``key=value`` description of the table."""
    return "".join(spec.describe() + "\n" for spec in RECIPES)


def manifest_hash() -> str:
    return hashlib.sha256(manifest().encode()).hexdigest()[:16]


def parse_manifest(text: str) -> list[dict[str, str]]:
    rows = []
    for line in text.splitlines():
        if line.strip():
            rows.append(dict(field.split("=", 1) for field in line.split()))
    return rows


def _run(mig: Mig, spec: RecipeSpec) -> Mig:
    p = dict(spec.params)
    fam = spec.family
    if fam == "Rewrite":
        return pass_rewrite(mig, p["rule_set"], p["allow_area_increase"])
    if fam == "Resub":
        return pass_resub(mig, p["max_window_leaves"], p["max_divisors"])
    if fam == "Refactor":
        return pass_refactor(mig, p["max_cone_inputs"], p["allow_area_increase"])
    if fam == "Balance":
        return pass_balance(mig, p["mode"])
    if fam == "Sweep":
        return pass_sweep(mig)
    if fam == "InvertOpt":
        return pass_invert_opt(mig)
    if fam == "Composite":
        for step in p["steps"]:
            mig = _run(mig, RECIPES[step])
        return mig
    raise ValueError(f"unknown family {fam!r}")


def apply_recipe(mig: Mig, spec: RecipeSpec | int) -> Mig:
    """Apply one recipe; returns a new, cleaned-up, equivalent MIG."""
    if isinstance(spec, int):
        spec = get_recipe(spec)
    if mig.num_allocated == 0:
        return cleanup_dangling(mig)
    return cleanup_dangling(_run(mig, spec))


def iter_families() -> Iterator[str]:
    yield from FAMILIES


__all__ = [
    "RecipeSpec", "RECIPES", "NUM_RECIPES", "FAMILIES", "recipe_table", "get_recipe",
    "apply_recipe", "manifest", "manifest_hash", "parse_manifest", "pass_rewrite",
    "pass_resub", "pass_refactor", "pass_balance", "pass_sweep", "pass_invert_opt",
]
