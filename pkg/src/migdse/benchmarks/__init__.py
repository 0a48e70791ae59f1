"""Bundled benchmark circuits (AIGER ASCII, naive structure)."""

from __future__ import annotations

import os

from ..io import parse_aiger_mig
from ..mig import Mig

_HERE = os.path.dirname(os.path.abspath(__file__))


def names() -> list[str]:
    return sorted(f[:-4] for f in os.listdir(_HERE) if f.endswith(".aag"))


def path(name: str) -> str:
    p = os.path.join(_HERE, f"{name}.aag")
    if not os.path.exists(p):
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(names())}")
    return p


def load(name: str) -> Mig:
    with open(path(name)) as fh:
        return parse_aiger_mig(fh.read())
