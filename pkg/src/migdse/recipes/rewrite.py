"""Algebraic MIG rewriting.

Rules, with complements pushed through fanins by self-duality
(``~MAJ(a, b, c) = MAJ(~a, ~b, ~c)``):

* associativity       MAJ(x, u, MAJ(y, u, z)) = MAJ(z, u, MAJ(y, u, x))
* compl. associativity MAJ(x, u, MAJ(y, ~u, z)) = MAJ(x, u, MAJ(y, x, z))
* distributivity R->L MAJ(MAJ(x, y, u), MAJ(x, y, v), z) = MAJ(x, y, MAJ(u, v, z))
* distributivity L->R the reverse expansion
"""

from __future__ import annotations

from ..mig import Mig, node_count
from ._work import WorkGraph, effective_fanins, placeholder

RULE_SETS = ("assoc", "dist", "all")

_P0 = placeholder(0)
_P1 = placeholder(1)
_P2 = placeholder(2)
_PAIRS = ((0, 1, 2), (0, 2, 1), (1, 2, 0))


def _assoc_candidates(wg: WorkGraph, f):
    for i in range(3):
        inner = effective_fanins(wg, f[i])
        if inner is None:
            continue
        others = [f[j] for j in range(3) if j != i]
        for ui in range(2):
            u, x = others[ui], others[1 - ui]
            if u in inner:
                rest = list(inner)
                rest.remove(u)
                y, z = rest
                yield [(y, u, x), (z, u, _P0)], _P1
                yield [(z, u, x), (y, u, _P0)], _P1
            if (u ^ 1) in inner:
                rest = list(inner)
                rest.remove(u ^ 1)
                y, z = rest
                yield [(y, x, z), (x, u, _P0)], _P1


def _dist_candidates(wg: WorkGraph, f):
    eff = [effective_fanins(wg, s) for s in f]
    for i, j, k in _PAIRS:
        a, b = eff[i], eff[j]
        if a is None or b is None:
            continue
        common = [s for s in a if s in b]
        if len(common) < 2:
            continue
        for x, y in ((common[0], common[1]),) if len(common) == 2 else \
                ((common[0], common[1]), (common[0], common[2]), (common[1], common[2])):
            u = [s for s in a if s != x and s != y][0]
            v = [s for s in b if s != x and s != y][0]
            yield [(u, v, f[k]), (x, y, _P0)], _P1
    for i in range(3):
        inner = eff[i]
        if inner is None:
            continue
        x, y = (f[j] for j in range(3) if j != i)
        for z, u, v in ((inner[0], inner[1], inner[2]), (inner[1], inner[0], inner[2]),
                        (inner[2], inner[0], inner[1])):
            yield [(x, y, u), (x, y, v), (_P0, _P1, z)], _P2


def pass_rewrite(mig: Mig, rule_set: str = "all", allow_area_increase: bool = False) -> Mig:
    """One topological sweep of algebraic rewriting.

    A candidate is accepted when its MFFC-based gain is positive, or zero with
    ``allow_area_increase``.  Without that flag the result never has more
    nodes than the input.
    """
    if rule_set not in RULE_SETS:
        raise ValueError(f"unknown rule set {rule_set!r}")
    wg = WorkGraph(mig)
    use_assoc = rule_set in ("assoc", "all")
    use_dist = rule_set in ("dist", "all")
    threshold = 0 if allow_area_increase else 1
    for n in range(wg.first, wg.orig_size):
        if not wg.live(n):
            continue
        f = wg.fanins(n)
        if f != wg.fan[n]:
            hit = wg.mig.lookup(*f)
            if hit is not None and hit >> 1 != n:
                wg.replace(n, hit)
                continue
        freed = wg.deref(n)
        best = None
        best_gain = threshold - 1
        if use_assoc:
            for template, result in _assoc_candidates(wg, f):
                g = wg.gain(n, freed, template, result)
                if g is not None and g > best_gain:
                    best, best_gain = (template, result), g
        if use_dist:
            for template, result in _dist_candidates(wg, f):
                g = wg.gain(n, freed, template, result)
                if g is not None and g > best_gain:
                    best, best_gain = (template, result), g
        wg.ref(n)
        if best is not None:
            wg.apply(n, *best)
    if not wg.changed:
        return mig
    out = wg.finish()
    if not allow_area_increase and node_count(out) > node_count(mig):
        return mig
    return out
