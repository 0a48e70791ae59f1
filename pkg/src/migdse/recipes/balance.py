"""Depth-oriented associativity balancing.

Along the critical fanin, ``MAJ(x, u, MAJ(y, u, z))`` with ``z`` the deepest
signal becomes ``MAJ(z, u, MAJ(y, u, x))``, which pulls ``z`` one level up.
``strict`` accepts only area-neutral moves; ``relaxed`` may spend up to 2% of
the node count.
"""

from __future__ import annotations

from ..mig import Mig, depth, node_count
from ._work import WorkGraph, effective_fanins, placeholder

MODES = ("strict", "relaxed")
RELAXED_SLACK = 0.02

_P0 = placeholder(0)
_P1 = placeholder(1)


def pass_balance(mig: Mig, mode: str = "strict") -> Mig:
    if mode not in MODES:
        raise ValueError(f"unknown balance mode {mode!r}")
    before = node_count(mig)
    budget = int(RELAXED_SLACK * before) if mode == "relaxed" else 0
    spent = 0
    wg = WorkGraph(mig)
    lev = wg.lev
    for n in range(wg.first, wg.orig_size):
        if not wg.live(n):
            continue
        cur = wg.update_level(n)
        f = wg.fanins(n)
        order = sorted(range(3), key=lambda i: (-lev[f[i] >> 1], i))
        crit = order[0]
        inner = effective_fanins(wg, f[crit])
        if inner is None or lev[f[order[1]] >> 1] == lev[f[crit] >> 1]:
            continue
        others = [f[j] for j in range(3) if j != crit]
        freed = wg.deref(n)
        best = None
        best_key = None
        for ui in range(2):
            u, x = others[ui], others[1 - ui]
            if u not in inner:
                continue
            rest = sorted((s for s in inner if s != u), key=lambda s: -lev[s >> 1])
            if len(rest) != 2:
                continue
            z, y = rest
            lz, ly, lu, lx = (lev[s >> 1] for s in (z, y, u, x))
            new_level = 1 + max(lz, lu, 1 + max(ly, lu, lx))
            if new_level >= cur:
                continue
            template = [(y, u, x), (z, u, _P0)]
            g = wg.gain(n, freed, template, _P1)
            if g is None or g < -(budget - spent):
                continue
            key = (new_level, -g)
            if best_key is None or key < best_key:
                best, best_key = (template, _P1, g), key
        wg.ref(n)
        if best is not None:
            template, result, g = best
            if wg.apply(n, template, result) and g < 0:
                spent -= g
    if not wg.changed:
        return mig
    out = wg.finish()
    if depth(out) > depth(mig) or node_count(out) > before + budget:
        return mig
    return out
