"""Window-based resubstitution.

For each live node a reconvergence-driven window is simulated exhaustively
over its leaves.  The node is re-expressed with at most one new node over
divisors (window nodes outside its MFFC, the leaves, and side nodes whose
fanins are all divisors): an equal or complemented divisor, an AND, an OR or
a majority of divisor literals.
"""

from __future__ import annotations

from ..mig import Mig, node_count
from ._work import WorkGraph, placeholder

_P0 = placeholder(0)


def _static_fanouts(wg: WorkGraph) -> list[list[int]]:
    fo: list[list[int]] = [[] for _ in range(wg.orig_size)]
    refs = wg.refs
    for n in range(wg.first, wg.orig_size):
        if refs[n] > 0:
            for s in wg.fan[n]:
                fo[s >> 1].append(n)
    return fo


def _divisors(wg, n, leaves, interior, mffc, fanouts, limit):
    near = sorted((m for m in interior if m not in mffc), reverse=True)
    divs = near[:limit]
    if len(divs) < limit:
        divs.extend(sorted(leaves, reverse=True)[:limit - len(divs)])
    side: list[int] = []
    if len(divs) < limit:
        pool = set(divs)
        pool.add(0)
        for d in list(divs):
            if d >= len(fanouts):
                continue
            for fo in fanouts[d]:
                if len(divs) + len(side) >= limit:
                    break
                if fo == n or fo in pool or fo in mffc or fo in interior or not wg.live(fo):
                    continue
                if all((s >> 1) in pool for s in wg.fanins(fo)):
                    side.append(fo)
                    pool.add(fo)
    return divs, side


def pass_resub(mig: Mig, max_window_leaves: int = 8, max_divisors: int = 16) -> Mig:
    wg = WorkGraph(mig)
    fanouts = _static_fanouts(wg)
    for n in range(wg.first, wg.orig_size):
        if not wg.live(n):
            continue
        f = wg.fanins(n)
        if f != wg.fan[n]:
            hit = wg.mig.lookup(*f)
            if hit is not None and hit >> 1 != n:
                wg.replace(n, hit)
                continue
        cut = wg.reconv_cut([n], max_window_leaves)
        if cut is None:
            continue
        leaves, interior = cut
        freed = wg.deref(n)
        mffc = set(freed)
        mffc.add(n)
        divs, side = _divisors(wg, n, leaves, interior, mffc, fanouts, max_divisors)
        tables = wg.cone_tables([n], leaves, side)
        mask = (1 << (1 << len(leaves))) - 1
        target = tables[n]
        lits = [(0, 0), (1, mask)]
        for d in divs + side:
            t = tables[d]
            lits.append((d << 1, t))
            lits.append(((d << 1) | 1, t ^ mask))
        best = None
        best_gain = 0
        for s, t in lits:
            if t == target:
                g = wg.gain(n, freed, [], s)
                if g is not None and g > best_gain:
                    best, best_gain = ([], s), g
                break
        if best is None and freed:
            best, best_gain = _one_resub(wg, n, freed, target, mask, lits, best_gain)
        wg.ref(n)
        if best is not None:
            wg.apply(n, *best)
    if not wg.changed:
        return mig
    out = wg.finish()
    if node_count(out) > node_count(mig):
        return mig
    return out


def _one_resub(wg, n, freed, f, mask, lits, best_gain):
    best = None
    implied = [(s, t) for s, t in lits if f & ~t == 0]
    implying = [(s, t) for s, t in lits if t & ~f == 0]
    for i, (s1, t1) in enumerate(implied):
        for s2, t2 in implied[i + 1:]:
            if t1 & t2 == f:
                g = wg.gain(n, freed, [(s1, s2, 0)], _P0)
                if g is not None and g > best_gain:
                    best, best_gain = ([(s1, s2, 0)], _P0), g
    for i, (s1, t1) in enumerate(implying):
        for s2, t2 in implying[i + 1:]:
            if t1 | t2 == f:
                g = wg.gain(n, freed, [(s1, s2, 1)], _P0)
                if g is not None and g > best_gain:
                    best, best_gain = ([(s1, s2, 1)], _P0), g
    if best is not None:
        return best, best_gain
    # MAJ(a, b, c) = f requires a & b <= f <= a | b and c = f wherever a != b.
    lits = lits[2:]
    for i, (s1, t1) in enumerate(lits):
        if t1 & f == 0:
            continue
        for s2, t2 in lits[i + 1:]:
            if (s2 >> 1) == (s1 >> 1):
                continue
            both = t1 & t2
            if both & ~f or f & ~(t1 | t2):
                continue
            care = t1 ^ t2
            need = f & care
            for s3, t3 in lits:
                if (s3 >> 1) in ((s1 >> 1), (s2 >> 1)):
                    continue
                if t3 & care == need:
                    template = [(s1, s2, s3)]
                    g = wg.gain(n, freed, template, _P0)
                    if g is not None and g > best_gain:
                        best, best_gain = (template, _P0), g
                    break
    return best, best_gain
