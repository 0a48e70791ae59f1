"""Cone refactoring.

Fanout-free cones rooted at multi-fanout or output nodes are collapsed to
truth tables over at most ``max_cone_inputs`` leaves and re-synthesised by
Shannon decomposition.  Cofactors are shared through a truth-table memo
(complements included) and mapped onto the MIG with the AND/OR embeddings
``AND(a, b) = MAJ(a, b, 0)`` and ``OR(a, b) = MAJ(a, b, 1)``:

* ``f = x f1 + ~x f0``                 general case, three nodes
* ``f = x + f0`` / ``f = ~x f0``        when ``f1`` is constant
* ``f = x f1`` / ``f = ~x + f1``        when ``f0`` is constant
"""

from __future__ import annotations

from ..mig import Mig, node_count
from ._work import WorkGraph, _trivial, placeholder, var_tables


def _cofactors(t: int, i: int, vt: tuple[int, ...]) -> tuple[int, int]:
    shift = 1 << i
    hi = vt[i]
    c0 = t & ~hi
    c0 |= c0 << shift
    c1 = t & hi
    c1 |= c1 >> shift
    return c0, c1


def synthesize(table: int, leaves: list[int], k: int):
    """Template ``(ops, result)`` computing ``table`` over the leaf signals."""
    mask = (1 << (1 << k)) - 1
    vt = var_tables(k)
    ops: list[tuple[int, int, int]] = []
    op_memo: dict[tuple[int, int, int], int] = {}
    memo: dict[int, int] = {}

    def emit(a: int, b: int, c: int) -> int:
        s = _trivial(a, b, c)
        if s is not None:
            return s
        key = tuple(sorted((a, b, c)))
        hit = op_memo.get(key)
        if hit is None:
            ops.append(key)
            hit = placeholder(len(ops) - 1)
            op_memo[key] = hit
        return hit

    def rec(t: int) -> int:
        if t == 0:
            return 0
        if t == mask:
            return 1
        if t in memo:
            return memo[t]
        if t ^ mask in memo:
            return memo[t ^ mask] ^ 1
        best = None
        for i in range(k):
            c0, c1 = _cofactors(t, i, vt)
            if c0 == c1:
                continue
            if (c0 == 0 or c0 == mask) and (c1 == 0 or c1 == mask):
                return leaves[i] if c1 == mask else leaves[i] ^ 1
            trivial = c0 in (0, mask) or c1 in (0, mask)
            spread = sum(1 for j in range(k) if j != i and _differs(c0, j, vt)) + \
                sum(1 for j in range(k) if j != i and _differs(c1, j, vt))
            key = (0 if trivial else 1, spread, i)
            if best is None or key < best[0]:
                best = (key, i, c0, c1)
        _, i, c0, c1 = best
        x = leaves[i]
        if c1 == mask:
            r = emit(x, rec(c0), 1)
        elif c1 == 0:
            r = emit(x ^ 1, rec(c0), 0)
        elif c0 == 0:
            r = emit(x, rec(c1), 0)
        elif c0 == mask:
            r = emit(x ^ 1, rec(c1), 1)
        else:
            hi = emit(x, rec(c1), 0)
            lo = emit(x ^ 1, rec(c0), 0)
            r = emit(hi, lo, 1)
        memo[t] = r
        return r

    result = rec(table & mask)
    return ops, result


def _differs(t: int, j: int, vt: tuple[int, ...]) -> bool:
    shift = 1 << j
    return ((t & vt[j]) >> shift) != (t & ~vt[j])


def pass_refactor(mig: Mig, max_cone_inputs: int = 6, allow_area_increase: bool = False) -> Mig:
    wg = WorkGraph(mig)
    po_nodes = {s >> 1 for s in mig.pos}
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
        if wg.refs[n] < 2 and n not in po_nodes:
            continue
        freed = wg.deref(n)
        mffc = set(freed)
        cut = wg.reconv_cut([n], max_cone_inputs, allowed=mffc.__contains__)
        best = None
        if cut is not None and len(cut[1]) >= 2:
            leaves, _ = cut
            tables = wg.cone_tables([n], leaves)
            ops, result = synthesize(tables[n], [m << 1 for m in leaves], len(leaves))
            g = wg.gain(n, freed, ops, result)
            if g is not None and g >= threshold:
                best = (ops, result)
        wg.ref(n)
        if best is not None:
            wg.apply(n, *best)
    if not wg.changed:
        return mig
    out = wg.finish()
    if not allow_area_increase and node_count(out) > node_count(mig):
        return mig
    return out
