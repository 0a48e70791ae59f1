"""Functional reduction (sweeping).

Nodes are bucketed by 64-bit-word simulation signatures (fixed seed,
complement-normalised so that ``f`` and ``~f`` share a bucket).  A candidate
pair is merged only after an exhaustive check over a common reconvergence
window, so a signature collision alone never merges two nodes.  With at most
``EXACT_LIMIT`` inputs the signatures are the complete truth tables and the
bucket itself is the proof.
"""

from __future__ import annotations

import random

from ..mig import Mig, node_count, simulate, var_table
from ._work import WorkGraph

SWEEP_SEED = 0x5A17_C0DE
SIGNATURE_WORDS = 4
WINDOW_LEAVES = 16
EXACT_LIMIT = 16


def _proves_equal(wg: WorkGraph, n: int, r: int, flip: int, limit: int) -> bool:
    roots = [n, r] if r >= wg.first else [n]
    cut = wg.reconv_cut(roots, limit)
    if cut is None:
        return False
    leaves, _ = cut
    if 0 < r < wg.first and r not in leaves:
        return False
    tables = wg.cone_tables(roots, leaves)
    mask = (1 << (1 << len(leaves))) - 1
    return tables[n] == (tables[r] ^ (mask if flip else 0))


def pass_sweep(mig: Mig, pi_patterns: list[int] | None = None, width: int | None = None,
               window_leaves: int = WINDOW_LEAVES) -> Mig:
    """Merge functionally equivalent nodes.

    ``pi_patterns``/``width`` override the internal random signatures (used
    by tests to force collisions).
    """
    if mig.num_allocated == 0:
        return mig
    exact = False
    if pi_patterns is None and mig.num_pis <= EXACT_LIMIT:
        width = 1 << mig.num_pis
        pi_patterns = [var_table(i, mig.num_pis) for i in range(mig.num_pis)]
        exact = True
    elif pi_patterns is None:
        width = 64 * SIGNATURE_WORDS
        rng = random.Random(SWEEP_SEED)
        pi_patterns = [rng.getrandbits(width) for _ in range(mig.num_pis)]
    elif width is None:
        raise ValueError("width is required with explicit patterns")
    mask = (1 << width) - 1
    vals = simulate(mig, pi_patterns, mask)
    wg = WorkGraph(mig)
    classes: dict[int, list[tuple[int, int]]] = {0: [(0, 0)]}
    for k in range(1, wg.first):
        v = vals[k]
        key, pol = (v, 0) if not v & 1 else (v ^ mask, 1)
        classes.setdefault(key, []).append((k, pol))
    for n in range(wg.first, wg.orig_size):
        if not wg.live(n):
            continue
        v = vals[n]
        key, pol = (v, 0) if not v & 1 else (v ^ mask, 1)
        members = classes.get(key)
        if members is None:
            classes[key] = [(n, pol)]
            continue
        for r, rpol in members:
            if r >= wg.first and not wg.live(r):
                continue
            flip = pol ^ rpol
            if exact or _proves_equal(wg, n, r, flip, window_leaves):
                wg.replace(n, (r << 1) | flip)
                break
        else:
            members.append((n, pol))
    if not wg.changed:
        return mig
    out = wg.finish()
    if node_count(out) > node_count(mig):
        return mig
    return out
