"""Pure-Python reference implementations of the hot kernels.

The compiled module ``_ckernels`` implements the same functions with the same
tie-breaking, so both produce identical results.  ``fan`` is the flat fanin
array of the majority nodes: node ``num_pis + 1 + k`` owns
``fan[3k:3k + 3]``.
"""

from __future__ import annotations


def reachable(fan, num_pis, pos):
    first = num_pis + 1
    total = first + len(fan) // 3
    mark = bytearray(total)
    for s in pos:
        n = s >> 1
        if n >= first:
            mark[n] = 1
    for n in range(total - 1, first - 1, -1):
        if mark[n]:
            base = 3 * (n - first)
            for j in range(base, base + 3):
                m = fan[j] >> 1
                if m >= first:
                    mark[m] = 1
    return mark


def lut_map(fan, num_pis, pos, k=6, max_cuts=8):
    """Area-oriented LUT mapping with priority cuts; returns the LUT count."""
    first = num_pis + 1
    total = first + len(fan) // 3
    mark = reachable(fan, num_pis, pos)
    refs = [0] * total
    for n in range(first, total):
        if mark[n]:
            base = 3 * (n - first)
            for j in range(base, base + 3):
                refs[fan[j] >> 1] += 1
    for s in pos:
        refs[s >> 1] += 1

    cuts = [None] * total
    flow = [0.0] * total
    for n in range(first, total):
        if not mark[n]:
            continue
        base = 3 * (n - first)
        fins = []
        for j in range(base, base + 3):
            m = fan[j] >> 1
            if m != 0:
                fins.append(m)
        partial = {()}
        for m in fins:
            options = [(m,)]
            if m >= first:
                options.extend(cuts[m])
            nxt = set()
            for p in partial:
                for o in options:
                    u = tuple(sorted(set(p).union(o)))
                    if len(u) <= k:
                        nxt.add(u)
            partial = nxt
        scored = []
        for c in partial:
            acc = 1.0
            for leaf in c:
                if leaf >= first:
                    r = refs[leaf]
                    acc += flow[leaf] / (r if r > 0 else 1)
            scored.append((acc, len(c), c))
        scored.sort()
        kept = scored[:max_cuts]
        cuts[n] = [c for _, _, c in kept]
        flow[n] = kept[0][0]

    required = bytearray(total)
    for s in pos:
        n = s >> 1
        if n >= first:
            required[n] = 1
    count = 0
    for n in range(total - 1, first - 1, -1):
        if required[n]:
            count += 1
            for leaf in cuts[n][0]:
                if leaf >= first:
                    required[leaf] = 1
    return count
