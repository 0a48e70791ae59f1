"""Inverter optimisation by output-polarity selection.

Flipping a node ``n`` to ``~n`` (self-duality: ``~MAJ(a, b, c) =
MAJ(~a, ~b, ~c)``) toggles the complement on its non-constant fanin edges and
on every edge that uses it.  Nodes are flipped greedily while that lowers
the number of complemented edges; structure, node count and depth are
untouched.
"""

from __future__ import annotations

from ..mig import Mig, cleanup_dangling

MAX_ROUNDS = 4


def pass_invert_opt(mig: Mig) -> Mig:
    mig = cleanup_dangling(mig)
    first = mig.num_pis + 1
    size = mig.size
    fan = [list(mig._fanins[n]) if n >= first else [] for n in range(size)]
    pos = list(mig.pos)
    uses: list[list[tuple[int, int]]] = [[] for _ in range(size)]
    for n in range(first, size):
        for j, s in enumerate(fan[n]):
            uses[s >> 1].append((n, j))
    for k, s in enumerate(pos):
        uses[s >> 1].append((-1, k))

    def edge(user: int, j: int) -> int:
        return pos[j] if user < 0 else fan[user][j]

    changed = False
    for _ in range(MAX_ROUNDS):
        improved = False
        for n in range(first, size):
            delta = 0
            for s in fan[n]:
                if s >> 1:
                    delta += -1 if s & 1 else 1
            for user, j in uses[n]:
                delta += -1 if edge(user, j) & 1 else 1
            if delta < 0:
                fan[n] = [s ^ 1 for s in fan[n]]
                for user, j in uses[n]:
                    if user < 0:
                        pos[j] ^= 1
                    else:
                        fan[user][j] ^= 1
                improved = changed = True
        if not improved:
            break
    if not changed:
        return mig
    out = mig.empty_like()
    for n in range(first, size):
        s = out.add_raw(*fan[n])
        assert s == n << 1
    out.pos = pos
    out.output_names = list(mig.output_names) if mig.output_names is not None else None
    return out

