"""Shared machinery for local-replacement passes.

A :class:`WorkGraph` owns a private copy of the MIG and rewrites it by
recording replacements ``node -> signal``.  Reference counts over live nodes
give the maximum fanout-free cone (MFFC) of any node, which is what a
replacement frees.  Candidate structures are *templates*: lists of fanin
triples over existing signals and placeholders (``(PLACEHOLDER + i) << 1``
stands for the output of template op ``i``).  A template is priced before it
is built, so passes can compare alternatives without touching the graph.
"""

from __future__ import annotations

from functools import lru_cache

from ..mig import Mig, fanout_counts, var_table

PLACEHOLDER = 1 << 40
_PH_LIT = PLACEHOLDER << 1

Template = list  # list[tuple[int, int, int]]


def placeholder(i: int, complemented: int = 0) -> int:
    return ((PLACEHOLDER + i) << 1) | complemented


@lru_cache(maxsize=64)
def var_tables(k: int) -> tuple[int, ...]:
    return tuple(var_table(i, k) for i in range(k))


def _trivial(a: int, b: int, c: int) -> int | None:
    if a > b:
        a, b = b, a
    if b > c:
        b, c = c, b
        if a > b:
            a, b = b, a
    if a == b or b == c:
        return b
    if a ^ b == 1:
        return c
    if b ^ c == 1:
        return a
    return None


class WorkGraph:
    def __init__(self, mig: Mig):
        self.mig = mig.copy()
        self.fan = self.mig._fanins
        self.lev = self.mig._levels
        self.first = mig.num_pis + 1
        self.orig_size = mig.size
        self.refs = fanout_counts(self.mig)
        self.repl: dict[int, int] = {}
        self.changed = False

    # -- resolution -------------------------------------------------------

    def resolve(self, s: int) -> int:
        n = s >> 1
        repl = self.repl
        if n not in repl:
            return s
        c = s & 1
        while n in repl:
            t = repl[n]
            c ^= t & 1
            n = t >> 1
        repl[s >> 1] = (n << 1) | (c ^ (s & 1))
        return (n << 1) | c

    def fanins(self, n: int) -> tuple[int, int, int]:
        f = self.fan[n]
        repl = self.repl
        if repl and ((f[0] >> 1) in repl or (f[1] >> 1) in repl or (f[2] >> 1) in repl):
            r = self.resolve
            return r(f[0]), r(f[1]), r(f[2])
        return f

    def fanin_nodes(self, n: int, cache: dict) -> tuple[int, ...]:
        hit = cache.get(n)
        if hit is None:
            hit = tuple(s >> 1 for s in self.fanins(n) if s >> 1)
            cache[n] = hit
        return hit

    def live(self, n: int) -> bool:
        return self.refs[n] > 0 and n not in self.repl

    def is_maj(self, n: int) -> bool:
        return n >= self.first

    def level_of(self, s: int) -> int:
        return self.lev[s >> 1]

    def update_level(self, n: int) -> int:
        a, b, c = self.fanins(n)
        lv = self.lev
        v = 1 + max(lv[a >> 1], lv[b >> 1], lv[c >> 1])
        lv[n] = v
        return v

    # -- reference counting ------------------------------------------------

    def deref(self, n: int) -> list[int]:
        """Dereference the fanins of ``n``; returns the nodes that died."""
        refs, first = self.refs, self.first
        freed: list[int] = []
        stack = [n]
        while stack:
            m = stack.pop()
            for s in self.fanins(m):
                k = s >> 1
                if k >= first:
                    refs[k] -= 1
                    if refs[k] == 0:
                        freed.append(k)
                        stack.append(k)
        return freed

    def ref(self, n: int) -> None:
        refs, first = self.refs, self.first
        stack = [n]
        while stack:
            m = stack.pop()
            for s in self.fanins(m):
                k = s >> 1
                if k >= first:
                    refs[k] += 1
                    if refs[k] == 1:
                        stack.append(k)

    def mffc(self, n: int) -> list[int]:
        """Nodes of the MFFC of ``n`` excluding ``n`` (graph left unchanged)."""
        freed = self.deref(n)
        self.ref(n)
        return freed

    # -- template pricing and building ------------------------------------

    def _revive_cost(self, s: int, revived: set) -> int:
        k = s >> 1
        refs, first = self.refs, self.first
        if k < first or k >= PLACEHOLDER or refs[k] > 0 or k in revived:
            return 0
        cost = 0
        stack = [k]
        revived.add(k)
        while stack:
            m = stack.pop()
            cost += 1
            for t in self.fanins(m):
                j = t >> 1
                if j >= first and refs[j] == 0 and j not in revived:
                    revived.add(j)
                    stack.append(j)
        return cost

    def price(self, n: int, template: Template, result: int) -> int | None:
        """Number of nodes the template needs given the current (deref'd) refs.

        Returns ``None`` when the template reproduces ``n`` itself.
        """
        mapped: list[int] = []
        revived: set[int] = set()
        cost = 0
        lookup = self.mig.lookup
        resolve = self.resolve
        for i, (a, b, c) in enumerate(template):
            if a >= _PH_LIT:
                a = mapped[(a >> 1) - PLACEHOLDER] ^ (a & 1)
            if b >= _PH_LIT:
                b = mapped[(b >> 1) - PLACEHOLDER] ^ (b & 1)
            if c >= _PH_LIT:
                c = mapped[(c >> 1) - PLACEHOLDER] ^ (c & 1)
            if a >= _PH_LIT or b >= _PH_LIT or c >= _PH_LIT:
                s = _trivial(a, b, c)
            else:
                s = lookup(a, b, c)
                if s is not None:
                    s = resolve(s)
            if s is None:
                cost += 1
                for t in (a, b, c):
                    if t < _PH_LIT:
                        cost += self._revive_cost(t, revived)
                mapped.append(placeholder(i))
            else:
                mapped.append(s)
        if result >= _PH_LIT:
            final = mapped[(result >> 1) - PLACEHOLDER] ^ (result & 1)
        else:
            final = result
        if final < _PH_LIT:
            if final >> 1 == n:
                return None
            cost += self._revive_cost(final, revived)
        return cost

    def gain(self, n: int, freed: list[int], template: Template, result: int) -> int | None:
        cost = self.price(n, template, result)
        if cost is None:
            return None
        return len(freed) + 1 - cost

    def build(self, template: Template, result: int) -> int:
        mapped: list[int] = []
        make = self.mig.make_maj
        resolve = self.resolve
        for a, b, c in template:
            if a >= _PH_LIT:
                a = mapped[(a >> 1) - PLACEHOLDER] ^ (a & 1)
            if b >= _PH_LIT:
                b = mapped[(b >> 1) - PLACEHOLDER] ^ (b & 1)
            if c >= _PH_LIT:
                c = mapped[(c >> 1) - PLACEHOLDER] ^ (c & 1)
            mapped.append(resolve(make(a, b, c)))
        grow = self.mig.size - len(self.refs)
        if grow > 0:
            self.refs.extend([0] * grow)
        if result >= _PH_LIT:
            return mapped[(result >> 1) - PLACEHOLDER] ^ (result & 1)
        return resolve(result)

    def replace(self, n: int, target: int) -> bool:
        """Redirect every use of ``n`` to ``target`` and free the MFFC of ``n``."""
        target = self.resolve(target)
        t = target >> 1
        if t == n:
            return False
        refs = self.refs
        if t >= self.first:
            if refs[t] == 0:
                refs[t] = refs[n]
                self.ref(t)
            else:
                refs[t] += refs[n]
        self.deref(n)
        refs[n] = 0
        self.repl[n] = target
        self.changed = True
        return True

    def apply(self, n: int, template: Template, result: int) -> bool:
        return self.replace(n, self.build(template, result))

    # -- windows ----------------------------------------------------------

    def reconv_cut(self, roots: list[int], limit: int, allowed=None):
        """Reconvergence-driven cut of at most ``limit`` leaves.

        Returns ``(leaves, interior)`` with leaves sorted by id, or ``None``
        when even the immediate fanins exceed the limit.
        """
        first = self.first
        cache: dict[int, tuple[int, ...]] = {}
        interior = set(roots)
        leaves: set[int] = set()
        for r in roots:
            for k in self.fanin_nodes(r, cache):
                if k not in interior:
                    leaves.add(k)
        if len(leaves) > limit:
            return None
        lev = self.lev
        while True:
            best = -1
            best_new = 4
            best_lev = -1
            for m in leaves:
                if m < first or (allowed is not None and not allowed(m)):
                    continue
                new = 0
                for k in self.fanin_nodes(m, cache):
                    if k not in leaves and k not in interior:
                        new += 1
                if new < best_new or (new == best_new and (lev[m] > best_lev or
                                                           (lev[m] == best_lev and m > best))):
                    best, best_new, best_lev = m, new, lev[m]
            if best < 0 or len(leaves) - 1 + best_new > limit:
                break
            leaves.discard(best)
            interior.add(best)
            for k in self.fanin_nodes(best, cache):
                if k not in interior:
                    leaves.add(k)
        return sorted(leaves), interior

    def cone_order(self, roots: list[int], leaves) -> list[int]:
        """Interior nodes between ``leaves`` and ``roots`` in topological order."""
        stop = set(leaves)
        stop.add(0)
        order: list[int] = []
        seen: set[int] = set()
        for r in roots:
            if r in seen or r in stop:
                continue
            stack = [(r, False)]
            while stack:
                m, done = stack.pop()
                if done:
                    order.append(m)
                    continue
                if m in seen:
                    continue
                seen.add(m)
                stack.append((m, True))
                for s in self.fanins(m):
                    k = s >> 1
                    if k not in stop and k not in seen:
                        stack.append((k, False))
        return order

    def cone_tables(self, roots: list[int], leaves: list[int], extra=()) -> dict[int, int]:
        """Truth tables (over the leaves) of every node in the window."""
        k = len(leaves)
        tables = var_tables(k)
        mask = (1 << (1 << k)) - 1
        vals = {0: 0}
        for i, leaf in enumerate(leaves):
            vals[leaf] = tables[i]
        for m in self.cone_order(list(roots) + list(extra), leaves):
            a, b, c = self.fanins(m)
            x = vals[a >> 1] ^ (mask if a & 1 else 0)
            y = vals[b >> 1] ^ (mask if b & 1 else 0)
            z = vals[c >> 1] ^ (mask if c & 1 else 0)
            vals[m] = (x & y) | (x & z) | (y & z)
        return vals

    # -- result -----------------------------------------------------------

    def finish(self) -> Mig:
        """Rebuild the live graph into a fresh, topologically indexed MIG."""
        src = self.mig
        out = src.empty_like()
        memo: dict[int, int] = {k: k << 1 for k in range(src.num_pis + 1)}
        make = out.make_maj
        for po in src.pos:
            root = self.resolve(po) >> 1
            if root in memo:
                continue
            stack = [root]
            while stack:
                m = stack[-1]
                if m in memo:
                    stack.pop()
                    continue
                fins = self.fanins(m)
                todo = [s >> 1 for s in fins if (s >> 1) not in memo]
                if todo:
                    stack.extend(todo)
                    continue
                a, b, c = fins
                memo[m] = make(memo[a >> 1] ^ (a & 1), memo[b >> 1] ^ (b & 1),
                               memo[c >> 1] ^ (c & 1))
                stack.pop()
        for po in src.pos:
            s = self.resolve(po)
            out.pos.append(memo[s >> 1] ^ (s & 1))
        out.output_names = list(src.output_names) if src.output_names is not None else None
        return out


def effective_fanins(wg: WorkGraph, s: int) -> tuple[int, int, int] | None:
    """Fanins of the node behind signal ``s`` with its complement pushed in."""
    n = s >> 1
    if n < wg.first:
        return None
    a, b, c = wg.fanins(n)
    if s & 1:
        return a ^ 1, b ^ 1, c ^ 1
    return a, b, c
