"""Majority-Inverter Graph core.

Signals are integer literals in the AIGER style: ``2 * node_id + complemented``.
Node 0 is the constant-0 node, so literal ``0`` is logical 0 and ``1`` is
logical 1.  Primary inputs occupy ids ``1..num_pis`` and majority nodes follow
in a strictly topological arena (every fanin id is smaller than the node id).
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import kernels

CONST0 = 0
CONST1 = 1

EXHAUSTIVE_LIMIT = 14
SIMULATION_LIMIT = 16
DEFAULT_PATTERNS = 256


class MigError(ValueError):
    """Structural error: invalid signal, mismatched interfaces, bad arena."""


class CapacityError(MigError):
    """Raised when an exhaustive operation exceeds its input limit."""


def lit(node: int, complemented: bool | int = False) -> int:
    return (node << 1) | int(bool(complemented))


def node_of(signal: int) -> int:
    return signal >> 1


def is_complemented(signal: int) -> bool:
    return bool(signal & 1)


def negate(signal: int) -> int:
    return signal ^ 1


def _canonical(a: int, b: int, c: int) -> tuple[int, int, int]:
    """Canonical strash key: sorted, at most one complemented fanin."""
    if (a & 1) + (b & 1) + (c & 1) >= 2:
        return (a ^ 1, b ^ 1, c ^ 1)
    return (a, b, c)


class Mig:
    """Arena-allocated MIG with structural hashing.

    A node's stored fanin triple is sorted.  Nodes built through
    :meth:`make_maj` have at most one complemented fanin (self-duality moves
    the rest onto the returned signal); :meth:`add_raw` keeps whatever
    polarity it is given, but hashes under the same canonical key so duals are
    still shared.
    """

    __slots__ = ("num_pis", "_fanins", "_levels", "_strash", "pos",
                 "input_names", "output_names", "_key")

    def __init__(self, num_pis: int = 0, input_names: Sequence[str] | None = None,
                 output_names: Sequence[str] | None = None):
        if num_pis < 0:
            raise MigError("negative PI count")
        self.num_pis = num_pis
        self._fanins: list[tuple[int, int, int] | tuple[()]] = [()] * (num_pis + 1)
        self._levels: list[int] = [0] * (num_pis + 1)
        self._strash: dict[tuple[int, int, int], int] = {}
        self.pos: list[int] = []
        self.input_names = list(input_names) if input_names is not None else None
        self.output_names = list(output_names) if output_names is not None else None
        self._key = None

    # -- construction -----------------------------------------------------

    def pi(self, index: int) -> int:
        if not 0 <= index < self.num_pis:
            raise MigError(f"PI index {index} out of range")
        return (index + 1) << 1

    def pis(self) -> list[int]:
        return [(i + 1) << 1 for i in range(self.num_pis)]

    def add_po(self, signal: int, name: str | None = None) -> int:
        self._check(signal)
        self.pos.append(signal)
        if name is not None:
            if self.output_names is None:
                self.output_names = [f"po{i}" for i in range(len(self.pos) - 1)]
            self.output_names.append(name)
        elif self.output_names is not None:
            self.output_names.append(f"po{len(self.pos) - 1}")
        self._key = None
        return len(self.pos) - 1

    def _check(self, signal: int) -> None:
        if signal < 0 or (signal >> 1) >= len(self._fanins):
            raise MigError(f"invalid signal {signal}")

    def make_maj(self, a: int, b: int, c: int) -> int:
        n = len(self._fanins)
        if a < 0 or b < 0 or c < 0 or (a >> 1) >= n or (b >> 1) >= n or (c >> 1) >= n:
            raise MigError(f"invalid signal in MAJ({a}, {b}, {c})")
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
        out = 0
        if (a & 1) + (b & 1) + (c & 1) >= 2:
            a ^= 1
            b ^= 1
            c ^= 1
            out = 1
        key = (a, b, c)
        node = self._strash.get(key)
        if node is None:
            node = n
            self._fanins.append(key)
            lv = self._levels
            la, lb, lc = lv[a >> 1], lv[b >> 1], lv[c >> 1]
            lv.append(1 + (la if la > lb and la > lc else (lb if lb > lc else lc)))
            self._strash[key] = node
            self._key = None
        elif self._fanins[node] != key:
            out ^= 1
        return (node << 1) | out

    def add_raw(self, a: int, b: int, c: int) -> int:
        """Add a node with the given fanin polarity (no output normalisation).

        Trivial triples still simplify.  If a structurally equal or dual node
        exists, it is reused and the returned signal carries the needed
        complement.
        """
        for s in (a, b, c):
            self._check(s)
        a, b, c = sorted((a, b, c))
        if a == b or b == c:
            return b
        if a ^ b == 1:
            return c
        if b ^ c == 1:
            return a
        key = _canonical(a, b, c)
        node = self._strash.get(key)
        if node is not None:
            stored = self._fanins[node]
            return (node << 1) | (0 if stored == (a, b, c) else 1)
        node = len(self._fanins)
        self._fanins.append((a, b, c))
        lv = self._levels
        lv.append(1 + max(lv[a >> 1], lv[b >> 1], lv[c >> 1]))
        self._strash[key] = node
        self._key = None
        return node << 1

    def lookup(self, a: int, b: int, c: int) -> int | None:
        """Signal for MAJ(a, b, c) if it needs no new node, else ``None``."""
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
        out = 0
        if (a & 1) + (b & 1) + (c & 1) >= 2:
            a ^= 1
            b ^= 1
            c ^= 1
            out = 1
        key = (a, b, c)
        node = self._strash.get(key)
        if node is None:
            return None
        if self._fanins[node] != key:
            out ^= 1
        return (node << 1) | out

    # -- queries ----------------------------------------------------------

    @property
    def size(self) -> int:
        """Total number of ids (constant + PIs + allocated nodes)."""
        return len(self._fanins)

    @property
    def num_allocated(self) -> int:
        return len(self._fanins) - self.num_pis - 1

    @property
    def num_pos(self) -> int:
        return len(self.pos)

    def is_maj(self, node: int) -> bool:
        return node > self.num_pis

    def is_pi(self, node: int) -> bool:
        return 0 < node <= self.num_pis

    def fanins(self, node: int) -> tuple[int, int, int]:
        f = self._fanins[node]
        if not f:
            raise MigError(f"node {node} is not a majority node")
        return f  # type: ignore[return-value]

    def level(self, node: int) -> int:
        return self._levels[node]

    def nodes(self) -> range:
        """Ids of all allocated majority nodes, in topological order."""
        return range(self.num_pis + 1, len(self._fanins))

    def flat_fanins(self) -> list[int]:
        out: list[int] = []
        for f in self._fanins[self.num_pis + 1:]:
            out.extend(f)
        return out

    def key(self) -> tuple:
        """Hashable structural identity (fanin arena + POs)."""
        if self._key is None:
            self._key = (self.num_pis, tuple(self._fanins[self.num_pis + 1:]), tuple(self.pos))
        return self._key

    def copy(self) -> "Mig":
        m = Mig.__new__(Mig)
        m.num_pis = self.num_pis
        m._fanins = list(self._fanins)
        m._levels = list(self._levels)
        m._strash = dict(self._strash)
        m.pos = list(self.pos)
        m.input_names = list(self.input_names) if self.input_names is not None else None
        m.output_names = list(self.output_names) if self.output_names is not None else None
        m._key = self._key
        return m

    def empty_like(self) -> "Mig":
        """Fresh MIG with the same PIs and names but no nodes or POs."""
        return Mig(self.num_pis, self.input_names, None)

    def validate(self) -> None:
        """Assert the arena invariants; raises :class:`MigError`."""
        for n in self.nodes():
            f = self._fanins[n]
            if len(f) != 3 or list(f) != sorted(f):
                raise MigError(f"node {n}: fanins not canonical")
            if len({s >> 1 for s in f}) != 3:
                raise MigError(f"node {n}: repeated fanin node")
            if max(f) >> 1 >= n:
                raise MigError(f"node {n}: fanin not topologically earlier")
            if self._strash.get(_canonical(*f)) != n:
                raise MigError(f"node {n}: structural hash inconsistent")
        for s in self.pos:
            self._check(s)

    def __repr__(self) -> str:
        return (f"Mig(pis={self.num_pis}, pos={len(self.pos)}, "
                f"nodes={node_count(self)}, allocated={self.num_allocated})")


# -- structural metrics ---------------------------------------------------

def reachable(mig: Mig) -> bytearray:
    """Mask over ids, 1 for majority nodes in the transitive fanin of a PO."""
    return kernels.reachable(mig.flat_fanins(), mig.num_pis, mig.pos)


def node_count(mig: Mig) -> int:
    """Number of majority nodes reachable from the POs."""
    if mig.num_allocated == 0:
        return 0
    return sum(reachable(mig))


def depth(mig: Mig) -> int:
    if not mig.pos:
        return 0
    lv = mig._levels
    return max(lv[s >> 1] for s in mig.pos)


def fanout_counts(mig: Mig, mask: bytearray | None = None) -> list[int]:
    """Reference counts restricted to reachable nodes (PO edges included)."""
    if mask is None:
        mask = reachable(mig)
    refs = [0] * mig.size
    fan = mig._fanins
    for n in mig.nodes():
        if mask[n]:
            a, b, c = fan[n]
            refs[a >> 1] += 1
            refs[b >> 1] += 1
            refs[c >> 1] += 1
    for s in mig.pos:
        refs[s >> 1] += 1
    return refs


def cleanup_dangling(mig: Mig) -> Mig:
    """Copy of ``mig`` holding only PO-reachable nodes, re-indexed in order."""
    mask = reachable(mig)
    out = Mig(mig.num_pis, mig.input_names, None)
    remap = list(range(mig.num_pis + 1))
    remap.extend([0] * mig.num_allocated)
    fanins = out._fanins
    levels = out._levels
    strash = out._strash
    src = mig._fanins
    for n in mig.nodes():
        if not mask[n]:
            continue
        a, b, c = src[n]
        t = ((remap[a >> 1] << 1) | (a & 1), (remap[b >> 1] << 1) | (b & 1),
             (remap[c >> 1] << 1) | (c & 1))
        new = len(fanins)
        fanins.append(t)
        levels.append(1 + max(levels[t[0] >> 1], levels[t[1] >> 1], levels[t[2] >> 1]))
        strash[_canonical(*t)] = new
        remap[n] = new
    out.pos = [(remap[s >> 1] << 1) | (s & 1) for s in mig.pos]
    out.output_names = list(mig.output_names) if mig.output_names is not None else None
    return out


# -- simulation -----------------------------------------------------------

@dataclass
class TruthTableSet:
    """One bit-packed truth table per PO; bit ``i`` is the value at row ``i``."""

    num_vars: int
    tables: list[int] = field(default_factory=list)

    def bit(self, po: int, row: int) -> int:
        return (self.tables[po] >> row) & 1


def var_table(index: int, num_vars: int) -> int:
    """Truth table of variable ``index`` over ``num_vars`` variables."""
    half = 1 << index
    t = ((1 << half) - 1) << half
    width = half << 1
    total = 1 << num_vars
    while width < total:
        t |= t << width
        width <<= 1
    return t


def simulate(mig: Mig, pi_values: Sequence[int], mask: int) -> list[int]:
    """Bit-parallel node values for the given PI words (``mask`` = all ones)."""
    vals = [0] * mig.size
    for i, v in enumerate(pi_values):
        vals[i + 1] = v
    fan = mig._fanins
    for n in mig.nodes():
        a, b, c = fan[n]
        x = vals[a >> 1] ^ (mask if a & 1 else 0)
        y = vals[b >> 1] ^ (mask if b & 1 else 0)
        z = vals[c >> 1] ^ (mask if c & 1 else 0)
        vals[n] = (x & y) | (x & z) | (y & z)
    return vals


def signal_value(vals: Sequence[int], signal: int, mask: int) -> int:
    return vals[signal >> 1] ^ (mask if signal & 1 else 0)


def simulate_full(mig: Mig) -> TruthTableSet:
    if mig.num_pis > SIMULATION_LIMIT:
        raise CapacityError(f"{mig.num_pis} PIs exceed the exhaustive limit {SIMULATION_LIMIT}")
    n = mig.num_pis
    mask = (1 << (1 << n)) - 1
    vals = simulate(mig, [var_table(i, n) for i in range(n)], mask)
    return TruthTableSet(n, [signal_value(vals, s, mask) for s in mig.pos])


class Verdict(enum.Enum):
    EQUIVALENT = "equivalent"
    NOT_EQUIVALENT = "not_equivalent"
    PROBABLY_EQUIVALENT = "probably_equivalent"


@dataclass
class EquivalenceResult:
    verdict: Verdict
    counterexample: list[int] | None = None
    output: int | None = None

    def __bool__(self) -> bool:
        return self.verdict is not Verdict.NOT_EQUIVALENT


def check_equivalence(a: Mig, b: Mig, patterns: int = DEFAULT_PATTERNS,
                      seed: int = 0x5EED) -> EquivalenceResult:
    """Compare two MIGs output by output.

    Exhaustive up to :data:`EXHAUSTIVE_LIMIT` PIs, otherwise ``patterns``
    rounds of 64 random patterns each.  Counterexamples list one 0/1 value per
    PI.
    """
    if a.num_pis != b.num_pis or a.num_pos != b.num_pos:
        raise MigError("interface mismatch: "
                       f"({a.num_pis}, {a.num_pos}) vs ({b.num_pis}, {b.num_pos})")
    n = a.num_pis
    if n <= EXHAUSTIVE_LIMIT:
        width = 1 << n
        pis = [var_table(i, n) for i in range(n)]
        exact = True
    else:
        width = 64 * max(1, patterns)
        rng = random.Random(seed)
        pis = [rng.getrandbits(width) for _ in range(n)]
        exact = False
    mask = (1 << width) - 1
    va = simulate(a, pis, mask)
    vb = simulate(b, pis, mask)
    for k, (sa, sb) in enumerate(zip(a.pos, b.pos)):
        diff = signal_value(va, sa, mask) ^ signal_value(vb, sb, mask)
        if diff:
            row = (diff & -diff).bit_length() - 1
            cex = [(p >> row) & 1 for p in pis]
            return EquivalenceResult(Verdict.NOT_EQUIVALENT, cex, k)
    return EquivalenceResult(Verdict.EQUIVALENT if exact else Verdict.PROBABLY_EQUIVALENT)


def evaluate(mig: Mig, assignment: Sequence[int]) -> list[int]:
    """Scalar evaluation of every PO under one PI assignment."""
    vals = simulate(mig, [v & 1 for v in assignment], 1)
    return [signal_value(vals, s, 1) for s in mig.pos]


def from_pos(num_pis: int, build, names: Iterable[str] | None = None) -> Mig:
    """Small helper: ``build(mig, pis)`` returns the PO signals."""
    m = Mig(num_pis, list(names) if names is not None else None)
    for s in build(m, m.pis()):
        m.add_po(s)
    return m
