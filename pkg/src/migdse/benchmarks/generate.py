"""Regenerate the bundled ``.aag`` benchmark circuits.

The circuits are small analogues of EPFL combinational designs, built the way
a naive front end would emit them: textbook gate networks with structural
hashing only.  Run ``python -m migdse.benchmarks.generate`` to rewrite them.
"""

from __future__ import annotations

import os
import random

from ..io import Aig, write_aiger_ascii


class Builder:
    def __init__(self, inputs: list[str]):
        self.aig = Aig(len(inputs), inputs)
        self.outputs: list[str] = []
        self.inputs = {name: (k + 1) << 1 for k, name in enumerate(inputs)}

    def __getitem__(self, name: str) -> int:
        return self.inputs[name]

    def bus(self, prefix: str, width: int) -> list[int]:
        return [self.inputs[f"{prefix}{i}"] for i in range(width)]

    def AND(self, *xs: int) -> int:
        out = 1
        for x in xs:
            out = self.aig.make_and(out, x)
        return out

    def OR(self, *xs: int) -> int:
        out = 0
        for x in xs:
            out = self.aig.make_or(out, x)
        return out

    def XOR(self, a: int, b: int) -> int:
        return self.AND(self.OR(a, b), self.AND(a, b) ^ 1)

    def MUX(self, s: int, t: int, e: int) -> int:
        return self.OR(self.AND(s, t), self.AND(s ^ 1, e))

    def out(self, name: str, s: int) -> None:
        self.aig.add_po(s)
        self.outputs.append(name)

    def finish(self) -> Aig:
        self.aig.output_names = list(self.outputs)
        return self.aig


def _names(prefix: str, width: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(width)]


def ripple_add(b: Builder, x: list[int], y: list[int], cin: int = 0) -> tuple[list[int], int]:
    s, c = [], cin
    for xi, yi in zip(x, y):
        t = b.XOR(xi, yi)
        s.append(b.XOR(t, c))
        c = b.OR(b.AND(xi, yi), b.AND(t, c))
    return s, c


def less_than(b: Builder, x: list[int], y: list[int]) -> int:
    """Unsigned x < y via a borrow chain."""
    borrow = 0
    for xi, yi in zip(x, y):
        d = b.XOR(xi, yi)
        borrow = b.OR(b.AND(xi ^ 1, yi), b.AND(d ^ 1, borrow))
    return borrow


def gen_ctrl(seed: int = 7) -> Aig:
    """Opcode decoder: 7 inputs, 26 sum-of-products outputs."""
    rng = random.Random(seed)
    b = Builder(_names("op", 7))
    xs = b.bus("op", 7)
    for k in range(26):
        cubes = []
        for _ in range(rng.randint(2, 4)):
            vars_ = rng.sample(range(7), rng.randint(3, 5))
            cubes.append(b.AND(*(xs[v] ^ rng.randint(0, 1) for v in vars_)))
        b.out(f"ctl{k}", b.OR(*cubes))
    return b.finish()


def gen_int2float() -> Aig:
    """11-bit two's complement integer to sign/3-bit exponent/3-bit mantissa."""
    b = Builder(_names("x", 11))
    x = b.bus("x", 11)
    sign = x[10]
    inv = [b.XOR(xi, sign) for xi in x[:10]]
    mag, _ = ripple_add(b, inv, [0] * 10, sign)
    # Leading-one position among bits 3..9 (exponent 1..7, 0 for small values).
    found = 0
    exp_bits = [0, 0, 0]
    mant = [0, 0, 0]
    for pos in range(9, 2, -1):
        here = b.AND(mag[pos], found ^ 1)
        e = pos - 2
        for j in range(3):
            if (e >> j) & 1:
                exp_bits[j] = b.OR(exp_bits[j], here)
        for j in range(3):
            mant[j] = b.OR(mant[j], b.AND(here, mag[pos - 3 + j]))
        found = b.OR(found, mag[pos])
    small = found ^ 1
    for j in range(3):
        mant[j] = b.OR(mant[j], b.AND(small, mag[j]))
    b.out("sign", sign)
    for j in range(3):
        b.out(f"exp{j}", exp_bits[j])
    for j in range(3):
        b.out(f"man{j}", mant[j])
    return b.finish()


def gen_router() -> Aig:
    """XY mesh router: current and destination coordinates (3 bits each)."""
    b = Builder(_names("cx", 3) + _names("cy", 3) + _names("dx", 3) + _names("dy", 3))
    cx, cy, dx, dy = b.bus("cx", 3), b.bus("cy", 3), b.bus("dx", 3), b.bus("dy", 3)
    east = less_than(b, cx, dx)
    west = less_than(b, dx, cx)
    north = less_than(b, cy, dy)
    south = less_than(b, dy, cy)
    xdone = b.AND(east ^ 1, west ^ 1)
    b.out("east", east)
    b.out("west", west)
    b.out("north", b.AND(xdone, north))
    b.out("south", b.AND(xdone, south))
    b.out("local", b.AND(xdone, north ^ 1, south ^ 1))
    inc, _ = ripple_add(b, cx, [1, 0, 0])
    dec, _ = ripple_add(b, cx, [1, 1, 1])
    for j in range(3):
        b.out(f"nx{j}", b.MUX(east, inc[j], b.MUX(west, dec[j], cx[j])))
    return b.finish()


def gen_max(width: int = 6) -> Aig:
    b = Builder(_names("a", width) + _names("b", width))
    a, c = b.bus("a", width), b.bus("b", width)
    lt = less_than(b, a, c)
    for j in range(width):
        b.out(f"m{j}", b.MUX(lt, c[j], a[j]))
    b.out("sel", lt)
    return b.finish()


def gen_adder(width: int = 6) -> Aig:
    b = Builder(_names("a", width) + _names("b", width))
    s, c = ripple_add(b, b.bus("a", width), b.bus("b", width))
    for j, sj in enumerate(s):
        b.out(f"s{j}", sj)
    b.out("cout", c)
    return b.finish()


def gen_priority(width: int = 12) -> Aig:
    b = Builder(_names("r", width))
    r = b.bus("r", width)
    bits = [0] * 4
    for i in range(width):
        higher = [r[j] ^ 1 for j in range(i)]
        grant = b.AND(r[i], *higher)
        for j in range(4):
            if (i >> j) & 1:
                bits[j] = b.OR(bits[j], grant)
    for j in range(4):
        b.out(f"idx{j}", bits[j])
    b.out("valid", b.OR(*r))
    return b.finish()


def gen_dec(width: int = 4) -> Aig:
    b = Builder(_names("s", width))
    s = b.bus("s", width)
    for k in range(1 << width):
        b.out(f"y{k}", b.AND(*(s[j] ^ (0 if (k >> j) & 1 else 1) for j in range(width))))
    return b.finish()


def gen_voter(width: int = 9) -> Aig:
    """Majority of ``width`` votes via a popcount adder tree."""
    b = Builder(_names("v", width))
    counts = [[v] for v in b.bus("v", width)]
    while len(counts) > 1:
        nxt = []
        for k in range(0, len(counts) - 1, 2):
            x, y = counts[k], counts[k + 1]
            n = max(len(x), len(y))
            x = x + [0] * (n - len(x))
            y = y + [0] * (n - len(y))
            s, c = ripple_add(b, x, y)
            nxt.append(s + [c])
        if len(counts) % 2:
            nxt.append(counts[-1])
        counts = nxt
    total = counts[0]
    threshold = width // 2 + 1
    tbits = [(threshold >> j) & 1 for j in range(len(total))]
    b.out("maj", less_than(b, total, tbits) ^ 1)
    return b.finish()


GENERATORS = {
    "ctrl": gen_ctrl,
    "int2float": gen_int2float,
    "router": gen_router,
    "max": gen_max,
    "adder": gen_adder,
    "priority": gen_priority,
    "dec": gen_dec,
    "voter": gen_voter,
}


def main() -> None:
    here = os.path.dirname(os.path.abspath(__file__))
    for name, gen in GENERATORS.items():
        path = os.path.join(here, f"{name}.aag")
        with open(path, "w") as fh:
            fh.write(write_aiger_ascii(gen().cleanup()))
        print(path)


if __name__ == "__main__":
    main()
