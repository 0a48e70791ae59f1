"""AIGER-ASCII and BLIF reading/writing plus AIG <-> MIG conversion.

Emission rules (both writers are canonical, so write(parse(write(x))) is a
byte fixed point):

* ``aag``: header ``aag M I 0 O A`` with ``M = I + A``; inputs are literals
  ``2, 4, ...``; AND lines list ``lhs rhs0 rhs1`` with ``rhs0 <= rhs1`` in
  topological order; a symbol table (``iK name`` / ``oK name``) is written only
  when names are known.  Every line ends with ``\\n``.
* BLIF: ``.model``, ``.inputs``, ``.outputs``, then one ``.names`` per
  reachable majority node (``n<id>``, three-cube majority cover with input
  columns flipped for complemented fanins), then one buffer or inverter
  ``.names`` per output, then ``.end``.
"""

from __future__ import annotations

import os
import re
from typing import Sequence

from .mig import CONST0, CONST1, Mig, MigError, cleanup_dangling


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class Aig:
    """And-Inverter Graph using the same literal/arena scheme as :class:`Mig`."""

    def __init__(self, num_pis: int = 0, input_names: Sequence[str] | None = None,
                 output_names: Sequence[str] | None = None):
        self.num_pis = num_pis
        self.ands: list[tuple[int, int]] = []
        self.pos: list[int] = []
        self.input_names = list(input_names) if input_names is not None else None
        self.output_names = list(output_names) if output_names is not None else None
        self._strash: dict[tuple[int, int], int] = {}

    @property
    def size(self) -> int:
        return self.num_pis + 1 + len(self.ands)

    def pis(self) -> list[int]:
        return [(i + 1) << 1 for i in range(self.num_pis)]

    def fanins(self, node: int) -> tuple[int, int]:
        return self.ands[node - self.num_pis - 1]

    def _check(self, s: int) -> None:
        if s < 0 or (s >> 1) >= self.size:
            raise MigError(f"invalid AIG literal {s}")

    def add_and_raw(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a > b:
            a, b = b, a
        node = self.size
        self.ands.append((a, b))
        self._strash.setdefault((a, b), node)
        return node << 1

    def make_and(self, a: int, b: int) -> int:
        self._check(a)
        self._check(b)
        if a > b:
            a, b = b, a
        if a == CONST0 or a ^ b == 1:
            return CONST0
        if a == CONST1 or a == b:
            return b
        node = self._strash.get((a, b))
        if node is None:
            node = self.size
            self.ands.append((a, b))
            self._strash[(a, b)] = node
        return node << 1

    def make_or(self, a: int, b: int) -> int:
        return self.make_and(a ^ 1, b ^ 1) ^ 1

    def add_po(self, s: int) -> None:
        self._check(s)
        self.pos.append(s)

    def reachable(self) -> bytearray:
        first = self.num_pis + 1
        mark = bytearray(self.size)
        for s in self.pos:
            if (s >> 1) >= first:
                mark[s >> 1] = 1
        for n in range(self.size - 1, first - 1, -1):
            if mark[n]:
                a, b = self.ands[n - first]
                if (a >> 1) >= first:
                    mark[a >> 1] = 1
                if (b >> 1) >= first:
                    mark[b >> 1] = 1
        return mark

    def node_count(self) -> int:
        return sum(self.reachable())

    def cleanup(self) -> "Aig":
        mark = self.reachable()
        out = Aig(self.num_pis, self.input_names, self.output_names)
        remap = list(range(self.num_pis + 1)) + [0] * len(self.ands)
        first = self.num_pis + 1
        for i, (a, b) in enumerate(self.ands):
            n = first + i
            if mark[n]:
                s = out.add_and_raw((remap[a >> 1] << 1) | (a & 1), (remap[b >> 1] << 1) | (b & 1))
                remap[n] = s >> 1
        out.pos = [(remap[s >> 1] << 1) | (s & 1) for s in self.pos]
        return out


# -- AIGER ASCII ----------------------------------------------------------

_INT = re.compile(r"^\d+$")


def _ints(line: str, count: int, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count or not all(_INT.match(p) for p in parts):
        raise ParseError(f"expected {count} unsigned integers, got {line!r}", lineno)
    return [int(p) for p in parts]


def parse_aiger_ascii(text: str) -> Aig:
    lines = text.split("\n")
    if not lines or not lines[0].startswith("aag"):
        raise ParseError("missing 'aag' header", 1)
    head = lines[0].split()
    if len(head) != 6 or head[0] != "aag" or not all(_INT.match(p) for p in head[1:]):
        raise ParseError(f"malformed header {lines[0]!r}", 1)
    m, i, latches, o, a = (int(p) for p in head[1:])
    if latches != 0:
        raise ParseError("latches are not supported (combinational only)", 1)
    if m < i + a:
        raise ParseError(f"header M={m} smaller than I+A={i + a}", 1)
    need = 1 + i + o + a
    body = lines[1:need]
    if len(body) < i + o + a or any(not s.strip() for s in body):
        raise ParseError("unexpected end of file", min(len(lines), need))

    maxlit = 2 * m + 1

    def check(value: int, lineno: int) -> int:
        if value > maxlit:
            raise ParseError(f"literal {value} exceeds 2*M+1={maxlit}", lineno)
        return value

    input_vars: list[int] = []
    defined: dict[int, int] = {}
    for k in range(i):
        lineno = 2 + k
        (lt,) = _ints(body[k], 1, lineno)
        check(lt, lineno)
        if lt < 2 or lt & 1:
            raise ParseError(f"input literal {lt} must be even and non-constant", lineno)
        if (lt >> 1) in defined:
            raise ParseError(f"variable {lt >> 1} defined twice", lineno)
        defined[lt >> 1] = -1 - k
        input_vars.append(lt >> 1)
    outputs: list[tuple[int, int]] = []
    for k in range(o):
        lineno = 2 + i + k
        (lt,) = _ints(body[i + k], 1, lineno)
        outputs.append((check(lt, lineno), lineno))
    ands: dict[int, tuple[int, int, int]] = {}
    order: list[int] = []
    for k in range(a):
        lineno = 2 + i + o + k
        lhs, r0, r1 = _ints(body[i + o + k], 3, lineno)
        for v in (lhs, r0, r1):
            check(v, lineno)
        if lhs < 2 or lhs & 1:
            raise ParseError(f"AND lhs {lhs} must be even and non-constant", lineno)
        if (lhs >> 1) in defined:
            raise ParseError(f"variable {lhs >> 1} defined twice", lineno)
        defined[lhs >> 1] = k
        ands[lhs >> 1] = (r0, r1, lineno)
        order.append(lhs >> 1)

    in_names: dict[int, str] = {}
    out_names: dict[int, str] = {}
    for k in range(need, len(lines)):
        line = lines[k]
        if not line:
            continue
        if line.startswith("c"):
            break
        match = re.match(r"^([iol])(\d+) (.+)$", line)
        if not match:
            raise ParseError(f"malformed symbol line {line!r}", k + 1)
        kind, idx, name = match.group(1), int(match.group(2)), match.group(3)
        if kind == "l":
            raise ParseError("latch symbol in combinational file", k + 1)
        table, limit = (in_names, i) if kind == "i" else (out_names, o)
        if idx >= limit:
            raise ParseError(f"symbol index {idx} out of range", k + 1)
        table[idx] = name

    aig = Aig(i)
    var_map: dict[int, int] = {0: 0}
    for k, v in enumerate(input_vars):
        var_map[v] = (k + 1) << 1

    def resolve(value: int, lineno: int) -> int:
        v = value >> 1
        if v not in var_map:
            raise ParseError(f"literal {value} uses undefined variable {v}", lineno)
        return var_map[v] | (value & 1)

    # Topological emission (ASCII files may list ANDs in any order).
    state: dict[int, int] = {}
    for root in order:
        if root in var_map:
            continue
        stack = [root]
        while stack:
            v = stack[-1]
            if v in var_map:
                stack.pop()
                continue
            r0, r1, lineno = ands[v]
            pending = [x >> 1 for x in (r0, r1) if (x >> 1) not in var_map]
            if pending:
                if state.get(v) == 1:
                    raise ParseError(f"combinational cycle through variable {v}", lineno)
                state[v] = 1
                for p in pending:
                    if p not in ands:
                        raise ParseError(f"literal uses undefined variable {p}", lineno)
                    if state.get(p) == 1:
                        raise ParseError(f"combinational cycle through variable {p}", lineno)
                    stack.append(p)
                continue
            state[v] = 2
            var_map[v] = aig.add_and_raw(resolve(r0, lineno), resolve(r1, lineno))
            stack.pop()
    for lt, lineno in outputs:
        aig.pos.append(resolve(lt, lineno))
    if in_names:
        aig.input_names = [in_names.get(k, f"i{k}") for k in range(i)]
    if out_names:
        aig.output_names = [out_names.get(k, f"o{k}") for k in range(o)]
    return aig


def write_aiger_ascii(aig: Aig) -> str:
    i, a = aig.num_pis, len(aig.ands)
    out = [f"aag {i + a} {i} 0 {len(aig.pos)} {a}"]
    out.extend(str((k + 1) << 1) for k in range(i))
    out.extend(str(s) for s in aig.pos)
    first = i + 1
    for k, (x, y) in enumerate(aig.ands):
        if x > y:
            x, y = y, x
        out.append(f"{(first + k) << 1} {x} {y}")
    if aig.input_names:
        out.extend(f"i{k} {name}" for k, name in enumerate(aig.input_names))
    if aig.output_names:
        out.extend(f"o{k} {name}" for k, name in enumerate(aig.output_names))
    return "\n".join(out) + "\n"


# -- conversions ----------------------------------------------------------

def aig_to_mig(aig: Aig) -> Mig:
    """AND(a, b) becomes MAJ(a, b, 0), node for node."""
    m = Mig(aig.num_pis, aig.input_names)
    remap = [k << 1 for k in range(aig.num_pis + 1)] + [0] * len(aig.ands)
    first = aig.num_pis + 1
    for k, (a, b) in enumerate(aig.ands):
        remap[first + k] = m.make_maj(remap[a >> 1] ^ (a & 1), remap[b >> 1] ^ (b & 1), CONST0)
    m.pos = [remap[s >> 1] ^ (s & 1) for s in aig.pos]
    m.output_names = list(aig.output_names) if aig.output_names is not None else None
    return cleanup_dangling(m)


def mig_to_aig(mig: Mig) -> Aig:
    """Each majority node becomes ab + c(a + b), at most four ANDs."""
    aig = Aig(mig.num_pis, mig.input_names, mig.output_names)
    remap = [k << 1 for k in range(mig.num_pis + 1)] + [0] * mig.num_allocated
    for n in mig.nodes():
        a, b, c = (remap[s >> 1] ^ (s & 1) for s in mig.fanins(n))
        if a >> 1 == 0:
            a, c = c, a
        elif b >> 1 == 0:
            b, c = c, b
        if c == CONST0:
            out = aig.make_and(a, b)
        elif c == CONST1:
            out = aig.make_or(a, b)
        else:
            out = aig.make_or(aig.make_and(a, b), aig.make_and(c, aig.make_or(a, b)))
        remap[n] = out
    aig.pos = [remap[s >> 1] ^ (s & 1) for s in mig.pos]
    return aig.cleanup()


def parse_aiger_mig(text: str) -> Mig:
    return aig_to_mig(parse_aiger_ascii(text))


def write_aiger_mig(mig: Mig) -> str:
    return write_aiger_ascii(mig_to_aig(mig))


# -- BLIF -----------------------------------------------------------------

_UNSUPPORTED = (".latch", ".subckt", ".gate", ".mlatch", ".search", ".exdc")


def _blif_lines(text: str):
    """Yield (lineno, tokens) with comments stripped and continuations joined."""
    pending: list[str] = []
    start = 0
    for lineno, raw in enumerate(text.split("\n"), 1):
        line = raw.split("#", 1)[0].rstrip()
        if not pending:
            start = lineno
        if line.endswith("\\"):
            pending.append(line[:-1])
            continue
        pending.append(line)
        joined = " ".join(pending).split()
        pending = []
        if joined:
            yield start, joined
    if pending:
        joined = " ".join(pending).split()
        if joined:
            yield start, joined


def _sop(mig: Mig, ins: list[int], rows: list[str], onset: bool) -> int:
    terms = []
    for row in rows:
        lits = []
        for ch, s in zip(row, ins):
            if ch == "1":
                lits.append(s)
            elif ch == "0":
                lits.append(s ^ 1)
        terms.append(_tree(mig, lits, CONST0, CONST1))
    out = _tree(mig, terms, CONST1, CONST0)
    return out if onset else out ^ 1


def _cover_table(rows: list[str], width: int) -> int:
    table = 0
    for m in range(1 << width):
        for row in rows:
            if all(ch == "-" or int(ch) == (m >> j) & 1 for j, ch in enumerate(row)):
                table |= 1 << m
                break
    return table


def _majority_polarity(table: int) -> tuple[int, int] | None:
    """(input flip mask, output flip) if an 8-row table is a majority."""
    for flips in range(8):
        t = 0
        for m in range(8):
            x = m ^ flips
            if (x & 1) + ((x >> 1) & 1) + ((x >> 2) & 1) >= 2:
                t |= 1 << m
        if t == table:
            return flips, 0
        if t ^ 0xFF == table:
            return flips, 1
    return None


def _cover(mig: Mig, ins: list[int], rows: list[str], onset: bool) -> int:
    if len(ins) == 3:
        table = _cover_table(rows, 3)
        if not onset:
            table ^= 0xFF
        match = _majority_polarity(table)
        if match is not None:
            flips, out = match
            return mig.make_maj(*(s ^ ((flips >> j) & 1) for j, s in enumerate(ins))) ^ out
    return _sop(mig, ins, rows, onset)


def _tree(mig: Mig, sigs: list[int], const: int, empty: int) -> int:
    """Balanced AND (const=0) or OR (const=1) tree; ``empty`` for no inputs."""
    if not sigs:
        return empty
    while len(sigs) > 1:
        nxt = [mig.make_maj(sigs[k], sigs[k + 1], const) for k in range(0, len(sigs) - 1, 2)]
        if len(sigs) % 2:
            nxt.append(sigs[-1])
        sigs = nxt
    return sigs[0]


def parse_blif(text: str) -> Mig:
    """Parse the combinational ``.names`` subset of BLIF into a MIG."""
    model_inputs: list[str] = []
    model_outputs: list[str] = []
    defs: dict[str, tuple[list[str], list[str], bool, int]] = {}
    current: list | None = None
    seen_model = False
    for lineno, tok in _blif_lines(text):
        head = tok[0]
        if head.startswith("."):
            current = None
            if head == ".model":
                if seen_model:
                    raise ParseError("multiple models are not supported", lineno)
                seen_model = True
            elif head == ".inputs":
                model_inputs.extend(tok[1:])
            elif head == ".outputs":
                model_outputs.extend(tok[1:])
            elif head == ".names":
                if len(tok) < 2:
                    raise ParseError(".names needs an output", lineno)
                out = tok[-1]
                if out in defs or out in model_inputs:
                    raise ParseError(f"signal {out!r} defined twice", lineno)
                current = [tok[1:-1], [], None, lineno]
                defs[out] = current  # type: ignore[assignment]
            elif head == ".end":
                break
            elif head in _UNSUPPORTED:
                raise ParseError(f"unsupported construct {head}", lineno)
            else:
                raise ParseError(f"unknown directive {head}", lineno)
            continue
        if current is None:
            raise ParseError(f"cover row outside .names: {' '.join(tok)!r}", lineno)
        ins = current[0]
        if not ins:
            if tok != ["1"] and tok != ["0"]:
                raise ParseError(f"bad constant cover row {' '.join(tok)!r}", lineno)
            row, val = "", tok[0]
        else:
            if len(tok) != 2 or len(tok[0]) != len(ins):
                raise ParseError(f"cover row width mismatch: {' '.join(tok)!r}", lineno)
            row, val = tok
            if any(ch not in "01-" for ch in row) or val not in ("0", "1"):
                raise ParseError(f"bad cover row {' '.join(tok)!r}", lineno)
        onset = val == "1"
        if current[2] is None:
            current[2] = onset
        elif current[2] != onset:
            raise ParseError("mixed on-set and off-set rows", lineno)
        current[1].append(row)

    if len(set(model_inputs)) != len(model_inputs):
        raise ParseError("duplicate input names")
    mig = Mig(len(model_inputs), model_inputs)
    sig: dict[str, int] = {name: mig.pi(k) for k, name in enumerate(model_inputs)}

    def build(name: str) -> int:
        stack = [name]
        on_stack = set()
        while stack:
            v = stack[-1]
            if v in sig:
                stack.pop()
                continue
            if v not in defs:
                raise ParseError(f"signal {v!r} is never defined")
            fins, rows, onset, lineno = defs[v]
            todo = [x for x in fins if x not in sig]
            if todo:
                if v in on_stack:
                    raise ParseError(f"combinational cycle through {v!r}", lineno)
                on_stack.add(v)
                stack.extend(todo)
                continue
            if onset is None:
                sig[v] = CONST0
            elif not fins:
                sig[v] = CONST1 if onset and rows else CONST0
                if not onset:
                    sig[v] = CONST0 if rows else CONST1
            else:
                sig[v] = _cover(mig, [sig[x] for x in fins], rows, onset)
            stack.pop()
        return sig[name]

    # Definition order first, so a topologically written file keeps its node order.
    for name in defs:
        build(name)
    for name in model_outputs:
        mig.add_po(build(name), name)
    return cleanup_dangling(mig)


_MAJ_COVER = ("11-", "1-1", "-11")


def write_blif(mig: Mig, model: str = "top") -> str:
    mig = cleanup_dangling(mig)
    in_names = mig.input_names or [f"i{k}" for k in range(mig.num_pis)]
    out_names = mig.output_names or [f"o{k}" for k in range(mig.num_pos)]

    def name(node: int) -> str:
        if node == 0:
            return "const0"
        if node <= mig.num_pis:
            return in_names[node - 1]
        return f"n{node}"

    lines = [f".model {model}", ".inputs " + " ".join(in_names),
             ".outputs " + " ".join(out_names)]
    uses_const = any(s >> 1 == 0 for n in mig.nodes() for s in mig.fanins(n))
    if uses_const:
        lines.append(".names const0")
    for n in mig.nodes():
        f = mig.fanins(n)
        lines.append(".names " + " ".join(name(s >> 1) for s in f) + f" n{n}")
        for cube in _MAJ_COVER:
            row = "".join(ch if ch == "-" or not (s & 1) else ("0" if ch == "1" else "1")
                          for ch, s in zip(cube, f))
            lines.append(f"{row} 1")
    for s, oname in zip(mig.pos, out_names):
        node = s >> 1
        if node == 0:
            lines.append(f".names {oname}")
            if s & 1:
                lines.append("1")
        elif oname == name(node) and not s & 1:
            continue
        else:
            lines.append(f".names {name(node)} {oname}")
            lines.append("0 1" if s & 1 else "1 1")
    lines.append(".end")
    return "\n".join(lines) + "\n"


def _format(path: str) -> str:
    ext = os.path.splitext(path)[1].lower()
    if ext not in (".aag", ".blif"):
        raise ValueError(f"{path}: unsupported circuit format {ext or '(none)'!r}; "
                         "use .aag or .blif")
    return ext


def read_circuit(path: str) -> Mig:
    """Load ``.aag`` or ``.blif`` by extension."""
    ext = _format(path)
    with open(path) as fh:
        text = fh.read()
    if ext == ".blif":
        return parse_blif(text)
    return parse_aiger_mig(text)


def write_circuit(mig: Mig, path: str) -> None:
    text = write_blif(mig) if _format(path) == ".blif" else write_aiger_mig(mig)
    with open(path, "w") as fh:
        fh.write(text)
