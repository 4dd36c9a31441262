"""Bit-parallel pattern simulation and the functional metrics OER / HD.

Patterns are packed 64 per ``uint64`` word: pattern ``j`` lives in bit
``j % 64`` of word ``j // 64``.  Simulation is levelized: gates of the same
logic level and kind are evaluated together with one numpy operation, over
blocks of words so memory stays bounded on large designs.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .netlist import Netlist, NetlistError, topological_order

DEFAULT_PATTERNS = 100_000
OER_TARGET = 0.99
_BLOCK_WORDS = 256
_ONES = np.uint64(0xFFFFFFFFFFFFFFFF)


class PatternMismatchError(NetlistError):
    pass


def _tail_mask(num_patterns: int) -> np.ndarray:
    words = -(-num_patterns // 64)
    mask = np.full(words, _ONES, dtype=np.uint64)
    rem = num_patterns % 64
    if rem:
        mask[-1] = np.uint64((1 << rem) - 1)
    return mask


@dataclass(frozen=True, eq=False)
class PatternSet:
    """Input stimuli, one packed bit vector per primary input."""

    inputs: tuple[str, ...]
    bits: np.ndarray
    num_patterns: int
    seed: int | None = None
    exhaustive: bool = False

    def __post_init__(self):
        words = -(-self.num_patterns // 64)
        if self.bits.shape != (len(self.inputs), words):
            raise ValueError(f"bits shape {self.bits.shape} does not match "
                             f"{len(self.inputs)} inputs x {words} words")

    @property
    def num_words(self) -> int:
        return self.bits.shape[1]

    @classmethod
    def random(cls, inputs, num_patterns: int = DEFAULT_PATTERNS, seed: int = 0) -> PatternSet:
        inputs = tuple(inputs)
        rng = np.random.default_rng(seed)
        words = -(-num_patterns // 64)
        bits = rng.integers(0, _ONES, size=(len(inputs), words), dtype=np.uint64,
                            endpoint=True)
        if words:
            bits &= _tail_mask(num_patterns)
        return cls(inputs, bits, num_patterns, seed=seed)

    @classmethod
    def all_patterns(cls, inputs) -> PatternSet:
        """Every assignment; pattern ``j`` sets input ``i`` to bit ``i`` of ``j``."""
        inputs = tuple(inputs)
        k = len(inputs)
        if k > 30:
            raise ValueError(f"{k} inputs is too many for exhaustive patterns")
        num = 1 << k
        idx = np.arange(num, dtype=np.uint64)
        rows = [((idx >> np.uint64(i)) & np.uint64(1)).astype(bool) for i in range(k)]
        bits = np.array([pack_bits(r) for r in rows], dtype=np.uint64).reshape(k, -(-num // 64))
        return cls(inputs, bits, num, exhaustive=True)

    @classmethod
    def for_budget(cls, inputs, budget: int = DEFAULT_PATTERNS, seed: int = 0) -> PatternSet:
        """Exhaustive when ``2**|inputs| <= budget``, otherwise ``budget`` seeded random patterns."""
        inputs = tuple(inputs)
        if len(inputs) < 63 and (1 << len(inputs)) <= budget:
            return cls.all_patterns(inputs)
        return cls.random(inputs, budget, seed)

    def column(self, j: int) -> dict[str, int]:
        """Input assignment of pattern ``j``."""
        w, b = divmod(j, 64)
        return {pi: int((self.bits[i, w] >> np.uint64(b)) & np.uint64(1))
                for i, pi in enumerate(self.inputs)}

    def to_text(self) -> str:
        """One hex row per pattern; bit ``i`` of a row is input ``i``."""
        lines = ["# inputs: " + " ".join(self.inputs)]
        if self.seed is not None:
            lines.append(f"# seed: {self.seed}")
        width = max(1, -(-len(self.inputs) // 4))
        unpacked = np.stack([unpack_bits(r, self.num_patterns) for r in self.bits]) \
            if self.inputs else np.zeros((0, self.num_patterns), dtype=bool)
        weights = [1 << i for i in range(len(self.inputs))]
        for j in range(self.num_patterns):
            value = sum(w for w, bit in zip(weights, unpacked[:, j]) if bit)
            lines.append(format(value, f"0{width}x"))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> PatternSet:
        inputs: tuple[str, ...] = ()
        seed = None
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if line.startswith("# inputs:"):
                inputs = tuple(line[len("# inputs:"):].split())
            elif line.startswith("# seed:"):
                seed = int(line[len("# seed:"):])
            elif line and not line.startswith("#"):
                rows.append(int(line, 16))
        cols = [np.array([(r >> i) & 1 for r in rows], dtype=bool) for i in range(len(inputs))]
        words = -(-len(rows) // 64)
        bits = np.array([pack_bits(c) for c in cols], dtype=np.uint64).reshape(len(inputs), words)
        return cls(inputs, bits, len(rows), seed=seed)


def pack_bits(values) -> np.ndarray:
    values = np.asarray(values, dtype=bool)
    n = len(values)
    words = -(-n // 64)
    padded = np.zeros(words * 64, dtype=np.uint8)
    padded[:n] = values
    return np.packbits(padded, bitorder="little").view("<u8").astype(np.uint64)


def unpack_bits(words: np.ndarray, n: int) -> np.ndarray:
    as_bytes = np.asarray(words, dtype=np.uint64).astype("<u8").view(np.uint8)
    return np.unpackbits(as_bytes, bitorder="little")[:n].astype(bool)


_OPS = {
    "BUF": lambda a, b: a,
    "INV": lambda a, b: ~a,
    "AND2": lambda a, b: a & b,
    "NAND2": lambda a, b: ~(a & b),
    "OR2": lambda a, b: a | b,
    "NOR2": lambda a, b: ~(a | b),
    "XOR2": lambda a, b: a ^ b,
    "XNOR2": lambda a, b: ~(a ^ b),
}


@dataclass
class _Program:
    index: dict[str, int]
    inputs: tuple[str, ...]
    steps: list = field(default_factory=list)


def compile_netlist(n: Netlist) -> _Program:
    order = topological_order(n)
    index = {pi: i for i, pi in enumerate(n.inputs)}
    for name in order:
        index[name] = len(index)
    gm = n.gate_map
    level = {pi: 0 for pi in n.inputs}
    groups: dict[tuple[int, str], list] = {}
    for name in order:
        g = gm[name]
        lv = 1 + max(level[x] for x in g.inputs)
        level[name] = lv
        groups.setdefault((lv, g.kind), []).append(g)
    prog = _Program(index, n.inputs)
    for (lv, kind), gates in sorted(groups.items()):
        out = np.array([index[g.name] for g in gates], dtype=np.intp)
        a = np.array([index[g.inputs[0]] for g in gates], dtype=np.intp)
        b = np.array([index[g.inputs[-1]] for g in gates], dtype=np.intp)
        prog.steps.append((_OPS[kind], out, a, b))
    return prog


def _run(prog: _Program, p: PatternSet, nets, block_words: int):
    """Yield ``(start_word, values)`` per block; ``values`` rows follow ``nets``."""
    pos = {pi: i for i, pi in enumerate(p.inputs)}
    if set(pos) != set(prog.inputs):
        raise PatternMismatchError("pattern inputs do not match the netlist's primary inputs")
    src = np.array([pos[pi] for pi in prog.inputs], dtype=np.intp)
    pi_rows = np.arange(len(prog.inputs), dtype=np.intp)
    want = np.array([prog.index[x] for x in nets], dtype=np.intp)
    total = len(prog.index)
    for start in range(0, p.num_words, block_words):
        stop = min(start + block_words, p.num_words)
        vals = np.empty((total, stop - start), dtype=np.uint64)
        vals[pi_rows] = p.bits[src, start:stop]
        for op, out, a, b in prog.steps:
            vals[out] = op(vals[a], vals[b])
        yield start, vals[want]


def simulate(n: Netlist, p: PatternSet, block_words: int = _BLOCK_WORDS) -> dict[str, np.ndarray]:
    """Packed output vectors per primary output; bits past the last pattern are 0."""
    prog = compile_netlist(n)
    outs = np.zeros((len(n.outputs), p.num_words), dtype=np.uint64)
    for start, vals in _run(prog, p, n.outputs, block_words):
        outs[:, start:start + vals.shape[1]] = vals
    if p.num_words:
        outs &= _tail_mask(p.num_patterns)
    return {po: outs[i] for i, po in enumerate(n.outputs)}


@dataclass(frozen=True)
class FunctionalScores:
    oer: float
    hd: float
    num_patterns: int
    num_outputs: int

    def to_json(self) -> dict:
        return {"oer": self.oer, "hd": self.hd, "num_patterns": self.num_patterns,
                "num_outputs": self.num_outputs}


def _check_ports(a: Netlist, b: Netlist) -> None:
    if set(a.inputs) != set(b.inputs):
        raise PatternMismatchError("netlists have different primary inputs")
    if set(a.outputs) != set(b.outputs):
        raise PatternMismatchError("netlists have different primary outputs")


def _diff_blocks(golden: Netlist, candidate: Netlist, p: PatternSet, block_words: int):
    """Yield ``(start_word, diff)`` where ``diff`` holds per-output mismatch bits."""
    _check_ports(golden, candidate)
    outs = golden.outputs
    pa, pb = compile_netlist(golden), compile_netlist(candidate)
    mask = _tail_mask(p.num_patterns) if p.num_words else np.zeros(0, np.uint64)
    for (start, va), (_, vb) in zip(_run(pa, p, outs, block_words), _run(pb, p, outs, block_words)):
        yield start, (va ^ vb) & mask[start:start + va.shape[1]]


def score(golden: Netlist, candidate: Netlist, p: PatternSet,
          block_words: int = _BLOCK_WORDS) -> FunctionalScores:
    """OER: share of patterns with any wrong output.  HD: share of wrong output bits."""
    bad_patterns = 0
    bad_bits = 0
    for _, diff in _diff_blocks(golden, candidate, p, block_words):
        if diff.size:
            bad_patterns += int(np.bitwise_count(np.bitwise_or.reduce(diff, axis=0)).sum())
            bad_bits += int(np.bitwise_count(diff).sum())
    num_out = len(golden.outputs)
    oer = bad_patterns / p.num_patterns if p.num_patterns else 0.0
    hd = bad_bits / (p.num_patterns * num_out) if p.num_patterns and num_out else 0.0
    return FunctionalScores(oer, hd, p.num_patterns, num_out)


class Verdict(str, enum.Enum):
    EQUIV_EXHAUSTIVE = "EQUIV-EXHAUSTIVE"
    EQUIV_SAMPLED = "EQUIV-SAMPLED"
    DIFFERENT = "DIFFERENT"


@dataclass(frozen=True)
class Equivalence:
    verdict: Verdict
    num_patterns: int
    witness: dict[str, int] | None = None

    @property
    def equivalent(self) -> bool:
        return self.verdict is not Verdict.DIFFERENT

    def __bool__(self) -> bool:
        return self.equivalent


def check_equivalence(a: Netlist, b: Netlist, budget: int = DEFAULT_PATTERNS,
                      seed: int = 0) -> Equivalence:
    """Exhaustive comparison when ``2**|PI| <= budget``, seeded sampling otherwise."""
    _check_ports(a, b)
    if len(a.inputs) < 63 and (1 << len(a.inputs)) <= budget:
        p = PatternSet.all_patterns(a.inputs)
        ok = Verdict.EQUIV_EXHAUSTIVE
    else:
        p = PatternSet.random(a.inputs, budget, seed)
        ok = Verdict.EQUIV_SAMPLED
    for start, diff in _diff_blocks(a, b, p, _BLOCK_WORDS):
        if not diff.size:
            continue
        any_bad = np.bitwise_or.reduce(diff, axis=0)
        nz = np.flatnonzero(any_bad)
        if len(nz):
            w = int(nz[0])
            word = int(any_bad[w])
            bit = (word & -word).bit_length() - 1
            return Equivalence(Verdict.DIFFERENT, p.num_patterns,
                               p.column((start + w) * 64 + bit))
    return Equivalence(ok, p.num_patterns)
