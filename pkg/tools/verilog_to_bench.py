"""Convert gate-level ISCAS-85 Verilog into 2-input ``.bench`` fixtures.

The converted circuits ship in ``src/splitguard/benchmarks``.  Gates wider
than two inputs are split into balanced trees of 2-input gates with the
inverting kind at the root; ``assign`` aliases become buffers and constant
ties become ``XOR(x, x)`` / ``XNOR(x, x)`` on the first primary input.

Usage::

    python tools/verilog_to_bench.py c432.v [more.v ...] --out src/splitguard/benchmarks
"""

from __future__ import annotations

import argparse
import re
from pathlib import Path

BASE = {"and": "AND", "nand": "AND", "or": "OR", "nor": "OR", "xor": "XOR", "xnor": "XOR"}
ROOT = {"and": "AND", "nand": "NAND", "or": "OR", "nor": "NOR", "xor": "XOR", "xnor": "XNOR"}


def _names(text):
    return [t.strip() for t in text.split(",") if t.strip()]


def convert(text, name):
    text = re.sub(r"//.*", "", text)
    stmts = [" ".join(s.split()) for s in text.split(";")]
    inputs, outputs, gates = [], [], []
    used = set()
    consts = []
    for s in stmts:
        if s.startswith("input "):
            inputs += _names(s[6:])
        elif s.startswith("output "):
            outputs += _names(s[7:])
        elif s.startswith("assign "):
            lhs, rhs = (t.strip() for t in s[7:].split("="))
            if rhs in ("1'b0", "1'b1"):
                consts.append((lhs, rhs))
            else:
                gates.append((lhs, "BUFF", [rhs]))
        else:
            m = re.match(r"(\w+)\s+\w+\s*\((.*)\)$", s)
            if not m or m.group(1) in ("module", "wire"):
                continue
            kind, ports = m.group(1), _names(m.group(2))
            out, ins = ports[0], ports[1:]
            if kind == "not":
                gates.append((out, "NOT", ins))
            elif kind == "buf":
                gates.append((out, "BUFF", ins))
            elif len(ins) == 2:
                gates.append((out, ROOT[kind], ins))
            else:
                gates.extend(_tree(out, kind, ins, used))
    for lhs, rhs in consts:
        gates.append((lhs, "XOR" if rhs == "1'b0" else "XNOR", [inputs[0], inputs[0]]))
    lines = [f"# {name}: ISCAS-85, multi-input gates decomposed to 2-input trees",
             f"# {len(inputs)} inputs, {len(outputs)} outputs, {len(gates)} gates", ""]
    lines += [f"INPUT({x})" for x in inputs]
    lines.append("")
    lines += [f"OUTPUT({x})" for x in outputs]
    lines.append("")
    lines += [f"{out} = {kind}({', '.join(ins)})" for out, kind, ins in gates]
    return "\n".join(lines) + "\n"


def _tree(out, kind, ins, used):
    gates = []
    level = list(ins)
    k = 0
    while len(level) > 2:
        nxt = []
        for i in range(0, len(level) - 1, 2):
            tmp = f"{out}_d{k}"
            k += 1
            assert tmp not in used
            used.add(tmp)
            gates.append((tmp, BASE[kind], [level[i], level[i + 1]]))
            nxt.append(tmp)
        if len(level) % 2:
            nxt.append(level[-1])
        level = nxt
    gates.append((out, ROOT[kind], level))
    return gates


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("files", nargs="+", type=Path)
    ap.add_argument("--out", type=Path, required=True)
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    for path in args.files:
        name = path.stem
        (args.out / f"{name}.bench").write_text(convert(path.read_text(), name))


if __name__ == "__main__":
    main()
