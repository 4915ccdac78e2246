"""SystemVerilog emitter for the hidden layer (HL) and output layer (OL) modules.

HL realizes the local connection as eight gated minterms over the ring
neighborhood, with the gate bits set to the neighborhood truth table of the
connection number. OL holds the state register, the load/reset controls, and
the permutation wiring from HL's output back to the state.
"""

from __future__ import annotations

import ast
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Optional

from pbnn import __version__
from pbnn.canonical import Permutation
from pbnn.core import BinaryState, Pbnn, check_cn, check_n, truth_table, weights_for_cn

BANNER_PREFIX = "// pbnn:"


def _banner(meta: Optional[Mapping[str, object]]) -> list[str]:
    lines = [f"{BANNER_PREFIX} generated by pbnn-hdlgen {__version__}"]
    for k, v in (meta or {}).items():
        lines.append(f"{BANNER_PREFIX} {k}: {v}")
    return lines


def normalize(text: str) -> str:
    """Drop banner lines so golden comparisons ignore version and run metadata."""
    return "".join(ln for ln in text.splitlines(keepends=True) if not ln.startswith(BANNER_PREFIX))


def _literal(var: str, bit: int) -> str:
    return var if bit else f"~{var}"


def emit_hidden_layer(n: int, cn: int, meta: Optional[Mapping[str, object]] = None) -> str:
    check_n(n)
    cn = check_cn(cn)
    mask = truth_table(cn)
    w = ", ".join(f"{v:+d}" for v in weights_for_cn(cn))
    out = _banner(meta) + [
        f"// Hidden layer: local binary connection CN{cn}, w = ({w})",
        "module HL #(",
        f"    parameter N = {n},",
        f"    parameter [7:0] CN = 8'b{mask:08b}  // Connection Number",
        ") (",
        "    input  wire [1:N] x,",
        "    output wire [1:N] x_next",
        ");",
        "    genvar j;",
        "    generate",
        "        for (j = 1; j <= N; j = j + 1) begin : cell",
        "            wire xl = x[((j + N - 2) % N) + 1];  // x[j-1] on the ring",
        "            wire xc = x[j];",
        "            wire xr = x[(j % N) + 1];  // x[j+1] on the ring",
        "            wire " + ", ".join(f"rule{k}" for k in range(8)) + ";",
    ]
    for k in range(8):
        terms = " & ".join(_literal(v, (k >> s) & 1) for v, s in (("xl", 2), ("xc", 1), ("xr", 0)))
        comment = "  // Boolean function" if k == 0 else ""
        out.append(f"            assign rule{k} = CN[{k}] & ({terms});{comment}")
    out += [
        "            assign x_next[j] = " + " | ".join(f"rule{k}" for k in range(8)) + ";",
        "        end",
        "    endgenerate",
        "endmodule",
    ]
    return "\n".join(out) + "\n"


def emit_output_layer(n: int, p: Permutation, meta: Optional[Mapping[str, object]] = None) -> str:
    check_n(n)
    if p.n != n:
        raise ValueError(f"permutation has length {p.n}, expected {n}")
    init = ", ".join(map(str, p.ids))
    loop = "            for (k = 1; k <= N; k = k + 1) begin"
    out = _banner(meta) + [
        "// Output layer: global permutation connection",
        f"module OL #(parameter N = {n}) (",
        "    input  wire clk,",
        "    input  wire load,",
        "    input  wire rst,",
        "    input  wire [1:N] i,",
        "    output reg  [1:N] x",
        ");",
        "    wire [1:N] x_next;",
        "    integer k;",
        f"    integer y [1:N] = '{{{init}}};",
        f"    // Permutation identifier {p.label()}",
        "    always @(posedge clk) begin",
        "        if (load == 1) begin",
        loop,
        "                x[k] <= i[k];  // Initial condition",
        "            end",
        "        end else if (rst == 1) begin",
        loop,
        "                x[k] <= 1'b0;",
        "            end",
        "        end else begin",
        loop,
        "                x[k] <= x_next[y[k]];  // Permutation",
        "            end",
        "        end",
        "    end",
        "    HL #(.N(N)) hl (.x(x), .x_next(x_next));",
        "endmodule",
    ]
    return "\n".join(out) + "\n"


@dataclass(frozen=True)
class HdlArtifact:
    hidden_source: str
    output_source: str
    metadata: dict

    def write(self, outdir: str | Path) -> list[Path]:
        d = Path(outdir)
        d.mkdir(parents=True, exist_ok=True)
        paths = [d / "HL.sv", d / "OL.sv", d / "pbnn_hdl.json"]
        for path, text in zip(paths, (self.hidden_source, self.output_source)):
            with open(path, "w", newline="\n") as fh:
                fh.write(text)
        paths[2].write_text(json.dumps(self.metadata, indent=2) + "\n")
        return paths


def emit(net: Pbnn, meta: Optional[Mapping[str, object]] = None) -> HdlArtifact:
    metadata = {
        "n": net.n,
        "cn": net.cn,
        "cn_mask": f"8'b{net.mask:08b}",
        "permutation": str(net.sigma),
        "version": __version__,
    }
    if meta:
        metadata["manifest"] = dict(meta)
    return HdlArtifact(
        emit_hidden_layer(net.n, net.cn, meta),
        emit_output_layer(net.n, net.sigma, meta),
        metadata,
    )


# ---------------------------------------------------------------------------
# Reading the emitted text back as a netlist.

_ALLOWED = (ast.Expression, ast.BinOp, ast.Add, ast.Sub, ast.Mod, ast.Mult,
            ast.Name, ast.Constant, ast.Load)


def _index_fn(expr: str):
    tree = ast.parse(expr, mode="eval")
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED):
            raise ValueError(f"unsupported index expression {expr!r}")
    code = compile(tree, "<index>", "eval")
    return lambda j, n: eval(code, {"__builtins__": {}}, {"j": j, "N": n})


class EmittedDesign:
    """Combinational semantics of an emitted HL/OL pair, parsed from the text."""

    def __init__(self, hl_text: str, ol_text: str):
        hl = normalize(hl_text)
        ol = normalize(ol_text)
        self.n = int(_search(r"parameter N = (\d+)", hl))
        self.cn_mask = int(_search(r"parameter \[7:0\] CN = 8'b([01]{8})", hl), 2)
        self.neighbors = {
            name: _index_fn(expr)
            for name, expr in re.findall(r"wire (\w+) = x\[(.+?)\];", hl)
        }
        self.rules = {}
        for name, gate, body in re.findall(r"assign (rule\d) = CN\[(\d)\] & \((.+?)\);", hl):
            lits = []
            for term in body.split("&"):
                term = term.strip()
                lits.append((term.lstrip("~"), not term.startswith("~")))
            self.rules[name] = (int(gate), lits)
        self.output_terms = [t.strip() for t in _search(r"assign x_next\[j\] = (.+?);", hl).split("|")]
        init = _search(r"integer y \[1:N\] = '\{(.+?)\};", ol)
        self.wiring = [int(v) for v in init.split(",")]
        if "x[k] <= x_next[y[k]];" not in ol:
            raise ValueError("OL update branch not found")
        if len(self.wiring) != self.n or int(_search(r"module OL #\(parameter N = (\d+)\)", ol)) != self.n:
            raise ValueError("HL and OL disagree on N")
        self._index = {
            name: [fn(j, self.n) for j in range(1, self.n + 1)] for name, fn in self.neighbors.items()
        }

    def hidden(self, bits):
        """x_next word for state word(s) ``bits`` (int or numpy array)."""
        out = bits & 0
        for j in range(1, self.n + 1):
            wires = {name: (bits >> (idx[j - 1] - 1)) & 1 for name, idx in self._index.items()}
            acc = bits & 0
            for term in self.output_terms:
                gate, lits = self.rules[term]
                if not (self.cn_mask >> gate) & 1:
                    continue
                v = (bits & 0) | 1
                for name, positive in lits:
                    v = v & (wires[name] if positive else wires[name] ^ 1)
                acc = acc | v
            out = out | (acc << (j - 1))
        return out

    def step(self, bits):
        h = self.hidden(bits)
        out = bits & 0
        for k, src in enumerate(self.wiring):
            out = out | (((h >> (src - 1)) & 1) << k)
        return out


def _search(pattern: str, text: str) -> str:
    m = re.search(pattern, text)
    if not m:
        raise ValueError(f"pattern {pattern!r} not found in emitted text")
    return m.group(1)


def interpret_emitted(n: int, cn: int, p: Permutation, x: BinaryState) -> BinaryState:
    """Run the emitted design on one state without an HDL toolchain (-1 is 0, +1 is 1)."""
    design = EmittedDesign(emit_hidden_layer(n, cn), emit_output_layer(n, p))
    if x.n != n:
        raise ValueError(f"state dimension {x.n} != {n}")
    return BinaryState(n, design.step(x.bits))


# ---------------------------------------------------------------------------
# Lexical self-consistency: every identifier used is declared somewhere.

_KEYWORDS = {
    "module", "endmodule", "parameter", "input", "output", "wire", "reg", "integer",
    "genvar", "generate", "endgenerate", "for", "begin", "end", "assign", "always",
    "posedge", "if", "else",
}
_DECL = re.compile(
    r"\b(?:module|wire|reg|integer|genvar|parameter)\b\s*(?:\[[^\]]*\]\s*)?"
    r"(\w+(?:\s*(?:\[[^\]]*\])?\s*(?:=[^,;()]*)?,\s*(?!(?:input|output|parameter|wire|reg)\b)\w+)*)"
)


def undeclared_identifiers(*sources: str) -> set[str]:
    code = []
    for text in sources:
        for ln in text.splitlines():
            code.append(ln.split("//", 1)[0])
    body = "\n".join(code)
    body = re.sub(r"\d+'[bBdDhH][0-9a-fA-F_]+", "0", body)
    declared: set[str] = set()
    for m in _DECL.finditer(body):
        for part in m.group(1).split(","):
            declared.add(re.match(r"\s*(\w+)", part).group(1))
    declared.update(re.findall(r"begin\s*:\s*(\w+)", body))
    # module instances: "<Module> #(...) <instance> ("
    declared.update(re.findall(r"\b\w+\s*#\([^;]*?\)\s*(\w+)\s*\(", body))
    used = set(re.findall(r"\b[A-Za-z_]\w*\b", body))
    return used - declared - _KEYWORDS
