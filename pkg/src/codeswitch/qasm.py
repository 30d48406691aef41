"""OPENQASM 2.0 emission and a structural re-parser."""

from __future__ import annotations

import re
from dataclasses import dataclass

from codeswitch.circuit import Circuit, Kind

HEADER = 'OPENQASM 2.0;\ninclude "qelib1.inc";\n'

_GATE_NAMES = {
    Kind.H: "h", Kind.S: "s", Kind.S_DAG: "sdg", Kind.T: "t", Kind.T_DAG: "tdg",
    Kind.X: "x", Kind.Z: "z",
}


def emit_qasm(circuit: Circuit) -> str:
    """Single ``q`` register and one ``c`` register sized by the classical layout.

    PREP_Z is ``reset``; PREP_X is ``reset`` then ``h``; MEAS_X is ``h`` then
    ``measure``; TICK is a ``barrier`` over the qubits live at that point.
    Output is deterministic for a given circuit.
    """
    lines = [HEADER.rstrip("\n"),
             f"// {circuit.name} reuse={'true' if circuit.reuse else 'false'}"]
    for seg in circuit.classical_layout.segments:
        lines.append(f"// c[{seg.start}:{seg.stop}] {seg.name}")
    lines.append(f"qreg q[{circuit.num_qubits}];")
    lines.append(f"creg c[{circuit.num_cbits}];")
    live: set[int] = set()
    for ins in circuit.instructions:
        k = ins.kind
        if k is Kind.TICK:
            if live:
                lines.append("barrier " + ",".join(f"q[{q}]" for q in sorted(live)) + ";")
            continue
        q = ins.qubits[0]
        if k is Kind.PREP_Z:
            lines.append(f"reset q[{q}];")
            live.add(q)
        elif k is Kind.PREP_X:
            lines.append(f"reset q[{q}];")
            lines.append(f"h q[{q}];")
            live.add(q)
        elif k is Kind.CNOT:
            lines.append(f"cx q[{q}],q[{ins.qubits[1]}];")
        elif k is Kind.MEAS_Z:
            lines.append(f"measure q[{q}] -> c[{ins.cbit}];")
            live.discard(q)
        elif k is Kind.MEAS_X:
            lines.append(f"h q[{q}];")
            lines.append(f"measure q[{q}] -> c[{ins.cbit}];")
            live.discard(q)
        else:
            lines.append(f"{_GATE_NAMES[k]} q[{q}];")
    return "\n".join(lines) + "\n"


class QasmParseError(ValueError):
    pass


@dataclass
class QasmSummary:
    n_qubits: int
    n_cbits: int
    statements: list[tuple[str, tuple[int, ...], int | None]]

    def count(self, name: str) -> int:
        return sum(1 for s in self.statements if s[0] == name)

    @property
    def gate_count(self) -> int:
        return sum(1 for s in self.statements if s[0] != "barrier")


_STMT = re.compile(r"^(?P<name>[a-z]+)\s+(?P<args>[^;]*);$")
_QARG = re.compile(r"q\[(\d+)\]")


def parse_qasm(text: str) -> QasmSummary:
    """Structural parse of text produced by ``emit_qasm``."""
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("//")]
    if not lines or lines[0] != "OPENQASM 2.0;":
        raise QasmParseError("missing OPENQASM 2.0 header")
    nq = nc = None
    stmts = []
    for ln in lines[1:]:
        if ln.startswith("include"):
            continue
        m = re.fullmatch(r"qreg q\[(\d+)\];", ln)
        if m:
            nq = int(m.group(1))
            continue
        m = re.fullmatch(r"creg c\[(\d+)\];", ln)
        if m:
            nc = int(m.group(1))
            continue
        m = _STMT.match(ln)
        if not m:
            raise QasmParseError(f"cannot parse {ln!r}")
        name, args = m.group("name"), m.group("args")
        if name not in {"h", "s", "sdg", "t", "tdg", "x", "z", "cx", "measure", "reset", "barrier"}:
            raise QasmParseError(f"unexpected gate {name!r}")
        qs = tuple(int(x) for x in _QARG.findall(args))
        cb = re.search(r"c\[(\d+)\]", args)
        stmts.append((name, qs, int(cb.group(1)) if cb else None))
    if nq is None or nc is None:
        raise QasmParseError("missing register declarations")
    for name, qs, cb in stmts:
        if any(q >= nq for q in qs) or (cb is not None and cb >= nc):
            raise QasmParseError(f"{name} addresses an undeclared bit")
    return QasmSummary(nq, nc, stmts)


def expected_statement_count(circuit: Circuit) -> int:
    """Number of QASM statements ``emit_qasm`` produces (barriers included)."""
    n = 0
    live: set[int] = set()
    for ins in circuit.instructions:
        k = ins.kind
        if k is Kind.TICK:
            n += 1 if live else 0
            continue
        n += 2 if k in (Kind.PREP_X, Kind.MEAS_X) else 1
        if k in (Kind.PREP_Z, Kind.PREP_X):
            live.add(ins.qubits[0])
        elif ins.is_measurement:
            live.discard(ins.qubits[0])
    return n
