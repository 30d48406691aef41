"""Gate-level circuits for the qRM -> Steane code-switching protocol.

Wires are 0-based global indices. Inside the fragment builders, data qubits are
addressed by their 1-based lattice labels and translated with ``offset``.
Fragments report their measurement outputs as ``(segment, position)`` pairs;
``build_experiment`` assigns canonical classical bits from the layout.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from codeswitch.layout import (
    ShotLayout,
    Segment,
    magic_prep_layout,
    single_copy_layout,
    two_copy_layout,
)


class Kind(str, enum.Enum):
    PREP_Z = "PREP_Z"
    PREP_X = "PREP_X"
    H = "H"
    S = "S"
    S_DAG = "S_DAG"
    T = "T"
    T_DAG = "T_DAG"
    X = "X"
    Z = "Z"
    CNOT = "CNOT"
    MEAS_Z = "MEAS_Z"
    MEAS_X = "MEAS_X"
    TICK = "TICK"


PREPS = frozenset({Kind.PREP_Z, Kind.PREP_X})
MEASUREMENTS = frozenset({Kind.MEAS_Z, Kind.MEAS_X})
ONE_QUBIT_GATES = frozenset({Kind.H, Kind.S, Kind.S_DAG, Kind.T, Kind.T_DAG, Kind.X, Kind.Z})

ROLES = ("steane-data", "qrm-data", "ancilla-syndrome", "ancilla-flag")

EXPERIMENTS = ("magic-prep", "single-copy-X", "single-copy-Y", "single-copy-Z", "two-copy")


class CircuitError(ValueError):
    pass


def _arity(kind: Kind) -> int:
    if kind is Kind.TICK:
        return 0
    if kind is Kind.CNOT:
        return 2
    return 1


@dataclass(frozen=True)
class Instruction:
    kind: Kind
    qubits: tuple[int, ...] = ()
    cbit: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", Kind(self.kind))
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if len(self.qubits) != _arity(self.kind):
            raise CircuitError(f"{self.kind.value} takes {_arity(self.kind)} qubits, got {self.qubits}")
        if self.kind is Kind.CNOT and self.qubits[0] == self.qubits[1]:
            raise CircuitError("CNOT control and target coincide")
        if (self.kind in MEASUREMENTS) != (self.cbit is not None):
            raise CircuitError(f"{self.kind.value}: cbit must be set exactly for measurements")

    @property
    def is_measurement(self) -> bool:
        return self.kind in MEASUREMENTS

    def __str__(self) -> str:
        ops = ",".join(map(str, self.qubits))
        return f"{self.kind.value}({ops})" + (f"->c{self.cbit}" if self.cbit is not None else "")


def op(kind: Kind | str, *qubits: int, cbit: int | None = None) -> Instruction:
    return Instruction(Kind(kind), tuple(qubits), cbit)


# --- fragments -------------------------------------------------------------

@dataclass
class Fragment:
    """Instructions plus named measurement outputs; ``cbit`` indexes ``outputs``."""

    instructions: list[Instruction] = field(default_factory=list)
    outputs: list[tuple[str, int]] = field(default_factory=list)
    roles: dict[int, str] = field(default_factory=dict)

    def add(self, kind: Kind | str, *qubits: int) -> None:
        self.instructions.append(op(kind, *qubits))

    def measure(self, kind: Kind | str, qubit: int, segment: str, position: int = 0) -> None:
        self.instructions.append(op(kind, qubit, cbit=len(self.outputs)))
        self.outputs.append((segment, position))

    def extend(self, other: Fragment) -> Fragment:
        shift = len(self.outputs)
        for ins in other.instructions:
            if ins.cbit is not None:
                ins = Instruction(ins.kind, ins.qubits, ins.cbit + shift)
            self.instructions.append(ins)
        self.outputs.extend(other.outputs)
        self.roles.update(other.roles)
        return self

    @property
    def qubits(self) -> set[int]:
        return {q for ins in self.instructions for q in ins.qubits}

    def to_circuit(self, name: str = "fragment", ticks: bool = True) -> Circuit:
        """Standalone circuit over wires ``0..max`` with a layout in output order."""
        layout = _layout_from_outputs(self.outputs)
        cmap = {i: layout.segment(seg).start + pos for i, (seg, pos) in enumerate(self.outputs)}
        instrs = [_remap(ins, cmap) for ins in self.instructions]
        if ticks:
            instrs = with_ticks([instrs])
        n = max(self.qubits) + 1 if self.instructions else 0
        roles = tuple(self.roles.get(q, "ancilla-syndrome") for q in range(n))
        return Circuit(name, roles, tuple(instrs), layout, reuse=False)


def _layout_from_outputs(outputs: Sequence[tuple[str, int]]) -> ShotLayout:
    sizes: dict[str, int] = {}
    for seg, pos in outputs:
        sizes[seg] = max(sizes.get(seg, 0), pos + 1)
    return ShotLayout.from_sizes(list(sizes.items())) if sizes else ShotLayout(())


def _remap(ins: Instruction, cmap: dict[int, int]) -> Instruction:
    if ins.cbit is None:
        return ins
    return Instruction(ins.kind, ins.qubits, cmap[ins.cbit])


def _wires(offset: int, labels: Iterable[int]) -> list[int]:
    return [offset + q - 1 for q in labels]


# Steane |0>: three X-basis seeds fan out round-robin, then one flag
# measures the weight-3 Z logical Z2 Z5 Z7 to herald X errors spread by the encoder.
STEANE_SEEDS = (1, 3, 5)
STEANE_FANOUT = {1: (2, 6, 7), 3: (2, 4, 7), 5: (4, 7, 6)}
STEANE_FLAG_SUPPORT = (2, 5, 7)

# qRM |+>: five X-basis seeds and a cascaded encoder (each target has three controls),
# followed by a flag that couples to the X logical's conjugate support.
QRM_SEEDS = (4, 7, 8, 13, 14)
QRM_ENCODER = (
    (13, 6), (7, 6), (14, 6), (7, 12), (13, 12), (4, 12), (13, 2), (8, 2), (7, 2),
    (7, 5), (14, 5), (12, 5), (7, 11), (12, 11), (6, 11), (2, 9), (6, 9), (13, 9),
    (7, 1), (13, 1), (9, 1), (5, 15), (13, 15), (1, 15), (2, 10), (7, 10), (11, 10),
    (5, 3), (11, 3), (15, 3),
)
QRM_FLAG_ORDER = (13, 11, 14, 1, 3, 12, 2)

# Z-stabilizer round: interaction orders chosen so a single fault never leaves an
# undetected weight-2 X error on the qRM block.
P13_ORDER = (8, 12, 13, 15)
P8_ORDER = (4, 5, 11, 12)


def prep_steane_zero(offset: int = 0, flag: int | None = None) -> Fragment:
    """Encode Steane |0> on wires ``offset..offset+6`` with one verification flag."""
    flag = offset + 7 if flag is None else flag
    w = lambda q: offset + q - 1  # noqa: E731
    frag = Fragment(roles={**{w(q): "steane-data" for q in range(1, 8)}, flag: "ancilla-flag"})
    for q in range(1, 8):
        frag.add(Kind.PREP_X if q in STEANE_SEEDS else Kind.PREP_Z, w(q))
    frag.add(Kind.PREP_Z, flag)
    for r in range(3):
        for s in STEANE_SEEDS:
            frag.add(Kind.CNOT, w(s), w(STEANE_FANOUT[s][r]))
    for q in STEANE_FLAG_SUPPORT:
        frag.add(Kind.CNOT, w(q), flag)
    frag.measure(Kind.MEAS_Z, flag, "flags/init-steane")
    return frag


def prep_qrm_plus(offset: int = 0, flag: int | None = None) -> Fragment:
    """Encode qRM |+> on wires ``offset..offset+14`` with one verification flag."""
    flag = offset + 15 if flag is None else flag
    w = lambda q: offset + q - 1  # noqa: E731
    frag = Fragment(roles={**{w(q): "qrm-data" for q in range(1, 16)}, flag: "ancilla-flag"})
    for q in range(1, 16):
        frag.add(Kind.PREP_X if q in QRM_SEEDS else Kind.PREP_Z, w(q))
    frag.add(Kind.PREP_X, flag)
    for c, t in QRM_ENCODER:
        frag.add(Kind.CNOT, w(c), w(t))
    for q in QRM_FLAG_ORDER:
        frag.add(Kind.CNOT, flag, w(q))
    frag.measure(Kind.MEAS_X, flag, "flags/init-qrm")
    return frag


def _single_flagged_round(frag: Fragment, offset: int, order, s: int, f: int, label: str) -> None:
    w = lambda q: offset + q - 1  # noqa: E731
    a, b, c, d = order
    frag.add(Kind.PREP_Z, s)
    frag.add(Kind.PREP_X, f)
    frag.add(Kind.CNOT, w(a), s)
    frag.add(Kind.CNOT, f, s)
    frag.add(Kind.CNOT, w(b), s)
    frag.add(Kind.CNOT, w(c), s)
    frag.add(Kind.CNOT, f, s)
    frag.add(Kind.CNOT, w(d), s)
    frag.measure(Kind.MEAS_Z, s, f"z-stabilizers/{label}")
    frag.measure(Kind.MEAS_X, f, f"flags/{label}")


def qrm_z_stabilizer_round(offset: int = 0, ancillas: Sequence[int] | None = None,
                           reuse: bool = False) -> Fragment:
    """Measure p13, p8 (single flagged rounds) then p2, p3 (shared flag).

    Without reuse the round needs 7 ancillas ``(s13, f13, s8, f8, s2, s3, f23)``;
    with reuse, 4 ancillas ``(s1, f1, s2, f2)`` and the parallel sub-round
    resets ``s1, s2, f1``.
    """
    n_anc = 4 if reuse else 7
    if ancillas is None:
        ancillas = list(range(offset + 15, offset + 15 + n_anc))
    if len(ancillas) != n_anc:
        raise CircuitError(f"stabilizer round needs {n_anc} ancillas, got {len(ancillas)}")
    if reuse:
        s13, f13, s8, f8 = ancillas
        s2, s3, fp = s13, s8, f13
    else:
        s13, f13, s8, f8, s2, s3, fp = ancillas
    roles = {a: "ancilla-syndrome" for a in (s13, s8, s2, s3)}
    roles.update({a: "ancilla-flag" for a in (f13, f8, fp)})
    frag = Fragment(roles=roles)
    _single_flagged_round(frag, offset, P13_ORDER, s13, f13, "p13")
    _single_flagged_round(frag, offset, P8_ORDER, s8, f8, "p8")

    w = lambda q: offset + q - 1  # noqa: E731
    frag.add(Kind.PREP_Z, s2)
    frag.add(Kind.PREP_Z, s3)
    frag.add(Kind.PREP_X, fp)
    for c, t in ((2, s2), (4, s3)):
        frag.add(Kind.CNOT, w(c), t)
    frag.add(Kind.CNOT, fp, s2)
    frag.add(Kind.CNOT, fp, s3)
    for c, t in ((3, s2), (5, s3), (4, s2), (6, s3)):
        frag.add(Kind.CNOT, w(c), t)
    frag.add(Kind.CNOT, fp, s2)
    frag.add(Kind.CNOT, fp, s3)
    frag.add(Kind.CNOT, w(7), s2)
    frag.add(Kind.CNOT, w(7), s3)
    frag.measure(Kind.MEAS_Z, s2, "z-stabilizers/p2")
    frag.measure(Kind.MEAS_Z, s3, "z-stabilizers/p3")
    frag.measure(Kind.MEAS_X, fp, "flags/parallel")
    return frag


def transversal_t(offset: int = 0) -> Fragment:
    """T on odd labels, T-dagger on even labels of the 15-qubit block."""
    frag = Fragment()
    for q in range(1, 16):
        frag.add(Kind.T if q % 2 else Kind.T_DAG, offset + q - 1)
    return frag


def switch_cnot(qrm_offset: int, steane_offset: int) -> Fragment:
    """CNOT from qRM qubit i (control) to Steane qubit i, for i = 1..7."""
    frag = Fragment()
    for q in range(1, 8):
        frag.add(Kind.CNOT, qrm_offset + q - 1, steane_offset + q - 1)
    return frag


def steane_pair_cnot(offset1: int, offset2: int) -> Fragment:
    """Transversal CNOT from Steane copy 1 (controls) to copy 2 (targets)."""
    frag = Fragment()
    for q in range(1, 8):
        frag.add(Kind.CNOT, offset1 + q - 1, offset2 + q - 1)
    return frag


@dataclass(frozen=True)
class Block:
    code: str  # "steane" or "qrm"
    offset: int

    @property
    def size(self) -> int:
        return 7 if self.code == "steane" else 15

    @property
    def wires(self) -> list[int]:
        return list(range(self.offset, self.offset + self.size))

    @property
    def segment(self) -> str:
        return f"{self.code}-data"


def destructive_measurement(block: Block, basis: str) -> Fragment:
    """Measure every data qubit of ``block`` in the X, Y or Z basis.

    X is H then MEAS_Z, Y is S_DAG, H, MEAS_Z, so bit 0 always means the
    single-qubit eigenvalue +1 of the chosen Pauli.
    """
    basis = basis.upper()
    if basis not in ("X", "Y", "Z"):
        raise CircuitError(f"unknown basis {basis!r}")
    frag = Fragment()
    for i, q in enumerate(block.wires):
        if basis == "Y":
            frag.add(Kind.S_DAG, q)
        if basis in ("X", "Y"):
            frag.add(Kind.H, q)
        frag.measure(Kind.MEAS_Z, q, block.segment, i)
    return frag


# --- layering --------------------------------------------------------------

def asap_layers(instrs: Sequence[Instruction]) -> list[list[Instruction]]:
    """Greedy layering that keeps the per-qubit order of ``instrs``."""
    ready: dict[int, int] = {}
    layers: list[list[Instruction]] = []
    for ins in instrs:
        if ins.kind is Kind.TICK:
            continue
        depth = max((ready.get(q, 0) for q in ins.qubits), default=0)
        if depth == len(layers):
            layers.append([])
        layers[depth].append(ins)
        for q in ins.qubits:
            ready[q] = depth + 1
    return layers


def with_ticks(stages: Sequence[Sequence[Instruction]]) -> list[Instruction]:
    """Layer each stage independently and close every layer with a TICK."""
    out: list[Instruction] = []
    for stage in stages:
        for layer in asap_layers(stage):
            out.extend(layer)
            out.append(Instruction(Kind.TICK))
    return out


# --- circuits --------------------------------------------------------------

@dataclass(frozen=True)
class Circuit:
    name: str
    qubit_roles: tuple[str, ...]
    instructions: tuple[Instruction, ...]
    classical_layout: ShotLayout
    reuse: bool = False
    blocks: dict[str, tuple[int, ...]] = field(default_factory=dict, compare=False)
    ablated: str | None = None

    def __post_init__(self):
        self.validate()

    @property
    def num_qubits(self) -> int:
        return len(self.qubit_roles)

    @property
    def num_cbits(self) -> int:
        return self.classical_layout.size

    @property
    def layout(self) -> ShotLayout:
        return self.classical_layout

    def measurements(self) -> list[Instruction]:
        return [i for i in self.instructions if i.is_measurement]

    def histogram(self) -> dict[Kind, int]:
        h: dict[Kind, int] = {}
        for ins in self.instructions:
            h[ins.kind] = h.get(ins.kind, 0) + 1
        return h

    def validate(self) -> None:
        n = self.num_qubits
        for role in self.qubit_roles:
            if role not in ROLES:
                raise CircuitError(f"unknown qubit role {role!r}")
        measured: set[int] = set()
        seen_cbits: set[int] = set()
        for k, ins in enumerate(self.instructions):
            for q in ins.qubits:
                if not 0 <= q < n:
                    raise CircuitError(f"instruction {k} ({ins}) addresses wire {q} outside 0..{n - 1}")
            if ins.kind in PREPS:
                measured.discard(ins.qubits[0])
            elif any(q in measured for q in ins.qubits):
                raise CircuitError(f"instruction {k} ({ins}) acts on a measured qubit")
            if ins.is_measurement:
                if not 0 <= ins.cbit < self.num_cbits:
                    raise CircuitError(f"instruction {k} writes cbit {ins.cbit} outside the layout")
                if ins.cbit in seen_cbits:
                    raise CircuitError(f"cbit {ins.cbit} written twice")
                seen_cbits.add(ins.cbit)
                measured.add(ins.qubits[0])

    def without(self, predicate) -> list[Instruction]:
        return [ins for ins in self.instructions if not predicate(ins)]


@dataclass(frozen=True)
class Allocation:
    """Wire indices of one protocol copy."""

    steane: int
    qrm: int
    steane_flag: int
    qrm_flag: int
    round_ancillas: tuple[int, ...]

    @classmethod
    def standard(cls, base: int, reuse: bool) -> Allocation:
        n_round = 4 if reuse else 7
        return cls(base, base + 7, base + 22, base + 23, tuple(range(base + 24, base + 24 + n_round)))

    @property
    def size(self) -> int:
        return 24 + len(self.round_ancillas)


def _copy_stages(alloc: Allocation, reuse: bool, ablate: str | None) -> list[Fragment]:
    prep = prep_steane_zero(alloc.steane, alloc.steane_flag).extend(
        prep_qrm_plus(alloc.qrm, alloc.qrm_flag))
    stages = [prep]
    if ablate != "stabilizer-round":
        stages.append(qrm_z_stabilizer_round(alloc.qrm, alloc.round_ancillas, reuse))
    stages.append(transversal_t(alloc.qrm))
    stages.append(switch_cnot(alloc.qrm, alloc.steane))
    stages.append(destructive_measurement(Block("qrm", alloc.qrm), "X"))
    return stages


def _roles_for(alloc: Allocation, reuse: bool) -> dict[int, str]:
    frags = [
        prep_steane_zero(alloc.steane, alloc.steane_flag),
        prep_qrm_plus(alloc.qrm, alloc.qrm_flag),
        qrm_z_stabilizer_round(alloc.qrm, alloc.round_ancillas, reuse),
    ]
    roles: dict[int, str] = {}
    for f in frags:
        roles.update(f.roles)
    return roles


def _assemble(stages: list[Fragment], layout: ShotLayout, prefixes: list[str]) -> list[Instruction]:
    """Concatenate stage fragments, map outputs to canonical cbits, insert TICKs."""
    staged: list[list[Instruction]] = []
    for frag, prefix in zip(stages, prefixes):
        cmap = {}
        for i, (seg, pos) in enumerate(frag.outputs):
            name = f"{prefix}/{seg}" if prefix else seg
            cmap[i] = layout.segment(name).start + pos
        staged.append([_remap(ins, cmap) for ins in frag.instructions])
    return staged


ABLATIONS = ("stabilizer-round",)


def build_experiment(kind: str, reuse: bool = False, ablate: str | None = None) -> Circuit:
    """Assemble a full protocol circuit.

    ``kind`` is one of ``EXPERIMENTS``. Bases may be given in either case
    (``single-copy-x``). ``ablate="stabilizer-round"`` drops the qRM Z-stabilizer
    round; it exists to show that the fault-tolerance check can fail.
    """
    canon = {k.lower(): k for k in EXPERIMENTS}
    if kind.lower() not in canon:
        raise CircuitError(f"unknown experiment kind {kind!r}; expected one of {EXPERIMENTS}")
    kind = canon[kind.lower()]
    if ablate is not None and ablate not in ABLATIONS:
        raise CircuitError(f"unknown ablation {ablate!r}")

    if kind == "two-copy":
        a1 = Allocation.standard(0, reuse)
        a2 = Allocation.standard(a1.size, reuse)
        layout = two_copy_layout()
        s1, s2 = _copy_stages(a1, reuse, ablate), _copy_stages(a2, reuse, ablate)
        stages: list[list[Instruction]] = []
        for f1, f2 in zip(s1, s2):
            i1, i2 = _assemble([f1, f2], layout, ["copy1", "copy2"])
            stages.append(i1 + i2)
        stages.append(steane_pair_cnot(a1.steane, a2.steane).instructions)
        final = _assemble(
            [destructive_measurement(Block("steane", a1.steane), "X"),
             destructive_measurement(Block("steane", a2.steane), "Z")],
            layout, ["copy1", "copy2"])
        stages.append(final[0] + final[1])
        roles = {**_roles_for(a1, reuse), **_roles_for(a2, reuse)}
        n = a1.size + a2.size
        blocks = {
            "copy1/steane": tuple(range(a1.steane, a1.steane + 7)),
            "copy1/qrm": tuple(range(a1.qrm, a1.qrm + 15)),
            "copy2/steane": tuple(range(a2.steane, a2.steane + 7)),
            "copy2/qrm": tuple(range(a2.qrm, a2.qrm + 15)),
        }
    else:
        alloc = Allocation.standard(0, reuse)
        frags = _copy_stages(alloc, reuse, ablate)
        if kind == "magic-prep":
            layout = magic_prep_layout()
        else:
            layout = single_copy_layout()
            frags.append(destructive_measurement(Block("steane", alloc.steane), kind[-1]))
        stages = _assemble(frags, layout, [""] * len(frags))
        roles = _roles_for(alloc, reuse)
        n = alloc.size
        blocks = {
            "steane": tuple(range(alloc.steane, alloc.steane + 7)),
            "qrm": tuple(range(alloc.qrm, alloc.qrm + 15)),
        }

    instrs = with_ticks(stages)
    return Circuit(
        name=kind,
        qubit_roles=tuple(roles[q] for q in range(n)),
        instructions=tuple(instrs),
        classical_layout=layout,
        reuse=reuse,
        blocks=blocks,
        ablated=ablate,
    )


def stage_boundaries(circuit: Circuit) -> list[int]:
    """Indices of TICK instructions (layer ends)."""
    return [k for k, ins in enumerate(circuit.instructions) if ins.kind is Kind.TICK]


__all__ = [
    "Kind", "Instruction", "Fragment", "Circuit", "Block", "Allocation", "Segment",
    "prep_steane_zero", "prep_qrm_plus", "qrm_z_stabilizer_round", "transversal_t",
    "switch_cnot", "steane_pair_cnot", "destructive_measurement", "build_experiment",
    "asap_layers", "with_ticks", "EXPERIMENTS", "ABLATIONS",
]
