"""Single-fault injection and the exhaustive fault-tolerance check."""

from __future__ import annotations

import itertools
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from codeswitch.circuit import ONE_QUBIT_GATES, Circuit, Kind, build_experiment
from codeswitch.decoder import decode_magic_prep
from codeswitch.layout import ShotRecord
from codeswitch.pauli import PauliOperator
from codeswitch.sim.engine import compile_circuit, execute, make_rng
from codeswitch.sim.logical import fidelity_with_t
from codeswitch.sim.state import RegisterState


class FaultLocationError(ValueError):
    pass


@dataclass(frozen=True)
class FaultSpec:
    """A Pauli after instruction ``index`` or, with ``pauli=None``, a readout flip."""

    index: int
    pauli: PauliOperator | None = None
    position: str = "after"

    @property
    def is_flip(self) -> bool:
        return self.pauli is None

    def describe(self, circuit: Circuit | None = None) -> str:
        what = "bit flip" if self.is_flip else str(self.pauli)
        where = f"#{self.index}"
        if circuit is not None:
            where += f" {circuit.instructions[self.index]}"
        return f"{what} {self.position} {where}"


_NONTRIVIAL_1Q = ("X", "Y", "Z")
_NONTRIVIAL_2Q = tuple(a + b for a, b in itertools.product("IXYZ", repeat=2) if a + b != "II")


def enumerate_fault_locations(circuit: Circuit) -> list[FaultSpec]:
    """3 Paulis per 1q gate, 15 per CNOT, one per preparation, one flip per measurement.

    Preparation faults are X after PREP_Z and Z after PREP_X (the only
    nontrivial error on each prepared eigenstate).
    """
    out: list[FaultSpec] = []
    for k, ins in enumerate(circuit.instructions):
        if ins.kind in ONE_QUBIT_GATES:
            out += [FaultSpec(k, PauliOperator(p)) for p in _NONTRIVIAL_1Q]
        elif ins.kind is Kind.CNOT:
            out += [FaultSpec(k, PauliOperator(p)) for p in _NONTRIVIAL_2Q]
        elif ins.kind is Kind.PREP_Z:
            out.append(FaultSpec(k, PauliOperator("X")))
        elif ins.kind is Kind.PREP_X:
            out.append(FaultSpec(k, PauliOperator("Z")))
        elif ins.is_measurement:
            out.append(FaultSpec(k, None))
    return out


def expected_fault_count(circuit: Circuit) -> int:
    h = circuit.histogram()
    n1 = sum(h.get(k, 0) for k in ONE_QUBIT_GATES)
    return (3 * n1 + 15 * h.get(Kind.CNOT, 0) + h.get(Kind.PREP_Z, 0) + h.get(Kind.PREP_X, 0)
            + h.get(Kind.MEAS_Z, 0) + h.get(Kind.MEAS_X, 0))


def _fault_plan(circuit: Circuit, fault: FaultSpec):
    if not 0 <= fault.index < len(circuit.instructions):
        raise FaultLocationError(f"instruction index {fault.index} out of range")
    ins = circuit.instructions[fault.index]
    comp = compile_circuit(circuit)
    if ins.kind is Kind.TICK:
        raise FaultLocationError("TICK is not a fault location")
    op = comp.op_index_of(fault.index)
    flip = np.zeros(comp.n_meas, dtype=bool)
    if fault.is_flip:
        if not ins.is_measurement:
            raise FaultLocationError(f"bit flip requested on non-measurement {ins}")
        m = sum(o.is_measurement for o in comp.ops[:op])
        flip[m] = True
        return comp, {}, flip
    p = fault.pauli
    if p.n != len(ins.qubits):
        raise FaultLocationError(f"Pauli {p} does not match the {len(ins.qubits)}-qubit support of {ins}")
    if p.weight == 0:
        raise FaultLocationError("identity fault is not a fault")
    if ins.is_measurement:
        raise FaultLocationError("measurement locations take bit flips only")
    letters = p.letters
    q1 = ins.qubits[1] if len(ins.qubits) == 2 else -1
    lb = letters[1] if len(letters) == 2 else "I"
    return comp, {op: [(ins.qubits[0], q1, letters[0], lb)]}, flip


def run_with_fault(circuit: Circuit, fault: FaultSpec, seed=0) -> tuple[ShotRecord, RegisterState]:
    """Noiseless run with one injected fault; measurement outcomes follow the Born rule.

    Returns the record and the final register; qubits never measured (the
    Steane block in magic-prep) remain live in the returned state.
    """
    comp, faults, flip = _fault_plan(circuit, fault)
    rng = make_rng(seed)
    st = execute(comp, faults, rng.random(comp.n_meas), flip)
    return ShotRecord(st.cbits.copy(), circuit.classical_layout), st


@dataclass
class FaultOutcome:
    fault: FaultSpec | None
    rejected: int = 0
    correct: int = 0
    wrong: int = 0
    frames: set[int] = field(default_factory=set)
    worst_fidelity: float = 1.0

    @property
    def samples(self) -> int:
        return self.rejected + self.correct + self.wrong


@dataclass
class FTReport:
    kind: str
    ablated: str | None
    n_faults: int
    outcomes: list[FaultOutcome]
    control: FaultOutcome
    tolerance: float
    seconds: float

    @property
    def totals(self) -> dict[str, int]:
        c = Counter()
        for o in self.outcomes:
            c["rejected"] += o.rejected
            c["accepted-and-correct"] += o.correct
            c["accepted-and-wrong"] += o.wrong
        return dict(c)

    @property
    def violations(self) -> list[FaultOutcome]:
        return [o for o in self.outcomes if o.wrong]

    @property
    def ok(self) -> bool:
        return not self.violations and not self.control.wrong

    @property
    def frames_covered(self) -> int:
        """Faults whose samples showed both frame values."""
        return sum(o.frames == {0, 1} for o in self.outcomes)

    def lines(self, circuit: Circuit | None = None, limit: int = 20) -> list[str]:
        t = self.totals
        out = [
            f"kind={self.kind} ablated={self.ablated or 'none'}",
            f"fault_locations={self.n_faults}",
            f"samples={sum(o.samples for o in self.outcomes)}",
            f"both_frames_seen={self.frames_covered}/{self.n_faults}",
            f"control: rejected={self.control.rejected} correct={self.control.correct} wrong={self.control.wrong}",
            f"rejected={t.get('rejected', 0)}",
            f"accepted-and-correct={t.get('accepted-and-correct', 0)}",
            f"accepted-and-wrong={t.get('accepted-and-wrong', 0)}",
            f"tolerance={self.tolerance:g}",
            f"seconds={self.seconds:.1f}",
        ]
        for o in self.violations[:limit]:
            out.append(f"counterexample: {o.fault.describe(circuit)} fidelity={o.worst_fidelity:.6f}")
        return out


def _classify(circuit: Circuit, fault: FaultSpec | None, rng, min_samples: int, max_samples: int,
              tol: float) -> FaultOutcome:
    res = FaultOutcome(fault)
    steane = list(circuit.blocks["steane"])
    comp = compile_circuit(circuit)
    if fault is None:
        plan = (comp, {}, None)
    else:
        plan = _fault_plan(circuit, fault)
    for i in range(max_samples):
        if i >= min_samples and res.frames == {0, 1}:
            break
        c, faults, flip = plan
        st = execute(c, faults, rng.random(c.n_meas), flip)
        rec = ShotRecord(st.cbits.copy(), circuit.classical_layout)
        qrm = rec["qrm-data"]
        res.frames.add(int(qrm[:7].sum()) % 2)
        d = decode_magic_prep(rec)
        if not d.accepted:
            res.rejected += 1
            continue
        f = fidelity_with_t(st.state_of(steane), d.frame[0])
        res.worst_fidelity = min(res.worst_fidelity, f)
        if f >= 1 - tol:
            res.correct += 1
        else:
            res.wrong += 1
    return res


def ft_check(kind: str = "magic-prep", repetitions: int = 2, max_repetitions: int = 24,
             ablate: str | None = None, reuse: bool = False, seed: int = 0,
             tolerance: float = 1e-9, progress=None) -> FTReport:
    """Inject every single fault into the magic-prep circuit and classify each branch.

    Each fault is sampled at least ``repetitions`` times and until both qRM
    frame values have appeared (capped at ``max_repetitions``). An accepted
    branch is correct when the Steane block, after ideal lookup correction and
    the software frame, has fidelity >= 1 - ``tolerance`` with |T_L>.
    """
    if kind != "magic-prep":
        raise ValueError("ft_check runs on the magic-prep circuit")
    t0 = time.perf_counter()
    circuit = build_experiment(kind, reuse=reuse, ablate=ablate)
    rng = make_rng(np.random.SeedSequence(seed))
    control = _classify(circuit, None, rng, max(repetitions, 8), max_repetitions, tolerance)
    faults = enumerate_fault_locations(circuit)
    outcomes = []
    for j, f in enumerate(faults):
        outcomes.append(_classify(circuit, f, rng, repetitions, max_repetitions, tolerance))
        if progress is not None:
            progress(j + 1, len(faults))
    return FTReport(kind, ablate, len(faults), outcomes, control, tolerance, time.perf_counter() - t0)
