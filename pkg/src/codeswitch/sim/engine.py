"""Trajectory simulation of circuits under Pauli and readout noise.

A circuit is compiled once into

* a list of operations (TICKs removed) in original order,
* an execution schedule, a topological reordering that keeps every qubit's
  operation order but runs single-qubit operations and measurements as early
  as possible, so blocks are shrunk before they are merged,
* a table of noise locations. Each location names the operation it follows
  ("anchor"), its channel and its qubits. Idle noise of a TICK layer is
  anchored to the idle qubit's last operation before that TICK, which is
  equivalent because nothing else touches the qubit in between.

Seeds: shot ``i`` of ``run_batch(..., base_seed)`` uses a Philox generator
seeded with ``SeedSequence(base_seed, spawn_key=(i,))``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from codeswitch.circuit import Circuit, Instruction, Kind
from codeswitch.layout import ShotRecord
from codeswitch.sim.noise import NoiseModel
from codeswitch.sim.state import RegisterState

# channel ids in the location table
GATE1, GATE2, IDLE, XTALK = 0, 1, 2, 3
_CHANNEL_NAMES = {GATE1: "gate1", GATE2: "gate2", IDLE: "idle", XTALK: "crosstalk"}

# op codes
PREP_Z, PREP_X, GATE, CNOT, MEAS_Z, MEAS_X = range(6)

PAULI_LETTERS = "IXYZ"


@dataclass
class Compiled:
    circuit: Circuit
    ops: list[Instruction]
    op_source: np.ndarray  # op index -> index in circuit.instructions
    schedule: list[tuple]  # (code, q0, q1, gate name, cbit, meas index, op index)
    loc_anchor: np.ndarray
    loc_channel: np.ndarray
    loc_q0: np.ndarray
    loc_q1: np.ndarray
    n_meas: int
    peak_width: int

    def probabilities(self, noise: NoiseModel) -> np.ndarray:
        rates = np.array([noise.rate(_CHANNEL_NAMES[c]) for c in range(4)])
        return rates[self.loc_channel]

    def op_index_of(self, instruction_index: int) -> int:
        hits = np.flatnonzero(self.op_source == instruction_index)
        if hits.size == 0:
            raise IndexError(f"instruction {instruction_index} is not an executable operation")
        return int(hits[0])


def _noise_locations(instrs) -> tuple[list, list, list, list]:
    anchor, channel, q0, q1 = [], [], [], []
    live: set[int] = set()
    last_op: dict[int, int] = {}
    layer_ops: set[int] = set()
    op_idx = -1
    for ins in instrs:
        if ins.kind is Kind.TICK:
            for q in sorted(live - layer_ops):
                anchor.append(last_op[q]); channel.append(IDLE); q0.append(q); q1.append(-1)
            layer_ops = set()
            continue
        op_idx += 1
        if ins.is_measurement:
            m = ins.qubits[0]
            for q in sorted(live - {m}):
                anchor.append(last_op[q]); channel.append(XTALK); q0.append(q); q1.append(-1)
        layer_ops.update(ins.qubits)
        for q in ins.qubits:
            last_op[q] = op_idx
        if ins.kind in (Kind.PREP_Z, Kind.PREP_X):
            live.add(ins.qubits[0])
        elif ins.is_measurement:
            live.discard(ins.qubits[0])
        elif ins.kind is Kind.CNOT:
            anchor.append(op_idx); channel.append(GATE2); q0.append(ins.qubits[0]); q1.append(ins.qubits[1])
        else:
            anchor.append(op_idx); channel.append(GATE1); q0.append(ins.qubits[0]); q1.append(-1)
    return anchor, channel, q0, q1


def schedule_ops(ops: list[Instruction]) -> tuple[list[int], int]:
    """Order ops to keep dense blocks small; returns (order, peak block width).

    Per-qubit order is preserved. Among ready ops the priority is: anything
    that is not a CNOT, then CNOTs inside one block, then the merging CNOT
    giving the smallest block.
    """
    n = len(ops)
    prev_on: dict[int, int] = {}
    succ: list[list[int]] = [[] for _ in range(n)]
    indeg = [0] * n
    for i, ins in enumerate(ops):
        for q in ins.qubits:
            if q in prev_on:
                succ[prev_on[q]].append(i)
                indeg[i] += 1
            prev_on[q] = i
    ready = sorted(i for i in range(n) if indeg[i] == 0)
    block_of: dict[int, int] = {}
    size: dict[int, int] = {}
    next_block = 0
    peak = 0
    order: list[int] = []
    while ready:
        pick = None
        for i in ready:
            if ops[i].kind is not Kind.CNOT:
                pick = i
                break
        if pick is None:
            best = None
            for i in ready:
                c, t = ops[i].qubits
                bc, bt = block_of[c], block_of[t]
                cost = 0 if bc == bt else size[bc] + size[bt]
                if best is None or cost < best[0]:
                    best = (cost, i)
                    if cost == 0:
                        break
            pick = best[1]
        ready.remove(pick)
        ins = ops[pick]
        if ins.kind in (Kind.PREP_Z, Kind.PREP_X):
            block_of[ins.qubits[0]] = next_block
            size[next_block] = 1
            next_block += 1
        elif ins.is_measurement:
            size[block_of.pop(ins.qubits[0])] -= 1
        elif ins.kind is Kind.CNOT:
            c, t = ins.qubits
            bc, bt = block_of[c], block_of[t]
            if bc != bt:
                size[bc] += size.pop(bt)
                for q, b in block_of.items():
                    if b == bt:
                        block_of[q] = bc
            peak = max(peak, size[bc])
        order.append(pick)
        for j in succ[pick]:
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(j)
        ready.sort()
    if len(order) != n:
        raise RuntimeError("scheduling failed: dependency cycle")
    return order, peak


_CACHE: dict[int, tuple[Circuit, Compiled]] = {}


def compile_circuit(circuit: Circuit) -> Compiled:
    hit = _CACHE.get(id(circuit))
    if hit is not None and hit[0] is circuit:
        return hit[1]
    ops, src = [], []
    for k, ins in enumerate(circuit.instructions):
        if ins.kind is not Kind.TICK:
            ops.append(ins)
            src.append(k)
    anchor, channel, q0, q1 = _noise_locations(circuit.instructions)
    order, peak = schedule_ops(ops)
    meas_index: dict[int, int] = {}
    for i, ins in enumerate(ops):
        if ins.is_measurement:
            meas_index[i] = len(meas_index)
    sched = []
    for i in order:
        ins = ops[i]
        k = ins.kind
        if k is Kind.PREP_Z:
            sched.append((PREP_Z, ins.qubits[0], -1, "", -1, -1, i))
        elif k is Kind.PREP_X:
            sched.append((PREP_X, ins.qubits[0], -1, "", -1, -1, i))
        elif k is Kind.CNOT:
            sched.append((CNOT, ins.qubits[0], ins.qubits[1], "", -1, -1, i))
        elif k is Kind.MEAS_Z:
            sched.append((MEAS_Z, ins.qubits[0], -1, "", ins.cbit, meas_index[i], i))
        elif k is Kind.MEAS_X:
            sched.append((MEAS_X, ins.qubits[0], -1, "", ins.cbit, meas_index[i], i))
        else:
            sched.append((GATE, ins.qubits[0], -1, k.value, -1, -1, i))
    comp = Compiled(
        circuit=circuit,
        ops=ops,
        op_source=np.array(src, dtype=np.int64),
        schedule=sched,
        loc_anchor=np.array(anchor, dtype=np.int64),
        loc_channel=np.array(channel, dtype=np.int64),
        loc_q0=np.array(q0, dtype=np.int64),
        loc_q1=np.array(q1, dtype=np.int64),
        n_meas=len(meas_index),
        peak_width=peak,
    )
    _CACHE[id(circuit)] = (circuit, comp)
    return comp


def pauli_pair(index: int) -> tuple[str, str]:
    """Two-qubit Pauli ``1..15`` as (letter on first qubit, letter on second)."""
    a, b = divmod(index, 4)
    return PAULI_LETTERS[a], PAULI_LETTERS[b]


# --- execution -------------------------------------------------------------

def apply_instruction(state: RegisterState, instr: Instruction, rng: np.random.Generator | None = None,
                      u: float | None = None) -> RegisterState:
    """Apply one noiseless instruction in place and return ``state``."""
    k = instr.kind
    if k is Kind.TICK:
        return state
    if k is Kind.PREP_Z:
        state.prep(instr.qubits[0], "Z")
    elif k is Kind.PREP_X:
        state.prep(instr.qubits[0], "X")
    elif k is Kind.CNOT:
        state.cnot(*instr.qubits)
    elif instr.is_measurement:
        q = instr.qubits[0]
        if u is None:
            u = (rng or np.random.default_rng()).random()
        if k is Kind.MEAS_X:
            state.gate1("H", q)
        state.cbits[instr.cbit] = state.measure(q, u)
    else:
        state.gate1(k.value, instr.qubits[0])
    return state


def execute(comp: Compiled, faults: dict[int, list[tuple[int, int, str, str]]], u_born: np.ndarray,
            flip: np.ndarray | None = None, state: RegisterState | None = None) -> RegisterState:
    """Run the schedule; ``faults[op]`` lists (q0, q1, letter0, letter1) applied after ``op``.

    ``flip[m]`` (if given) XORs the recorded bit of the m-th measurement.
    """
    circuit = comp.circuit
    st = RegisterState(circuit.num_qubits, circuit.num_cbits) if state is None else state
    cbits = st.cbits
    for code, q0, q1, name, cbit, mi, oi in comp.schedule:
        if code == GATE:
            st.gate1(name, q0)
        elif code == CNOT:
            st.cnot(q0, q1)
        elif code == PREP_Z:
            st.prep(q0, "Z")
        elif code == PREP_X:
            st.prep(q0, "X")
        else:
            if code == MEAS_X:
                st.gate1("H", q0)
            bit = st.measure(q0, u_born[mi])
            if flip is not None and flip[mi]:
                bit ^= 1
            cbits[cbit] = bit
        if faults and oi in faults:
            for a, b, la, lb in faults[oi]:
                if la != "I" and st.is_live(a):
                    st.pauli(a, la)
                if b >= 0 and lb != "I" and st.is_live(b):
                    st.pauli(b, lb)
    return st


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def derive_seed(base_seed: int, index: int) -> np.random.SeedSequence:
    """Seed of shot ``index`` in a batch: ``SeedSequence(base_seed, spawn_key=(index,))``."""
    return np.random.SeedSequence(base_seed, spawn_key=(index,))


def sample_faults(comp: Compiled, noise: NoiseModel, rng: np.random.Generator):
    """Draw gate/idle/crosstalk Pauli faults for one trajectory."""
    probs = comp.probabilities(noise)
    u = rng.random(probs.size)
    hit = np.flatnonzero(u < probs)
    faults: dict[int, list[tuple[int, int, str, str]]] = {}
    if hit.size:
        v = rng.random(hit.size)
        for h, x in zip(hit, v):
            q1 = int(comp.loc_q1[h])
            if comp.loc_channel[h] == GATE2:
                la, lb = pauli_pair(1 + int(x * 15))
            else:
                la, lb = PAULI_LETTERS[1 + int(x * 3)], "I"
            faults.setdefault(int(comp.loc_anchor[h]), []).append((int(comp.loc_q0[h]), q1, la, lb))
    return faults


def _readout_flips(state: RegisterState, comp: Compiled, noise: NoiseModel, u_flip: np.ndarray) -> None:
    p0, p1 = noise.readout
    if p0 == 0.0 and p1 == 0.0:
        return
    for code, q0, _, _, cbit, mi, _ in comp.schedule:
        if code in (MEAS_Z, MEAS_X):
            true = state.cbits[cbit]
            if u_flip[mi] < (p1 if true else p0):
                state.cbits[cbit] ^= 1


def run_shot_state(circuit: Circuit, noise: NoiseModel, seed) -> tuple[ShotRecord, RegisterState]:
    comp = compile_circuit(circuit)
    rng = make_rng(seed)
    faults = sample_faults(comp, noise, rng)
    u_born = rng.random(comp.n_meas)
    u_flip = rng.random(comp.n_meas)
    st = execute(comp, faults, u_born)
    _readout_flips(st, comp, noise, u_flip)
    return ShotRecord(st.cbits.copy(), circuit.classical_layout), st


def run_shot(circuit: Circuit, noise: NoiseModel, seed) -> ShotRecord:
    """One noisy trajectory; a pure function of (circuit, noise, seed)."""
    return run_shot_state(circuit, noise, seed)[0]


def _batch_chunk(args) -> np.ndarray:
    circuit, noise, base_seed, start, stop = args
    out = np.empty((stop - start, circuit.num_cbits), dtype=np.uint8)
    for r, i in enumerate(range(start, stop)):
        out[r] = run_shot(circuit, noise, derive_seed(base_seed, i)).bits
    return out


def run_batch_bits(circuit: Circuit, noise: NoiseModel, n_shots: int, base_seed: int = 0,
                   workers: int = 1, chunk: int = 250) -> np.ndarray:
    """Records of ``n_shots`` independent shots as an ``(n_shots, n_cbits)`` array."""
    if n_shots < 1:
        raise ValueError("n_shots must be >= 1")
    bounds = [(s, min(s + chunk, n_shots)) for s in range(0, n_shots, chunk)]
    jobs = [(circuit, noise, base_seed, a, b) for a, b in bounds]
    if workers <= 1 or len(jobs) == 1:
        parts = [_batch_chunk(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_batch_chunk, jobs))
    return np.concatenate(parts, axis=0)


def run_batch(circuit: Circuit, noise: NoiseModel, n_shots: int, base_seed: int = 0,
              workers: int = 1) -> list[ShotRecord]:
    bits = run_batch_bits(circuit, noise, n_shots, base_seed, workers)
    return [ShotRecord(row, circuit.classical_layout) for row in bits]


def expected_fault_rate(circuit: Circuit, noise: NoiseModel) -> float:
    """Mean number of Pauli faults per trajectory (readout flips excluded)."""
    return float(compile_circuit(circuit).probabilities(noise).sum())


def noiseless_final_state(circuit: Circuit, seed=0) -> RegisterState:
    return run_shot_state(circuit, NoiseModel.noiseless(), seed)[1]


__all__ = [
    "Compiled", "compile_circuit", "schedule_ops", "apply_instruction", "execute",
    "run_shot", "run_shot_state", "run_batch", "run_batch_bits", "derive_seed", "make_rng",
    "sample_faults", "pauli_pair", "expected_fault_rate",
]
