import numpy as np
import pytest

from codeswitch.circuit import ONE_QUBIT_GATES, Fragment, Kind, build_experiment
from codeswitch.decoder import RejectReason, decode_magic_prep
from codeswitch.layout import ShotRecord
from codeswitch.pauli import PauliOperator
from codeswitch.sim.faults import (
    FaultLocationError,
    FaultSpec,
    enumerate_fault_locations,
    expected_fault_count,
    ft_check,
    run_with_fault,
)
from codeswitch.sim.engine import compile_circuit, execute, make_rng, noiseless_final_state
from codeswitch.sim.logical import fidelity_with_t

MAGIC = build_experiment("magic-prep")


def test_single_cnot_has_15_faults():  # [TRIVIAL]
    frag = Fragment()
    frag.add(Kind.PREP_Z, 0)
    frag.add(Kind.PREP_Z, 1)
    frag.add(Kind.CNOT, 0, 1)
    faults = enumerate_fault_locations(frag.to_circuit(ticks=False))
    assert sum(f.index == 2 for f in faults) == 15


def test_prep_then_measure_has_two_faults():  # [TRIVIAL]
    frag = Fragment()
    frag.add(Kind.PREP_Z, 0)
    frag.measure(Kind.MEAS_Z, 0, "m")
    faults = enumerate_fault_locations(frag.to_circuit(ticks=False))
    assert len(faults) == 2
    assert faults[0].pauli == PauliOperator("X") and faults[1].is_flip


def test_magic_prep_count_matches_recount():  # [DERIVED] recount from the instruction list
    count = 0
    for ins in MAGIC.instructions:
        if ins.kind is Kind.CNOT:
            count += 15
        elif ins.kind in ONE_QUBIT_GATES:
            count += 3
        elif ins.kind is not Kind.TICK:
            count += 1  # preparations and measurements
    assert len(enumerate_fault_locations(MAGIC)) == count == expected_fault_count(MAGIC)


def test_fault_spec_validation():
    first_cnot = next(k for k, i in enumerate(MAGIC.instructions) if i.kind is Kind.CNOT)
    tick = next(k for k, i in enumerate(MAGIC.instructions) if i.kind is Kind.TICK)
    meas = next(k for k, i in enumerate(MAGIC.instructions) if i.is_measurement)
    with pytest.raises(FaultLocationError):  # [TRIVIAL] identity is not a fault
        run_with_fault(MAGIC, FaultSpec(first_cnot, PauliOperator("II")))
    with pytest.raises(FaultLocationError):
        run_with_fault(MAGIC, FaultSpec(first_cnot, PauliOperator("X")))
    with pytest.raises(FaultLocationError):
        run_with_fault(MAGIC, FaultSpec(tick, PauliOperator("X")))
    with pytest.raises(FaultLocationError):
        run_with_fault(MAGIC, FaultSpec(meas, PauliOperator("X")))
    with pytest.raises(FaultLocationError):
        run_with_fault(MAGIC, FaultSpec(len(MAGIC.instructions) + 3))


def _last_gate_before_readout(wire: int) -> int:
    h = max(k for k, i in enumerate(MAGIC.instructions) if i.kind is Kind.H and i.qubits == (wire,))
    return max(k for k, i in enumerate(MAGIC.instructions[:h]) if wire in i.qubits)


def test_z_on_qrm15_before_readout_is_rejected():  # [DERIVED] q15 in c4
    qrm15 = MAGIC.blocks["qrm"][14]
    k = _last_gate_before_readout(qrm15)
    ins = MAGIC.instructions[k]
    assert len(ins.qubits) == 1
    for seed in range(4):
        rec, _ = run_with_fault(MAGIC, FaultSpec(k, PauliOperator("Z")), seed)
        d = decode_magic_prep(rec)
        assert not d.accepted and d.reject_reason is RejectReason.X_SYNDROME


def test_x_on_qrm_base_before_readout_leaves_record():  # [DERIVED] commutes with X readout
    qrm1 = MAGIC.blocks["qrm"][0]
    k = _last_gate_before_readout(qrm1)
    ins = MAGIC.instructions[k]
    letters = "".join("X" if q == qrm1 else "I" for q in ins.qubits)
    comp = compile_circuit(MAGIC)
    for seed in range(6):
        rec, _ = run_with_fault(MAGIC, FaultSpec(k, PauliOperator(letters)), seed)
        ref = execute(comp, {}, make_rng(seed).random(comp.n_meas))
        np.testing.assert_array_equal(rec.bits, ref.cbits)


def test_noiseless_branches_give_t_in_both_frames():
    steane = list(MAGIC.blocks["steane"])
    frames = set()
    for seed in range(24):
        st = noiseless_final_state(MAGIC, seed)
        d = decode_magic_prep(ShotRecord(st.cbits.copy(), MAGIC.classical_layout))
        assert d.accepted
        frames.add(d.frame[0])
        assert fidelity_with_t(st.state_of(steane), d.frame[0]) == pytest.approx(1, abs=1e-10)
    assert frames == {0, 1}


def test_ablated_check_finds_counterexample():  # [DERIVED] ablation oracle
    rep = ft_check(ablate="stabilizer-round", repetitions=2, max_repetitions=6)
    assert not rep.ok
    assert rep.totals["accepted-and-wrong"] > 0
    assert rep.control.wrong == 0 and rep.control.rejected == 0  # [TRIVIAL] control row
    lines = rep.lines(build_experiment("magic-prep", ablate="stabilizer-round"))
    assert any(ln.startswith("counterexample:") for ln in lines)
    assert f"fault_locations={rep.n_faults}" in lines
    assert sum(rep.totals.values()) == sum(o.samples for o in rep.outcomes)


def test_ft_check_rejects_other_kinds():
    with pytest.raises(ValueError):
        ft_check("single-copy-x")
