"""Code-switching magic-state preparation: circuits, simulation, decoding, certification."""

from codeswitch.pauli import PauliOperator, commutes, pauli_product
from codeswitch.codes import (
    Sector,
    StabilizerCode,
    SyndromeTable,
    build_lookup_table,
    qrm_code,
    steane_code,
    syndrome,
    verify_code,
)
from codeswitch.layout import ShotLayout, ShotRecord, single_copy_layout, two_copy_layout
from codeswitch.circuit import Circuit, Instruction, Kind, build_experiment
from codeswitch.decoder import DecodeConfig, DecodedShot, Mode, decode, decode_all, parse_shot
from codeswitch.qasm import emit_qasm, parse_qasm
from codeswitch.sim.noise import NoiseModel
from codeswitch.sim.engine import run_batch, run_shot
from codeswitch.stats import (
    BlochVectors,
    epsilon_estimate,
    fidelity_direct,
    fidelity_lower_bound,
    mean_with_sem,
    summarize,
)

__all__ = [
    "BlochVectors",
    "Circuit",
    "DecodeConfig",
    "DecodedShot",
    "Instruction",
    "Kind",
    "Mode",
    "NoiseModel",
    "PauliOperator",
    "Sector",
    "ShotLayout",
    "ShotRecord",
    "StabilizerCode",
    "SyndromeTable",
    "build_experiment",
    "build_lookup_table",
    "commutes",
    "decode",
    "decode_all",
    "emit_qasm",
    "epsilon_estimate",
    "fidelity_direct",
    "fidelity_lower_bound",
    "mean_with_sem",
    "parse_qasm",
    "parse_shot",
    "pauli_product",
    "qrm_code",
    "run_batch",
    "run_shot",
    "single_copy_layout",
    "steane_code",
    "summarize",
    "syndrome",
    "two_copy_layout",
    "verify_code",
]

__version__ = "0.1.0"
