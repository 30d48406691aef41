"""Product-of-blocks state vector."""

from __future__ import annotations

import math

import numpy as np

from codeswitch.sim import kernels as K

SQRT1_2 = 1.0 / math.sqrt(2.0)
E_PI_4 = complex(math.cos(math.pi / 4), math.sin(math.pi / 4))

# unitary 1q gates as (kind, matrix entries) or diagonal phase
_DIAG = {"S": 1j, "S_DAG": -1j, "T": E_PI_4, "T_DAG": E_PI_4.conjugate(), "Z": -1.0 + 0j}
_DENSE = {
    "H": (SQRT1_2 + 0j, SQRT1_2 + 0j, SQRT1_2 + 0j, -SQRT1_2 + 0j),
    "Y": (0j, -1j, 1j, 0j),
}


class StateError(RuntimeError):
    pass


class RegisterState:
    """Global state as a tensor product of disjoint dense blocks.

    ``block_of[q]`` is the block id holding qubit ``q`` (-1 when ``q`` is not
    live) and ``pos_of[q]`` its bit position inside that block. Measuring a
    qubit removes it from its block.
    """

    def __init__(self, n_qubits: int, n_cbits: int = 0):
        self.n_qubits = n_qubits
        self.block_of = np.full(n_qubits, -1, dtype=np.int64)
        self.pos_of = np.zeros(n_qubits, dtype=np.int64)
        self.amps: dict[int, np.ndarray] = {}
        self.members: dict[int, list[int]] = {}
        self.cbits = np.zeros(n_cbits, dtype=np.uint8)
        self._next_id = 0
        self.peak_width = 0

    # -- bookkeeping ------------------------------------------------------

    def _check(self, q: int) -> int:
        if not 0 <= q < self.n_qubits:
            raise StateError(f"qubit {q} out of range 0..{self.n_qubits - 1}")
        b = self.block_of[q]
        if b < 0:
            raise StateError(f"qubit {q} is not live (never prepared or already measured)")
        return int(b)

    def is_live(self, q: int) -> bool:
        return self.block_of[q] >= 0

    @property
    def live_qubits(self) -> list[int]:
        return [q for q in range(self.n_qubits) if self.block_of[q] >= 0]

    @property
    def widths(self) -> list[int]:
        return [len(m) for m in self.members.values()]

    def _new_block(self, qubits: list[int], amps: np.ndarray) -> int:
        bid = self._next_id
        self._next_id += 1
        self.amps[bid] = amps
        self.members[bid] = qubits
        for k, q in enumerate(qubits):
            self.block_of[q] = bid
            self.pos_of[q] = k
        self.peak_width = max(self.peak_width, len(qubits))
        return bid

    def merge(self, b1: int, b2: int) -> int:
        """Fuse two blocks; the qubits of ``b2`` take the higher bit positions."""
        if b1 == b2:
            return b1
        a1, a2 = self.amps.pop(b1), self.amps.pop(b2)
        m1, m2 = self.members.pop(b1), self.members.pop(b2)
        merged = np.multiply.outer(a2, a1).ravel()
        return self._new_block(m1 + m2, merged)

    # -- operations -------------------------------------------------------

    def prep(self, q: int, basis: str = "Z") -> None:
        if not 0 <= q < self.n_qubits:
            raise StateError(f"qubit {q} out of range 0..{self.n_qubits - 1}")
        if self.block_of[q] >= 0:
            raise StateError(f"qubit {q} prepared while still live")
        if basis == "Z":
            amps = np.array([1.0, 0.0], dtype=np.complex128)
        else:
            amps = np.array([SQRT1_2, SQRT1_2], dtype=np.complex128)
        self._new_block([q], amps)

    def gate1(self, name: str, q: int) -> None:
        b = self._check(q)
        k = int(self.pos_of[q])
        psi = self.amps[b]
        if name in _DIAG:
            K.apply_phase(psi, k, _DIAG[name])
        elif name == "X":
            K.apply_x(psi, k)
        else:
            m = _DENSE[name]
            K.apply_1q(psi, k, m[0], m[1], m[2], m[3])

    def apply_matrix(self, q: int, m: np.ndarray) -> None:
        b = self._check(q)
        m = np.asarray(m, dtype=np.complex128)
        K.apply_1q(self.amps[b], int(self.pos_of[q]), m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def pauli(self, q: int, letter: str) -> None:
        if letter == "I":
            return
        self.gate1(letter, q)

    def cnot(self, c: int, t: int) -> None:
        bc, bt = self._check(c), self._check(t)
        if c == t:
            raise StateError("CNOT control equals target")
        b = self.merge(bc, bt) if bc != bt else bc
        K.apply_cnot(self.amps[b], int(self.pos_of[c]), int(self.pos_of[t]))

    def prob_one(self, q: int) -> float:
        b = self._check(q)
        return float(K.prob_one(self.amps[b], int(self.pos_of[q])))

    def measure(self, q: int, u: float) -> int:
        """Born-rule Z measurement using the uniform draw ``u``; removes ``q``."""
        b = self._check(q)
        psi = self.amps[b]
        k = int(self.pos_of[q])
        p1 = K.prob_one(psi, k)
        # guard against rounding residue on deterministic outcomes
        if p1 < 1e-13:
            bit = 0
        elif p1 > 1.0 - 1e-13:
            bit = 1
        else:
            bit = 1 if u < p1 else 0
        p = p1 if bit else 1.0 - p1
        self._remove(q, bit, 1.0 / math.sqrt(p))
        return bit

    def force(self, q: int, bit: int) -> float:
        """Project ``q`` onto ``bit`` and remove it; returns the branch probability."""
        b = self._check(q)
        p1 = K.prob_one(self.amps[b], int(self.pos_of[q]))
        p = p1 if bit else 1.0 - p1
        if p <= 1e-15:
            raise StateError(f"branch {bit} on qubit {q} has zero probability")
        self._remove(q, bit, 1.0 / math.sqrt(p))
        return p

    def _remove(self, q: int, bit: int, scale: float) -> None:
        b = int(self.block_of[q])
        k = int(self.pos_of[q])
        mem = self.members[b]
        self.block_of[q] = -1
        if len(mem) == 1:
            del self.amps[b]
            del self.members[b]
            return
        self.amps[b] = K.collapse_remove(self.amps[b], k, bit, scale)
        mem.pop(k)
        for j in range(k, len(mem)):
            self.pos_of[mem[j]] = j

    # -- inspection -------------------------------------------------------

    def norms(self) -> dict[int, float]:
        return {b: float(np.sqrt(K.norm_sq(a))) for b, a in self.amps.items()}

    def state_of(self, qubits: list[int]) -> np.ndarray:
        """Dense vector over ``qubits`` with ``qubits[0]`` as the most significant factor.

        The qubits must be a union of whole blocks (i.e. unentangled with the rest).
        """
        qubits = list(qubits)
        blocks = {self._check(q) for q in qubits}
        owned = [q for b in blocks for q in self.members[b]]
        if sorted(owned) != sorted(qubits):
            raise StateError("requested qubits are entangled with qubits outside the set")
        # product over blocks, LSB-first in ``order``
        order: list[int] = []
        vec = np.ones(1, dtype=np.complex128)
        for b in sorted(blocks):
            vec = np.multiply.outer(self.amps[b], vec).ravel()
            order = order + self.members[b]
        n = len(order)
        tensor = vec.reshape((2,) * n)  # axis 0 is the highest bit = order[-1]
        axis_of = {q: n - 1 - i for i, q in enumerate(order)}
        return np.ascontiguousarray(tensor.transpose([axis_of[q] for q in qubits])).ravel()

    def copy(self) -> RegisterState:
        other = RegisterState.__new__(RegisterState)
        other.n_qubits = self.n_qubits
        other.block_of = self.block_of.copy()
        other.pos_of = self.pos_of.copy()
        other.amps = {b: a.copy() for b, a in self.amps.items()}
        other.members = {b: list(m) for b, m in self.members.items()}
        other.cbits = self.cbits.copy()
        other._next_id = self._next_id
        other.peak_width = self.peak_width
        return other
