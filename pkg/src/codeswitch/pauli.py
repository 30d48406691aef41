"""Signed n-qubit Pauli operators.

Qubit positions are 1-based in every public helper (``on``, ``support``),
mirroring the labels used for the Steane and qRM lattices. The ``letters``
string itself is an ordinary 0-based Python sequence.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import Iterable

import numpy as np

_PHASES = (1, 1j, -1, -1j)

# (a, b) -> (letter of a*b, power of i)
_MUL = {
    ("I", "I"): ("I", 0), ("I", "X"): ("X", 0), ("I", "Y"): ("Y", 0), ("I", "Z"): ("Z", 0),
    ("X", "I"): ("X", 0), ("X", "X"): ("I", 0), ("X", "Y"): ("Z", 1), ("X", "Z"): ("Y", 3),
    ("Y", "I"): ("Y", 0), ("Y", "X"): ("Z", 3), ("Y", "Y"): ("I", 0), ("Y", "Z"): ("X", 1),
    ("Z", "I"): ("Z", 0), ("Z", "X"): ("Y", 1), ("Z", "Y"): ("X", 3), ("Z", "Z"): ("I", 0),
}

_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class PauliSizeError(ValueError):
    """Raised when two Paulis on different qubit counts are combined."""


def _phase_index(phase: complex) -> int:
    for k, p in enumerate(_PHASES):
        if abs(phase - p) < 1e-12:
            return k
    raise ValueError(f"phase must be one of +1, -1, +i, -i, got {phase!r}")


@dataclass(frozen=True)
class PauliOperator:
    letters: str
    phase: complex = 1

    def __post_init__(self):
        if any(c not in "IXYZ" for c in self.letters):
            raise ValueError(f"invalid Pauli letters {self.letters!r}")
        object.__setattr__(self, "phase", _PHASES[_phase_index(self.phase)])

    @property
    def n(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        return sum(c != "I" for c in self.letters)

    @property
    def support(self) -> tuple[int, ...]:
        """1-based positions of the non-identity letters."""
        return tuple(i + 1 for i, c in enumerate(self.letters) if c != "I")

    @classmethod
    def identity(cls, n: int) -> PauliOperator:
        return cls("I" * n)

    @classmethod
    def on(cls, n: int, letter: str, qubits: Iterable[int], phase: complex = 1) -> PauliOperator:
        """``letter`` on each 1-based qubit of ``qubits``, identity elsewhere."""
        chars = ["I"] * n
        for q in qubits:
            if not 1 <= q <= n:
                raise ValueError(f"qubit {q} outside 1..{n}")
            chars[q - 1] = letter
        return cls("".join(chars), phase)

    @classmethod
    def from_string(cls, text: str) -> PauliOperator:
        """Parse ``"-iXYZI"``-style text: optional sign, optional ``i``, then letters."""
        text = text.strip()
        phase = 1
        if text[:1] in "+-":
            phase = -1 if text[0] == "-" else 1
            text = text[1:]
        if text[:1] == "i":
            phase *= 1j
            text = text[1:]
        return cls(text, phase)

    def x_bits(self) -> np.ndarray:
        return np.array([c in "XY" for c in self.letters], dtype=np.uint8)

    def z_bits(self) -> np.ndarray:
        return np.array([c in "ZY" for c in self.letters], dtype=np.uint8)

    def symplectic(self) -> np.ndarray:
        return np.concatenate([self.x_bits(), self.z_bits()])

    def to_matrix(self) -> np.ndarray:
        """Dense matrix with qubit 1 as the most significant tensor factor."""
        mats = [_MATRICES[c] for c in self.letters]
        return self.phase * reduce(np.kron, mats, np.eye(1, dtype=complex))

    def with_phase(self, phase: complex) -> PauliOperator:
        return PauliOperator(self.letters, phase)

    def __mul__(self, other: PauliOperator) -> PauliOperator:
        return pauli_product(self, other)

    def __neg__(self) -> PauliOperator:
        return PauliOperator(self.letters, -self.phase)

    def __str__(self) -> str:
        sign = {1: "+", -1: "-", 1j: "+i", -1j: "-i"}[self.phase]
        return sign + self.letters


def _check_sizes(a: PauliOperator, b: PauliOperator) -> None:
    if a.n != b.n:
        raise PauliSizeError(f"qubit count mismatch: {a.n} vs {b.n}")


def pauli_product(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Return ``a * b`` with the phase tracked exactly."""
    _check_sizes(a, b)
    power = _phase_index(a.phase) + _phase_index(b.phase)
    letters = []
    for ca, cb in zip(a.letters, b.letters):
        c, k = _MUL[ca, cb]
        letters.append(c)
        power += k
    return PauliOperator("".join(letters), _PHASES[power % 4])


def commutes(a: PauliOperator, b: PauliOperator) -> bool:
    _check_sizes(a, b)
    clashes = sum(ca != "I" and cb != "I" and ca != cb for ca, cb in zip(a.letters, b.letters))
    return clashes % 2 == 0
