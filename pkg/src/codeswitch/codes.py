"""Steane [[7,1,3]] and quantum Reed-Muller [[15,1,3]] codes, syndromes and lookup decoding."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache

import numpy as np

from codeswitch.pauli import PauliOperator, commutes, pauli_product


class CodeDefinitionError(ValueError):
    """A code's generators cannot support the requested decoder."""


class Sector(str, Enum):
    """Which generator family a syndrome is taken over.

    ``Z`` uses the Z-type generators (they detect X components of an error);
    ``X`` uses the X-type generators.
    """

    Z = "Z-detecting"
    X = "X-detecting"


Labeled = tuple[tuple[str, PauliOperator], ...]


@dataclass(frozen=True)
class StabilizerCode:
    name: str
    n: int
    k: int
    d: int
    z_generators: Labeled
    x_generators: Labeled
    logical_x: PauliOperator
    logical_y: PauliOperator
    logical_z: PauliOperator
    independent_z_subset: tuple[str, ...] = field(default=())

    def generators(self, sector: Sector) -> Labeled:
        return self.z_generators if Sector(sector) is Sector.Z else self.x_generators

    def generator(self, label: str) -> PauliOperator:
        for name, p in self.z_generators + self.x_generators:
            if name == label:
                return p
        raise KeyError(label)

    @property
    def all_generators(self) -> tuple[PauliOperator, ...]:
        return tuple(p for _, p in self.z_generators + self.x_generators)

    @property
    def logicals(self) -> dict[str, PauliOperator]:
        return {"X": self.logical_x, "Y": self.logical_y, "Z": self.logical_z}


STEANE_PLAQUETTES = {1: (1, 2, 6, 7), 2: (2, 3, 4, 7), 3: (4, 5, 6, 7)}

QRM_PLAQUETTES = {
    1: (1, 2, 6, 7), 2: (2, 3, 4, 7), 3: (4, 5, 6, 7), 4: (1, 6, 8, 13),
    5: (1, 2, 8, 9), 6: (2, 3, 9, 10), 7: (3, 4, 10, 11), 8: (4, 5, 11, 12),
    9: (5, 6, 12, 13), 10: (6, 7, 13, 14), 11: (2, 7, 9, 14), 12: (4, 7, 11, 14),
    13: (8, 12, 13, 15), 14: (8, 9, 10, 15), 15: (10, 11, 12, 15), 16: (8, 9, 13, 14),
    17: (9, 10, 11, 14), 18: (11, 12, 13, 14),
}
QRM_INDEPENDENT = (1, 2, 3, 7, 8, 9, 13, 16, 17, 18)

QRM_CELLS = {
    1: (1, 2, 6, 7, 8, 9, 13, 14),
    2: (4, 5, 6, 7, 11, 12, 13, 14),
    3: (2, 3, 4, 7, 9, 10, 11, 14),
    4: (8, 9, 10, 11, 12, 13, 14, 15),
}


@lru_cache(maxsize=None)
def steane_code() -> StabilizerCode:
    n = 7
    z = tuple((f"p{i}Z", PauliOperator.on(n, "Z", s)) for i, s in STEANE_PLAQUETTES.items())
    x = tuple((f"p{i}X", PauliOperator.on(n, "X", s)) for i, s in STEANE_PLAQUETTES.items())
    return StabilizerCode(
        name="steane",
        n=n, k=1, d=3,
        z_generators=z,
        x_generators=x,
        logical_x=PauliOperator.on(n, "X", (1, 2, 3)),
        # the sign is part of the definition; Y-basis readout depends on it
        logical_y=PauliOperator.on(n, "Y", (1, 2, 3), phase=-1),
        logical_z=PauliOperator.on(n, "Z", (1, 2, 3)),
        independent_z_subset=tuple(name for name, _ in z),
    )


@lru_cache(maxsize=None)
def qrm_code() -> StabilizerCode:
    n = 15
    z = tuple((f"p{i}", PauliOperator.on(n, "Z", s)) for i, s in QRM_PLAQUETTES.items())
    x = tuple((f"c{i}", PauliOperator.on(n, "X", s)) for i, s in QRM_CELLS.items())
    lx = PauliOperator.on(n, "X", range(1, 8))
    lz = PauliOperator.on(n, "Z", (1, 2, 3))
    return StabilizerCode(
        name="qrm",
        n=n, k=1, d=3,
        z_generators=z,
        x_generators=x,
        logical_x=lx,
        logical_y=pauli_product(lx, lz).with_phase(1j * pauli_product(lx, lz).phase),
        logical_z=lz,
        independent_z_subset=tuple(f"p{i}" for i in QRM_INDEPENDENT),
    )


def syndrome(code: StabilizerCode, error: PauliOperator, sector: Sector) -> tuple[int, ...]:
    """Bit i is 1 iff ``error`` anticommutes with the i-th generator of ``sector``."""
    if error.n != code.n:
        raise ValueError(f"error acts on {error.n} qubits, code has {code.n}")
    return tuple(int(not commutes(g, error)) for _, g in code.generators(sector))


# --- GF(2) helpers -------------------------------------------------------

def gf2_rank(rows: np.ndarray) -> int:
    m = np.array(rows, dtype=np.uint8) % 2
    rank = 0
    for col in range(m.shape[1]):
        pivot = next((r for r in range(rank, m.shape[0]) if m[r, col]), None)
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        for r in range(m.shape[0]):
            if r != rank and m[r, col]:
                m[r] ^= m[rank]
        rank += 1
    return rank


def in_row_space(rows: np.ndarray, v: np.ndarray) -> bool:
    rows = np.asarray(rows, dtype=np.uint8)
    return gf2_rank(rows) == gf2_rank(np.vstack([rows, np.asarray(v, dtype=np.uint8)]))


def stabilizer_matrix(code: StabilizerCode) -> np.ndarray:
    return np.array([g.symplectic() for g in code.all_generators], dtype=np.uint8)


def in_stabilizer_group(code: StabilizerCode, p: PauliOperator) -> bool:
    """Membership up to phase: the symplectic vector lies in the generator span."""
    return in_row_space(stabilizer_matrix(code), p.symplectic())


def acts_trivially(code: StabilizerCode, p: PauliOperator) -> bool:
    """True when ``p`` is a stabilizer (up to sign) and so leaves logical information intact."""
    return in_stabilizer_group(code, p)


# --- lookup decoding -----------------------------------------------------

@dataclass(frozen=True)
class SyndromeTable:
    sector: Sector
    entries: dict[tuple[int, ...], PauliOperator]

    def correction(self, syn) -> PauliOperator | None:
        return self.entries.get(tuple(int(b) for b in syn))

    def __len__(self) -> int:
        return len(self.entries)


def build_lookup_table(code: StabilizerCode, sector: Sector) -> SyndromeTable:
    """Map the trivial syndrome to identity and each weight-1 error syndrome to its error.

    Z-type checks see X errors, so a ``Sector.Z`` table holds X corrections and
    vice versa.
    """
    sector = Sector(sector)
    letter = "X" if sector is Sector.Z else "Z"
    ident = PauliOperator.identity(code.n)
    entries = {syndrome(code, ident, sector): ident}
    for q in range(1, code.n + 1):
        err = PauliOperator.on(code.n, letter, [q])
        syn = syndrome(code, err, sector)
        if syn in entries:
            other = entries[syn]
            if not acts_trivially(code, pauli_product(other, err)):
                raise CodeDefinitionError(
                    f"{code.name}: {other} and {err} share syndrome {syn} but are inequivalent"
                )
            continue
        entries[syn] = err
    return SyndromeTable(sector, entries)


@lru_cache(maxsize=None)
def lookup_table(code: StabilizerCode, sector: Sector) -> SyndromeTable:
    return build_lookup_table(code, sector)


# --- consistency checks --------------------------------------------------

@dataclass
class CodeReport:
    ok: bool
    checks: dict[str, bool]
    counterexample: str | None = None

    def __bool__(self) -> bool:
        return self.ok


def _low_weight_paulis(n: int, max_weight: int):
    for w in range(1, max_weight + 1):
        for qubits in itertools.combinations(range(n), w):
            for letters in itertools.product("XYZ", repeat=w):
                chars = ["I"] * n
                for q, c in zip(qubits, letters):
                    chars[q] = c
                yield PauliOperator("".join(chars))


def verify_code(code: StabilizerCode) -> CodeReport:
    """Check commutation, logical algebra, rank and distance (by enumeration below ``d``)."""
    checks: dict[str, bool] = {}
    gens = code.all_generators
    lx, ly, lz = code.logical_x, code.logical_y, code.logical_z

    def fail(name: str, why: str) -> CodeReport:
        checks[name] = False
        return CodeReport(False, checks, why)

    for (na, a), (nb, b) in itertools.combinations(code.z_generators + code.x_generators, 2):
        if not commutes(a, b):
            return fail("generators_commute", f"{na} anticommutes with {nb}")
    checks["generators_commute"] = True

    for name, logical in code.logicals.items():
        for gname, g in code.z_generators + code.x_generators:
            if not commutes(logical, g):
                return fail("logicals_commute", f"logical {name} anticommutes with {gname}")
    checks["logicals_commute"] = True

    if commutes(lx, lz):
        return fail("logical_algebra", "logical X and Z commute")
    if pauli_product(lx, lz).with_phase(1j * pauli_product(lx, lz).phase) != ly:
        return fail("logical_algebra", "logical Y differs from i*X*Z")
    checks["logical_algebra"] = True

    rank = gf2_rank(stabilizer_matrix(code))
    if rank != code.n - code.k:
        return fail("rank", f"generator rank {rank} != n - k = {code.n - code.k}")
    if code.independent_z_subset:
        sub = np.array([code.generator(lbl).symplectic() for lbl in code.independent_z_subset])
        zall = np.array([g.symplectic() for _, g in code.z_generators])
        if gf2_rank(sub) != len(sub) or gf2_rank(sub) != gf2_rank(zall):
            return fail("rank", "independent Z subset does not span the Z generators")
    checks["rank"] = True

    for p in _low_weight_paulis(code.n, code.d - 1):
        if all(commutes(p, g) for g in gens) and not all(
            commutes(p, lg) for lg in (lx, lz)
        ):
            return fail("distance", f"undetected logical error {p} of weight {p.weight}")
    checks["distance"] = True
    return CodeReport(True, checks)
