"""Dense logical-state helpers for the Steane and qRM blocks.

Vectors use qubit 1 as the most significant tensor factor, the same
convention as ``PauliOperator.to_matrix``.
"""

from __future__ import annotations

import itertools
from functools import lru_cache

import numpy as np

from codeswitch.codes import StabilizerCode, lookup_table, qrm_code, steane_code, Sector
from codeswitch.pauli import PauliOperator

E_PI_4 = np.exp(1j * np.pi / 4)


def _index(bits: np.ndarray) -> int:
    n = len(bits)
    return int(sum(int(b) << (n - 1 - i) for i, b in enumerate(bits)))


def _x_span(code: StabilizerCode) -> list[np.ndarray]:
    gens = [g.x_bits() for _, g in code.x_generators]
    words = set()
    for coeffs in itertools.product((0, 1), repeat=len(gens)):
        v = np.zeros(code.n, dtype=np.uint8)
        for c, g in zip(coeffs, gens):
            if c:
                v ^= g
        words.add(v.tobytes())
    return [np.frombuffer(w, dtype=np.uint8) for w in sorted(words)]


@lru_cache(maxsize=None)
def logical_basis(name: str) -> tuple[np.ndarray, np.ndarray]:
    """(|0_L>, |1_L>) of ``"steane"`` or ``"qrm"`` as dense vectors."""
    code = steane_code() if name == "steane" else qrm_code()
    zero = np.zeros(2 ** code.n, dtype=complex)
    for w in _x_span(code):
        zero[_index(w)] = 1.0
    zero /= np.linalg.norm(zero)
    # X-type logical: a signed permutation of basis indices
    lx = code.logical_x
    mask = _index(lx.x_bits())
    one = lx.phase * zero[np.arange(zero.size) ^ mask]
    zero.setflags(write=False)
    one.setflags(write=False)
    return zero, one


def logical_state(name: str, alpha: complex, beta: complex) -> np.ndarray:
    zero, one = logical_basis(name)
    return alpha * zero + beta * one


def t_state(name: str = "steane") -> np.ndarray:
    """|T_L> = (|0_L> + e^{i pi/4} |1_L>) / sqrt 2."""
    return logical_state(name, 1 / np.sqrt(2), E_PI_4 / np.sqrt(2))


def plus_state(name: str = "qrm") -> np.ndarray:
    return logical_state(name, 1 / np.sqrt(2), 1 / np.sqrt(2))


def expectation(psi: np.ndarray, p: PauliOperator) -> float:
    return float(np.real(np.vdot(psi, p.to_matrix() @ psi)))


def _projector(code: StabilizerCode, gens, syndrome) -> np.ndarray:
    dim = 2 ** code.n
    proj = np.eye(dim, dtype=complex)
    for s, g in zip(syndrome, gens):
        proj = proj @ (np.eye(dim) + (-1) ** s * g.to_matrix()) / 2
    return proj


@lru_cache(maxsize=None)
def steane_ec_maps() -> np.ndarray:
    """Array ``M[s]`` (64, 2, 128): logical amplitudes after ideal lookup correction.

    For a Steane state psi and a syndrome sector s = (X-part, Z-part),
    ``M[s] @ psi`` gives <0_L|, <1_L| of C(s) P(s) psi, where P(s) projects onto
    the sector and C(s) is the lookup correction for both error types.
    """
    code = steane_code()
    zgens = [g for _, g in code.z_generators]
    xgens = [g for _, g in code.x_generators]
    tz = lookup_table(code, Sector.Z)  # X corrections
    tx = lookup_table(code, Sector.X)  # Z corrections
    zero, one = logical_basis("steane")
    bra = np.vstack([zero.conj(), one.conj()])
    maps = []
    for sz in itertools.product((0, 1), repeat=3):
        pz = _projector(code, zgens, sz)
        cx = tz.correction(sz).to_matrix()
        for sx in itertools.product((0, 1), repeat=3):
            px = _projector(code, xgens, sx)
            cz = tx.correction(sx).to_matrix()
            maps.append(bra @ cz @ cx @ px @ pz)
    out = np.array(maps)
    out.setflags(write=False)
    return out


def corrected_logical_density(psi7: np.ndarray) -> np.ndarray:
    """2x2 logical density operator after ideal syndrome-sector lookup correction."""
    amps = steane_ec_maps() @ psi7  # (64, 2)
    return np.einsum("si,sj->ij", amps, amps.conj())


def frame_corrected(rho: np.ndarray, frame: int) -> np.ndarray:
    """Apply the logical Z frame correction Z^frame."""
    if frame % 2 == 0:
        return rho
    z = np.diag([1.0, -1.0]).astype(complex)
    return z @ rho @ z


def fidelity_with_t(psi7: np.ndarray, frame: int = 0) -> float:
    rho = frame_corrected(corrected_logical_density(psi7), frame)
    t = np.array([1.0, E_PI_4]) / np.sqrt(2)
    return float(np.real(np.vdot(t, rho @ t)))


def bloch_vector(rho: np.ndarray) -> np.ndarray:
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    y = np.array([[0, -1j], [1j, 0]])
    z = np.diag([1.0, -1.0]).astype(complex)
    return np.real([np.trace(rho @ m) for m in (x, y, z)])
