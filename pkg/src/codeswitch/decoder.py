"""Classical post-processing of measurement records.

Pipeline for one protocol copy: pre-selection on flags and Z-stabilizer bits,
the qRM X-type syndrome and X logical from the destructive X readout, then the
Steane readout decoded by lookup table (EC) or post-selection on a trivial
syndrome (PS). The qRM X logical fixes the software frame bit
``a = (1 - X_qRM) / 2``; a = 1 flips the X and Y logical values.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from codeswitch.codes import QRM_CELLS, STEANE_PLAQUETTES, Sector, lookup_table, steane_code
from codeswitch.layout import LayoutError, ShotLayout, ShotRecord


class ShotParseError(ValueError):
    pass


class Mode(str, enum.Enum):
    EC = "EC"
    PS = "PS"


class RejectReason(str, enum.Enum):
    FLAG = "flag"
    Z_STABILIZER = "z-stabilizer"
    X_SYNDROME = "x-syndrome"
    STEANE_SYNDROME = "steane-syndrome"


@dataclass(frozen=True)
class DecodeConfig:
    mode: Mode = Mode.EC

    def __post_init__(self):
        object.__setattr__(self, "mode", _mode(self.mode))


def _mode(mode) -> Mode:
    if isinstance(mode, DecodeConfig):
        return mode.mode
    return Mode(str(mode.value if isinstance(mode, Mode) else mode).upper())


@dataclass(frozen=True)
class DecodedShot:
    accepted: bool
    reject_reason: RejectReason | None = None
    frame: tuple[int, ...] | None = None
    logical_values: dict[str, int] | None = field(default=None)

    def __post_init__(self):
        if not self.accepted and (self.logical_values is not None or self.frame is not None):
            raise ValueError("rejected shots carry no frame or logical values")
        if self.accepted and self.reject_reason is not None:
            raise ValueError("accepted shot with a reject reason")

    @property
    def singlet(self) -> bool:
        """Two-copy singlet event: (X1, Z2) = (-1, -1)."""
        lv = self.logical_values or {}
        return self.accepted and lv.get("X1") == -1 and lv.get("Z2") == -1

    @property
    def value(self) -> int | None:
        """The single logical value of a single-copy shot."""
        if not self.logical_values or len(self.logical_values) != 1:
            return None
        return next(iter(self.logical_values.values()))


def _reject(reason: RejectReason) -> DecodedShot:
    return DecodedShot(False, reason)


# --- parsing ---------------------------------------------------------------

def parse_shot(line: str, layout: ShotLayout) -> ShotRecord:
    text = line.strip()
    if len(text) != layout.size:
        raise ShotParseError(f"record has {len(text)} characters, layout expects {layout.size}")
    bad = set(text) - {"0", "1"}
    if bad:
        raise ShotParseError(f"invalid character(s) {''.join(sorted(bad))!r} in record")
    bits = np.frombuffer(text.encode("ascii"), dtype=np.uint8) - ord("0")
    try:
        return ShotRecord(bits, layout)
    except LayoutError as exc:  # pragma: no cover - guarded above
        raise ShotParseError(str(exc)) from exc


def _name(prefix: str, seg: str) -> str:
    return f"{prefix}/{seg}" if prefix else seg


# --- stages ----------------------------------------------------------------

def preselect(shot: ShotRecord, prefix: str = "") -> tuple[bool, RejectReason | None]:
    """Reject on any raised flag, then on any nontrivial Z-stabilizer bit."""
    if shot.group(_name(prefix, "flags")).any():
        return False, RejectReason.FLAG
    if shot.group(_name(prefix, "z-stabilizers")).any():
        return False, RejectReason.Z_STABILIZER
    return True, None


_CELL_MASKS = np.array([[int(q in sup) for q in range(1, 16)] for sup in QRM_CELLS.values()], dtype=np.uint8)
_PLAQ_MASKS = np.array([[int(q in sup) for q in range(1, 8)] for sup in STEANE_PLAQUETTES.values()], dtype=np.uint8)


@dataclass(frozen=True)
class QrmReadout:
    x_syndrome: tuple[int, ...]
    x_logical: int

    @property
    def trivial(self) -> bool:
        return not any(self.x_syndrome)

    @property
    def frame(self) -> int:
        return (1 - self.x_logical) // 2


def qrm_destructive_postprocess(bits15) -> QrmReadout:
    """X-cell syndrome (c1..c4 parities) and X logical (parity of bits 1..7)."""
    b = np.asarray(bits15, dtype=np.uint8)
    if b.size != 15:
        raise ValueError(f"expected 15 qRM bits, got {b.size}")
    syn = tuple(int(v) for v in (_CELL_MASKS @ b) % 2)
    x_logical = -1 if int(b[:7].sum()) % 2 else 1
    return QrmReadout(syn, x_logical)


@dataclass(frozen=True)
class SteaneReadout:
    syndrome: tuple[int, int, int]
    logical: int | None
    corrected_qubit: int | None = None

    @property
    def rejected(self) -> bool:
        return self.logical is None


def _steane_corrections() -> dict[tuple[int, ...], int | None]:
    table = lookup_table(steane_code(), Sector.Z)
    out: dict[tuple[int, ...], int | None] = {}
    for syn, corr in table.entries.items():
        out[syn] = corr.support[0] if corr.weight else None
    return out


_STEANE_FIX = _steane_corrections()


def steane_syndrome(bits7) -> tuple[int, int, int]:
    """Plaquette parities of a destructive Steane readout.

    X, Y and Z plaquettes share supports; in the Y basis the measured
    plaquette operator is p^X p^Z = Y^{x4} with phase +1, so its value is the
    same support parity of the Y-basis bits.
    """
    b = np.asarray(bits7, dtype=np.uint8)
    return tuple(int(v) for v in (_PLAQ_MASKS @ b) % 2)


def steane_logical_readout(bits7, basis: str, mode=Mode.EC) -> SteaneReadout:
    basis = basis.upper()
    if basis not in ("X", "Y", "Z"):
        raise ValueError(f"unknown basis {basis!r}")
    b = np.array(bits7, dtype=np.uint8)
    if b.size != 7:
        raise ValueError(f"expected 7 Steane bits, got {b.size}")
    syn = steane_syndrome(b)
    fixed = None
    if any(syn):
        if _mode(mode) is Mode.PS:
            return SteaneReadout(syn, None)
        fixed = _STEANE_FIX[syn]
        b[fixed - 1] ^= 1
    value = -1 if int(b[:3].sum()) % 2 else 1
    if basis == "Y":
        value = -value
    return SteaneReadout(syn, value, fixed)


# --- full decodes ------------------------------------------------------------

def _copy_checks(shot: ShotRecord, prefix: str) -> tuple[RejectReason | None, QrmReadout | None]:
    ok, reason = preselect(shot, prefix)
    if not ok:
        return reason, None
    qrm = qrm_destructive_postprocess(shot[_name(prefix, "qrm-data")])
    if not qrm.trivial:
        return RejectReason.X_SYNDROME, None
    return None, qrm


def decode_magic_prep(shot: ShotRecord) -> DecodedShot:
    reason, qrm = _copy_checks(shot, "")
    if reason is not None:
        return _reject(reason)
    return DecodedShot(True, None, (qrm.frame,), {})


def decode_single_copy(shot: ShotRecord, basis: str, mode=Mode.EC) -> DecodedShot:
    basis = basis.upper()
    reason, qrm = _copy_checks(shot, "")
    if reason is not None:
        return _reject(reason)
    ro = steane_logical_readout(shot["steane-data"], basis, mode)
    if ro.rejected:
        return _reject(RejectReason.STEANE_SYNDROME)
    value = ro.logical
    if qrm.frame and basis in ("X", "Y"):
        value = -value
    return DecodedShot(True, None, (qrm.frame,), {basis: value})


def decode_two_copy(shot: ShotRecord, mode=Mode.EC) -> DecodedShot:
    """Copy 1 read in X, copy 2 in Z; X1 is flipped when a1 + a2 is odd."""
    frames = []
    for prefix in ("copy1", "copy2"):
        reason, qrm = _copy_checks(shot, prefix)
        if reason is not None:
            return _reject(reason)
        frames.append(qrm.frame)
    r1 = steane_logical_readout(shot["copy1/steane-data"], "X", mode)
    r2 = steane_logical_readout(shot["copy2/steane-data"], "Z", mode)
    if r1.rejected or r2.rejected:
        return _reject(RejectReason.STEANE_SYNDROME)
    x1 = -r1.logical if (frames[0] + frames[1]) % 2 else r1.logical
    return DecodedShot(True, None, tuple(frames), {"X1": x1, "Z2": r2.logical})


def decode(shot: ShotRecord, experiment: str, mode=Mode.EC) -> DecodedShot:
    e = experiment.lower()
    if e == "two-copy":
        return decode_two_copy(shot, mode)
    if e == "magic-prep":
        return decode_magic_prep(shot)
    if e.startswith("single-copy-") and e[-1] in "xyz":
        return decode_single_copy(shot, e[-1].upper(), mode)
    raise ValueError(f"unknown experiment {experiment!r}")


@dataclass
class DecodedSet:
    """Decoded shots of one experiment, with counts per disposition."""

    experiment: str
    mode: Mode
    shots: list[DecodedShot]

    @property
    def n_shots(self) -> int:
        return len(self.shots)

    @property
    def accepted(self) -> list[DecodedShot]:
        return [s for s in self.shots if s.accepted]

    @property
    def n_post(self) -> int:
        return sum(s.accepted for s in self.shots)

    @property
    def acceptance_rate(self) -> float:
        return self.n_post / self.n_shots if self.shots else 0.0

    def reasons(self) -> dict[str, int]:
        out = {"accepted": 0, **{r.value: 0 for r in RejectReason}}
        for s in self.shots:
            out["accepted" if s.accepted else s.reject_reason.value] += 1
        return out

    def values(self, key: str | None = None) -> np.ndarray:
        """Logical values of accepted shots (``key`` defaults to the basis)."""
        if key is None:
            key = self.experiment[-1].upper()
        return np.array([s.logical_values[key] for s in self.accepted], dtype=np.int64)

    @property
    def n_singlet(self) -> int:
        return sum(s.singlet for s in self.shots)


def decode_all(records, experiment: str, mode=Mode.EC) -> DecodedSet:
    return DecodedSet(experiment, _mode(mode), [decode(r, experiment, mode) for r in records])
