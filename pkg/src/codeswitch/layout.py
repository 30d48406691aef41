"""Classical-bit layouts for shot records.

A layout is an ordered list of named, contiguous segments. Names are
slash-separated paths; a segment belongs to every prefix group of its name, so
``"flags/p13"`` is part of group ``"flags"`` and, in the two-copy layout,
``"copy2/flags/p13"`` is part of ``"copy2"`` and ``"copy2/flags"``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LAYOUT_VERSION = "1"

Z_STABILIZER_LABELS = ("p13", "p8", "p2", "p3")
FLAG_LABELS = ("init-steane", "init-qrm", "p13", "p8", "parallel")


class LayoutError(ValueError):
    pass


@dataclass(frozen=True)
class Segment:
    name: str
    start: int
    length: int

    @property
    def stop(self) -> int:
        return self.start + self.length

    @property
    def indices(self) -> range:
        return range(self.start, self.stop)


@dataclass(frozen=True)
class ShotLayout:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        pos = 0
        names = set()
        for seg in self.segments:
            if seg.start != pos or seg.length < 1:
                raise LayoutError(f"segment {seg.name!r} is not contiguous at bit {pos}")
            if seg.name in names:
                raise LayoutError(f"duplicate segment {seg.name!r}")
            names.add(seg.name)
            pos = seg.stop

    @classmethod
    def from_sizes(cls, sizes: list[tuple[str, int]]) -> ShotLayout:
        segs, pos = [], 0
        for name, length in sizes:
            segs.append(Segment(name, pos, length))
            pos += length
        return cls(tuple(segs))

    @property
    def size(self) -> int:
        return self.segments[-1].stop if self.segments else 0

    def __len__(self) -> int:
        return self.size

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.segments)

    def segment(self, name: str) -> Segment:
        for s in self.segments:
            if s.name == name:
                return s
        raise KeyError(name)

    def group(self, prefix: str) -> list[Segment]:
        """Segments equal to ``prefix`` or nested under it, in layout order."""
        out = [s for s in self.segments if s.name == prefix or s.name.startswith(prefix + "/")]
        if not out:
            raise KeyError(prefix)
        return out

    def group_indices(self, prefix: str) -> np.ndarray:
        return np.concatenate([np.arange(s.start, s.stop) for s in self.group(prefix)])

    def prefixed(self, prefix: str, offset: int) -> list[Segment]:
        return [Segment(f"{prefix}/{s.name}", s.start + offset, s.length) for s in self.segments]

    def owner(self, bit: int) -> str:
        for s in self.segments:
            if s.start <= bit < s.stop:
                return s.name
        raise IndexError(bit)


def _block_sizes(with_steane: bool) -> list[tuple[str, int]]:
    sizes = [("steane-data", 7)] if with_steane else []
    sizes.append(("qrm-data", 15))
    sizes += [(f"z-stabilizers/{lbl}", 1) for lbl in Z_STABILIZER_LABELS]
    sizes += [(f"flags/{lbl}", 1) for lbl in FLAG_LABELS]
    return sizes


def single_copy_layout() -> ShotLayout:
    """31 bits: steane-data[7], qrm-data[15], z-stabilizers[4], flags[5]."""
    return ShotLayout.from_sizes(_block_sizes(True))


def magic_prep_layout() -> ShotLayout:
    """24 bits: the single-copy layout without the Steane readout."""
    return ShotLayout.from_sizes(_block_sizes(False))


def two_copy_layout() -> ShotLayout:
    """62 bits: copy 1 in bits 0..30, copy 2 in bits 31..61."""
    base = single_copy_layout()
    return ShotLayout(tuple(base.prefixed("copy1", 0) + base.prefixed("copy2", base.size)))


def layout_for_size(n_bits: int) -> ShotLayout:
    if n_bits == 31:
        return single_copy_layout()
    if n_bits == 62:
        return two_copy_layout()
    if n_bits == 24:
        return magic_prep_layout()
    raise LayoutError(f"no canonical layout has {n_bits} bits")


@dataclass(frozen=True, eq=False)
class ShotRecord:
    """One measurement record; bit 1 means eigenvalue -1."""

    bits: np.ndarray
    layout: ShotLayout

    def __post_init__(self):
        bits = np.asarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.size != self.layout.size:
            raise LayoutError(f"record has {bits.size} bits, layout expects {self.layout.size}")
        if np.any(bits > 1):
            raise LayoutError("record bits must be 0 or 1")
        object.__setattr__(self, "bits", bits)

    def __getitem__(self, name: str) -> np.ndarray:
        seg = self.layout.segment(name)
        return self.bits[seg.start:seg.stop]

    def group(self, prefix: str) -> np.ndarray:
        return self.bits[self.layout.group_indices(prefix)]

    def to_line(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __eq__(self, other) -> bool:
        return (isinstance(other, ShotRecord) and self.layout == other.layout
                and np.array_equal(self.bits, other.bits))

    def __hash__(self) -> int:
        return hash(self.bits.tobytes())
