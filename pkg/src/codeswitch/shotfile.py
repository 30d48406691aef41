"""On-disk formats: shot files and decoded-shot files.

Both start with ``#key=value`` metadata lines. A shot file then holds one
record per line, exactly as many ``0``/``1`` characters as the layout. A
decoded file holds a CSV table ``index,disposition,frame,values``, where
``frame`` and ``values`` use ``;`` between per-copy entries.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from codeswitch.decoder import DecodedSet, DecodedShot, Mode, RejectReason
from codeswitch.layout import LAYOUT_VERSION, ShotLayout, ShotRecord, layout_for_size
from codeswitch.circuit import build_experiment


class ShotFileError(ValueError):
    """Malformed file content; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def _meta_lines(meta: dict) -> list[str]:
    return [f"#{k}={_fmt(v)}" for k, v in meta.items()]


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _split_meta(line: str, lineno: int) -> tuple[str, str]:
    body = line[1:].strip()
    if "=" not in body:
        raise ShotFileError(f"metadata line without '=': {line!r}", lineno)
    k, v = body.split("=", 1)
    return k.strip(), v.strip()


# --- shot files -------------------------------------------------------------

@dataclass
class ShotFile:
    meta: dict[str, str]
    bits: np.ndarray  # (n_shots, n_bits) uint8
    layout: ShotLayout

    @property
    def experiment(self) -> str:
        return self.meta["experiment"]

    @property
    def n_shots(self) -> int:
        return self.bits.shape[0]

    def records(self) -> list[ShotRecord]:
        return [ShotRecord(row, self.layout) for row in self.bits]


def shot_file_text(bits: np.ndarray, meta: dict) -> str:
    bits = np.asarray(bits, dtype=np.uint8)
    meta = {"layout_version": LAYOUT_VERSION, **meta, "shots": bits.shape[0]}
    out = io.StringIO()
    for ln in _meta_lines(meta):
        out.write(ln + "\n")
    chars = (bits + ord("0")).astype(np.uint8)
    for row in chars:
        out.write(row.tobytes().decode("ascii") + "\n")
    return out.getvalue()


def write_shot_file(path: str | Path, bits: np.ndarray, meta: dict) -> None:
    Path(path).write_text(shot_file_text(bits, meta))


def parse_shot_file(text: str, experiment: str | None = None) -> ShotFile:
    meta: dict[str, str] = {}
    rows: list[np.ndarray] = []
    layout: ShotLayout | None = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("#"):
            if rows:
                raise ShotFileError("metadata after the first record", lineno)
            k, v = _split_meta(line, lineno)
            meta[k] = v
            continue
        if not line:
            raise ShotFileError("empty line", lineno)
        if layout is None:
            layout = _layout_from_meta(meta, experiment, len(line), lineno)
        if len(line) != layout.size:
            raise ShotFileError(f"record has {len(line)} characters, layout expects {layout.size}", lineno)
        bad = set(line) - {"0", "1"}
        if bad:
            raise ShotFileError(f"invalid character(s) {''.join(sorted(bad))!r}", lineno)
        rows.append(np.frombuffer(line.encode("ascii"), dtype=np.uint8) - ord("0"))
    if experiment is not None:
        meta["experiment"] = experiment
    if "experiment" not in meta:
        raise ShotFileError("no experiment given in metadata")
    if layout is None:
        raise ShotFileError("file holds no records")
    if meta.get("layout_version", LAYOUT_VERSION) != LAYOUT_VERSION:
        raise ShotFileError(f"layout version {meta['layout_version']} is not supported")
    if "shots" in meta and int(meta["shots"]) != len(rows):
        raise ShotFileError(f"metadata announces {meta['shots']} shots, file holds {len(rows)}")
    return ShotFile(meta, np.array(rows, dtype=np.uint8), layout)


def _layout_from_meta(meta: dict, experiment: str | None, width: int, lineno: int) -> ShotLayout:
    kind = experiment or meta.get("experiment")
    if kind is None:
        try:
            return layout_for_size(width)
        except ValueError as exc:
            raise ShotFileError(str(exc), lineno) from exc
    try:
        return build_experiment(kind).classical_layout
    except ValueError as exc:
        raise ShotFileError(str(exc)) from exc


def read_shot_file(path: str | Path, experiment: str | None = None) -> ShotFile:
    return parse_shot_file(Path(path).read_text(), experiment)


# --- decoded files ----------------------------------------------------------

DECODED_COLUMNS = ("index", "disposition", "frame", "values")


def _value_text(shot: DecodedShot) -> str:
    if not shot.logical_values:
        return ""
    return ";".join(f"{k}={v:+d}" for k, v in shot.logical_values.items())


def decoded_file_text(ds: DecodedSet, meta: dict | None = None) -> str:
    reasons = ds.reasons()
    head = {
        "format": "decoded",
        "experiment": ds.experiment,
        "mode": ds.mode.value,
        **(meta or {}),
        "n_shots": ds.n_shots,
        "n_post": ds.n_post,
        "acceptance_rate": ds.acceptance_rate,
        **{f"count_{k}": v for k, v in reasons.items()},
    }
    if ds.experiment == "two-copy":
        head["n_singlet"] = ds.n_singlet
    out = io.StringIO()
    for ln in _meta_lines(head):
        out.write(ln + "\n")
    w = csv.writer(out, lineterminator="\n")
    w.writerow(DECODED_COLUMNS)
    for i, s in enumerate(ds.shots):
        disp = "accepted" if s.accepted else s.reject_reason.value
        frame = ";".join(str(a) for a in s.frame) if s.frame is not None else ""
        w.writerow((i, disp, frame, _value_text(s)))
    return out.getvalue()


def parse_decoded_file(text: str) -> DecodedSet:
    meta: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw.startswith("#"):
            k, v = _split_meta(raw, lineno)
            meta[k] = v
        elif raw.strip():
            body.append((lineno, raw))
    if meta.get("format") != "decoded":
        raise ShotFileError("not a decoded-shot file (missing #format=decoded)")
    for key in ("experiment", "mode"):
        if key not in meta:
            raise ShotFileError(f"missing metadata key {key!r}")
    if not body or tuple(body[0][1].split(",")) != DECODED_COLUMNS:
        raise ShotFileError("missing column header", body[0][0] if body else None)
    shots = []
    for lineno, raw in body[1:]:
        cells = next(csv.reader([raw]))
        if len(cells) != 4:
            raise ShotFileError(f"expected 4 columns, got {len(cells)}", lineno)
        try:
            shots.append(_parse_row(cells))
        except ValueError as exc:
            raise ShotFileError(str(exc), lineno) from exc
    ds = DecodedSet(meta["experiment"], Mode(meta["mode"]), shots)
    if "n_shots" in meta and int(meta["n_shots"]) != ds.n_shots:
        raise ShotFileError(f"metadata announces {meta['n_shots']} shots, table holds {ds.n_shots}")
    return ds


def _parse_row(cells: list[str]) -> DecodedShot:
    _, disp, frame, values = cells
    if disp != "accepted":
        return DecodedShot(False, RejectReason(disp))
    fr = tuple(int(a) for a in frame.split(";")) if frame else ()
    lv = {}
    for item in filter(None, values.split(";")):
        k, v = item.split("=")
        iv = int(v)
        if iv not in (1, -1):
            raise ValueError(f"logical value {v} is not +-1")
        lv[k] = iv
    return DecodedShot(True, None, fr, lv)


def read_decoded_file(path: str | Path) -> DecodedSet:
    return parse_decoded_file(Path(path).read_text())
