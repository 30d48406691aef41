"""Pauli and readout noise parameters."""

from __future__ import annotations

from dataclasses import dataclass, field, fields, replace

CHANNELS = ("gate1", "gate2", "meas", "idle", "crosstalk")

# trapped-ion averages used as defaults
DEFAULTS = dict(
    p1=1.9e-5,
    p2=1.05e-3,
    p_meas1=1.38e-3,
    p_meas0=6.0e-4,
    p_idle=2.0e-4,
    p_crosstalk=6.6e-6,
)


def _default_enabled() -> dict[str, bool]:
    # crosstalk sits two orders of magnitude below p2 and is opt-in
    return {"gate1": True, "gate2": True, "meas": True, "idle": True, "crosstalk": False}


@dataclass(frozen=True)
class NoiseModel:
    p1: float = DEFAULTS["p1"]
    p2: float = DEFAULTS["p2"]
    p_meas1: float = DEFAULTS["p_meas1"]
    p_meas0: float = DEFAULTS["p_meas0"]
    p_idle: float = DEFAULTS["p_idle"]
    p_crosstalk: float = DEFAULTS["p_crosstalk"]
    enabled: dict[str, bool] = field(default_factory=_default_enabled, compare=False)

    def __post_init__(self):
        for f in fields(self):
            if f.name == "enabled":
                continue
            v = getattr(self, f.name)
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{f.name}={v} outside [0, 1]")
        full = _default_enabled()
        for k, v in dict(self.enabled).items():
            if k not in CHANNELS:
                raise ValueError(f"unknown noise channel {k!r}")
            full[k] = bool(v)
        object.__setattr__(self, "enabled", full)

    @classmethod
    def noiseless(cls) -> NoiseModel:
        return cls(enabled={c: False for c in CHANNELS})

    def with_channels(self, **flags: bool) -> NoiseModel:
        return replace(self, enabled={**self.enabled, **flags})

    def rate(self, channel: str) -> float:
        """Effective rate of ``channel`` after toggles (readout uses p_meas1)."""
        if not self.enabled[channel]:
            return 0.0
        return {
            "gate1": self.p1,
            "gate2": self.p2,
            "meas": self.p_meas1,
            "idle": self.p_idle,
            "crosstalk": self.p_crosstalk,
        }[channel]

    @property
    def readout(self) -> tuple[float, float]:
        """(flip given true 0, flip given true 1)."""
        if not self.enabled["meas"]:
            return 0.0, 0.0
        return self.p_meas0, self.p_meas1

    @property
    def is_noiseless(self) -> bool:
        return all(self.rate(c) == 0.0 for c in CHANNELS) and self.readout == (0.0, 0.0)

    def as_dict(self) -> dict[str, float | bool]:
        out: dict[str, float | bool] = {f.name: getattr(self, f.name) for f in fields(self) if f.name != "enabled"}
        for c in CHANNELS:
            out[f"enable_{c}"] = self.enabled[c]
        return out
