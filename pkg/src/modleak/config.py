"""Run configuration: YAML ingestion, validation and sweep expansion.

A config is a single YAML file with a `protocol` block (one ProtocolParams
set), and optional `modulator`, `outputs` and `mc` blocks.  Any scalar
protocol field, the channel loss (via eta_Ch with scale dB) or the RF
scaling rho may instead hold a sweep {start, stop, points, scale}; at most
one swept field per run.  Unknown keys are a hard error: silent typos in
physics parameters are unacceptable.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .errors import InvalidArgument
from .modulator import DEFAULT_K_FLOOR, rho_to_k
from .security import ProtocolParams

PROTOCOL_KEYS = {
    "V_M": "v_m",
    "k": "k",
    "eta_Ch": "eta_ch",
    "eps_Ch": "eps_ch",
    "eta_D": "eta_d",
    "eps_D": "eps_d",
    "eps_P1": "eps_p1",
    "eps_P2": "eps_p2",
    "eps_L": "eps_l",
    "beta": "beta",
    "block_size": "block_size",
}
MODULATOR_KEYS = {"rho", "k_floor", "rho_convention"}
OUTPUTS_KEYS = {"path", "format"}
MC_KEYS = {"n", "seed"}
SWEEP_KEYS = {"start", "stop", "points", "scale"}
SCALES = {"linear", "dB", "log"}


@dataclass(frozen=True)
class Sweep:
    start: float
    stop: float
    points: int
    scale: str = "linear"

    def values(self) -> np.ndarray:
        if self.points < 2:
            raise InvalidArgument("sweep needs at least 2 points")
        if self.scale == "log":
            if self.start <= 0 or self.stop <= 0:
                raise InvalidArgument("log sweep requires positive bounds")
            return np.logspace(np.log10(self.start), np.log10(self.stop), self.points)
        # dB axes are linearly spaced in dB
        return np.linspace(self.start, self.stop, self.points)


@dataclass(frozen=True)
class RunConfig:
    protocol: dict
    modulator: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    mc: dict = field(default_factory=dict)

    @property
    def sweep_axis(self) -> tuple[str, Sweep] | None:
        axes = [(k, v) for k, v in self.protocol.items() if isinstance(v, Sweep)]
        if isinstance(self.modulator.get("rho"), Sweep):
            axes.append(("rho", self.modulator["rho"]))
        if len(axes) > 1:
            raise InvalidArgument(
                f"at most one sweep axis per run, found {[a for a, _ in axes]}"
            )
        return axes[0] if axes else None

    def params_at(self, sweep_value: float | None = None) -> ProtocolParams:
        """ProtocolParams for one point, substituting the swept value if any."""
        axis = self.sweep_axis
        values = dict(self.protocol)
        if axis is not None:
            if sweep_value is None:
                raise InvalidArgument("config has a sweep axis; a point value is needed")
            name, _ = axis
            if name != "rho":
                values[name] = sweep_value
        if "rho" in self.modulator:
            rho = self.modulator["rho"]
            if isinstance(rho, Sweep):
                rho = sweep_value
            values["k"] = rho_to_k(
                rho,
                self.modulator.get("k_floor", DEFAULT_K_FLOOR),
                self.modulator.get("rho_convention", "amplitude10"),
            )
        kwargs = {}
        for key, value in values.items():
            if isinstance(value, Sweep):
                raise InvalidArgument(f"unexpected sweep in field {key}")
            attr = PROTOCOL_KEYS[key]
            if key == "eta_Ch" and self._eta_ch_is_db():
                value = 10.0 ** (-value / 10.0)
            kwargs[attr] = int(value) if attr == "block_size" else float(value)
        return ProtocolParams(**kwargs)

    def _eta_ch_is_db(self) -> bool:
        v = self.protocol.get("eta_Ch")
        return isinstance(v, Sweep) and v.scale == "dB"


def _parse_scalar_or_sweep(key: str, value) -> float | Sweep:
    if isinstance(value, dict):
        unknown = set(value) - SWEEP_KEYS
        if unknown:
            raise InvalidArgument(f"unknown sweep key(s) {sorted(unknown)} under {key!r}")
        missing = {"start", "stop", "points"} - set(value)
        if missing:
            raise InvalidArgument(f"sweep under {key!r} lacks {sorted(missing)}")
        scale = value.get("scale", "linear")
        if scale not in SCALES:
            raise InvalidArgument(f"unknown sweep scale {scale!r} under {key!r}")
        return Sweep(
            start=float(value["start"]),
            stop=float(value["stop"]),
            points=int(value["points"]),
            scale=scale,
        )
    if not isinstance(value, (int, float)) or isinstance(value, bool):
        raise InvalidArgument(f"field {key!r} must be a number or a sweep block")
    return float(value)


def parse_config(raw: dict) -> RunConfig:
    if not isinstance(raw, dict):
        raise InvalidArgument("config root must be a mapping")
    unknown = set(raw) - {"protocol", "modulator", "outputs", "mc"}
    if unknown:
        raise InvalidArgument(f"unknown top-level key(s) {sorted(unknown)}")
    if "protocol" not in raw:
        raise InvalidArgument("config lacks the required 'protocol' block")

    protocol_raw = raw["protocol"] or {}
    unknown = set(protocol_raw) - set(PROTOCOL_KEYS)
    if unknown:
        raise InvalidArgument(f"unknown protocol key(s) {sorted(unknown)}")
    if "V_M" not in protocol_raw:
        raise InvalidArgument("protocol block lacks the required key 'V_M'")
    protocol = {k: _parse_scalar_or_sweep(k, v) for k, v in protocol_raw.items()}

    modulator_raw = raw.get("modulator") or {}
    unknown = set(modulator_raw) - MODULATOR_KEYS
    if unknown:
        raise InvalidArgument(f"unknown modulator key(s) {sorted(unknown)}")
    modulator = dict(modulator_raw)
    if "rho" in modulator:
        modulator["rho"] = _parse_scalar_or_sweep("rho", modulator["rho"])
    if "k_floor" in modulator:
        modulator["k_floor"] = float(modulator["k_floor"])
    if "rho_convention" in modulator and modulator["rho_convention"] not in (
        "amplitude10",
        "amplitude20",
    ):
        raise InvalidArgument(
            f"unknown rho_convention {modulator['rho_convention']!r}"
        )

    outputs_raw = raw.get("outputs") or {}
    unknown = set(outputs_raw) - OUTPUTS_KEYS
    if unknown:
        raise InvalidArgument(f"unknown outputs key(s) {sorted(unknown)}")
    if outputs_raw.get("format") not in (None, "csv", "json"):
        raise InvalidArgument(f"unknown output format {outputs_raw['format']!r}")

    mc_raw = raw.get("mc") or {}
    unknown = set(mc_raw) - MC_KEYS
    if unknown:
        raise InvalidArgument(f"unknown mc key(s) {sorted(unknown)}")
    mc = {k: int(v) for k, v in mc_raw.items()}

    cfg = RunConfig(protocol=protocol, modulator=modulator, outputs=dict(outputs_raw), mc=mc)
    cfg.sweep_axis  # validates single-axis constraint eagerly
    return cfg


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        raw = yaml.safe_load(fh)
    return parse_config(raw)


def dump_config(cfg: RunConfig) -> str:
    """Serialize back to YAML; parsing the output reproduces the config."""

    def plain(value):
        if isinstance(value, Sweep):
            out = {"start": value.start, "stop": value.stop, "points": value.points}
            if value.scale != "linear":
                out["scale"] = value.scale
            return out
        return value

    doc: dict = {"protocol": {k: plain(v) for k, v in cfg.protocol.items()}}
    if cfg.modulator:
        doc["modulator"] = {k: plain(v) for k, v in cfg.modulator.items()}
    if cfg.outputs:
        doc["outputs"] = dict(cfg.outputs)
    if cfg.mc:
        doc["mc"] = dict(cfg.mc)
    return yaml.safe_dump(doc, sort_keys=False)
