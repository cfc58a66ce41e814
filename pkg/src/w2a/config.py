"""Scenario configuration: dataclass defaults and a key = value file parser.

A scenario bundles every parameter of the water-to-air link: water optics,
link geometry, sea state, bubble population, UAV/turbulence settings, and the
transmitter/receiver electrical models.  Files use a line-oriented
`key = value` syntax with `[section]` headers; every key is optional and
falls back to the documented defaults.  Unknown sections or keys are hard
errors, reported with their line number.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .bubbles import HnParams
from .link import SipmModel, TxModel
from .scattering import FfParams
from .seastate import JonswapParams
from .tracer import FRESNEL_MODES, Geometry, WaterOptics
from .uav import DrydenParams, UavBody

U10_MAX = 20.0       # m/s, validity limit of the wave spectrum model
MIN_PHOTONS = 10_000


class ConfigError(ValueError):
    """Scenario file syntax or range violation."""


@dataclass(frozen=True)
class LinkScenario:
    """Fully-resolved simulation scenario (all defaults filled in)."""

    optics: WaterOptics = field(default_factory=WaterOptics)
    geometry: Geometry = field(default_factory=Geometry)
    u10: float = 5.0              # m/s wind speed at 10 m height
    fetch: float = 3.0e4          # m
    wavelength: float = 470e-9    # m
    fresnel_mode: str = "paper"
    n_photons: int = 1_000_000
    seed: int = 1
    realizations: int = 10        # surface draws averaged per operating point

    body: UavBody = field(default_factory=UavBody)
    uav_dt: float = 0.01          # s, turbulence sample interval
    w20: float | None = None      # m/s, explicit turbulence reference wind

    tx_model: TxModel = field(default_factory=TxModel)
    sipm: SipmModel = field(default_factory=SipmModel)
    nep_pinned: float = 3.42e-15  # W/sqrt(Hz) used for noise power
    rb: float = 1e6               # bit/s
    ber_realizations: int = 1000
    fec_limit: float = 2e-3

    duration: float = 10.0        # s, time-series sweep length
    time_step: float = 0.01       # s, time-series sampling interval

    sweep_parameter: str | None = None
    sweep_values: tuple[float, ...] = ()
    out_dir: str = "out"

    def __post_init__(self):
        if not 0.0 <= self.u10 <= U10_MAX:
            raise ConfigError(
                f"wave spectrum model is valid for U10 between 0 and {U10_MAX} m/s, "
                f"got {self.u10}"
            )
        if self.n_photons < MIN_PHOTONS:
            raise ConfigError(f"photon count must be >= {MIN_PHOTONS}, got {self.n_photons}")
        if self.fresnel_mode not in FRESNEL_MODES:
            raise ConfigError(
                f"fresnel_mode must be one of {sorted(FRESNEL_MODES)}, got {self.fresnel_mode!r}"
            )
        if self.realizations < 1 or self.ber_realizations < 1:
            raise ConfigError("realization counts must be >= 1")
        if self.rb <= 0.0 or self.wavelength <= 0.0:
            raise ConfigError("bit rate and wavelength must be positive")
        if self.duration <= 0.0 or self.time_step <= 0.0:
            raise ConfigError("time-series duration and step must be positive")

    @property
    def jonswap(self) -> JonswapParams | None:
        """Wave-spectrum parameters; None for the flat-sea benchmark (U10 = 0)."""
        if self.u10 == 0.0:
            return None
        return JonswapParams.for_wind(self.u10, fetch=self.fetch)

    @property
    def hn(self) -> HnParams | None:
        """Bubble-population parameters; None when there is no wind."""
        if self.u10 == 0.0:
            return None
        return HnParams(u10=self.u10)

    @property
    def dryden(self) -> DrydenParams | None:
        """Turbulence filter parameters; None when there is no wind."""
        if self.u10 == 0.0:
            return None
        p = DrydenParams.for_wind(self.u10, d_air=self.geometry.rx[2], dt=self.uav_dt)
        if self.w20 is not None:
            p = replace(p, w20=self.w20)
        return p

    @property
    def d_water(self) -> float:
        return -self.geometry.tx[2]

    @property
    def d_air(self) -> float:
        return self.geometry.rx[2]


# Mapping of (section, key) -> scenario field recipe.  Each entry gives the
# target attribute path and an optional unit conversion.
_DEG = np.deg2rad


def _positive(name, value):
    if value <= 0.0:
        raise ConfigError(f"{name} must be positive, got {value}")
    return value


# handlers mutate a plain dict-of-dicts of intermediate values
_SCHEMA = {
    ("water", "a"): ("water", "a", float),
    ("water", "b"): ("water", "b", float),
    ("water", "n1"): ("water", "n1", float),
    ("water", "n2"): ("water", "n2", float),
    ("water", "ff_ns"): ("water", "ff_ns", float),
    ("water", "ff_mu"): ("water", "ff_mu", float),
    ("tx", "d_water"): ("geom", "d_water", float),
    ("tx", "theta_half"): ("geom", "theta_half_deg", float),
    ("tx", "power"): ("tx", "power", float),
    ("tx", "wavelength"): ("top", "wavelength", float),
    ("tx", "f_c_led"): ("tx", "f_c_led", float),
    ("tx", "extinction_ratio"): ("tx", "extinction_ratio", float),
    ("rx", "d_air"): ("geom", "d_air", float),
    ("rx", "r_rx"): ("geom", "r_rx", float),
    ("rx", "fov"): ("geom", "fov_deg", float),
    ("rx", "delta_m"): ("geom", "delta_m", float),
    ("sea", "u10"): ("top", "u10", float),
    ("sea", "fetch"): ("top", "fetch", float),
    ("sea", "duration"): ("top", "duration", float),
    ("sea", "time_step"): ("top", "time_step", float),
    ("uav", "mass"): ("uav", "mass", float),
    ("uav", "c_d"): ("uav", "c_d", float),
    ("uav", "area"): ("uav", "area", float),
    ("uav", "dt"): ("top", "uav_dt", float),
    ("uav", "w20"): ("top", "w20", float),
    ("sipm", "gain"): ("sipm", "gain", float),
    ("sipm", "n_spad"): ("sipm", "n_spad", int),
    ("sipm", "area"): ("sipm", "area", float),
    ("sipm", "fill_factor"): ("sipm", "fill_factor", float),
    ("sipm", "pde"): ("sipm", "pde", float),
    ("sipm", "dcr"): ("sipm", "f_dcr", float),
    ("sipm", "p_ct"): ("sipm", "p_ct", float),
    ("sipm", "p_ap"): ("sipm", "p_ap", float),
    ("sipm", "f_c"): ("sipm", "f_c", float),
    ("sipm", "tia_load"): ("sipm", "tia_load", float),
    ("link", "rb"): ("top", "rb", float),
    ("link", "realizations"): ("top", "ber_realizations", int),
    ("link", "fec_limit"): ("top", "fec_limit", float),
    ("link", "nep_pinned"): ("top", "nep_pinned", float),
    ("simulation", "photons"): ("top", "n_photons", int),
    ("simulation", "seed"): ("top", "seed", int),
    ("simulation", "realizations"): ("top", "realizations", int),
    ("simulation", "fresnel_mode"): ("top", "fresnel_mode", str),
    ("sweep", "parameter"): ("top", "sweep_parameter", str),
    ("sweep", "values"): ("top", "sweep_values", "floats"),
    ("output", "directory"): ("top", "out_dir", str),
}


def _parse_value(raw: str, kind, lineno: int):
    try:
        if kind is float:
            return float(raw)
        if kind is int:
            return int(float(raw))
        if kind is str:
            return raw
        if kind == "floats":
            return tuple(float(tok) for tok in raw.replace(",", " ").split())
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: cannot parse value {raw!r}: {exc}") from None
    raise ConfigError(f"line {lineno}: unsupported value kind {kind!r}")


def load_scenario(path) -> LinkScenario:
    """Parse a scenario file; absent keys take the documented defaults."""
    buckets: dict[str, dict] = {k: {} for k in ("water", "geom", "tx", "uav", "sipm", "top")}
    section = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if text.startswith("[") and text.endswith("]"):
                section = text[1:-1].strip().lower()
                if not any(s == section for s, _ in _SCHEMA):
                    raise ConfigError(f"line {lineno}: unknown section [{section}]")
                continue
            if "=" not in text:
                raise ConfigError(f"line {lineno}: expected 'key = value', got {text!r}")
            if section is None:
                raise ConfigError(f"line {lineno}: key outside of any [section]")
            key, raw = (part.strip() for part in text.split("=", 1))
            try:
                bucket, name, kind = _SCHEMA[(section, key.lower())]
            except KeyError:
                raise ConfigError(
                    f"line {lineno}: unknown key {key!r} in section [{section}]"
                ) from None
            buckets[bucket][name] = _parse_value(raw, kind, lineno)
    return _build_scenario(buckets)


def _build_scenario(buckets) -> LinkScenario:
    water = buckets["water"]
    ff = FfParams(
        n_s=water.pop("ff_ns", FfParams.n_s),
        mu_ff=water.pop("ff_mu", FfParams.mu_ff),
    )
    try:
        optics = WaterOptics(ff=ff, **water)

        geom = buckets["geom"]
        kwargs = {}
        if "d_water" in geom:
            kwargs["tx"] = (0.0, 0.0, -_positive("d_water", geom["d_water"]))
        if "d_air" in geom:
            kwargs["rx"] = (0.0, 0.0, _positive("d_air", geom["d_air"]))
        if "theta_half_deg" in geom:
            kwargs["theta_half"] = _DEG(geom["theta_half_deg"])
        if "fov_deg" in geom:
            kwargs["fov"] = _DEG(geom["fov_deg"])
        if "r_rx" in geom:
            kwargs["r_rx"] = geom["r_rx"]
        if "delta_m" in geom:
            kwargs["delta_m"] = geom["delta_m"]
        geometry = Geometry(**kwargs)

        tx = buckets["tx"]
        tx_model = TxModel(
            power=tx.get("power", TxModel.power),
            wavelength=buckets["top"].get("wavelength", TxModel.wavelength),
            f_c_led=tx.get("f_c_led", TxModel.f_c_led),
            extinction_ratio=tx.get("extinction_ratio", TxModel.extinction_ratio),
        )
        body = UavBody(**buckets["uav"])
        sipm = SipmModel(**buckets["sipm"])
        top = dict(buckets["top"])
        top.setdefault("wavelength", tx_model.wavelength)
        return LinkScenario(
            optics=optics,
            geometry=geometry,
            body=body,
            tx_model=tx_model,
            sipm=sipm,
            **top,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc
