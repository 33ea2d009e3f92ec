"""JSON experiment configuration.

Sections and keys (units are part of each key name)::

    vapor:      temperature_C, od_resonant, reference_path_m
    geometry:   angle_deg, excitation_diameter_m, detection_diameter_m,
                splitting_hz, displacement_mm, cell_length_m
    budget:     pair_rate_hz | pair_rate_per_mw_hz (with pump_power_mw),
                pump_power_mw, noise_stokes_hz, noise_antistokes_hz,
                raman_stokes_hz, raman_antistokes_hz, eta_stokes,
                eta_antistokes, background_stokes_hz, background_antistokes_hz,
                window_ns, low_power_cutoff_mw
    waveform:   decay_rate_hz | target_bandwidth_mhz, bin_ps
    filters:    stokes / antistokes -> {fwhm_mhz, peak_transmission}
    simulation: duration_s, seed, bin_ps, tau_range_ns, bunching_stokes,
                bunching_antistokes, coherence_time_ns, max_events

Unknown keys are rejected. Budget rates describe the reference operating
point given by the vapor temperature, pump power and displacement.
"""

import json
import math
from dataclasses import MISSING, asdict, dataclass, field, fields

from .biphoton import FilterSpec, ideal_waveform, filter_channels, waveform_for_bandwidth
from .budget import RateBudget
from .errors import ConfigError, SfwmError
from .geometry import BeamGeometry
from .montecarlo import DEFAULT_MAX_EVENTS, ThermalNoise
from .vapor import VaporState, celsius


def _check_number(section, key, value, kind):
    if kind is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{section}.{key} must be an integer")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key} must be a number")
    if not math.isfinite(value):
        raise ConfigError(f"{section}.{key} must be finite")
    return float(value)


class _Section:
    """Strict dict <-> dataclass conversion shared by the flat sections."""

    @classmethod
    def from_dict(cls, data, section):
        if not isinstance(data, dict):
            raise ConfigError(f"section '{section}' must be an object")
        known = {f.name: f for f in fields(cls)}
        unknown = sorted(set(data) - set(known))
        if unknown:
            raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")
        values = {}
        for name, f in known.items():
            if name in data and data[name] is not None:
                kind = int if f.metadata.get("int") else float
                values[name] = _check_number(section, name, data[name], kind)
            elif f.default is MISSING:
                raise ConfigError(f"missing required key '{section}.{name}'")
        try:
            return cls(**values)
        except SfwmError as exc:
            raise ConfigError(f"{section}: {exc}") from exc

    def to_dict(self):
        return {k: v for k, v in asdict(self).items() if v is not None}


@dataclass(frozen=True)
class VaporConfig(_Section):
    temperature_C: float = 42.0
    od_resonant: float = 3.4
    reference_path_m: float = 0.075

    def __post_init__(self):
        self.state()

    def state(self, temperature_C=None):
        ref = VaporState.at(celsius(self.temperature_C), self.od_resonant, self.reference_path_m)
        if temperature_C is None or temperature_C == self.temperature_C:
            return ref
        return ref.at_temperature(celsius(temperature_C))


@dataclass(frozen=True)
class GeometryConfig(_Section):
    angle_deg: float = 1.6
    excitation_diameter_m: float = 0.35e-3
    detection_diameter_m: float = 0.1e-3
    splitting_hz: float = 13.6e9
    displacement_mm: float = 0.0
    cell_length_m: float = 0.075

    def __post_init__(self):
        self.geometry()

    def geometry(self, displacement_mm=None):
        z = self.displacement_mm if displacement_mm is None else displacement_mm
        return BeamGeometry(
            crossing_angle=math.radians(self.angle_deg),
            excitation_diameter=self.excitation_diameter_m,
            detection_diameter=self.detection_diameter_m,
            stokes_antistokes_splitting=self.splitting_hz,
            cell_length=self.cell_length_m,
            displacement_z=z * 1e-3,
        )


@dataclass(frozen=True)
class BudgetConfig(_Section):
    noise_stokes_hz: float
    noise_antistokes_hz: float
    eta_stokes: float
    eta_antistokes: float
    background_stokes_hz: float
    background_antistokes_hz: float
    window_ns: float
    pair_rate_hz: float | None = None
    pair_rate_per_mw_hz: float | None = None
    pump_power_mw: float | None = None
    raman_stokes_hz: float | None = None
    raman_antistokes_hz: float | None = None
    low_power_cutoff_mw: float | None = None

    def __post_init__(self):
        if (self.pair_rate_hz is None) == (self.pair_rate_per_mw_hz is None):
            raise ConfigError("budget needs exactly one of pair_rate_hz or pair_rate_per_mw_hz")
        if self.pair_rate_per_mw_hz is not None and self.pump_power_mw is None:
            raise ConfigError("pair_rate_per_mw_hz requires pump_power_mw")
        if self.pump_power_mw is not None and self.pump_power_mw <= 0:
            raise ConfigError("pump_power_mw must be > 0")
        self.budget()

    @property
    def pair_rate(self):
        if self.pair_rate_hz is not None:
            return self.pair_rate_hz
        return self.pair_rate_per_mw_hz * self.pump_power_mw

    def budget(self):
        try:
            return RateBudget(
                pair_rate=self.pair_rate,
                noise_stokes=self.noise_stokes_hz,
                noise_antistokes=self.noise_antistokes_hz,
                eta_stokes=self.eta_stokes,
                eta_antistokes=self.eta_antistokes,
                background_stokes=self.background_stokes_hz,
                background_antistokes=self.background_antistokes_hz,
                window=self.window_ns * 1e-9,
                raman_stokes=self.raman_stokes_hz,
                raman_antistokes=self.raman_antistokes_hz,
            )
        except SfwmError as exc:
            raise ConfigError(f"budget: {exc}") from exc


@dataclass(frozen=True)
class WaveformConfig(_Section):
    decay_rate_hz: float | None = None
    target_bandwidth_mhz: float | None = None
    bin_ps: float = 10.0

    def __post_init__(self):
        if (self.decay_rate_hz is None) == (self.target_bandwidth_mhz is None):
            raise ConfigError("waveform needs exactly one of decay_rate_hz or target_bandwidth_mhz")
        for v in (self.decay_rate_hz, self.target_bandwidth_mhz, self.bin_ps):
            if v is not None and v <= 0:
                raise ConfigError("waveform parameters must be > 0")


@dataclass(frozen=True)
class FilterConfig(_Section):
    fwhm_mhz: float
    peak_transmission: float = 1.0

    def spec(self):
        return FilterSpec(self.fwhm_mhz * 1e6, self.peak_transmission)


@dataclass(frozen=True)
class FiltersConfig:
    stokes: FilterConfig | None = None
    antistokes: FilterConfig | None = None

    @classmethod
    def from_dict(cls, data, section="filters"):
        if not isinstance(data, dict):
            raise ConfigError("section 'filters' must be an object")
        unknown = sorted(set(data) - {"stokes", "antistokes"})
        if unknown:
            raise ConfigError(f"unknown key(s) in 'filters': {', '.join(unknown)}")
        parsed = {}
        for ch in ("stokes", "antistokes"):
            if data.get(ch) is not None:
                parsed[ch] = FilterConfig.from_dict(data[ch], f"filters.{ch}")
                try:
                    parsed[ch].spec()
                except SfwmError as exc:
                    raise ConfigError(f"filters.{ch}: {exc}") from exc
        return cls(**parsed)

    def to_dict(self):
        return {ch: getattr(self, ch).to_dict() for ch in ("stokes", "antistokes") if getattr(self, ch)}

    def specs(self):
        return tuple(getattr(self, ch).spec() for ch in ("stokes", "antistokes") if getattr(self, ch))


@dataclass(frozen=True)
class SimulationConfig(_Section):
    duration_s: float = 300.0
    seed: int = field(default=1, metadata={"int": True})
    bin_ps: float = 200.0
    tau_range_ns: float = 200.0
    bunching_stokes: float = 1.0
    bunching_antistokes: float = 1.0
    coherence_time_ns: float = 1.0
    max_events: int = field(default=DEFAULT_MAX_EVENTS, metadata={"int": True})

    def __post_init__(self):
        if self.duration_s <= 0 or self.bin_ps <= 0 or self.tau_range_ns <= 0:
            raise ConfigError("simulation duration, bin and range must be > 0")
        if self.seed < 0 or self.seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if self.max_events <= 0:
            raise ConfigError("max_events must be > 0")
        self.thermal()

    def thermal(self):
        try:
            return ThermalNoise(self.bunching_stokes, self.bunching_antistokes, self.coherence_time_ns * 1e-9)
        except SfwmError as exc:
            raise ConfigError(f"simulation: {exc}") from exc


SECTIONS = {
    "vapor": VaporConfig,
    "geometry": GeometryConfig,
    "budget": BudgetConfig,
    "waveform": WaveformConfig,
    "filters": FiltersConfig,
    "simulation": SimulationConfig,
}


@dataclass(frozen=True)
class ExperimentConfig:
    budget: BudgetConfig
    vapor: VaporConfig = field(default_factory=VaporConfig)
    geometry: GeometryConfig = field(default_factory=GeometryConfig)
    waveform: WaveformConfig | None = None
    filters: FiltersConfig = field(default_factory=FiltersConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("configuration must be a JSON object")
        unknown = sorted(set(data) - set(SECTIONS))
        if unknown:
            raise ConfigError(f"unknown section(s): {', '.join(unknown)}")
        if "budget" not in data:
            raise ConfigError("missing required section 'budget'")
        parsed = {}
        for name, kind in SECTIONS.items():
            if data.get(name) is not None:
                parsed[name] = kind.from_dict(data[name], name)
        return cls(**parsed)

    def to_dict(self):
        out = {}
        for name in SECTIONS:
            value = getattr(self, name)
            if value is not None:
                out[name] = value.to_dict()
        return out

    def to_json(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def waveform_model(self):
        """Filtered pair waveform and its bare decay rate."""
        if self.waveform is None:
            raise ConfigError("configuration has no 'waveform' section")
        wf = self.waveform
        filters = self.filters.specs()
        dt = wf.bin_ps * 1e-12
        try:
            if wf.target_bandwidth_mhz is not None:
                return waveform_for_bandwidth(wf.target_bandwidth_mhz * 1e6, filters, bin_width=dt)
            rate = wf.decay_rate_hz
            return filter_channels(ideal_waveform(rate, dt, 12.0 / rate), filters), rate
        except SfwmError as exc:
            raise ConfigError(f"waveform: {exc}") from exc


def load_config(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(data)
