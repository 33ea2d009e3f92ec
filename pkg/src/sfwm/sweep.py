"""Model sweeps over temperature, pump power and cell displacement.

Each point rescales the configured reference budget:

* pair and noise rates follow the number of contributing atoms
  (density x in-cell share of the interaction region) and the pump power;
* the anti-Stokes efficiency follows the in-cell anti-Stokes transmission,
  whose optical depth tracks the density.

Backgrounds stay fixed. At the reference point the configured budget is
returned unchanged.
"""

import csv
import io
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .biphoton import bandwidth_from_width, fwhm
from .budget import accidental_noise_share, forward_coincidences, forward_singles, g2_peak, scale_budget
from .errors import ConfigError, DomainError, SfwmError
from .geometry import antistokes_mean_transmission, effective_atom_fraction

AXES = {"temperature": "temperature_C", "power": "power_mw", "displacement": "displacement_mm"}
COLUMNS = (
    "M_S_hz",
    "M_AS_hz",
    "coincidence_rate_hz",
    "g2_peak",
    "bandwidth_mhz",
    "accidental_noise_share",
    "flag",
)


def _atoms_and_transmission(cfg, temperature_C, displacement_mm):
    vapor = cfg.vapor.state(temperature_C)
    geo = cfg.geometry.geometry(displacement_mm)
    length = geo.interaction_length
    z = geo.displacement_z
    atoms = vapor.density * effective_atom_fraction(z, length, geo.cell_length)
    trans = antistokes_mean_transmission(z, length, vapor, geo.cell_length)
    return atoms, trans


def operating_point(cfg, temperature_C=None, power_mw=None, displacement_mm=None):
    """Rate budget at a shifted operating point; returns (budget, flag)."""
    base = cfg.budget.budget()
    atoms_ref, trans_ref = _atoms_and_transmission(cfg, None, None)
    atoms, trans = _atoms_and_transmission(cfg, temperature_C, displacement_mm)
    flag = ""
    power_factor = 1.0
    if power_mw is not None:
        ref_power = cfg.budget.pump_power_mw
        if ref_power is None:
            raise ConfigError("power sweeps need budget.pump_power_mw")
        if power_mw <= 0:
            raise DomainError("pump power must be > 0")
        power_factor = power_mw / ref_power
        cutoff = cfg.budget.low_power_cutoff_mw
        if cutoff is not None and power_mw < cutoff:
            flag = "outside_model_validity"
    if atoms <= 0:
        raise DomainError("no atoms inside the interaction region")
    b = scale_budget(base, density_factor=atoms / atoms_ref, power_factor=power_factor)
    if trans != trans_ref:
        b = replace(b, eta_antistokes=b.eta_antistokes * trans / trans_ref)
    return b, flag


@dataclass(frozen=True)
class SweepResult:
    axis: str
    values: tuple
    rows: tuple  # one dict per axis value, keys = COLUMNS

    def column(self, name):
        return np.array([r[name] for r in self.rows], dtype=float)

    def to_csv(self):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([AXES[self.axis], *COLUMNS])
        for value, row in zip(self.values, self.rows):
            writer.writerow([_fmt(value)] + [_fmt(row[c]) for c in COLUMNS])
        return buf.getvalue()


def _fmt(v):
    if isinstance(v, str):
        return v
    return repr(float(v))


def model_bandwidth(cfg):
    if cfg.waveform is None:
        return float("nan")
    w, _ = cfg.waveform_model()
    return bandwidth_from_width(fwhm(w))


def _point(cfg, axis, value, bandwidth):
    kwargs = {AXES[axis]: value}
    try:
        b, flag = operating_point(cfg, **kwargs)
        m_s, m_as = forward_singles(b)
        c_sg, c_ns = forward_coincidences(b)
        return {
            "M_S_hz": m_s,
            "M_AS_hz": m_as,
            "coincidence_rate_hz": c_sg + c_ns,
            "g2_peak": g2_peak(b),
            "bandwidth_mhz": bandwidth / 1e6,
            "accidental_noise_share": accidental_noise_share(b),
            "flag": flag,
        }
    except SfwmError as exc:
        nan = float("nan")
        row = {c: nan for c in COLUMNS}
        row["flag"] = f"infeasible: {exc}".replace(",", ";")
        return row


def run_sweep(cfg, axis, start, stop, steps, workers=1):
    if axis not in AXES:
        raise ConfigError(f"unknown sweep axis '{axis}'; choose from {', '.join(AXES)}")
    if steps < 1:
        raise ConfigError("steps must be >= 1")
    if steps > 1 and not stop > start:
        raise ConfigError("sweep stop must exceed start")
    values = tuple(float(v) for v in np.linspace(start, stop, steps))
    bandwidth = model_bandwidth(cfg)

    def job(v):
        return _point(cfg, axis, v, bandwidth)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = tuple(pool.map(job, values))
    else:
        rows = tuple(job(v) for v in values)
    return SweepResult(axis, values, rows)
