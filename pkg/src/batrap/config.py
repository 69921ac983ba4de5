"""Scenario configuration files: INI sections, unit-suffixed keys, SI values.

A scenario file carries the sections [beam], [laser_791], [uv_pulse],
[trap], [loading], [sources] and [run].  Every key name encodes its unit
(``power_mw``, ``waist_um``, ``temperature_c``, ...) and is converted to SI
at parse time.  Unknown sections or keys are rejected; required keys must be
present; all other keys fall back to the defaults of the shipped operating
point (300 C oven, 0.3 rad divergence, 100 um waist, 6.6 MHz / 50 Vrms
drive, 7 V endcaps).

``validate_config`` re-parses a file and reports every key with its SI value
plus any invariant violations, without running a scenario.
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field, replace

from .beam import BeamConfig
from .constants import (
    IonizationStep,
    IsotopeRecord,
    TRANSITION_791,
    isotope,
)
from .excitation import ExcitationConfig, PIStepConfig
from .loading import LoadingScenario, SourceRate, SourceTable
from .trap import TrapConfig

__all__ = [
    "ConfigError",
    "ScenarioConfig",
    "ValidationReport",
    "default_config_text",
    "parse_config_file",
    "parse_config_text",
    "validate_config",
]

AMU = 1.66053906660e-27


class ConfigError(ValueError):
    """Malformed scenario configuration; the message names the offending key."""


def _identity(v: float) -> float:
    return v


def _celsius(v: float) -> float:
    return v + 273.15


def _milli(v: float) -> float:
    return v * 1e-3


def _micro(v: float) -> float:
    return v * 1e-6


def _nano(v: float) -> float:
    return v * 1e-9


def _mega(v: float) -> float:
    return v * 1e6


def _kilo(v: float) -> float:
    return v * 1e3


def _micrometre(v: float) -> float:
    return v * 1e-6


def _millimetre(v: float) -> float:
    return v * 1e-3


def _cm2(v: float) -> float:
    return v * 1e-4


def _degrees(v: float) -> float:
    return math.radians(v)


def _amu(v: float) -> float:
    return v * AMU


# (converter, default-in-file-units or None when required)
_SCHEMA: dict[str, dict[str, tuple]] = {
    "beam": {
        "temperature_c": (_celsius, 300.0),
        "divergence_rad": (_identity, 0.3),
        "species_amu": (_amu, 137.905247),
        "probe_angle_deg": (_degrees, 90.0),
        "flux_scale": (_identity, 1.0),
    },
    "laser_791": {
        "power_mw": (_milli, 0.1),
        "waist_um": (_micrometre, 100.0),
        "detuning_mhz": (_mega, 0.0),
    },
    "uv_pulse": {
        "pulse_energy_uj": (_micro, 170.0),
        "pulse_width_ns": (_nano, 3.5),
        "rep_rate_hz": (_identity, 20.0),
        "waist_um": (_micrometre, 900.0),
        "wavelength_nm": (_nano, 337.1),
        "threshold_wavelength_nm": (_nano, 340.1),
        "cross_section_cm2": (_cm2, 2e-17),
    },
    "trap": {
        "rod_radius_mm": (_millimetre, 0.4),
        "rod_square_side_mm": (_millimetre, 1.85),
        "rf_frequency_mhz": (_mega, 6.6),
        "rf_voltage_vrms": (_identity, 50.0),
        "endcap_voltage_v": (_identity, 7.0),
        "endcap_separation_mm": (_millimetre, 10.0),
        "ion_amu": (_amu, 137.905247),
        "target_radial_khz": (_kilo, 626.0),
        "target_axial_khz": (_kilo, 272.0),
    },
    "loading": {
        "isotopes": (None, "134,136,138"),
        "calibration_rate_ions_per_s": (_identity, 2.0),
        "calibration_power_mw": (_milli, 0.75),
        "background_rate_ions_per_s": (_identity, 0.005),
        "density_samples": (None, 200000),
    },
    "sources": {
        "n2_alone_rate_ions_per_s": (_identity, 0.005),
        "n2_alone_err_ions_per_s": (_identity, 0.003),
        "e_beam_rate_ions_per_s": (_identity, 0.014),
        "e_beam_err_ions_per_s": (_identity, 0.006),
        "uv_lamp_rate_ions_per_s": (_identity, 2.4),
        "uv_lamp_err_ions_per_s": (_identity, 0.3),
        "pi_rate_ions_per_s": (_identity, 2.0),
        "pi_err_ions_per_s": (_identity, 0.1),
    },
    "run": {
        "doppler_samples": (None, 1000000),
        "n_trials": (None, 10),
        "trial_duration_s": (_identity, 5.0),
        "noise_fraction": (_identity, 0.05),
        "grid_step_mhz": (_mega, 4.0),
        "fm_width_mhz": (_mega, 10.0),
        "power_points": (None, 20),
        "power_min_mw": (_milli, 0.05),
        "power_max_mw": (_milli, 1.0),
        "chain_ions": (None, "30,8"),
        "chain_spacings_um": (None, "12,18"),
    },
}

_INT_KEYS = {"density_samples", "doppler_samples", "n_trials", "power_points"}
_LIST_KEYS = {"isotopes", "chain_ions", "chain_spacings_um"}


@dataclass
class ScenarioConfig:
    """Parsed scenario configuration, all values SI."""

    values: dict[str, dict[str, object]]
    digest: str

    def __getitem__(self, section: str) -> dict[str, object]:
        return self.values[section]

    # -- domain-object builders ---------------------------------------

    def beam_config(self) -> BeamConfig:
        b = self.values["beam"]
        return BeamConfig(
            oven_temperature=b["temperature_c"],
            divergence_half_angle=b["divergence_rad"],
            species_mass=b["species_amu"],
            flux_scale=b["flux_scale"],
            probe_angle=b["probe_angle_deg"],
        )

    def excitation_config(self, power: float | None = None,
                          detuning: float | None = None) -> ExcitationConfig:
        l = self.values["laser_791"]
        return ExcitationConfig(
            power=l["power_mw"] if power is None else power,
            waist=l["waist_um"],
            detuning=l["detuning_mhz"] if detuning is None else detuning,
            transition=TRANSITION_791,
        )

    def pi_step_config(self) -> PIStepConfig:
        u = self.values["uv_pulse"]
        pulse = IonizationStep(
            pulse_energy=u["pulse_energy_uj"],
            pulse_width=u["pulse_width_ns"],
            rep_rate=u["rep_rate_hz"],
            waist=u["waist_um"],
            wavelength=u["wavelength_nm"],
            threshold_wavelength=u["threshold_wavelength_nm"],
        )
        return PIStepConfig(ionization_cross_section=u["cross_section_cm2"],
                            pulse=pulse)

    def trap_config(self) -> TrapConfig:
        t = self.values["trap"]
        return TrapConfig(
            rod_radius=t["rod_radius_mm"],
            rod_square_side=t["rod_square_side_mm"],
            rf_frequency=t["rf_frequency_mhz"],
            rf_voltage_rms=t["rf_voltage_vrms"],
            endcap_voltage=t["endcap_voltage_v"],
            endcap_separation=t["endcap_separation_mm"],
            ion_mass=t["ion_amu"],
        )

    def selected_isotopes(self) -> tuple[IsotopeRecord, ...]:
        raw = self.values["loading"]["isotopes"]
        records = []
        for token in raw:
            try:
                records.append(isotope(int(token)))
            except (ValueError, KeyError) as err:
                raise ConfigError(f"loading.isotopes: unknown isotope {token!r}") from err
        return tuple(records)

    def loading_scenario(self, isotopes: tuple[IsotopeRecord, ...] | None = None,
                         power: float | None = None,
                         detuning: float | None = None,
                         density_seed: int | None = None) -> LoadingScenario:
        ld = self.values["loading"]
        scenario = LoadingScenario(
            beam=self.beam_config(),
            excitation=self.excitation_config(power=power, detuning=detuning),
            pi_step=self.pi_step_config(),
            isotopes=self.selected_isotopes() if isotopes is None else isotopes,
            background_rate=ld["background_rate_ions_per_s"],
            calibration_rate=ld["calibration_rate_ions_per_s"],
            calibration_power=ld["calibration_power_mw"],
            density_samples=ld["density_samples"],
        )
        if density_seed is not None:
            scenario = replace(scenario, density_seed=density_seed)
        return scenario

    def source_table(self) -> SourceTable:
        s = self.values["sources"]
        return SourceTable(
            n2_laser_alone=SourceRate(s["n2_alone_rate_ions_per_s"],
                                      s["n2_alone_err_ions_per_s"]),
            electron_beam=SourceRate(s["e_beam_rate_ions_per_s"],
                                     s["e_beam_err_ions_per_s"]),
            uv_lamp=SourceRate(s["uv_lamp_rate_ions_per_s"],
                               s["uv_lamp_err_ions_per_s"]),
            photoionization=SourceRate(s["pi_rate_ions_per_s"],
                                       s["pi_err_ions_per_s"]),
            pi_reference_power=self.values["loading"]["calibration_power_mw"],
        )


@dataclass
class ValidationReport:
    """Every parsed key with its SI value, plus invariant violations."""

    entries: list[tuple[str, object]] = field(default_factory=list)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def _parse_raw(text: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as err:
        # configparser reports offending line numbers in its message
        raise ConfigError(f"config parse error: {err}") from err
    return parser


def parse_config_text(text: str) -> ScenarioConfig:
    """Parse configuration text into SI values, applying defaults.

    Raises ``ConfigError`` naming the first unknown section/key or
    unconvertible value.
    """
    parser = _parse_raw(text)
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        for key in parser[section]:
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key {section}.{key}")

    values: dict[str, dict[str, object]] = {}
    for section, keys in _SCHEMA.items():
        values[section] = {}
        for key, (converter, default) in keys.items():
            if parser.has_option(section, key):
                raw = parser.get(section, key)
            elif default is not None:
                raw = str(default)
            else:
                raise ConfigError(f"missing required key {section}.{key}")
            values[section][key] = _convert(section, key, raw, converter)

    digest = hashlib.sha256(
        json.dumps(values, sort_keys=True, default=str).encode()).hexdigest()
    return ScenarioConfig(values=values, digest=digest)


def _convert(section: str, key: str, raw: str, converter):
    if key in _LIST_KEYS:
        return tuple(token.strip() for token in str(raw).split(",") if token.strip())
    try:
        number = float(raw)
    except ValueError as err:
        raise ConfigError(f"{section}.{key}: not a number: {raw!r}") from err
    if key in _INT_KEYS:
        if number != int(number):
            raise ConfigError(f"{section}.{key}: expected an integer, got {raw!r}")
        return int(number)
    return converter(number) if converter is not None else number


def parse_config_file(path: str) -> ScenarioConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config_text(handle.read())


def validate_config(path: str) -> ValidationReport:
    """Parse and check a config file without running anything."""
    config = parse_config_file(path)
    report = ValidationReport()
    for section in sorted(config.values):
        for key in sorted(config.values[section]):
            report.entries.append((f"{section}.{key}", config.values[section][key]))

    def check(builder, label):
        try:
            builder()
        except (ValueError, ConfigError) as err:
            report.violations.append(f"{label}: {err}")

    check(config.beam_config, "beam.temperature/divergence")
    check(config.excitation_config, "laser_791")
    check(config.pi_step_config, "uv_pulse")
    check(config.trap_config, "trap")
    check(config.selected_isotopes, "loading.isotopes")
    check(config.loading_scenario, "loading")
    check(config.source_table, "sources")
    # an oven at or below 0 C produces no usable barium beam
    if config["beam"]["temperature_c"] <= 273.15:
        report.violations.append(
            "beam.temperature_c: oven temperature must be positive (Celsius)")
    for key in ("noise_fraction", "trial_duration_s"):
        if config["run"][key] < 0.0:
            report.violations.append(f"run.{key}: must be non-negative")
    return report


def default_config_text() -> str:
    """INI text of the shipped default operating point."""
    lines = []
    for section, keys in _SCHEMA.items():
        lines.append(f"[{section}]")
        for key, (_, default) in keys.items():
            lines.append(f"{key} = {default}")
        lines.append("")
    return "\n".join(lines)
