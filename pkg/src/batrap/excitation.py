"""Steady-state two-level response of the 791 nm line and the pulsed UV step.

The weak intercombination line is driven far above saturation; its excited
fraction follows the standard steady-state form

    rho_ee = (s/2) / (1 + s + (2 delta / gamma)^2),

with s = I / I_sat and gamma the natural linewidth (Hz).  The resulting line
is a Lorentzian of FWHM gamma sqrt(1 + s).  The pulsed second step ionizes an
excited atom with probability 1 - exp(-sigma Phi) per pulse, where Phi is the
peak photon fluence of the pulse.

Intensity convention: peak intensity I = P / (pi w^2), which reproduces the
reference operating point (100 uW at a 100 um waist -> 325 mW/cm^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .constants import (
    NITROGEN_LASER_STEP,
    PLANCK,
    SPEED_OF_LIGHT,
    TRANSITION_791,
    IonizationStep,
    TransitionData,
)

__all__ = [
    "ExcitationConfig",
    "PIStepConfig",
    "excited_fraction",
    "peak_intensity",
    "photon_fluence",
    "pi_probability_per_pulse",
    "power_broadened_fwhm",
    "rabi_rate",
    "saturation_parameter",
    "uv_ionization_factor",
]

# typical order of magnitude for the excited-state photoionization
# cross-section of an alkaline earth; a pure calibration parameter here
DEFAULT_CROSS_SECTION = 2e-21  # m^2


@dataclass(frozen=True)
class ExcitationConfig:
    """791 nm laser parameters: power (W), waist (m), detuning from the
    138Ba line (Hz) and the driven transition."""

    power: float
    waist: float
    detuning: float = 0.0
    transition: TransitionData = field(default=TRANSITION_791)

    def __post_init__(self):
        if self.power < 0.0:
            raise ValueError("power must be non-negative")
        if self.waist <= 0.0:
            raise ValueError("waist must be positive")


@dataclass(frozen=True)
class PIStepConfig:
    """Ionizing-step parameters: cross-section (m^2) and the UV pulse."""

    ionization_cross_section: float = DEFAULT_CROSS_SECTION
    pulse: IonizationStep = field(default=NITROGEN_LASER_STEP)

    def __post_init__(self):
        if self.ionization_cross_section <= 0.0:
            raise ValueError("ionization cross-section must be positive")


def peak_intensity(cfg: ExcitationConfig) -> float:
    """Peak intensity P / (pi w^2), W/m^2."""
    return cfg.power / (math.pi * cfg.waist**2)


def saturation_parameter(intensity: float, transition: TransitionData) -> float:
    """Saturation parameter s = I / I_sat (dimensionless)."""
    if intensity < 0.0:
        raise ValueError("intensity must be non-negative")
    return intensity / transition.saturation_intensity


def rabi_rate(intensity: float, transition: TransitionData) -> float:
    """Peak Rabi rate (gamma) sqrt(I / I_sat), in Hz (i.e. Omega / 2 pi)."""
    return transition.linewidth_gamma * math.sqrt(
        saturation_parameter(intensity, transition))


def power_broadened_fwhm(s: float, transition: TransitionData) -> float:
    """FWHM gamma sqrt(1 + s) of the saturated excitation line, Hz."""
    if s < 0.0:
        raise ValueError("saturation parameter must be non-negative")
    return transition.linewidth_gamma * math.sqrt(1.0 + s)


def excited_fraction(detuning_eff: float, s: float,
                     transition: TransitionData) -> float:
    """Steady-state excited-state population at effective detuning ``detuning_eff`` (Hz).

    Even in the detuning, monotone in s, bounded by 1/2.
    """
    if s < 0.0:
        raise ValueError("saturation parameter must be non-negative")
    gamma = transition.linewidth_gamma
    return (s / 2.0) / (1.0 + s + (2.0 * detuning_eff / gamma) ** 2)


def photon_fluence(step: IonizationStep) -> float:
    """Peak photon fluence per pulse, E / (pi w^2 E_photon), photons/m^2."""
    photon_energy = PLANCK * SPEED_OF_LIGHT / step.wavelength
    return step.pulse_energy / (math.pi * step.waist**2 * photon_energy)


def pi_probability_per_pulse(rho_ee: float, cfg: PIStepConfig) -> float:
    """Ionization probability per UV pulse for excited fraction ``rho_ee``.

    p = rho_ee (1 - exp(-sigma Phi)); saturates at rho_ee when every excited
    atom in the pulse volume is ionized.
    """
    if not 0.0 <= rho_ee <= 0.5:
        raise ValueError("excited fraction must lie in [0, 1/2]")
    sigma_phi = cfg.ionization_cross_section * photon_fluence(cfg.pulse)
    return rho_ee * -math.expm1(-sigma_phi)


def uv_ionization_factor(cfg: PIStepConfig) -> float:
    """Ionization events per second per unit excited fraction: rep rate times
    the per-pulse UV saturation factor."""
    sigma_phi = cfg.ionization_cross_section * photon_fluence(cfg.pulse)
    return cfg.pulse.rep_rate * -math.expm1(-sigma_phi)
