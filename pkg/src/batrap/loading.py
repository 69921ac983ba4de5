"""Loading-rate engines: analytic spectra, power scans, counting statistics.

The photoionization loading rate of one isotope at laser detuning delta is

    R = R_bg + C * abundance * F_uv * sum_k w_k Integral g(v) rho_ee(delta - Delta_k - v/lambda, s) dv

where g is the Monte Carlo transverse-velocity density of the atomic beam,
rho_ee the steady-state excited fraction, (Delta_k, w_k) the isotope's line
components, F_uv the pulsed-UV ionization factor and C a calibration
constant fixed once per scenario so that the 138Ba rate at the reference
power equals the anchor rate (2.0 ions/s at 0.75 mW by default).

Because g is piecewise linear and rho_ee is a Lorentzian in the detuning,
the integral is evaluated in closed form segment by segment (arctan / log
antiderivatives), i.e. by quadrature that is exact for the interpolated
density; an adaptive-quadrature cross-check is exercised in the test suite.

Counting statistics follow a Poisson law: trial counts are drawn with mean
rate x duration, and rate estimates carry the sqrt(N)/T uncertainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import beam as beam_mod
from . import excitation as exc_mod
from .beam import BeamConfig, PolylineDensity
from .constants import IsotopeRecord, isotope
from .excitation import ExcitationConfig, PIStepConfig

__all__ = [
    "LoadingEngine",
    "LoadingScenario",
    "RateEstimate",
    "SourceRate",
    "SourceTable",
    "SpectrumResult",
    "TABLE_OF_RATES",
    "analytic_rate",
    "efficiency_comparison",
    "rate_vs_power",
    "simulate_trials",
    "spectrum",
]

DEFAULT_DENSITY_SEED = 20_240_791
DEFAULT_DENSITY_SAMPLES = 200_000


@dataclass(frozen=True)
class LoadingScenario:
    """Everything the rate engines need: beam, lasers, isotopes, calibration.

    ``calibration_constant`` (ions/s per unit of dimensionless model output)
    may be given explicitly; when ``None`` it is fixed from the anchor
    (``calibration_rate`` at ``calibration_power`` for 138Ba on resonance).
    ``density_seed`` pins the Monte Carlo velocity density so results are
    reproducible.
    """

    beam: BeamConfig
    excitation: ExcitationConfig
    pi_step: PIStepConfig = field(default_factory=PIStepConfig)
    isotopes: tuple[IsotopeRecord, ...] = ()
    calibration_constant: float | None = None
    background_rate: float = 0.005  # ions/s, loading with the 791 nm light off
    calibration_rate: float = 2.0  # ions/s
    calibration_power: float = 0.75e-3  # W
    density_samples: int = DEFAULT_DENSITY_SAMPLES
    density_seed: int = DEFAULT_DENSITY_SEED

    def __post_init__(self):
        if self.calibration_constant is not None and self.calibration_constant < 0.0:
            raise ValueError("calibration constant must be non-negative")
        if self.background_rate < 0.0:
            raise ValueError("background rate must be non-negative")
        if self.calibration_rate <= self.background_rate:
            raise ValueError("calibration rate must exceed the background rate")


@dataclass(frozen=True)
class RateEstimate:
    """Poisson rate estimate: rate = N/T with uncertainty sqrt(N)/T."""

    total_ions: int
    total_time: float

    def __post_init__(self):
        if self.total_time <= 0.0:
            raise ValueError("total time must be positive")
        if self.total_ions < 0:
            raise ValueError("ion count must be non-negative")

    @property
    def rate(self) -> float:
        return self.total_ions / self.total_time

    @property
    def uncertainty(self) -> float:
        return math.sqrt(self.total_ions) / self.total_time


@dataclass(frozen=True)
class SpectrumResult:
    """Loading rate versus detuning, per isotope and summed."""

    detunings: np.ndarray
    per_isotope: dict[str, np.ndarray]
    total: np.ndarray
    background_rate: float


class LoadingEngine:
    """Caches the beam velocity density and calibration for one scenario.

    Building the density is the expensive part; reuse the engine when
    evaluating many rates against the same scenario.
    """

    def __init__(self, scenario: LoadingScenario, rng: np.random.Generator | None = None):
        self.scenario = scenario
        if rng is None:
            rng = np.random.default_rng(scenario.density_seed)
        wavelength = scenario.excitation.transition.wavelength
        bin_width = beam_mod.SHIFT_BIN_WIDTH * wavelength  # m/s, 2 MHz equivalent
        self.density: PolylineDensity = beam_mod.transverse_velocity_density(
            rng, scenario.beam, scenario.density_samples, bin_width)
        self._uv_factor = exc_mod.uv_ionization_factor(scenario.pi_step)
        self._calibration: float | None = scenario.calibration_constant

    # -- core integral -------------------------------------------------

    def _component_integral(self, detuning_eff, s: float) -> np.ndarray:
        """Integral of g(v) rho_ee(detuning_eff - v/lambda, s) dv.

        ``detuning_eff`` may be an array; the piecewise-linear density makes
        the Lorentzian convolution exact per segment.
        """
        delta = np.atleast_1d(np.asarray(detuning_eff, dtype=float))
        transition = self.scenario.excitation.transition
        wavelength = transition.wavelength
        if s == 0.0:
            return np.zeros(delta.shape)
        rho_peak = (s / 2.0) / (1.0 + s)
        # Lorentzian in velocity space, centered on the resonant velocity
        half_width = wavelength * transition.linewidth_gamma * math.sqrt(1.0 + s) / 2.0
        v_res = wavelength * delta
        knots = self.density.knots
        vals = self.density.values
        v0, v1 = knots[:-1], knots[1:]
        slope = (vals[1:] - vals[:-1]) / (v1 - v0)
        intercept = vals[:-1] - slope * v0
        # integral over each segment of (intercept + slope v) * h^2/((v-v_res)^2+h^2)
        t0 = v0[None, :] - v_res[:, None]
        t1 = v1[None, :] - v_res[:, None]
        h = half_width
        centered_intercept = intercept[None, :] + slope[None, :] * v_res[:, None]
        atan_term = centered_intercept * h * (np.arctan(t1 / h) - np.arctan(t0 / h))
        log_term = 0.5 * slope[None, :] * h * h * (
            np.log(t1 * t1 + h * h) - np.log(t0 * t0 + h * h))
        return rho_peak * (atan_term + log_term).sum(axis=1)

    def _excess_rate(self, laser_detuning, iso: IsotopeRecord,
                     excitation: ExcitationConfig) -> np.ndarray:
        """Rate above background, before calibration scaling."""
        s = exc_mod.saturation_parameter(exc_mod.peak_intensity(excitation),
                                         excitation.transition)
        delta = np.atleast_1d(np.asarray(laser_detuning, dtype=float))
        out = np.zeros(delta.shape)
        for offset, weight in iso.line_components():
            out += weight * self._component_integral(delta - offset, s)
        return iso.abundance * self._uv_factor * out

    # -- calibration ----------------------------------------------------

    @property
    def calibration_constant(self) -> float:
        """C fixed so the anchor isotope on resonance at the anchor power
        loads at ``calibration_rate``."""
        if self._calibration is None:
            scenario = self.scenario
            anchor = isotope(138)
            excitation = replace(scenario.excitation, power=scenario.calibration_power)
            raw = float(self._excess_rate(anchor.line_center(), anchor, excitation)[0])
            self._calibration = (scenario.calibration_rate
                                 - scenario.background_rate) / raw
        return self._calibration

    # -- public rate surfaces -------------------------------------------

    def rate(self, laser_detuning, iso: IsotopeRecord,
             power: float | None = None) -> np.ndarray | float:
        """Loading rate (ions/s) at the given detuning(s) for one isotope."""
        excitation = self.scenario.excitation
        if power is not None:
            excitation = replace(excitation, power=power)
        raw = self._excess_rate(laser_detuning, iso, excitation)
        rates = self.scenario.background_rate + self.calibration_constant * raw
        if np.isscalar(laser_detuning):
            return float(rates[0])
        return rates

    def spectrum(self, detuning_grid) -> SpectrumResult:
        """Per-isotope and total loading spectra over a sorted detuning grid."""
        grid = np.asarray(detuning_grid, dtype=float)
        if grid.size < 3:
            raise ValueError("detuning grid needs at least 3 points")
        if np.any(np.diff(grid) <= 0.0):
            raise ValueError("detuning grid must be sorted ascending")
        background = self.scenario.background_rate
        per_isotope: dict[str, np.ndarray] = {}
        total = np.full(grid.shape, background)
        for iso in self.scenario.isotopes:
            rates = self.rate(grid, iso)
            per_isotope[iso.label] = rates
            total = total + (rates - background)
        return SpectrumResult(detunings=grid, per_isotope=per_isotope, total=total,
                              background_rate=background)

    def rate_vs_power(self, powers, iso: IsotopeRecord | None = None) -> np.ndarray:
        """On-resonance loading rate for each 791 nm power (W)."""
        powers = np.asarray(powers, dtype=float)
        if np.any(powers <= 0.0):
            raise ValueError("powers must be positive")
        if iso is None:
            iso = isotope(138)
        center = iso.line_center()
        return np.array([self.rate(center, iso, power=float(p)) for p in powers])

    def operating_rate(self) -> float:
        """Total rate of the scenario's isotopes at the configured detuning."""
        detuning = self.scenario.excitation.detuning
        background = self.scenario.background_rate
        total = background
        for iso in self.scenario.isotopes:
            total += float(self.rate(detuning, iso)) - background
        return total

    def doppler_fwhm(self) -> float:
        """FWHM of the cached velocity density expressed as a Doppler width, Hz."""
        return self.density.fwhm() / self.scenario.excitation.transition.wavelength

    def saturation_power(self) -> float:
        """Power (W) at which the power-broadened linewidth matches the
        Doppler width, i.e. where further broadening stops recruiting new
        velocity classes."""
        transition = self.scenario.excitation.transition
        s_sat = (self.doppler_fwhm() / transition.linewidth_gamma) ** 2 - 1.0
        intensity = s_sat * transition.saturation_intensity
        return intensity * math.pi * self.scenario.excitation.waist**2

    # -- counting -------------------------------------------------------

    def simulate_trials(self, rng: np.random.Generator, trial_duration: float,
                        n_trials: int, mode: str = "poisson",
                        atom_samples: int = 2048) -> RateEstimate:
        """Simulate repeated fixed-duration loading trials.

        ``poisson`` draws each trial count directly from the analytic mean.
        ``atoms`` re-estimates the velocity integral from ``atom_samples``
        fresh beam atoms per trial before drawing the count, mimicking an
        atom-by-atom Monte Carlo.
        """
        if trial_duration <= 0.0:
            raise ValueError("trial duration must be positive")
        if n_trials < 1:
            raise ValueError("need at least one trial")
        if mode == "poisson":
            mean = self.operating_rate() * trial_duration
            counts = rng.poisson(mean, size=n_trials)
        elif mode == "atoms":
            counts = np.array([
                rng.poisson(self._atom_sample_rate(rng, atom_samples) * trial_duration)
                for _ in range(n_trials)
            ])
        else:
            raise ValueError(f"unknown simulation mode {mode!r}")
        return RateEstimate(total_ions=int(counts.sum()),
                            total_time=trial_duration * n_trials)

    def _atom_sample_rate(self, rng: np.random.Generator, n_atoms: int) -> float:
        scenario = self.scenario
        excitation = scenario.excitation
        transition = excitation.transition
        s = exc_mod.saturation_parameter(exc_mod.peak_intensity(excitation), transition)
        speeds, directions = beam_mod.sample_atoms(rng, scenario.beam, n_atoms)
        shifts = beam_mod.projected_velocities(speeds, directions, scenario.beam) \
            / transition.wavelength
        total = scenario.background_rate
        for iso in scenario.isotopes:
            mean_rho = 0.0
            for offset, weight in iso.line_components():
                delta_eff = excitation.detuning - offset - shifts
                rho = (s / 2.0) / (1.0 + s + (2.0 * delta_eff / transition.linewidth_gamma) ** 2)
                mean_rho += weight * float(rho.mean())
            total += (self.calibration_constant * iso.abundance
                      * self._uv_factor * mean_rho)
        return total


# ----------------------------------------------------------------------
# module-level conveniences mirroring the engine surface


def analytic_rate(scenario: LoadingScenario, laser_detuning: float,
                  iso: IsotopeRecord) -> float:
    """One-shot loading rate; builds a throwaway engine (prefer LoadingEngine
    for repeated evaluation)."""
    return float(LoadingEngine(scenario).rate(laser_detuning, iso))


def spectrum(scenario: LoadingScenario, detuning_grid) -> SpectrumResult:
    return LoadingEngine(scenario).spectrum(detuning_grid)


def rate_vs_power(scenario: LoadingScenario, powers,
                  iso: IsotopeRecord | None = None) -> np.ndarray:
    return LoadingEngine(scenario).rate_vs_power(powers, iso)


def simulate_trials(rng: np.random.Generator, scenario: LoadingScenario,
                    trial_duration: float, n_trials: int, **kwargs) -> RateEstimate:
    return LoadingEngine(scenario).simulate_trials(rng, trial_duration, n_trials,
                                                   **kwargs)


# ----------------------------------------------------------------------
# loading-technique comparison


@dataclass(frozen=True)
class SourceRate:
    """A constant-rate ion source: rate and one-sigma uncertainty, ions/s."""

    rate: float
    uncertainty: float

    def __post_init__(self):
        if self.rate < 0.0 or self.uncertainty < 0.0:
            raise ValueError("rates and uncertainties must be non-negative")


@dataclass(frozen=True)
class SourceTable:
    """Measured loading rates of the non-resonant sources and the
    photoionization reference point."""

    n2_laser_alone: SourceRate
    electron_beam: SourceRate
    uv_lamp: SourceRate
    photoionization: SourceRate
    pi_reference_power: float = 0.75e-3  # W


TABLE_OF_RATES = SourceTable(
    n2_laser_alone=SourceRate(0.005, 0.003),
    electron_beam=SourceRate(0.014, 0.006),
    uv_lamp=SourceRate(2.4, 0.3),
    photoionization=SourceRate(2.0, 0.1),
)


def efficiency_comparison(table: SourceTable, pi_power: float | None = None,
                          isotope_abundance: float = isotope(138).abundance
                          ) -> tuple[float, float, float]:
    """Relative efficiencies (e-beam : UV lamp : PI / abundance).

    The photoionization rate is scaled from the table's reference power by
    the square-root power law when ``pi_power`` differs from it, and divided
    by the target isotope's natural abundance, since only that fraction of
    the beam is addressed.
    """
    if table.electron_beam.rate <= 0.0:
        raise ValueError("electron-beam rate must be positive for a comparison")
    if isotope_abundance <= 0.0:
        raise ValueError("isotope abundance must be positive")
    scale = 1.0
    if pi_power is not None:
        if pi_power <= 0.0:
            raise ValueError("photoionization power must be positive")
        scale = math.sqrt(pi_power / table.pi_reference_power)
    reference = table.electron_beam.rate
    return (
        1.0,
        table.uv_lamp.rate / reference,
        table.photoionization.rate * scale / (reference * isotope_abundance),
    )
