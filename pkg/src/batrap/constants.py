"""Physical constants and barium atomic data used throughout the package.

Holds the stable-isotope registry (masses, natural abundances, offsets of the
1S0 -> 3P1 intercombination line at 791 nm relative to 138Ba, and the
hyperfine components of the odd isotopes), the 791 nm transition parameters,
and the pulsed-UV ionization step parameters.

All quantities are SI.  Fundamental constants come from ``scipy.constants``.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

from scipy.constants import atomic_mass, c as SPEED_OF_LIGHT, e as ELEMENTARY_CHARGE
from scipy.constants import epsilon_0 as VACUUM_PERMITTIVITY, h as PLANCK
from scipy.constants import k as BOLTZMANN

__all__ = [
    "BOLTZMANN",
    "COULOMB_CONSTANT",
    "ELEMENTARY_CHARGE",
    "HyperfineComponent",
    "IonizationStep",
    "IsotopeRecord",
    "NITROGEN_LASER_STEP",
    "PLANCK",
    "SPEED_OF_LIGHT",
    "TRANSITION_791",
    "TransitionData",
    "excess_ionization_energy",
    "isotope",
    "registry",
    "registry_to_json",
]

COULOMB_CONSTANT = 1.0 / (4.0 * 3.141592653589793 * VACUUM_PERMITTIVITY)

# statistical weights 2F+1 of the 3P1 hyperfine levels for nuclear spin 3/2
_F_DEGENERACY = {"1/2": 2, "3/2": 4, "5/2": 6}


@dataclass(frozen=True)
class HyperfineComponent:
    """One hyperfine component of the 791 nm line of an odd isotope.

    ``offset`` is relative to the 138Ba line, in Hz.  ``degeneracy`` is the
    statistical weight 2F+1 used when distributing line strength over the
    components.
    """

    f_label: str
    offset: float
    degeneracy: int

    def __post_init__(self):
        if self.f_label not in _F_DEGENERACY:
            raise ValueError(f"unsupported F label {self.f_label!r}")
        if self.degeneracy != _F_DEGENERACY[self.f_label]:
            raise ValueError(f"degeneracy inconsistent with F={self.f_label}")


@dataclass(frozen=True)
class IsotopeRecord:
    """Mass, abundance and 791 nm line data for one barium isotope.

    ``shift_791`` is the isotope shift of the 1S0 -> 3P1 line relative to
    138Ba in Hz (0 for 138Ba itself).  Odd isotopes carry three hyperfine
    components; even isotopes carry none.
    """

    mass_number: int
    atomic_mass: float  # kg
    abundance: float  # fraction of natural barium, in [0, 1]
    shift_791: float  # Hz
    hyperfine_components: tuple[HyperfineComponent, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not 0.0 <= self.abundance <= 1.0:
            raise ValueError("abundance must lie in [0, 1]")
        if self.atomic_mass <= 0.0:
            raise ValueError("atomic mass must be positive")
        n_hf = len(self.hyperfine_components)
        if self.mass_number % 2 == 0 and n_hf != 0:
            raise ValueError("even isotopes carry no hyperfine structure")
        if self.mass_number % 2 == 1 and n_hf != 3:
            raise ValueError("odd isotopes carry exactly three hyperfine components")

    @property
    def label(self) -> str:
        return f"{self.mass_number}Ba"

    def line_components(self) -> tuple[tuple[float, float], ...]:
        """Offsets and relative weights of the isotope's 791 nm components.

        Even isotopes have a single component of weight 1 at ``shift_791``.
        Odd-isotope components are weighted by (2F+1) / sum(2F'+1).
        """
        if not self.hyperfine_components:
            return ((self.shift_791, 1.0),)
        total = sum(hf.degeneracy for hf in self.hyperfine_components)
        return tuple((hf.offset, hf.degeneracy / total) for hf in self.hyperfine_components)

    def line_center(self) -> float:
        """Offset of the strongest 791 nm component (Hz relative to 138Ba)."""
        components = self.line_components()
        return max(components, key=lambda cw: cw[1])[0]


@dataclass(frozen=True)
class TransitionData:
    """Optical transition parameters: wavelength (m), linewidth Gamma/2pi (Hz),
    saturation intensity (W/m^2)."""

    wavelength: float
    linewidth_gamma: float
    saturation_intensity: float

    def __post_init__(self):
        for name in ("wavelength", "linewidth_gamma", "saturation_intensity"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass(frozen=True)
class IonizationStep:
    """Pulsed-laser parameters of the ionizing (second) excitation step.

    The pulse wavelength must lie below the threshold wavelength, otherwise
    the photon cannot reach the continuum from the intermediate state.
    """

    pulse_energy: float  # J
    pulse_width: float  # s
    rep_rate: float  # Hz
    waist: float  # m
    wavelength: float  # m
    threshold_wavelength: float  # m

    def __post_init__(self):
        for name in ("pulse_energy", "pulse_width", "rep_rate", "waist", "wavelength",
                     "threshold_wavelength"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")
        if self.wavelength >= self.threshold_wavelength:
            raise ValueError(
                "pulse wavelength must be below the ionization threshold wavelength "
                f"({self.wavelength} >= {self.threshold_wavelength}): no ionization possible"
            )


# 1S0 -> 3P1 intercombination line.  Saturation intensity 0.014 mW/cm^2,
# linewidth Gamma/2pi = 50 kHz.
TRANSITION_791 = TransitionData(
    wavelength=791.1e-9,
    linewidth_gamma=50e3,
    saturation_intensity=0.14,  # W/m^2
)

# Pulsed nitrogen laser driving 3P1 -> continuum: 170 uJ, 3.5 ns, 20 Hz,
# 900 um waist at 337.1 nm against a 340.1 nm threshold.
NITROGEN_LASER_STEP = IonizationStep(
    pulse_energy=170e-6,
    pulse_width=3.5e-9,
    rep_rate=20.0,
    waist=900e-6,
    wavelength=337.1e-9,
    threshold_wavelength=340.1e-9,
)


def _hf(f_label: str, offset: float) -> HyperfineComponent:
    return HyperfineComponent(f_label=f_label, offset=offset,
                              degeneracy=_F_DEGENERACY[f_label])


# Registry of the stable isotopes with natural abundance above 1%.
# Even-isotope abundances follow the rounded natural fractions (2%, 8%, 72%);
# the odd isotopes carry the standard values whose ratio is 1:1.7.
# Odd-isotope hyperfine offsets place the F=5/2 pair near +1.8 GHz split by
# exactly 140 MHz, F=3/2 near -0.8 GHz and F=1/2 near -2.7 GHz.
_REGISTRY: tuple[IsotopeRecord, ...] = (
    IsotopeRecord(
        mass_number=134,
        atomic_mass=133.904508 * atomic_mass,
        abundance=0.020,
        shift_791=122e6,
    ),
    IsotopeRecord(
        mass_number=135,
        atomic_mass=134.905688 * atomic_mass,
        abundance=0.066,
        # centre of gravity of the hyperfine components below
        shift_791=(6 * 1.800e9 + 4 * -0.800e9 + 2 * -2.580e9) / 12,
        hyperfine_components=(
            _hf("5/2", 1.800e9),
            _hf("3/2", -0.800e9),
            _hf("1/2", -2.580e9),
        ),
    ),
    IsotopeRecord(
        mass_number=136,
        atomic_mass=135.904576 * atomic_mass,
        abundance=0.080,
        shift_791=109e6,
    ),
    IsotopeRecord(
        mass_number=137,
        atomic_mass=136.905827 * atomic_mass,
        abundance=0.112,
        shift_791=(6 * 1.940e9 + 4 * -0.930e9 + 2 * -2.700e9) / 12,
        hyperfine_components=(
            _hf("5/2", 1.940e9),
            _hf("3/2", -0.930e9),
            _hf("1/2", -2.700e9),
        ),
    ),
    IsotopeRecord(
        mass_number=138,
        atomic_mass=137.905247 * atomic_mass,
        abundance=0.720,
        shift_791=0.0,
    ),
)


def registry() -> tuple[IsotopeRecord, ...]:
    """All registered barium isotopes, ordered by mass number.

    Pure: repeated calls return the same immutable records.  Trace isotopes
    (below 1% abundance) are omitted, so abundances sum to slightly less
    than one.
    """
    return _REGISTRY


def isotope(mass_number: int) -> IsotopeRecord:
    """Look up one isotope record by mass number."""
    for record in _REGISTRY:
        if record.mass_number == mass_number:
            return record
    raise KeyError(f"no registered barium isotope with mass number {mass_number}")


def excess_ionization_energy(step: IonizationStep) -> float:
    """Photon energy above the ionization threshold, h c (1/lambda - 1/lambda_th), in J."""
    hc = PLANCK * SPEED_OF_LIGHT
    return hc * (1.0 / step.wavelength - 1.0 / step.threshold_wavelength)


def registry_to_json(indent: int | None = 2) -> str:
    """Serialize the registry as JSON (used by the CLI registry dump).

    Float fields are emitted with full ``repr`` precision, so Hz offsets
    survive a round trip exactly.
    """
    records = [asdict(record) for record in _REGISTRY]
    return json.dumps({"isotopes": records}, indent=indent, sort_keys=True)
