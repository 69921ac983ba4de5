"""batrap: simulator and analysis toolkit for isotope-selective
photoionization loading of barium ion traps.

Subpackages by concern:

  constants    isotope registry, transition and UV-pulse data
  beam         effusive-beam speeds, divergence geometry, Doppler widths
  excitation   two-level steady state and per-pulse ionization probability
  loading      analytic/Monte Carlo loading-rate engines, Poisson counting
  trap         Mathieu parameters, secular frequencies, chain equilibria
  fitting      Levenberg-Marquardt engine and line-shape model library
  config       scenario files (INI, unit-suffixed keys)
  scenarios    deterministic figure/table reproduction pipelines
  cli          command-line front end
"""

from .beam import BeamConfig, doppler_fwhm, most_probable_speed, sample_atom
from .constants import (
    IonizationStep,
    IsotopeRecord,
    TransitionData,
    excess_ionization_energy,
    isotope,
    registry,
)
from .excitation import (
    ExcitationConfig,
    PIStepConfig,
    excited_fraction,
    peak_intensity,
    pi_probability_per_pulse,
    rabi_rate,
    saturation_parameter,
)
from .fitting import (
    DataSeries,
    FitResult,
    fit,
    jacobian_check,
    model_fm_dispersive,
    model_gaussian,
    model_sqrt_saturation,
    model_two_gaussian,
)
from .loading import (
    LoadingEngine,
    LoadingScenario,
    RateEstimate,
    SourceTable,
    analytic_rate,
    efficiency_comparison,
    rate_vs_power,
    simulate_trials,
    spectrum,
)
from .trap import (
    ChainSolution,
    SecularFrequencies,
    TrapConfig,
    calibrate_geometry,
    chain_equilibrium,
    mathieu_parameters,
    secular_frequencies,
)

__version__ = "0.1.0"
