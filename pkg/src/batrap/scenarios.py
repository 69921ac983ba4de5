"""Named simulation scenarios: deterministic data products plus fit summaries.

Each scenario function takes a parsed configuration and a seed and returns a
``ScenarioResult`` holding file contents (CSV/JSON text keyed by file name)
and a JSON-ready summary dictionary.  Scenarios never touch the filesystem;
the CLI writes the files.  All randomness flows through labelled substreams
of the single seed, so a (scenario, config, seed) triple fully determines
every output byte.

Available scenarios:

  fig3        synthetic saturation-spectroscopy error signals of the 791 nm
              lines in a vapor cell (dispersive features, zero crossings at
              the line offsets)
  fig4        even-isotope loading-rate spectra with per-isotope Gaussian
              fits, peak ratios and widths
  fig5        odd-isotope loading spectrum (hyperfine F=5/2 pair) with a
              two-Gaussian fit: separation and amplitude ratio
  fig6        loading rate versus 791 nm power: power-law exponent,
              saturation power and extrapolated saturated rate
  table1      loading-technique rate table and relative efficiencies
  fig2-chain  ion-chain equilibria reproducing observed central spacings,
              with the axial frequencies they imply
  doppler     Monte Carlo Doppler-broadening estimate for the beam geometry
  trap-freqs  trap calibration: kappas, Mathieu parameters, secular
              frequencies
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import beam as beam_mod
from . import fitting
from . import loading as loading_mod
from . import trap as trap_mod
from .config import ScenarioConfig
from .constants import isotope, registry
from .seeding import substream

__all__ = ["SCENARIO_NAMES", "ScenarioResult", "run"]


@dataclass
class ScenarioResult:
    files: dict[str, str] = field(default_factory=dict)
    summary: dict = field(default_factory=dict)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(value) for value in row))
    return "\n".join(lines) + "\n"


def _cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _base_summary(name: str, config: ScenarioConfig, seed: int) -> dict:
    return {"scenario": name, "seed": seed, "config_digest": config.digest}


def _finish(result: ScenarioResult, name: str, config: ScenarioConfig, seed: int,
            payload: dict) -> ScenarioResult:
    summary = _base_summary(name, config, seed)
    summary.update(payload)
    result.summary = summary
    result.files["summary.json"] = json.dumps(summary, sort_keys=True, indent=2) + "\n"
    return result


# ----------------------------------------------------------------------


def run_fig3(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Vapor-cell error-signal synthesis over the full isotope manifold."""
    width = config["run"]["fm_width_mhz"]
    lines = []
    for record in registry():
        for offset, weight in record.line_components():
            lines.append((offset, record.abundance * weight, record.label))
    lines.sort()
    grid = np.arange(-3.0e9, 2.4e9 + 1.0, 2e6)
    signal = fitting.model_fm_dispersive(grid, [(c, a) for c, a, _ in lines], width)

    crossings = _zero_crossings(grid, signal)
    matched = []
    for center, amplitude, label in lines:
        nearest = min(crossings, key=lambda x: abs(x - center)) if crossings else None
        matched.append({
            "isotope": label,
            "offset_hz": center,
            "amplitude": amplitude,
            "nearest_zero_crossing_hz": nearest,
        })

    result = ScenarioResult()
    result.files["fig3_signal.csv"] = _csv(
        ["detuning_hz", "signal"], zip(grid.tolist(), signal.tolist()))
    return _finish(result, "fig3", config, seed, {
        "feature_width_hz": width,
        "lines": matched,
    })


def _zero_crossings(x: np.ndarray, y: np.ndarray) -> list[float]:
    sign_flip = np.nonzero(np.diff(np.sign(y)) != 0)[0]
    crossings = []
    for i in sign_flip:
        x0, x1 = x[i], x[i + 1]
        y0, y1 = y[i], y[i + 1]
        crossings.append(float(x0 - y0 * (x1 - x0) / (y1 - y0)))
    return crossings


# ----------------------------------------------------------------------


def _noisy(rng: np.random.Generator, clean: np.ndarray, fraction: float) -> np.ndarray:
    scale = fraction * float(clean.max() - clean.min())
    if scale <= 0.0:
        return clean.copy()
    return clean + rng.normal(0.0, scale, size=clean.shape)


def _fit_gaussian(grid: np.ndarray, data: np.ndarray, center_guess: float
                  ) -> fitting.FitResult:
    model = fitting.GaussianModel()
    amp = float(data.max() - data.min())
    series = fitting.DataSeries(grid, data)
    return fitting.fit(model, series, {
        "amplitude": amp, "center": center_guess, "fwhm": 80e6,
        "offset": float(data.min()),
    })


def run_fig4(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Even-isotope loading spectra at the scan power, with Gaussian fits."""
    evens = tuple(isotope(n) for n in (134, 136, 138))
    scenario = config.loading_scenario(isotopes=evens)
    engine = loading_mod.LoadingEngine(
        scenario, rng=substream(seed, "beam-density"))
    step = config["run"]["grid_step_mhz"]
    grid = np.arange(-200e6, 320e6 + step / 2, step)
    clean = engine.spectrum(grid)
    noise_rng = substream(seed, "fig4-noise")
    fraction = config["run"]["noise_fraction"]

    rows = []
    fits = {}
    for record in evens:
        data = _noisy(noise_rng, clean.per_isotope[record.label], fraction)
        fit_result = _fit_gaussian(grid, data, record.shift_791)
        fits[record.label] = fit_result
        rows += [(d, record.label, r) for d, r in zip(grid.tolist(), data.tolist())]
    rows += [(d, "total", r) for d, r in zip(grid.tolist(), clean.total.tolist())]

    amplitudes = {label: fits[label].parameters["amplitude"] for label in fits}
    summary_fits = {
        label: {
            "amplitude": fits[label].parameters["amplitude"],
            "center_hz": fits[label].parameters["center"],
            "fwhm_hz": fits[label].parameters["fwhm"],
            "offset": fits[label].parameters["offset"],
            "converged": fits[label].converged,
        }
        for label in fits
    }
    result = ScenarioResult()
    result.files["fig4_data.csv"] = _csv(
        ["detuning_hz", "isotope", "rate_ions_per_s"], rows)
    model_rows = []
    for record in evens:
        model_rows += [(d, record.label, r) for d, r in
                       zip(grid.tolist(), clean.per_isotope[record.label].tolist())]
    result.files["fig4_model.csv"] = _csv(
        ["detuning_hz", "isotope", "rate_ions_per_s"], model_rows)
    return _finish(result, "fig4", config, seed, {
        "power_w": scenario.excitation.power,
        "fits": summary_fits,
        "peak_ratio_134_to_138": amplitudes["134Ba"] / amplitudes["138Ba"],
        "peak_ratio_136_to_138": amplitudes["136Ba"] / amplitudes["138Ba"],
        "doppler_fwhm_hz": engine.doppler_fwhm(),
    })


def run_fig5(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Odd-isotope spectrum around the F=5/2 pair, relative to the 137Ba line."""
    odds = (isotope(135), isotope(137))
    scenario = config.loading_scenario(isotopes=odds, power=0.5e-3)
    engine = loading_mod.LoadingEngine(
        scenario, rng=substream(seed, "beam-density"))
    reference = isotope(137).line_center()
    step = config["run"]["grid_step_mhz"]
    rel_grid = np.arange(-320e6, 180e6 + step / 2, step)
    clean = engine.spectrum(rel_grid + reference)
    data = _noisy(substream(seed, "fig5-noise"), clean.total,
                  config["run"]["noise_fraction"])

    model = fitting.TwoGaussianModel()
    amp = float(data.max() - data.min())
    series = fitting.DataSeries(rel_grid, data)
    fit_result = fitting.fit(model, series, {
        "a1": 0.6 * amp, "c1": -120e6, "a2": amp, "c2": 10e6,
        "fwhm": 90e6, "offset": float(data.min()),
    })
    ordered = fitting.TwoGaussianModel.ordered(fit_result)

    result = ScenarioResult()
    result.files["fig5_data.csv"] = _csv(
        ["detuning_hz", "isotope", "rate_ions_per_s"],
        [(d, "odd", r) for d, r in zip(rel_grid.tolist(), data.tolist())])
    result.files["fig5_model.csv"] = _csv(
        ["detuning_hz", "isotope", "rate_ions_per_s"],
        [(d, "odd", r) for d, r in zip(rel_grid.tolist(), clean.total.tolist())])
    return _finish(result, "fig5", config, seed, {
        "power_w": scenario.excitation.power,
        "reference_line_hz": reference,
        "fit": {k: ordered[k] for k in sorted(ordered)},
        "separation_hz": ordered["c2"] - ordered["c1"],
        "amplitude_ratio": ordered["a2"] / ordered["a1"],
        "converged": fit_result.converged,
    })


def run_fig6(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Rate versus power: exponent fit and saturation extrapolation.

    The saturation power is where the power-broadened linewidth equals the
    beam's Doppler width; the saturated rate extrapolates the square-root
    law out to that power.
    """
    record = isotope(138)
    scenario = config.loading_scenario(isotopes=(record,))
    engine = loading_mod.LoadingEngine(
        scenario, rng=substream(seed, "beam-density"))
    run_cfg = config["run"]
    powers = np.geomspace(run_cfg["power_min_mw"], run_cfg["power_max_mw"],
                          run_cfg["power_points"])
    rates = engine.rate_vs_power(powers, record)
    excess = rates - scenario.background_rate

    power_fit = fitting.fit(
        fitting.PowerLawModel(),
        fitting.DataSeries(powers, excess, sigma=0.05 * excess),
        {"amplitude": float(excess[-1] / np.sqrt(powers[-1])), "exponent": 0.5})

    p_sat = engine.saturation_power()
    sat_model = fitting.SqrtSaturationModel(fixed_p_sat=p_sat)
    sat_fit = fitting.fit(
        sat_model,
        fitting.DataSeries(powers, excess, sigma=0.05 * excess),
        {"r_sat": float(excess[-1] * np.sqrt(p_sat / powers[-1]))})

    result = ScenarioResult()
    result.files["fig6_rates.csv"] = _csv(
        ["power_w", "isotope", "rate_ions_per_s"],
        [(p, record.label, r) for p, r in zip(powers.tolist(), rates.tolist())])
    return _finish(result, "fig6", config, seed, {
        "exponent": power_fit.parameters["exponent"],
        "exponent_error": power_fit.parameter_errors["exponent"],
        "saturation_power_w": p_sat,
        "saturation_rate_ions_per_s": sat_fit.parameters["r_sat"],
        "doppler_fwhm_hz": engine.doppler_fwhm(),
        "anchor_rate_ions_per_s": scenario.calibration_rate,
        "anchor_power_w": scenario.calibration_power,
    })


def run_table1(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Loading-technique comparison: rates table and relative efficiencies."""
    table = config.source_table()
    record = isotope(138)
    scenario = config.loading_scenario(isotopes=(record,))
    engine = loading_mod.LoadingEngine(
        scenario, rng=substream(seed, "beam-density"))
    pi_rate = float(engine.rate(record.line_center(), record,
                                power=scenario.calibration_power))
    p_sat = engine.saturation_power()
    pi_max = table.photoionization.rate * np.sqrt(p_sat / table.pi_reference_power)
    ratios = loading_mod.efficiency_comparison(table,
                                               isotope_abundance=record.abundance)

    rows = [
        ("n2_laser_alone", table.n2_laser_alone.rate, table.n2_laser_alone.uncertainty),
        ("e_beam", table.electron_beam.rate, table.electron_beam.uncertainty),
        ("uv_lamp", table.uv_lamp.rate, table.uv_lamp.uncertainty),
        ("pi_reference", table.photoionization.rate, table.photoionization.uncertainty),
        ("pi_model_at_reference", pi_rate, 0.0),
        ("pi_max_theory", float(pi_max), 0.0),
    ]
    result = ScenarioResult()
    result.files["table1_rates.csv"] = _csv(
        ["technique", "rate_ions_per_s", "uncertainty_ions_per_s"], rows)
    return _finish(result, "table1", config, seed, {
        "efficiency_e_beam": ratios[0],
        "efficiency_uv_lamp": ratios[1],
        "efficiency_pi_per_abundance": ratios[2],
        "pi_model_at_reference_ions_per_s": pi_rate,
        "pi_max_theory_ions_per_s": float(pi_max),
        "saturation_power_w": p_sat,
    })


def run_fig2_chain(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Chains reproducing the observed central spacings, with implied nu_a."""
    trap_cfg = config.trap_config()
    run_cfg = config["run"]
    ion_counts = [int(n) for n in run_cfg["chain_ions"]]
    spacings = [float(s) * 1e-6 for s in run_cfg["chain_spacings_um"]]
    if len(ion_counts) != len(spacings):
        raise ValueError("chain_ions and chain_spacings_um must pair up")

    result = ScenarioResult()
    chains = []
    for n_ions, spacing in zip(ion_counts, spacings):
        nu_a = trap_mod.axial_frequency_for_spacing(
            n_ions, spacing, trap_cfg.ion_mass, trap_cfg.ion_charge)
        solution = trap_mod.chain_equilibrium(
            n_ions, nu_a, trap_cfg.ion_mass, trap_cfg.ion_charge)
        result.files[f"fig2_chain_{n_ions}.csv"] = _csv(
            ["index", "position_m"],
            list(enumerate(solution.positions.tolist())))
        chains.append({
            "n_ions": n_ions,
            "target_central_spacing_m": spacing,
            "central_spacing_m": solution.central_spacing(),
            "implied_axial_frequency_hz": nu_a,
            "length_scale_m": solution.length_scale,
        })
    return _finish(result, "fig2-chain", config, seed, {"chains": chains})


def run_doppler(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Monte Carlo Doppler-broadening estimate for the configured beam."""
    beam_config = config.beam_config()
    n_samples = config["run"]["doppler_samples"]
    rng = substream(seed, "doppler-mc")
    fwhm = beam_mod.doppler_fwhm(rng, beam_config,
                                 config.excitation_config().transition.wavelength,
                                 n_samples)
    return _finish(ScenarioResult(), "doppler", config, seed, {
        "doppler_fwhm_hz": fwhm,
        "n_samples": n_samples,
        "most_probable_speed_m_per_s": beam_mod.most_probable_speed(beam_config),
        "divergence_rad": beam_config.divergence_half_angle,
    })


def run_trap_freqs(config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Calibrate the trap kappas against the target secular frequencies."""
    trap_cfg = config.trap_config()
    calibrated = trap_mod.calibrate_geometry(
        trap_cfg, config["trap"]["target_radial_khz"],
        config["trap"]["target_axial_khz"])
    freqs = trap_mod.secular_frequencies(calibrated)
    return _finish(ScenarioResult(), "trap-freqs", config, seed, {
        "kappa_radial": calibrated.kappa_radial,
        "kappa_axial": calibrated.kappa_axial,
        "radial_hz": freqs.radial,
        "axial_hz": freqs.axial,
        "mathieu_q": freqs.mathieu_q,
        "mathieu_a": freqs.mathieu_a,
    })


_SCENARIOS = {
    "fig3": run_fig3,
    "fig4": run_fig4,
    "fig5": run_fig5,
    "fig6": run_fig6,
    "table1": run_table1,
    "fig2-chain": run_fig2_chain,
    "doppler": run_doppler,
    "trap-freqs": run_trap_freqs,
}

SCENARIO_NAMES = tuple(_SCENARIOS)


def run(name: str, config: ScenarioConfig, seed: int) -> ScenarioResult:
    """Run one named scenario; raises KeyError for unknown names."""
    try:
        runner = _SCENARIOS[name]
    except KeyError:
        raise KeyError(f"unknown scenario {name!r}; choose from {SCENARIO_NAMES}")
    return runner(config, seed)
