import math
from dataclasses import replace

import numpy as np
import pytest
from scipy.integrate import quad

from batrap import beam, excitation as exc, loading
from batrap import constants as C

LAMBDA = C.TRANSITION_791.wavelength


def nominal_scenario(power=0.1e-3, isotopes=(138,), detuning=0.0,
                     density_samples=120_000, **overrides):
    params = dict(
        beam=beam.BeamConfig(oven_temperature=573.15, divergence_half_angle=0.3,
                             species_mass=C.isotope(138).atomic_mass),
        excitation=exc.ExcitationConfig(power=power, waist=100e-6,
                                        detuning=detuning),
        pi_step=exc.PIStepConfig(),
        isotopes=tuple(C.isotope(n) for n in isotopes),
        density_samples=density_samples,
    )
    params.update(overrides)
    return loading.LoadingScenario(**params)


@pytest.fixture(scope="module")
def even_engine():
    return loading.LoadingEngine(nominal_scenario(isotopes=(134, 136, 138)))


def test_closed_form_convolution_matches_adaptive_quadrature(even_engine):
    engine = even_engine
    transition = engine.scenario.excitation.transition
    density = engine.density
    lo, hi = density.support
    for power, delta in [(0.1e-3, 0.0), (0.1e-3, 60e6), (0.75e-3, -35e6)]:
        cfg = exc.ExcitationConfig(power=power, waist=100e-6)
        s = exc.saturation_parameter(exc.peak_intensity(cfg), transition)
        closed = float(engine._component_integral(np.array([delta]), s)[0])

        def integrand(v):
            rho = (s / 2.0) / (1.0 + s + (
                2.0 * (delta - v / LAMBDA) / transition.linewidth_gamma) ** 2)
            return density(v) * rho

        points = sorted({min(max(LAMBDA * delta, lo), hi), 0.0})
        reference, _ = quad(integrand, lo, hi, points=points, limit=800,
                            epsabs=0.0, epsrel=1e-10)
        assert closed == pytest.approx(reference, rel=2e-6)


def test_calibration_anchor_reproduced(even_engine):
    record = C.isotope(138)
    rate = even_engine.rate(record.line_center(), record, power=0.75e-3)
    assert rate == pytest.approx(2.0, rel=1e-9)


def test_zero_abundance_gives_background(even_engine):
    ghost = C.IsotopeRecord(mass_number=138, atomic_mass=C.isotope(138).atomic_mass,
                            abundance=0.0, shift_791=0.0)
    rate = even_engine.rate(0.0, ghost)
    assert rate == pytest.approx(even_engine.scenario.background_rate, rel=1e-12)


def test_zero_power_gives_background():
    engine = loading.LoadingEngine(nominal_scenario(power=0.0))
    record = C.isotope(138)
    assert engine.rate(0.0, record) == pytest.approx(
        engine.scenario.background_rate)


def test_rate_exceeds_background_everywhere(even_engine):
    record = C.isotope(138)
    grid = np.linspace(-400e6, 400e6, 41)
    rates = even_engine.rate(grid, record)
    assert np.all(rates >= even_engine.scenario.background_rate)
    assert np.all(rates[np.abs(grid) < 100e6]
                  > even_engine.scenario.background_rate)


def test_detuning_shift_invariance(even_engine):
    # shifting the laser and the line by the same amount leaves the rate fixed
    record = C.isotope(136)
    base = even_engine.rate(30e6, record)
    shifted_record = replace(record, shift_791=record.shift_791 + 75e6)
    shifted = even_engine.rate(30e6 + 75e6, shifted_record)
    assert shifted == pytest.approx(base, rel=1e-12)


def test_spectrum_structure_and_symmetry(even_engine):
    grid = np.arange(-180e6, 180e6 + 1, 3e6)
    result = even_engine.spectrum(grid)
    assert set(result.per_isotope) == {"134Ba", "136Ba", "138Ba"}
    # total = background + sum of excesses
    recomputed = result.background_rate + sum(
        rates - result.background_rate for rates in result.per_isotope.values())
    assert np.allclose(result.total, recomputed, rtol=1e-12)
    # single even isotope: symmetric line about its center
    line = result.per_isotope["138Ba"]
    assert np.allclose(line, line[::-1], rtol=0.02, atol=1e-4)
    peak_at = grid[np.argmax(line)]
    assert abs(peak_at - 0.0) <= 3e6


def test_spectrum_peak_ratios_follow_abundance(even_engine):
    grid = np.arange(-200e6, 320e6 + 1, 2e6)
    result = even_engine.spectrum(grid)
    bg = result.background_rate
    peaks = {label: rates.max() - bg for label, rates in result.per_isotope.items()}
    assert peaks["134Ba"] / peaks["138Ba"] == pytest.approx(0.02 / 0.72, rel=0.02)
    assert peaks["136Ba"] / peaks["138Ba"] == pytest.approx(0.08 / 0.72, rel=0.02)


def test_spectrum_width_in_band(even_engine):
    grid = np.arange(-200e6, 200e6 + 1, 2e6)
    line = even_engine.spectrum(grid).per_isotope["138Ba"]
    bg = even_engine.scenario.background_rate
    half = bg + 0.5 * (line.max() - bg)
    above = np.nonzero(line >= half)[0]
    fwhm = grid[above[-1]] - grid[above[0]]
    assert 80e6 < fwhm < 130e6


def test_spectrum_grid_validation(even_engine):
    with pytest.raises(ValueError):
        even_engine.spectrum([0.0, 1.0])
    with pytest.raises(ValueError):
        even_engine.spectrum([0.0, 2.0, 1.0])


def test_odd_isotope_peaks_separated_by_140_mhz():
    engine = loading.LoadingEngine(nominal_scenario(power=0.5e-3,
                                                    isotopes=(135, 137)))
    reference = C.isotope(137).line_center()
    grid = reference + np.arange(-320e6, 180e6 + 1, 2e6)
    total = engine.spectrum(grid).total
    bg = engine.scenario.background_rate
    # two local maxima near -140 MHz and 0 relative to the reference line
    rel = grid - reference
    left = total[(rel > -200e6) & (rel < -70e6)].max()
    right = total[(rel > -70e6) & (rel < 70e6)].max()
    left_at = rel[np.argmax(np.where((rel > -200e6) & (rel < -70e6), total, -1))]
    right_at = rel[np.argmax(np.where((rel > -70e6) & (rel < 70e6), total, -1))]
    assert abs((right_at - left_at) - 140e6) < 15e6
    assert (right - bg) / (left - bg) == pytest.approx(1.7, rel=0.1)


def test_rate_vs_power_monotone(even_engine):
    powers = np.geomspace(0.05e-3, 1.0e-3, 12)
    rates = even_engine.rate_vs_power(powers)
    assert np.all(np.diff(rates) > 0.0)


def test_rate_vs_power_sqrt_exponent(even_engine):
    powers = np.geomspace(0.05e-3, 1.0e-3, 20)
    excess = even_engine.rate_vs_power(powers) - even_engine.scenario.background_rate
    slope = np.polyfit(np.log(powers), np.log(excess), 1)[0]
    assert slope == pytest.approx(0.5, abs=0.05)


def test_saturation_power_and_extrapolation(even_engine):
    p_sat = even_engine.saturation_power()
    assert 13.6e-3 < p_sat < 20.4e-3
    r_sat = 2.0 * math.sqrt(p_sat / 0.75e-3)
    assert 8.9 < r_sat < 10.9


def test_rate_vs_power_rejects_nonpositive(even_engine):
    with pytest.raises(ValueError):
        even_engine.rate_vs_power([0.0, 1e-3])


def test_simulate_trials_poisson_counts():
    engine = loading.LoadingEngine(nominal_scenario(power=0.75e-3,
                                                    detuning=0.0))
    # configured detuning on the 138 line at the anchor power: 2.0 ions/s
    rng = np.random.default_rng(42)
    estimate = engine.simulate_trials(rng, trial_duration=5.0, n_trials=10)
    assert estimate.total_time == 50.0
    assert estimate.rate == estimate.total_ions / 50.0
    assert estimate.uncertainty == math.sqrt(estimate.total_ions) / 50.0
    assert 60 < estimate.total_ions < 140  # mean 100


def test_simulate_trials_zero_rate():
    scenario = nominal_scenario(power=0.0, background_rate=0.0,
                                calibration_rate=2.0)
    engine = loading.LoadingEngine(scenario)
    estimate = engine.simulate_trials(np.random.default_rng(1), 5.0, 10)
    assert estimate.total_ions == 0
    assert estimate.rate == 0.0


def test_uncertainty_shrinks_with_time():
    # doubling total time at fixed rate shrinks the error by sqrt(2)
    a = loading.RateEstimate(total_ions=100, total_time=50.0)
    b = loading.RateEstimate(total_ions=200, total_time=100.0)
    assert b.uncertainty == pytest.approx(a.uncertainty / math.sqrt(2.0))
    assert a.rate == b.rate


def test_poisson_variance_matches_mean():
    engine = loading.LoadingEngine(nominal_scenario(power=0.75e-3))
    rng = np.random.default_rng(7)
    duration = 5.0
    counts = np.array([engine.simulate_trials(rng, duration, 1).total_ions
                       for _ in range(2000)])
    assert np.var(counts) == pytest.approx(np.mean(counts), rel=0.1)


def test_atom_mode_converges_to_analytic():
    engine = loading.LoadingEngine(nominal_scenario(power=0.75e-3))
    analytic = engine.operating_rate()
    failures = 0
    for seed in range(10):
        rng = np.random.default_rng(seed)
        est = engine.simulate_trials(rng, trial_duration=50.0, n_trials=200,
                                     mode="atoms", atom_samples=4096)
        stderr = max(est.uncertainty, 1e-9)
        if abs(est.rate - analytic) > 3.0 * stderr:
            failures += 1
    assert failures <= 1


def test_simulate_trials_validation():
    engine = loading.LoadingEngine(nominal_scenario())
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        engine.simulate_trials(rng, 0.0, 10)
    with pytest.raises(ValueError):
        engine.simulate_trials(rng, 1.0, 0)
    with pytest.raises(ValueError):
        engine.simulate_trials(rng, 1.0, 1, mode="bogus")


def test_module_level_wrappers_agree():
    scenario = nominal_scenario(density_samples=60_000)
    record = C.isotope(138)
    direct = loading.analytic_rate(scenario, 12e6, record)
    engine = loading.LoadingEngine(scenario)
    assert direct == pytest.approx(float(engine.rate(12e6, record)), rel=1e-12)


def test_efficiency_comparison_table_defaults():
    ratios = loading.efficiency_comparison(loading.TABLE_OF_RATES,
                                           isotope_abundance=0.717)
    assert ratios[0] == 1.0
    assert ratios[1] == pytest.approx(171.4, rel=0.01)
    assert ratios[2] == pytest.approx(199.2, rel=0.01)
    # within 25% of the 1 : 160 : 185 reference
    assert ratios[1] == pytest.approx(160.0, rel=0.25)
    assert ratios[2] == pytest.approx(185.0, rel=0.25)


def test_efficiency_comparison_edge_cases():
    equal = loading.SourceTable(
        n2_laser_alone=loading.SourceRate(0.0, 0.0),
        electron_beam=loading.SourceRate(1.0, 0.1),
        uv_lamp=loading.SourceRate(1.0, 0.1),
        photoionization=loading.SourceRate(1.0, 0.1))
    assert loading.efficiency_comparison(equal, isotope_abundance=1.0) == (
        1.0, 1.0, 1.0)
    dark_lamp = replace(equal, uv_lamp=loading.SourceRate(0.0, 0.0))
    assert loading.efficiency_comparison(dark_lamp, isotope_abundance=1.0)[1] == 0.0
    dead_beam = replace(equal, electron_beam=loading.SourceRate(0.0, 0.0))
    with pytest.raises(ValueError):
        loading.efficiency_comparison(dead_beam, isotope_abundance=1.0)


def test_efficiency_power_rescaling():
    ratios = loading.efficiency_comparison(loading.TABLE_OF_RATES,
                                           pi_power=3.0e-3,
                                           isotope_abundance=0.72)
    base = loading.efficiency_comparison(loading.TABLE_OF_RATES,
                                         isotope_abundance=0.72)
    assert ratios[2] == pytest.approx(base[2] * 2.0, rel=1e-12)


def test_scenario_validation():
    with pytest.raises(ValueError):
        nominal_scenario(background_rate=-0.1)
    with pytest.raises(ValueError):
        nominal_scenario(calibration_rate=0.004, background_rate=0.005)


def test_density_seed_pins_engine():
    a = loading.LoadingEngine(nominal_scenario(density_samples=30_000))
    b = loading.LoadingEngine(nominal_scenario(density_samples=30_000))
    assert np.array_equal(a.density.values, b.density.values)
    record = C.isotope(138)
    assert float(a.rate(17e6, record)) == float(b.rate(17e6, record))
