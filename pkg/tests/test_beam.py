import math

import numpy as np
import pytest

from batrap import beam
from batrap import constants as C

LAMBDA = C.TRANSITION_791.wavelength


def nominal(**overrides):
    params = dict(oven_temperature=573.0, divergence_half_angle=0.3,
                  species_mass=C.isotope(138).atomic_mass)
    params.update(overrides)
    return beam.BeamConfig(**params)


def test_config_invariants():
    with pytest.raises(ValueError):
        nominal(oven_temperature=-5.0)
    with pytest.raises(ValueError):
        nominal(divergence_half_angle=0.0)
    with pytest.raises(ValueError):
        nominal(divergence_half_angle=2.0)


def test_most_probable_speed_reference_point():
    # 573 K, 138Ba: within 1% of the 320 m/s reference value
    v = beam.most_probable_speed(nominal())
    assert v == pytest.approx(320.0, rel=0.01)


def test_most_probable_speed_sqrt_t_scaling():
    v1 = beam.most_probable_speed(nominal())
    v2 = beam.most_probable_speed(nominal(oven_temperature=4 * 573.0))
    assert v2 == pytest.approx(2.0 * v1, rel=1e-12)


def test_most_probable_speed_other_isotope():
    # direct hand evaluation of sqrt(3 k T / m) for 135Ba
    m = C.isotope(135).atomic_mass
    expected = math.sqrt(3.0 * C.BOLTZMANN * 573.0 / m)
    cfg = nominal(species_mass=m)
    assert beam.most_probable_speed(cfg) == pytest.approx(expected, rel=1e-12)
    assert expected == pytest.approx(325.5, abs=0.1)


def test_speed_samples_match_mode():
    rng = np.random.default_rng(101)
    speeds, _ = beam.sample_atoms(rng, nominal(), 1_000_000)
    hist, edges = np.histogram(speeds, bins=200)
    mode = 0.5 * (edges[np.argmax(hist)] + edges[np.argmax(hist) + 1])
    assert mode == pytest.approx(beam.most_probable_speed(nominal()), rel=0.02)


def test_directions_are_unit_and_on_cone():
    rng = np.random.default_rng(7)
    cfg = nominal()
    _, directions = beam.sample_atoms(rng, cfg, 5000)
    norms = np.linalg.norm(directions, axis=1)
    assert np.allclose(norms, 1.0, atol=1e-12)
    # mean of cos(polar angle) equals the cone value cos(theta_t) exactly
    assert np.allclose(directions[:, 2], math.cos(cfg.transverse_angle))


def test_degenerate_cone_all_axial():
    rng = np.random.default_rng(7)
    cfg = nominal(divergence_half_angle=1e-9)
    _, directions = beam.sample_atoms(rng, cfg, 100)
    assert np.allclose(directions[:, 2], 1.0, atol=1e-12)


def test_doppler_fwhm_nominal_band():
    rng = np.random.default_rng(2024)
    fwhm = beam.doppler_fwhm(rng, nominal(), LAMBDA, 1_000_000)
    assert 80e6 < fwhm < 130e6
    # centred on the reference 102 MHz estimate
    assert fwhm == pytest.approx(102e6, rel=0.05)


def test_doppler_fwhm_rejects_small_samples():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        beam.doppler_fwhm(rng, nominal(), LAMBDA, 999)


def test_doppler_fwhm_linear_in_divergence():
    f_full = beam.doppler_fwhm(np.random.default_rng(5), nominal(), LAMBDA, 400_000)
    f_half = beam.doppler_fwhm(np.random.default_rng(5),
                               nominal(divergence_half_angle=0.15), LAMBDA, 400_000)
    assert f_half == pytest.approx(0.5 * f_full, rel=0.03)


def test_doppler_fwhm_sqrt_t_scaling():
    f_cold = beam.doppler_fwhm(np.random.default_rng(6), nominal(), LAMBDA, 400_000)
    f_hot = beam.doppler_fwhm(np.random.default_rng(6),
                              nominal(oven_temperature=4 * 573.0), LAMBDA, 400_000)
    assert f_hot == pytest.approx(2.0 * f_cold, rel=0.03)


def test_doppler_fwhm_vanishes_with_divergence():
    fwhm = beam.doppler_fwhm(np.random.default_rng(8),
                             nominal(divergence_half_angle=1e-4), LAMBDA, 50_000)
    assert fwhm < 0.1e6


def test_shift_distribution_symmetric_for_perpendicular_probe():
    rng = np.random.default_rng(9)
    shifts = beam.doppler_shifts(rng, nominal(), LAMBDA, 1_000_000)
    scale = np.std(shifts)
    skew = np.mean((shifts / scale) ** 3)
    assert abs(np.mean(shifts)) < 0.005 * scale
    assert abs(skew) < 0.01


def test_oblique_probe_shifts_centroid():
    rng = np.random.default_rng(10)
    cfg = nominal(probe_angle=math.radians(60.0))
    shifts = beam.doppler_shifts(rng, cfg, LAMBDA, 200_000)
    # longitudinal component leaks in: centroid near v_mean cos(60)/lambda
    assert np.mean(shifts) > 50e6


def test_identical_seeds_identical_streams():
    a = beam.doppler_shifts(np.random.default_rng(33), nominal(), LAMBDA, 10_000)
    b = beam.doppler_shifts(np.random.default_rng(33), nominal(), LAMBDA, 10_000)
    assert np.array_equal(a, b)


def test_sample_atom_single():
    speed, direction = beam.sample_atom(np.random.default_rng(0), nominal())
    assert speed > 0.0
    assert direction.shape == (3,)


def test_polyline_density_normalized_and_fwhm():
    rng = np.random.default_rng(11)
    samples = rng.normal(0.0, 10.0, size=500_000)
    density = beam.PolylineDensity.from_samples(samples, bin_width=0.5)
    grid = np.linspace(density.knots[0], density.knots[-1], 20_001)
    integral = np.trapezoid(density(grid), grid)
    assert integral == pytest.approx(1.0, rel=1e-3)
    # FWHM of a Gaussian is 2 sqrt(2 ln 2) sigma
    assert density.fwhm() == pytest.approx(2.3548 * 10.0, rel=0.02)


def test_transverse_velocity_density_rejects_small_samples():
    with pytest.raises(ValueError):
        beam.transverse_velocity_density(np.random.default_rng(1), nominal(),
                                         999, 1.0)
