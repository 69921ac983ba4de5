import math

import numpy as np
import pytest

from batrap import constants as C
from batrap import trap

M138 = C.isotope(138).atomic_mass
QE = C.ELEMENTARY_CHARGE


def nominal(**overrides):
    params = dict(rod_radius=0.4e-3, rod_square_side=1.85e-3, rf_frequency=6.6e6,
                  rf_voltage_rms=50.0, endcap_voltage=7.0, endcap_separation=1e-2)
    params.update(overrides)
    return trap.TrapConfig(**params)


def test_radial_extent_geometry():
    # r0 = side * sqrt(2)/2 - rod radius = 0.908 mm for the nominal electrodes
    assert nominal().radial_extent == pytest.approx(0.908e-3, abs=1e-6)


def test_mathieu_q_uncalibrated_value():
    # independent arithmetic: q = 2 Q sqrt(2) Vrms / (m Omega^2 r0^2)
    cfg = nominal()
    omega = 2.0 * math.pi * 6.6e6
    expected = (2.0 * QE * math.sqrt(2.0) * 50.0
                / (M138 * omega**2 * cfg.radial_extent**2))
    a, q = trap.mathieu_parameters(cfg)
    assert q == pytest.approx(expected, rel=1e-12)
    assert q == pytest.approx(0.07, abs=0.002)
    assert a < 0.0


def test_mathieu_q_linear_in_voltage():
    _, q1 = trap.mathieu_parameters(nominal())
    _, q2 = trap.mathieu_parameters(nominal(rf_voltage_rms=100.0))
    assert q2 == pytest.approx(2.0 * q1, rel=1e-12)
    _, q0 = trap.mathieu_parameters(nominal(rf_voltage_rms=0.0))
    assert q0 == 0.0


def test_secular_frequency_axial_formula():
    cfg = nominal(kappa_axial=7.0, kappa_radial=4.0)
    freqs = trap.secular_frequencies(cfg)
    expected = math.sqrt(2.0 * 7.0 * QE * 7.0 / (M138 * (0.5e-2) ** 2)) / (2 * math.pi)
    assert freqs.axial == pytest.approx(expected, rel=1e-12)


def test_axial_frequency_vanishes_without_endcaps():
    freqs = trap.secular_frequencies(nominal(endcap_voltage=0.0, kappa_radial=4.0))
    assert freqs.axial == 0.0


def test_axial_sqrt_voltage_scaling():
    base = trap.secular_frequencies(nominal(kappa_radial=4.0, kappa_axial=7.0))
    quad = trap.secular_frequencies(nominal(kappa_radial=4.0, kappa_axial=7.0,
                                            endcap_voltage=28.0))
    assert quad.axial == pytest.approx(2.0 * base.axial, rel=1e-9)


def test_radial_linear_in_voltage_without_endcaps():
    base = trap.secular_frequencies(nominal(endcap_voltage=0.0, kappa_radial=4.0))
    double = trap.secular_frequencies(nominal(endcap_voltage=0.0, kappa_radial=4.0,
                                              rf_voltage_rms=100.0))
    assert double.radial == pytest.approx(2.0 * base.radial, rel=1e-9)


def test_mass_covariance_of_radial_frequency():
    light = trap.secular_frequencies(nominal(endcap_voltage=0.0, kappa_radial=4.0))
    heavy = trap.secular_frequencies(nominal(endcap_voltage=0.0, kappa_radial=4.0,
                                             ion_mass=4.0 * M138))
    assert heavy.radial == pytest.approx(light.radial / 2.0, rel=1e-9)


def test_calibration_hits_targets_exactly():
    calibrated = trap.calibrate_geometry(nominal(), 626e3, 272e3)
    freqs = trap.secular_frequencies(calibrated)
    assert abs(freqs.radial - 626e3) / 626e3 < 1e-9
    assert abs(freqs.axial - 272e3) / 272e3 < 1e-9
    assert 0.0 < calibrated.kappa_radial < 10.0
    assert 0.0 < calibrated.kappa_axial < 10.0
    assert abs(freqs.mathieu_q) < trap.Q_STABILITY_LIMIT


def test_calibration_fixed_point():
    cfg = nominal(kappa_radial=4.0, kappa_axial=7.0)
    freqs = trap.secular_frequencies(cfg)
    recal = trap.calibrate_geometry(cfg, freqs.radial, freqs.axial)
    assert recal.kappa_radial == pytest.approx(cfg.kappa_radial, rel=1e-12)
    assert recal.kappa_axial == pytest.approx(cfg.kappa_axial, rel=1e-12)


def test_calibration_rejects_unstable_targets():
    with pytest.raises(trap.TrapStabilityError):
        trap.calibrate_geometry(nominal(), 3e6, 272e3)


def test_unstable_q_rejected():
    with pytest.raises(trap.TrapStabilityError):
        trap.secular_frequencies(nominal(kappa_radial=15.0))


def test_axial_overwhelms_radial_rejected():
    with pytest.raises(trap.TrapStabilityError):
        trap.secular_frequencies(nominal(kappa_radial=0.5, kappa_axial=9.0,
                                         endcap_voltage=400.0))


def chain_force_residual(solution: trap.ChainSolution, mass: float,
                         charge: float) -> float:
    """Independent force balance check, element-by-element."""
    omega = 2.0 * math.pi * solution.axial_frequency
    k = C.COULOMB_CONSTANT * charge**2
    worst = 0.0
    z = solution.positions
    for i in range(solution.n_ions):
        force = -mass * omega**2 * z[i]
        for j in range(solution.n_ions):
            if j == i:
                continue
            force += k * np.sign(z[i] - z[j]) / (z[i] - z[j]) ** 2
        worst = max(worst, abs(force))
    return worst / (mass * omega**2 * max(np.max(np.abs(z)), 1e-30))


def test_two_ion_spacing_closed_form():
    sol = trap.chain_equilibrium(2, 272e3, M138)
    spacing = sol.positions[1] - sol.positions[0]
    assert spacing / sol.length_scale == pytest.approx(2.0 ** (1.0 / 3.0), rel=1e-8)


def test_three_ion_spacing_closed_form():
    sol = trap.chain_equilibrium(3, 272e3, M138)
    gaps = sol.spacings()
    assert gaps[0] == pytest.approx(gaps[1], rel=1e-10)
    assert gaps[0] / sol.length_scale == pytest.approx(
        (5.0 / 4.0) ** (1.0 / 3.0), rel=1e-8)
    assert sol.positions[1] == pytest.approx(0.0, abs=1e-12 * sol.length_scale)


def test_chain_antisymmetry_and_centroid():
    sol = trap.chain_equilibrium(30, 272e3, M138)
    z = sol.positions
    assert np.allclose(z, -z[::-1], atol=1e-10 * sol.length_scale)
    assert abs(np.mean(z)) < 1e-10 * sol.length_scale


def test_chain_force_residuals():
    for n in (2, 5, 30):
        sol = trap.chain_equilibrium(n, 272e3, M138)
        assert chain_force_residual(sol, M138, QE) < 1e-11


def test_central_spacing_decreases_with_n():
    spacings = [trap.chain_equilibrium(n, 272e3, M138).central_spacing()
                for n in (2, 5, 10, 20, 40)]
    assert all(a > b for a, b in zip(spacings, spacings[1:]))


def test_positions_scale_as_omega_to_minus_two_thirds():
    slow = trap.chain_equilibrium(12, 100e3, M138)
    fast = trap.chain_equilibrium(12, 800e3, M138)
    expected = 8.0 ** (-2.0 / 3.0)
    ratio = fast.positions / slow.positions
    assert np.allclose(ratio, expected, rtol=1e-6)


def test_axial_frequency_for_spacing_round_trips():
    nu = trap.axial_frequency_for_spacing(30, 12e-6, M138)
    sol = trap.chain_equilibrium(30, nu, M138)
    assert sol.central_spacing() == pytest.approx(12e-6, rel=1e-9)
    # the 12 um spacing of a 30-ion chain needs far weaker confinement
    # than the measured 272 kHz of the loading configuration
    assert nu < 50e3


def test_chain_bounds():
    with pytest.raises(ValueError):
        trap.chain_equilibrium(0, 272e3, M138)
    with pytest.raises(ValueError):
        trap.chain_equilibrium(101, 272e3, M138)
    with pytest.raises(ValueError):
        trap.chain_equilibrium(5, -1.0, M138)


def test_single_ion_sits_at_center():
    sol = trap.chain_equilibrium(1, 272e3, M138)
    assert sol.positions[0] == 0.0
