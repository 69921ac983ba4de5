"""Linear Paul-trap secular motion and Coulomb-crystal chain equilibria.

Standard lowest-order pseudopotential treatment of a four-rod linear trap.
With drive frequency Omega = 2 pi f_rf, RF amplitude V = sqrt(2) V_rms and
effective radial distance r0 = (rod square side) sqrt(2)/2 - rod radius:

    q = 2 kappa_r Q V / (m Omega^2 r0^2)
    a = -4 kappa_a Q U_end / (m Omega^2 z0^2)        (z0 = endcap gap / 2)
    omega_r = (Omega / 2) sqrt(q^2 / 2 + a)
    omega_a = sqrt(2 kappa_a Q U_end / (m z0^2))

The dimensionless geometric factors kappa are calibration parameters: the
measured secular frequencies of a real trap are not reproduced by the ideal
quadrupole formulas with the nominal electrode geometry, and
``calibrate_geometry`` solves for the kappas that match given targets.

Chain equilibria minimize the axial harmonic-plus-Coulomb potential.  In
units of the length scale l = (k_e Q^2 / (m omega^2))^(1/3) the equilibrium
positions are universal per ion number; they are found by a damped Newton
iteration on the force balance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .constants import COULOMB_CONSTANT, ELEMENTARY_CHARGE, isotope

__all__ = [
    "ChainConvergenceError",
    "ChainSolution",
    "SecularFrequencies",
    "TrapConfig",
    "TrapStabilityError",
    "axial_frequency_for_spacing",
    "calibrate_geometry",
    "chain_equilibrium",
    "mathieu_parameters",
    "secular_frequencies",
]

Q_STABILITY_LIMIT = 0.908

CHAIN_FORCE_TOLERANCE = 1e-12
CHAIN_MAX_ITERATIONS = 10_000


class TrapStabilityError(ValueError):
    """Operating point outside the lowest Mathieu stability region."""


class ChainConvergenceError(RuntimeError):
    """Chain equilibrium iteration failed to reach the force tolerance."""


@dataclass(frozen=True)
class TrapConfig:
    """Electrode geometry, drive and ion of a four-rod linear trap."""

    rod_radius: float  # m
    rod_square_side: float  # m, side of the square through the rod centers
    rf_frequency: float  # Hz
    rf_voltage_rms: float  # V
    endcap_voltage: float  # V
    endcap_separation: float  # m
    kappa_radial: float = 1.0
    kappa_axial: float = 1.0
    ion_mass: float = isotope(138).atomic_mass
    ion_charge: float = ELEMENTARY_CHARGE

    def __post_init__(self):
        for name in ("rod_radius", "rod_square_side", "rf_frequency",
                     "endcap_separation", "ion_mass", "ion_charge"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def radial_extent(self) -> float:
        """Center-to-rod-surface distance r0, m."""
        return self.rod_square_side * math.sqrt(2.0) / 2.0 - self.rod_radius

    @property
    def axial_extent(self) -> float:
        """Center-to-endcap distance z0, m."""
        return self.endcap_separation / 2.0


@dataclass(frozen=True)
class SecularFrequencies:
    """Secular frequencies (Hz, not angular) and the Mathieu parameters."""

    radial: float
    axial: float
    mathieu_q: float
    mathieu_a: float


@dataclass(frozen=True)
class ChainSolution:
    """Axial equilibrium positions (m, ascending) of a laser-cooled chain."""

    positions: np.ndarray
    axial_frequency: float  # Hz
    n_ions: int
    length_scale: float  # m, the Coulomb length l

    def spacings(self) -> np.ndarray:
        return np.diff(self.positions)

    def central_spacing(self) -> float:
        """Distance between the two middlemost ions, m."""
        gaps = self.spacings()
        return float(gaps[(self.n_ions - 1) // 2])


def mathieu_parameters(cfg: TrapConfig) -> tuple[float, float]:
    """Mathieu (a, q) of the radial motion for the configured drive."""
    omega_drive = 2.0 * math.pi * cfg.rf_frequency
    v_amp = math.sqrt(2.0) * cfg.rf_voltage_rms
    q = (2.0 * cfg.kappa_radial * cfg.ion_charge * v_amp
         / (cfg.ion_mass * omega_drive**2 * cfg.radial_extent**2))
    a = (-4.0 * cfg.kappa_axial * cfg.ion_charge * cfg.endcap_voltage
         / (cfg.ion_mass * omega_drive**2 * cfg.axial_extent**2))
    return a, q


def secular_frequencies(cfg: TrapConfig) -> SecularFrequencies:
    """Radial and axial secular frequencies in the pseudopotential approximation.

    Raises ``TrapStabilityError`` when (a, q) leaves the lowest stability
    region (|q| >= 0.908 or radial anti-confinement).
    """
    a, q = mathieu_parameters(cfg)
    if abs(q) >= Q_STABILITY_LIMIT:
        raise TrapStabilityError(
            f"outside stability region: |q| = {abs(q):.3f} >= {Q_STABILITY_LIMIT}")
    beta_sq = q**2 / 2.0 + a
    if beta_sq <= 0.0:
        raise TrapStabilityError(
            "outside stability region: axial potential overwhelms radial confinement")
    omega_drive = 2.0 * math.pi * cfg.rf_frequency
    radial = (omega_drive / 2.0) * math.sqrt(beta_sq) / (2.0 * math.pi)
    axial_sq = (2.0 * cfg.kappa_axial * cfg.ion_charge * cfg.endcap_voltage
                / (cfg.ion_mass * cfg.axial_extent**2))
    axial = math.sqrt(max(axial_sq, 0.0)) / (2.0 * math.pi)
    return SecularFrequencies(radial=radial, axial=axial, mathieu_q=q, mathieu_a=a)


def calibrate_geometry(cfg: TrapConfig, target_radial: float,
                       target_axial: float) -> TrapConfig:
    """Config with kappas solved so the secular frequencies hit the targets.

    The axial kappa follows directly from the axial formula; the radial
    kappa from the q needed to produce the target radial frequency given
    that axial confinement.  Raises ``TrapStabilityError`` when no stable
    solution exists (required q beyond the stability limit).
    """
    if target_radial <= 0.0 or target_axial <= 0.0:
        raise ValueError("target frequencies must be positive")
    if cfg.endcap_voltage <= 0.0:
        raise ValueError("endcap voltage must be positive to confine axially")
    omega_a = 2.0 * math.pi * target_axial
    kappa_axial = (cfg.ion_mass * cfg.axial_extent**2 * omega_a**2
                   / (2.0 * cfg.ion_charge * cfg.endcap_voltage))
    omega_r = 2.0 * math.pi * target_radial
    omega_drive = 2.0 * math.pi * cfg.rf_frequency
    # omega_r^2 = (Omega/2)^2 (q^2/2 + a) with a = -2 omega_a^2 / Omega^2
    q_needed = math.sqrt(2.0 * (4.0 * omega_r**2 / omega_drive**2
                                + 2.0 * omega_a**2 / omega_drive**2))
    if q_needed >= Q_STABILITY_LIMIT:
        raise TrapStabilityError(
            f"targets require q = {q_needed:.3f} beyond the stability limit")
    v_amp = math.sqrt(2.0) * cfg.rf_voltage_rms
    kappa_radial = (q_needed * cfg.ion_mass * omega_drive**2 * cfg.radial_extent**2
                    / (2.0 * cfg.ion_charge * v_amp))
    return replace(cfg, kappa_radial=kappa_radial, kappa_axial=kappa_axial)


# ----------------------------------------------------------------------
# chain equilibria


def _dimensionless_chain(n_ions: int) -> np.ndarray:
    """Equilibrium positions in units of the Coulomb length, ascending."""
    if n_ions == 1:
        return np.zeros(1)
    # initial guess: uniform spacing at the empirical minimum-spacing law,
    # slightly stretched so the outer ions start outside their equilibrium
    spacing = 2.018 / n_ions**0.559
    u = (np.arange(n_ions) - (n_ions - 1) / 2.0) * (1.3 * spacing)

    idx = np.arange(n_ions)
    for _ in range(CHAIN_MAX_ITERATIONS):
        diff = u[:, None] - u[None, :]
        np.fill_diagonal(diff, np.inf)
        inv2 = np.sign(diff) / diff**2
        grad = u - inv2.sum(axis=1)  # negative of the net force
        scale = max(1.0, float(np.max(np.abs(u))))
        if float(np.max(np.abs(grad))) < CHAIN_FORCE_TOLERANCE * scale:
            return u
        inv3 = 2.0 / np.abs(diff) ** 3
        hess = -inv3
        hess[idx, idx] = 1.0 + inv3.sum(axis=1)
        step = np.linalg.solve(hess, grad)
        # backtracking keeps the iteration ordered and monotone in |grad|
        g0 = float(np.max(np.abs(grad)))
        alpha = 1.0
        for _ in range(60):
            trial = u - alpha * step
            if np.all(np.diff(trial) > 0.0):
                diff_t = trial[:, None] - trial[None, :]
                np.fill_diagonal(diff_t, np.inf)
                grad_t = trial - (np.sign(diff_t) / diff_t**2).sum(axis=1)
                if float(np.max(np.abs(grad_t))) < g0:
                    break
            alpha *= 0.5
        u = u - alpha * step
    raise ChainConvergenceError(
        f"chain equilibrium did not converge for {n_ions} ions")


def coulomb_length(axial_frequency: float, mass: float, charge: float) -> float:
    """Length scale l = (k_e Q^2 / (m omega^2))^(1/3), m."""
    omega = 2.0 * math.pi * axial_frequency
    return (COULOMB_CONSTANT * charge**2 / (mass * omega**2)) ** (1.0 / 3.0)


def chain_equilibrium(n_ions: int, axial_frequency: float, mass: float,
                      charge: float = ELEMENTARY_CHARGE) -> ChainSolution:
    """Equilibrium positions of ``n_ions`` identical ions on the trap axis.

    Valid for 1 <= n_ions <= 100.  Positions are antisymmetric about the
    origin to solver precision and scale exactly as omega^(-2/3).
    """
    if not 1 <= n_ions <= 100:
        raise ValueError("ion number must lie in [1, 100]")
    if axial_frequency <= 0.0:
        raise ValueError("axial frequency must be positive")
    scale = coulomb_length(axial_frequency, mass, charge)
    u = _dimensionless_chain(n_ions)
    return ChainSolution(positions=u * scale, axial_frequency=axial_frequency,
                         n_ions=n_ions, length_scale=scale)


def axial_frequency_for_spacing(n_ions: int, central_spacing: float, mass: float,
                                charge: float = ELEMENTARY_CHARGE) -> float:
    """Axial frequency (Hz) at which an ``n_ions`` chain shows the given
    central spacing (m).

    Inverts the omega^(-2/3) scaling of the universal dimensionless chain,
    reporting the confinement implied by an observed spacing.
    """
    if central_spacing <= 0.0:
        raise ValueError("central spacing must be positive")
    u = _dimensionless_chain(n_ions)
    gaps = np.diff(u)
    d_u = float(gaps[(n_ions - 1) // 2])
    scale = central_spacing / d_u
    omega = math.sqrt(COULOMB_CONSTANT * charge**2 / (mass * scale**3))
    return omega / (2.0 * math.pi)
