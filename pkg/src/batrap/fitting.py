"""Nonlinear weighted least squares (Levenberg-Marquardt) and the model library.

The engine minimizes sum(((y_i - f(x_i; theta)) / sigma_i)^2) with analytic
Jacobians.  Damping is multiplicative on the diagonal of the normal matrix:
it grows when a step increases the cost and shrinks after an accepted step.
Convergence is declared when the relative cost decrease falls below 1e-10 or
the gradient infinity-norm falls below 1e-8 of its initial value; the
iteration cap (500) returns a result flagged as non-converged instead.

Models are small objects exposing ``parameter_names``, ``__call__(x, theta)``
and ``jacobian(x, theta)``; ``jacobian_check`` validates any analytic
Jacobian against central finite differences.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DataSeries",
    "FMDispersiveModel",
    "FitError",
    "FitResult",
    "FunctionModel",
    "GaussianModel",
    "PowerLawModel",
    "SqrtSaturationModel",
    "TwoGaussianModel",
    "fit",
    "jacobian_check",
    "model_fm_dispersive",
    "model_gaussian",
    "model_sqrt_saturation",
    "model_two_gaussian",
]

FOUR_LN2 = 4.0 * math.log(2.0)


class FitError(RuntimeError):
    """Raised when the normal equations are singular or structurally unsolvable."""


@dataclass(frozen=True)
class DataSeries:
    """One data set to fit: abscissae, ordinates and optional 1-sigma errors."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        if self.sigma is not None:
            object.__setattr__(self, "sigma", np.asarray(self.sigma, dtype=float))
        if self.x.ndim != 1 or self.x.shape != self.y.shape:
            raise ValueError("x and y must be one-dimensional and equally long")
        if self.sigma is not None:
            if self.sigma.shape != self.x.shape:
                raise ValueError("sigma must match x in length")
            if np.any(self.sigma <= 0.0):
                raise ValueError("sigma entries must be positive")
        if np.any(np.diff(self.x) <= 0.0):
            raise ValueError("x must be strictly increasing")

    @property
    def weights(self) -> np.ndarray:
        if self.sigma is None:
            return np.ones_like(self.x)
        return 1.0 / self.sigma


@dataclass(frozen=True)
class FitResult:
    """Fitted parameters with covariance and convergence diagnostics."""

    parameters: dict[str, float]
    covariance: np.ndarray
    residual_norm: float
    n_iterations: int
    converged: bool

    @property
    def parameter_errors(self) -> dict[str, float]:
        """One-sigma errors from the covariance diagonal."""
        diag = np.clip(np.diag(self.covariance), 0.0, None)
        return {name: math.sqrt(d)
                for name, d in zip(self.parameters, diag)}

    def to_json_dict(self) -> dict:
        return {
            "parameters": self.parameters,
            "errors": self.parameter_errors,
            "residual_norm": self.residual_norm,
            "n_iterations": self.n_iterations,
            "converged": self.converged,
        }


# ----------------------------------------------------------------------
# model library


def model_gaussian(x, amplitude, center, fwhm, offset):
    """Gaussian with offset, parametrized by its full width at half maximum."""
    x = np.asarray(x, dtype=float)
    return offset + amplitude * np.exp(-FOUR_LN2 * (x - center) ** 2 / fwhm**2)


def model_two_gaussian(x, a1, c1, a2, c2, fwhm, offset):
    """Sum of two Gaussians sharing one FWHM, plus offset."""
    return (model_gaussian(x, a1, c1, fwhm, 0.0)
            + model_gaussian(x, a2, c2, fwhm, 0.0) + offset)


def model_sqrt_saturation(power, r_sat, p_sat):
    """Square-root power law with a hard saturation kink at ``p_sat``."""
    power = np.asarray(power, dtype=float)
    return r_sat * np.minimum(np.sqrt(power / p_sat), 1.0)


def _dispersive(x, width):
    # derivative of the unit-height Lorentzian L = 1 / (1 + (2x/w)^2)
    q2 = (2.0 * x / width) ** 2
    return -8.0 * x / width**2 / (1.0 + q2) ** 2


def model_fm_dispersive(x, lines, width):
    """Superposition of dispersive (derivative-of-Lorentzian) features.

    ``lines`` is an iterable of (center, amplitude).  Each feature crosses
    zero at its center and peaks at center +- width / (2 sqrt(3)).
    """
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for center, amplitude in lines:
        out += amplitude * _dispersive(x - center, width)
    return out


class GaussianModel:
    parameter_names = ("amplitude", "center", "fwhm", "offset")

    def __call__(self, x, theta):
        return model_gaussian(x, *theta)

    def jacobian(self, x, theta):
        amplitude, center, fwhm, _ = theta
        x = np.asarray(x, dtype=float)
        u = x - center
        shape = np.exp(-FOUR_LN2 * u**2 / fwhm**2)
        jac = np.empty((x.size, 4))
        jac[:, 0] = shape
        jac[:, 1] = amplitude * shape * 2.0 * FOUR_LN2 * u / fwhm**2
        jac[:, 2] = amplitude * shape * 2.0 * FOUR_LN2 * u**2 / fwhm**3
        jac[:, 3] = 1.0
        return jac


class TwoGaussianModel:
    """Two Gaussians with a shared FWHM.  After fitting, ``ordered`` puts the
    lower-center peak first, resolving the labelling ambiguity."""

    parameter_names = ("a1", "c1", "a2", "c2", "fwhm", "offset")

    def __call__(self, x, theta):
        return model_two_gaussian(x, *theta)

    def jacobian(self, x, theta):
        a1, c1, a2, c2, fwhm, _ = theta
        x = np.asarray(x, dtype=float)
        u1 = x - c1
        u2 = x - c2
        s1 = np.exp(-FOUR_LN2 * u1**2 / fwhm**2)
        s2 = np.exp(-FOUR_LN2 * u2**2 / fwhm**2)
        jac = np.empty((x.size, 6))
        jac[:, 0] = s1
        jac[:, 1] = a1 * s1 * 2.0 * FOUR_LN2 * u1 / fwhm**2
        jac[:, 2] = s2
        jac[:, 3] = a2 * s2 * 2.0 * FOUR_LN2 * u2 / fwhm**2
        jac[:, 4] = (a1 * s1 * u1**2 + a2 * s2 * u2**2) * 2.0 * FOUR_LN2 / fwhm**3
        jac[:, 5] = 1.0
        return jac

    @staticmethod
    def ordered(result: FitResult) -> dict[str, float]:
        """Parameters with peaks sorted by center ascending."""
        p = dict(result.parameters)
        if p["c1"] > p["c2"]:
            p["a1"], p["a2"] = p["a2"], p["a1"]
            p["c1"], p["c2"] = p["c2"], p["c1"]
        return p


class SqrtSaturationModel:
    """r_sat min(sqrt(P / p_sat), 1).  With ``fixed_p_sat`` the kink power is
    held and only the saturated rate is fitted."""

    def __init__(self, fixed_p_sat: float | None = None):
        self.fixed_p_sat = fixed_p_sat
        self.parameter_names = ("r_sat",) if fixed_p_sat is not None else ("r_sat", "p_sat")

    def _p_sat(self, theta):
        return self.fixed_p_sat if self.fixed_p_sat is not None else theta[1]

    def __call__(self, x, theta):
        return model_sqrt_saturation(x, theta[0], self._p_sat(theta))

    def jacobian(self, x, theta):
        x = np.asarray(x, dtype=float)
        r_sat = theta[0]
        p_sat = self._p_sat(theta)
        root = np.minimum(np.sqrt(x / p_sat), 1.0)
        below = x < p_sat
        jac = np.empty((x.size, len(self.parameter_names)))
        jac[:, 0] = root
        if self.fixed_p_sat is None:
            jac[:, 1] = np.where(below, -0.5 * r_sat * root / p_sat, 0.0)
        return jac


class PowerLawModel:
    """amplitude * x**exponent for strictly positive x."""

    parameter_names = ("amplitude", "exponent")

    def __call__(self, x, theta):
        amplitude, exponent = theta
        return amplitude * np.asarray(x, dtype=float) ** exponent

    def jacobian(self, x, theta):
        amplitude, exponent = theta
        x = np.asarray(x, dtype=float)
        jac = np.empty((x.size, 2))
        jac[:, 0] = x**exponent
        jac[:, 1] = amplitude * x**exponent * np.log(x)
        return jac


class FMDispersiveModel:
    """``n_lines`` dispersive features with a shared width.

    Parameters are (c1, a1, ..., cn, an, width).
    """

    def __init__(self, n_lines: int):
        if n_lines < 1:
            raise ValueError("need at least one line")
        self.n_lines = n_lines
        names: list[str] = []
        for k in range(1, n_lines + 1):
            names += [f"c{k}", f"a{k}"]
        names.append("width")
        self.parameter_names = tuple(names)

    def __call__(self, x, theta):
        width = theta[-1]
        lines = [(theta[2 * k], theta[2 * k + 1]) for k in range(self.n_lines)]
        return model_fm_dispersive(x, lines, width)

    def jacobian(self, x, theta):
        x = np.asarray(x, dtype=float)
        width = theta[-1]
        jac = np.empty((x.size, 2 * self.n_lines + 1))
        dwidth = np.zeros_like(x)
        for k in range(self.n_lines):
            center, amplitude = theta[2 * k], theta[2 * k + 1]
            u = x - center
            q2 = (2.0 * u / width) ** 2
            denom = (1.0 + q2) ** 3
            jac[:, 2 * k] = amplitude * 8.0 / width**2 * (1.0 - 3.0 * q2) / denom
            jac[:, 2 * k + 1] = _dispersive(u, width)
            dwidth += amplitude * 16.0 * u / width**3 * (1.0 - q2) / denom
        jac[:, -1] = dwidth
        return jac


class FunctionModel:
    """Wrap plain callables f(x, theta) and jac(x, theta) as a model."""

    def __init__(self, func, jac, parameter_names):
        self._func = func
        self._jac = jac
        self.parameter_names = tuple(parameter_names)

    def __call__(self, x, theta):
        return self._func(x, theta)

    def jacobian(self, x, theta):
        return self._jac(x, theta)


# ----------------------------------------------------------------------
# engine

COST_TOLERANCE = 1e-10
GRADIENT_TOLERANCE = 1e-8
MAX_ITERATIONS = 500


def _theta0(model, initial_parameters) -> np.ndarray:
    names = model.parameter_names
    if isinstance(initial_parameters, dict):
        missing = set(names) - set(initial_parameters)
        if missing:
            raise ValueError(f"missing initial values for {sorted(missing)}")
        theta = np.array([float(initial_parameters[n]) for n in names])
    else:
        theta = np.asarray(initial_parameters, dtype=float)
        if theta.shape != (len(names),):
            raise ValueError(f"expected {len(names)} initial parameters, got {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("initial parameters must be finite")
    return theta


def fit(model, series: DataSeries, initial_parameters, *,
        max_iterations: int = MAX_ITERATIONS) -> FitResult:
    """Weighted Levenberg-Marquardt fit of ``model`` to ``series``.

    Raises ``FitError`` when the normal equations are singular (typically a
    parameter the data carries no information about).  Hitting the iteration
    cap returns ``converged=False`` rather than raising.
    """
    theta = _theta0(model, initial_parameters)
    n_params = theta.size
    if series.x.size < n_params + 1:
        raise ValueError("need at least one more data point than parameters")

    w = series.weights
    y = series.y

    def residuals(t):
        return (y - model(series.x, t)) * w

    r = residuals(theta)
    cost = float(r @ r)
    lam = 1e-3
    g_ref = None
    n_iter = 0
    converged = False

    for n_iter in range(1, max_iterations + 1):
        jac = model.jacobian(series.x, theta) * w[:, None]
        grad = jac.T @ r
        g_norm = float(np.max(np.abs(grad))) if grad.size else 0.0
        if g_ref is None:
            g_ref = g_norm
        if g_ref == 0.0 or g_norm <= GRADIENT_TOLERANCE * g_ref:
            converged = True
            break

        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        if np.any(diag <= 0.0):
            dead = model.parameter_names[int(np.argmin(diag))]
            raise FitError(f"singular normal equations: no sensitivity to {dead!r}")

        accepted = False
        for _ in range(60):
            try:
                step = np.linalg.solve(jtj + lam * np.diag(diag), grad)
            except np.linalg.LinAlgError:
                lam *= 10.0
                continue
            trial = theta + step
            r_trial = residuals(trial)
            cost_trial = float(r_trial @ r_trial)
            if np.isfinite(cost_trial) and cost_trial <= cost:
                decrease = (cost - cost_trial) / cost if cost > 0.0 else 0.0
                theta, r, cost = trial, r_trial, cost_trial
                lam = max(lam / 3.0, 1e-14)
                accepted = True
                if decrease < COST_TOLERANCE or cost == 0.0:
                    converged = True
                break
            lam *= 10.0
            if lam > 1e14:
                break
        if not accepted:
            # no downhill step found at any damping: stationary to precision
            converged = True
            break
        if converged:
            break

    jac = model.jacobian(series.x, theta) * w[:, None]
    covariance = _covariance(jac, cost, series, model.parameter_names)
    parameters = {name: float(v) for name, v in zip(model.parameter_names, theta)}
    return FitResult(parameters=parameters, covariance=covariance,
                     residual_norm=math.sqrt(cost), n_iterations=n_iter,
                     converged=converged)


def _covariance(jac: np.ndarray, cost: float, series: DataSeries,
                names) -> np.ndarray:
    jtj = jac.T @ jac
    try:
        inv = np.linalg.inv(jtj)
    except np.linalg.LinAlgError:
        inv = np.linalg.pinv(jtj)
    dof = max(series.x.size - len(names), 1)
    # with explicit sigma the weighted residuals are already unit-variance;
    # without, scale by the reduced chi-square
    scale = 1.0 if series.sigma is not None else cost / dof
    cov = inv * scale
    return 0.5 * (cov + cov.T)


def jacobian_check(model, theta, x_points, *, step_scale: float = 1e-6) -> float:
    """Largest column-relative deviation between the analytic Jacobian and
    central finite differences (step 1e-6 max(|theta_i|, 1))."""
    theta = np.asarray(theta, dtype=float)
    x = np.asarray(x_points, dtype=float)
    analytic = np.asarray(model.jacobian(x, theta), dtype=float)
    worst = 0.0
    for i in range(theta.size):
        h = step_scale * max(abs(theta[i]), 1.0)
        tp = theta.copy()
        tm = theta.copy()
        tp[i] += h
        tm[i] -= h
        fd = (np.asarray(model(x, tp), dtype=float)
              - np.asarray(model(x, tm), dtype=float)) / (2.0 * h)
        scale = max(np.max(np.abs(analytic[:, i])), np.max(np.abs(fd)), 1e-300)
        worst = max(worst, float(np.max(np.abs(analytic[:, i] - fd)) / scale))
    return worst
