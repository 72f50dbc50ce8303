"""Colored-noise correlation kernels and the running pump rate.

Three stationary kernels are supported, each normalised so that
``integral_0^inf S(tau) dtau = omega / 2``:

* ``OU`` (exponential):   S = omega / (2 tau_c) * exp(-tau / tau_c)
* ``SE`` (Gaussian):      S = omega / (sqrt(pi) tau_c) * exp(-(tau / tau_c)**2)
* ``PL`` (power law):     S = (alpha - 1) omega / (2 tau_c) * (tau / tau_c + 1)**(-alpha)

The pump rate is ``eta(t) = 2 int_0^t S(tau) cos(dw tau) dtau`` and the
level-shift coefficient ``shift(t) = int_0^t S(tau) sin(dw tau) dtau``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import NamedTuple

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.special import erfc

from ._numerics import gauss_legendre, golden_section
from .errors import ConvergenceError, DomainError, ParameterError, PreconditionError

SHAPES = ("OU", "SE", "PL")

# Simpson step must resolve both the correlation time and the detuning period.
STEP_DIVISOR = 50
_EPS_DETUNING = 1e-12


@dataclass(frozen=True)
class NoiseKernel:
    """Stationary correlation function ``S(tau)`` of the injected noise."""

    shape: str
    omega: float
    tau_c: float
    alpha: float = 3.0

    def __post_init__(self):
        shape = str(self.shape).upper()
        object.__setattr__(self, "shape", shape)
        if shape not in SHAPES:
            raise ParameterError(f"unknown kernel shape {self.shape!r}; expected one of {SHAPES}")
        if not (self.omega >= 0.0 and math.isfinite(self.omega)):
            raise ParameterError(f"noise amplitude omega must be >= 0, got {self.omega}")
        if not (self.tau_c > 0.0 and math.isfinite(self.tau_c)):
            raise ParameterError(f"correlation time tau_c must be > 0, got {self.tau_c}")
        if shape == "PL" and not self.alpha > 2.0:
            raise ParameterError(f"power-law exponent alpha must be > 2, got {self.alpha}")

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        x = tau / self.tau_c
        if self.shape == "OU":
            out = self.omega / (2.0 * self.tau_c) * np.exp(-x)
        elif self.shape == "SE":
            out = self.omega / (math.sqrt(math.pi) * self.tau_c) * np.exp(-(x * x))
        else:
            a = self.alpha
            out = 0.5 * (a - 1.0) * self.omega / self.tau_c * (x + 1.0) ** (-a)
        return out if out.ndim else float(out)

    def derivative(self, tau):
        """``dS/dtau``; used for remainder bounds of oscillatory tails."""
        tau = np.asarray(tau, dtype=float)
        x = tau / self.tau_c
        if self.shape == "OU":
            out = -self(tau) / self.tau_c
        elif self.shape == "SE":
            out = -2.0 * x / self.tau_c * self(tau)
        else:
            out = -self.alpha / (self.tau_c * (x + 1.0)) * self(tau)
        return out if np.ndim(out) else float(out)

    def tail_area(self, t):
        """Analytic ``int_t^inf S(tau) dtau``."""
        t = np.asarray(t, dtype=float)
        x = t / self.tau_c
        if self.shape == "OU":
            out = 0.5 * self.omega * np.exp(-x)
        elif self.shape == "SE":
            out = 0.5 * self.omega * erfc(x)
        else:
            out = 0.5 * self.omega * (x + 1.0) ** (1.0 - self.alpha)
        return out if out.ndim else float(out)

    def oscillation_bound(self, t, detuning):
        """Upper bound on ``|int_t^T S(tau) cos(dw tau + c) dtau|`` for any ``T > t``.

        Integration by parts gives ``2 S(t) / |dw|`` for nonincreasing ``S``;
        the plain tail area is always a bound as well.
        """
        tail = self.tail_area(t)
        if abs(detuning) <= _EPS_DETUNING:
            return tail
        return np.minimum(tail, 2.0 * np.asarray(self(t)) / abs(detuning))

    @property
    def short_time_slope(self):
        """``d eta / dt`` at ``t = 0``, i.e. ``2 S(0)``."""
        return 2.0 * self(0.0)

    def with_amplitude(self, omega):
        return replace(self, omega=float(omega))

    def to_dict(self):
        d = {"shape": self.shape, "omega": self.omega, "tau_c": self.tau_c}
        if self.shape == "PL":
            d["alpha"] = self.alpha
        return d


def kernel_eval(kernel: NoiseKernel, tau):
    """Evaluate ``S(tau)``; negative lags are rejected."""
    if np.any(np.asarray(tau) < 0.0):
        raise DomainError("kernel lag tau must be >= 0")
    return kernel(tau)


def max_step(kernel: NoiseKernel, detuning: float, divisor: float = STEP_DIVISOR) -> float:
    period = 2.0 * math.pi / max(abs(detuning), _EPS_DETUNING)
    return min(kernel.tau_c, period) / divisor


@dataclass(frozen=True, eq=False)
class EtaCurve:
    """Pump rate and shift coefficient tabulated on a uniform grid."""

    kernel: NoiseKernel
    detuning: float
    t: np.ndarray
    eta: np.ndarray
    shift: np.ndarray

    @property
    def h(self) -> float:
        return float(self.t[1] - self.t[0])

    @property
    def t_max(self) -> float:
        return float(self.t[-1])

    def eta_rate(self, t):
        """Exact time derivative ``2 S(t) cos(dw t)``."""
        return 2.0 * np.asarray(self.kernel(t)) * np.cos(self.detuning * np.asarray(t))

    def shift_rate(self, t):
        return np.asarray(self.kernel(t)) * np.sin(self.detuning * np.asarray(t))

    @cached_property
    def _eta_spline(self):
        return CubicHermiteSpline(self.t, self.eta, self.eta_rate(self.t))

    @cached_property
    def _shift_spline(self):
        return CubicHermiteSpline(self.t, self.shift, self.shift_rate(self.t))

    def _check_range(self, t):
        t = np.asarray(t, dtype=float)
        tol = 1e-9 * max(1.0, self.t_max)
        if np.any(t < -tol) or np.any(t > self.t_max + tol):
            raise DomainError(f"time outside tabulated range [0, {self.t_max}]")
        return t

    def at(self, t):
        """Cubic Hermite interpolation of ``eta`` (exact derivatives at the nodes)."""
        t = self._check_range(t)
        out = self._eta_spline(t)
        return out if np.ndim(out) else float(out)

    def shift_at(self, t):
        t = self._check_range(t)
        out = self._shift_spline(t)
        return out if np.ndim(out) else float(out)

    def eta_exact(self, t: float) -> float:
        """``eta(t)`` from the nearest node below plus a local Gauss-Legendre panel."""
        t = float(self._check_range(t))
        i = min(int(t / self.h), len(self.t) - 1)
        return float(self.eta[i]) + gauss_legendre(self.eta_rate, float(self.t[i]), t)


def eta_curve(kernel: NoiseKernel, detuning: float, t_max: float, h: float | None = None) -> EtaCurve:
    """Tabulate ``eta`` and ``shift`` on ``[0, t_max]``.

    Each grid interval is integrated with Simpson's rule (using the interval
    midpoint) and the panel sums are accumulated, so all nodes cost one pass
    and the error is O(h**4).
    """
    if not t_max > 0.0:
        raise ParameterError(f"t_max must be > 0, got {t_max}")
    bound = max_step(kernel, detuning)
    if h is None:
        h = bound / 5.0
    if not h > 0.0:
        raise ParameterError(f"step h must be > 0, got {h}")
    if h > bound * (1.0 + 1e-12):
        raise PreconditionError(
            f"step h={h:g} too coarse: need h <= min(tau_c, 2*pi/|dw|)/{STEP_DIVISOR} = {bound:g}"
        )
    n = max(1, int(math.ceil(t_max / h - 1e-9)))
    t = np.linspace(0.0, t_max, n + 1)
    hh = t_max / n
    mid = t[:-1] + 0.5 * hh
    s_nodes, s_mid = kernel(t), kernel(mid)
    c_nodes, c_mid = np.cos(detuning * t), np.cos(detuning * mid)
    sn_nodes, sn_mid = np.sin(detuning * t), np.sin(detuning * mid)

    def cumulative(f_nodes, f_mid):
        panels = hh / 6.0 * (f_nodes[:-1] + 4.0 * f_mid + f_nodes[1:])
        return np.concatenate(([0.0], np.cumsum(panels)))

    eta = cumulative(2.0 * s_nodes * c_nodes, 2.0 * s_mid * c_mid)
    shift = cumulative(s_nodes * sn_nodes, s_mid * sn_mid)
    return EtaCurve(kernel=kernel, detuning=float(detuning), t=t, eta=eta, shift=shift)


def eta_ou_closed_form(omega, tau_c, detuning, t):
    """Closed-form ``eta(t)`` for the exponential kernel.

    ``eta`` is even in the detuning, so ``|dw|`` is used in the phase.
    """
    if not tau_c > 0.0:
        raise ParameterError(f"tau_c must be > 0, got {tau_c}")
    if omega < 0.0:
        raise ParameterError(f"omega must be >= 0, got {omega}")
    t = np.asarray(t, dtype=float)
    if np.any(t < 0.0):
        raise DomainError("t must be >= 0")
    dw = abs(detuning)
    r = math.sqrt(1.0 + (dw * tau_c) ** 2)
    phi = math.asin(1.0 / r)
    out = omega / r**2 * (1.0 + r * np.exp(-t / tau_c) * np.sin(dw * t - phi))
    return out if out.ndim else float(out)


class EtaAsymptote(NamedTuple):
    value: float
    numeric: bool


def eta_asymptote(kernel: NoiseKernel, detuning: float, tol: float = 1e-10,
                  max_windows: int = 1_000_000) -> EtaAsymptote:
    """Long-time limit of ``eta``.

    OU and SE have closed forms. PL is summed one detuning period at a time
    until both the latest window and the integration-by-parts remainder bound
    ``4 |S'(t)| / dw**2`` drop below ``tol``.
    """
    x = detuning * kernel.tau_c
    if kernel.shape == "OU":
        return EtaAsymptote(kernel.omega / (1.0 + x * x), False)
    if kernel.shape == "SE":
        return EtaAsymptote(kernel.omega * math.exp(-((x / 2.0) ** 2)), False)
    if abs(detuning) <= _EPS_DETUNING or kernel.omega == 0.0:
        return EtaAsymptote(kernel.omega, False)

    dw = abs(detuning)
    period = 2.0 * math.pi / dw
    panels = max(1, int(math.ceil(period / kernel.tau_c)))
    f = lambda s: 2.0 * kernel(s) * np.cos(dw * s)  # noqa: E731
    total, a = 0.0, 0.0
    for _ in range(max_windows):
        b = a + period
        piece = gauss_legendre(f, a, b, panels=panels)
        total += piece
        a = b
        remainder = 4.0 * abs(kernel.derivative(a)) / dw**2
        if abs(piece) < tol and remainder < tol:
            return EtaAsymptote(total, True)
    raise ConvergenceError(
        f"power-law eta asymptote not converged after {max_windows} windows (t={a:g}); "
        f"remainder bound {remainder:.3g} > {tol:g}"
    )


def _horizon_floor(kernel, eta_h, h_val, detuning):
    """Lower bound of ``eta(t)`` for every ``t`` beyond the horizon."""
    return eta_h - 2.0 * float(kernel.oscillation_bound(h_val, detuning))


def eta_min(kernel: NoiseKernel, detuning: float, horizon: float | None = None,
            h: float | None = None, tol: float = 1e-10, max_horizon: float | None = None):
    """Global minimum of ``eta`` on ``[0, horizon]``.

    Returns ``(t_star, eta_min)``. The grid minimum is refined by golden-section
    search on the bracketing interval. The horizon is certified when no later
    time can undercut the minimum found; with ``horizon=None`` it is doubled
    from a few detuning periods until that holds.
    """
    if kernel.omega == 0.0 or abs(detuning) <= _EPS_DETUNING:
        # eta is identically zero or nondecreasing
        return 0.0, 0.0

    period = 2.0 * math.pi / abs(detuning)
    explicit = horizon is not None
    H = float(horizon) if explicit else max(2.0 * period, 5.0 * kernel.tau_c)
    if max_horizon is None:
        max_horizon = 1e4 * max(period, kernel.tau_c)

    while True:
        curve = eta_curve(kernel, detuning, H, h)
        i = int(np.argmin(curve.eta))
        t_star, value = float(curve.t[i]), float(curve.eta[i])
        if 0 < i < len(curve.t) - 1:
            t_star, value = golden_section(curve.eta_exact, float(curve.t[i - 1]),
                                           float(curve.t[i + 1]), tol=tol)
            if value > curve.eta[i]:
                t_star, value = float(curve.t[i]), float(curve.eta[i])
        floor = _horizon_floor(kernel, float(curve.eta[-1]), H, detuning)
        if i < len(curve.t) - 1 and floor >= value:
            return t_star, value
        if explicit:
            raise PreconditionError(
                f"horizon {H:g} too small: envelope bound eta(H) - 2*B(H) = {floor:.6g} "
                f"does not exceed the minimum found {value:.6g}"
            )
        H *= 2.0
        if H > max_horizon:
            raise ConvergenceError(f"could not certify eta minimum within horizon {max_horizon:g}")
