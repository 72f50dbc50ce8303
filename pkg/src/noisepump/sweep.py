"""Parameter scans over the detuning product and the Markovianity threshold."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from ._numerics import golden_section
from .errors import NumericalFailure, ParameterError, PreconditionError
from .noise import SHAPES, NoiseKernel, eta_min
from .thermal import occupation

SCAN_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class ScanResult:
    abscissa: np.ndarray
    values: np.ndarray
    argmin: float
    minimum: float
    argmax: float
    maximum: float
    tolerance: float
    label: str = "x"

    def to_dict(self):
        return {
            "label": self.label,
            "abscissa": self.abscissa.tolist(),
            "values": self.values.tolist(),
            "argmin": self.argmin,
            "minimum": self.minimum,
            "argmax": self.argmax,
            "maximum": self.maximum,
            "tolerance": self.tolerance,
        }


def _map(func, xs, workers):
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return np.array(list(pool.map(func, xs)))
    return np.array([func(x) for x in xs])


def unit_eta_min(shape: str, x: float, detuning: float = 2.0, alpha: float = 3.0) -> float:
    """``eta_min`` per unit amplitude at ``dw * tau_c = x``."""
    kernel = NoiseKernel(shape, 1.0, x / abs(detuning), alpha)
    return eta_min(kernel, detuning)[1]


def scan_detuning_product(shape: str, omega: float = 1.0, x_range=(0.5, 100.0), n_points: int = 200,
                          detuning: float = 2.0, alpha: float = 3.0, tol: float = SCAN_TOL,
                          workers: int = 1) -> ScanResult:
    """Scan ``eta_min / omega`` against ``x = dw * tau_c`` at fixed ``dw``.

    The best grid point is refined by golden-section search on its two
    neighbouring intervals. Values are per unit amplitude, so the result does
    not depend on ``omega``.
    """
    if shape not in SHAPES:
        raise ParameterError(f"shape must be one of {SHAPES}, got {shape!r}")
    lo, hi = (float(v) for v in x_range)
    if not (0.0 < lo < hi):
        raise PreconditionError(f"need 0 < x_lo < x_hi, got {x_range}")
    if n_points < 3:
        raise PreconditionError(f"need at least 3 grid points, got {n_points}")
    if not omega > 0.0:
        raise ParameterError(f"omega must be > 0, got {omega}")
    if abs(detuning) <= 0.0:
        raise ParameterError("detuning must be nonzero for a detuning-product scan")

    xs = np.linspace(lo, hi, n_points)
    objective = lambda x: unit_eta_min(shape, float(x), detuning, alpha)  # noqa: E731
    vals = _map(objective, xs, workers)
    i = int(np.argmin(vals))
    x_min, v_min = float(xs[i]), float(vals[i])
    if 0 < i < n_points - 1:
        x_ref, v_ref = golden_section(objective, float(xs[i - 1]), float(xs[i + 1]), tol=tol)
        if v_ref <= v_min:
            x_min, v_min = float(x_ref), float(v_ref)
    j = int(np.argmax(vals))
    return ScanResult(abscissa=xs, values=vals, argmin=x_min, minimum=v_min,
                      argmax=float(xs[j]), maximum=float(vals[j]), tolerance=tol,
                      label="detuning*tau_c")


def transition_curve(kernel: NoiseKernel, detuning: float, gamma: float, temperatures,
                     omega0: float = 1.0, statistics: str = "bose") -> ScanResult:
    """Threshold amplitude ``omega*(T)`` on a temperature grid.

    ``eta`` is linear in the amplitude, so a single unit-amplitude minimum
    serves every temperature.
    """
    temps = np.asarray(temperatures, dtype=float)
    if temps.ndim != 1 or len(temps) == 0:
        raise PreconditionError("temperature grid must be a nonempty 1-d sequence")
    if not np.all(temps > 0.0):
        raise PreconditionError("all temperatures must be > 0")
    if not gamma > 0.0:
        raise ParameterError(f"gamma must be > 0, got {gamma}")
    _, unit_min = eta_min(kernel.with_amplitude(1.0), detuning)
    if unit_min >= 0.0:
        vals = np.full(len(temps), math.inf)
    else:
        occ = np.array([occupation(omega0, T, statistics) for T in temps])
        vals = gamma * occ / -unit_min
        order = np.argsort(temps)
        if np.any(np.diff(vals[order]) <= 0.0) and np.all(np.diff(temps[order]) > 0.0):
            raise NumericalFailure("threshold amplitude is not increasing in temperature")
    i, j = int(np.argmin(vals)), int(np.argmax(vals))
    return ScanResult(abscissa=temps, values=vals, argmin=float(temps[i]), minimum=float(vals[i]),
                      argmax=float(temps[j]), maximum=float(vals[j]), tolerance=0.0,
                      label="temperature")
