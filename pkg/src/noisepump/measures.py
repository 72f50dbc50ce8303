"""Non-Markovianity quantifiers computed from a :class:`RateTable`."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from ._numerics import bisect_root, gauss_legendre
from .errors import ConvergenceError, DomainError, ParameterError
from .noise import NoiseKernel, eta_curve
from .thermal import RateTable, SystemParams, rate_table

CONVERGENCE_TOL = 1e-5


@dataclass(frozen=True)
class NegativityWindow:
    rate: str  # "gamma1", "gamma2" or "sum"
    t_start: float
    t_end: float
    contribution: float  # integral of the negative part over the window


@dataclass(frozen=True)
class MeasureReport:
    achl: float
    blp: float
    rhp: float
    windows: list = field(default_factory=list)
    converged: bool = False
    residual: float = math.inf
    t_end: float = 0.0

    def to_dict(self):
        return {
            "N_ACHL": self.achl,
            "N_BLP": self.blp,
            "N_RHP": self.rhp,
            "windows": [vars(w) for w in self.windows],
            "converged": self.converged,
            "residual_bound": self.residual,
            "t_end": self.t_end,
        }


def achl_density(rates: RateTable):
    """Summed negative parts of the canonical rates, node by node."""
    return np.maximum(-rates.gamma1, 0.0) + np.maximum(-rates.gamma2, 0.0)


def _windows(func, t, values, name, t_end):
    """Maximal intervals of ``[0, t_end]`` on which ``func < 0``.

    Sign changes are detected on the grid and the crossing times refined by
    bisection; the negative part is integrated with Gauss-Legendre panels of
    roughly one grid step.
    """
    keep = t <= t_end * (1.0 + 1e-14)
    t, values = t[keep], values[keep]
    if t[-1] < t_end:
        t = np.append(t, t_end)
        values = np.append(values, func(t_end))
    neg = values < 0.0
    if not neg.any():
        return []
    h = float(t[1] - t[0])
    edges = np.diff(neg.astype(np.int8))
    starts = list(np.nonzero(edges == 1)[0] + 1)
    ends = list(np.nonzero(edges == -1)[0])
    if neg[0]:
        starts.insert(0, 0)
    if neg[-1]:
        ends.append(len(t) - 1)
    out = []
    for i, j in zip(starts, ends):
        a = float(t[0]) if i == 0 else bisect_root(func, float(t[i - 1]), float(t[i]))
        b = float(t[-1]) if j == len(t) - 1 else bisect_root(func, float(t[j]), float(t[j + 1]))
        panels = max(1, int(math.ceil((b - a) / h)))
        area = gauss_legendre(lambda s: np.maximum(-func(s), 0.0), a, b, panels=panels)
        out.append(NegativityWindow(name, a, b, area))
    return out


def residual_bound(rates: RateTable, t_end: float | None = None) -> float:
    """Upper bound on the ACHL contribution from ``[t_end, inf)``.

    Beyond ``t_end`` the pump obeys ``eta(s) >= eta_inf - 2 B(s)`` with
    ``B`` the kernel's oscillation bound and ``eta_inf >= max(0, eta(t_end) -
    2 B(t_end))`` (a positive-definite kernel has a nonnegative spectrum), so
    each rate's negative part is at most ``max(0, 2 B(s) - c_k)``.
    """
    t_end = rates.t_max if t_end is None else float(t_end)
    kernel, dw = rates.eta.kernel, rates.params.detuning
    B = lambda s: float(kernel.oscillation_bound(s, dw))  # noqa: E731
    eta_lo = max(0.0, rates.eta.at(t_end) - 2.0 * B(t_end))
    total = 0.0
    for base in rates.bath_rates:
        c = base + eta_lo
        if 2.0 * B(t_end) <= c:
            continue
        if c > 0.0:
            hi = t_end + kernel.tau_c
            while 2.0 * B(hi) > c:
                hi = t_end + 2.0 * (hi - t_end)
            s_cut = bisect_root(lambda s: 2.0 * B(s) - c, t_end, hi, tol=1e-12 * max(1.0, hi))
            val, _ = quad(lambda s: 2.0 * B(s) - c, t_end, s_cut, limit=200)
        else:
            val, _ = quad(lambda s: 2.0 * B(s), t_end, math.inf, limit=200)
        total += max(val, 0.0)
    return total


def achl_measure(rates: RateTable, until_converged: bool = True, t_end: float | None = None,
                 tol: float = CONVERGENCE_TOL) -> MeasureReport:
    """Integrated negativity of the canonical decay rates.

    Integrates from 0 to ``t_end`` (default: the end of the table). With
    ``until_converged`` the remaining contribution beyond ``t_end`` must be
    certified below ``tol``.
    """
    t_end = rates.t_max if t_end is None else float(t_end)
    if not 0.0 < t_end <= rates.t_max * (1.0 + 1e-12):
        raise DomainError(f"t_end={t_end} outside the table range (0, {rates.t_max}]")
    t = rates.t
    windows = _windows(rates.gamma1_at, t, rates.gamma1, "gamma1", t_end)
    windows += _windows(rates.gamma2_at, t, rates.gamma2, "gamma2", t_end)
    achl = float(sum(w.contribution for w in windows))
    residual = residual_bound(rates, t_end)
    converged = residual < tol
    if until_converged and not converged:
        raise ConvergenceError(
            f"ACHL measure not converged at t_end={t_end:g}: residual bound {residual:.3g} >= {tol:g}"
        )
    blp = blp_qubit_measure(rates, t_end=t_end)
    return MeasureReport(achl=achl, blp=blp, rhp=rhp_from_achl(achl, 2), windows=windows,
                         converged=converged, residual=residual, t_end=t_end)


def converged_measure(params: SystemParams, kernel: NoiseKernel, t_max: float = 40.0,
                      h: float | None = None, tol: float = CONVERGENCE_TOL,
                      max_t: float = 1e5) -> tuple[MeasureReport, RateTable]:
    """ACHL report with the integration window doubled until certified."""
    while True:
        rates = rate_table(params, eta_curve(kernel, params.detuning, t_max, h))
        report = achl_measure(rates, until_converged=False, tol=tol)
        if report.converged:
            return report, rates
        if 2.0 * t_max > max_t:
            raise ConvergenceError(
                f"ACHL residual bound {report.residual:.3g} >= {tol:g} at t_end={t_max:g}"
            )
        t_max *= 2.0


def blp_qubit_measure(rates: RateTable, t_end: float | None = None) -> float:
    """Integrated negative part of ``gamma1 + gamma2``."""
    t_end = rates.t_max if t_end is None else float(t_end)
    total = rates.gamma1 + rates.gamma2
    func = lambda s: rates.gamma1_at(s) + rates.gamma2_at(s)  # noqa: E731
    return float(sum(w.contribution for w in _windows(func, rates.t, total, "sum", t_end)))


def rhp_from_achl(achl: float, d: int = 2) -> float:
    if d < 2:
        raise ParameterError(f"Hilbert-space dimension must be >= 2, got {d}")
    return 2.0 / d * achl


def damping_matrix(rates: RateTable, t: float, frame: str = "lab"):
    """Affine Bloch generator ``dn/dt = D n + u`` at time ``t``.

    Returns ``(D, u, largest eigenvalue of D + D^T)``; that eigenvalue is
    positive exactly when ``gamma1 + gamma2 < 0``.
    """
    if not 0.0 <= t <= rates.t_max:
        raise DomainError(f"t={t} outside the table range [0, {rates.t_max}]")
    g1, g2 = float(rates.gamma1_at(t)), float(rates.gamma2_at(t))
    w = float(rates.rotation_at(t, frame))
    gam = g1 + g2
    D = np.array([[-0.5 * gam, -w, 0.0],
                  [w, -0.5 * gam, 0.0],
                  [0.0, 0.0, -gam]])
    u = np.array([0.0, 0.0, g1 - g2])
    top = float(np.linalg.eigvalsh(D + D.T).max())
    return D, u, top
