"""Bloch-vector evolution under the combined master equation.

Convention: ``sigma_z = +1`` is the excited state, so the thermal steady
state has ``n_z < 0`` and the mean energy is ``+(omega0 / 2) n_z``.

With ``Gamma = gamma1 + gamma2`` and rotation frequency ``w(t)``::

    dn_x/dt = -Gamma/2 n_x - w n_y
    dn_y/dt = -Gamma/2 n_y + w n_x
    dn_z/dt = -Gamma n_z + (gamma1 - gamma2)
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericalFailure, ParameterError, PreconditionError
from .noise import max_step
from .thermal import RateTable, SystemParams

PHYSICALITY_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BlochTrajectory:
    t: np.ndarray
    n: np.ndarray  # shape (len(t), 3)
    omega0: float
    frame: str = "lab"
    method: str = "rk4"
    h: float = float("nan")
    max_local_error: float = 0.0
    extra: dict = field(default_factory=dict)

    @property
    def nx(self):
        return self.n[:, 0]

    @property
    def ny(self):
        return self.n[:, 1]

    @property
    def nz(self):
        return self.n[:, 2]

    @property
    def energy(self):
        return 0.5 * self.omega0 * self.n[:, 2]

    @property
    def purity_radius(self):
        return np.linalg.norm(self.n, axis=1)

    def subsample(self, step: int) -> "BlochTrajectory":
        return BlochTrajectory(self.t[::step], self.n[::step], self.omega0, self.frame,
                               self.method, self.h, self.max_local_error, dict(self.extra))


def _check_state(n0):
    n0 = np.asarray(n0, dtype=float)
    if n0.shape != (3,):
        raise ParameterError("initial Bloch vector must have 3 components")
    if np.linalg.norm(n0) > 1.0 + PHYSICALITY_TOL:
        raise ParameterError(f"initial Bloch vector is unphysical: |n| = {np.linalg.norm(n0):.12g}")
    return n0


def _rk4_affine(a1, a2, a4, b1, b2, b4, h):
    """One RK4 step of ``y' = a(t) y + b(t)`` written as ``y -> P y + Q``."""
    def step(y, b1, b2, b4):
        k1 = a1 * y + b1
        k2 = a2 * (y + 0.5 * h * k1) + b2
        k3 = a2 * (y + 0.5 * h * k2) + b2
        k4 = a4 * (y + h * k3) + b4
        return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    zero = np.zeros_like(b1)
    P = step(np.ones_like(a1), zero, zero, zero)
    Q = step(np.zeros_like(a1), b1, b2, b4)
    return P, Q


def _scan(P, Q, y0):
    out = [y0]
    y = y0
    for p, q in zip(P.tolist(), Q.tolist()):
        y = p * y + q
        out.append(y)
    return np.array(out)


def evolve(rates: RateTable, n0=(1.0, 0.0, 0.0), t_max: float | None = None,
           h: float | None = None, frame: str = "lab", on_unphysical: str = "raise") -> BlochTrajectory:
    """Integrate the Bloch equations with fixed-step classical RK4.

    Stage values between table nodes come from the pump curve's Hermite
    interpolant. The local error is estimated by step doubling.
    ``frame="rotating"`` drops the bare ``omega0`` rotation.

    Negative rates can push the solution out of the Bloch ball even with
    exact integration. By default that raises :class:`NumericalFailure`;
    ``on_unphysical="record"`` keeps the trajectory and stores the largest
    radius and its time in ``extra``.
    """
    if on_unphysical not in ("raise", "record"):
        raise ParameterError(f"on_unphysical must be 'raise' or 'record', got {on_unphysical!r}")
    n0 = _check_state(n0)
    p = rates.params
    t_max = rates.t_max if t_max is None else float(t_max)
    if t_max > rates.t_max * (1.0 + 1e-12):
        raise DomainError(f"t_max={t_max} exceeds the rate table range {rates.t_max}")
    bound = max_step(rates.eta.kernel, p.detuning)
    if frame == "lab":
        bound = min(bound, 2.0 * math.pi / p.omega0 / 50.0)
    h = rates.eta.h if h is None else float(h)
    if h > bound * (1.0 + 1e-12):
        raise PreconditionError(f"step h={h:g} exceeds the bound {bound:g}")
    nsteps = max(1, int(round(t_max / h)))
    t = np.linspace(0.0, t_max, nsteps + 1)
    h = t_max / nsteps

    def coeffs(tq):
        tq = np.minimum(tq, rates.t_max)
        g1, g2 = rates.gamma1_at(tq), rates.gamma2_at(tq)
        w = rates.rotation_at(tq, frame)
        gam = g1 + g2
        return -0.5 * gam + 1j * w, -gam, g1 - g2

    left, mid, right = t[:-1], t[:-1] + 0.5 * h, t[1:]
    q1, q2 = left + 0.25 * h, left + 0.75 * h
    (c1, z1, d1), (c2, z2, d2), (c4, z4, d4) = coeffs(left), coeffs(mid), coeffs(right)

    Pw, Qw = _rk4_affine(c1, c2, c4, 0 * c1, 0 * c1, 0 * c1, h)
    Pz, Qz = _rk4_affine(z1, z2, z4, d1, d2, d4, h)
    w = _scan(Pw, Qw, complex(n0[0], n0[1]))
    z = _scan(Pz, Qz, float(n0[2]))

    # step doubling for the local-error estimate
    (cq1, zq1, dq1), (cq2, zq2, dq2) = coeffs(q1), coeffs(q2)
    Pw1, _ = _rk4_affine(c1, cq1, c2, 0 * c1, 0 * c1, 0 * c1, 0.5 * h)
    Pw2, _ = _rk4_affine(c2, cq2, c4, 0 * c1, 0 * c1, 0 * c1, 0.5 * h)
    Pz1, Qz1 = _rk4_affine(z1, zq1, z2, d1, dq1, d2, 0.5 * h)
    Pz2, Qz2 = _rk4_affine(z2, zq2, z4, d2, dq2, d4, 0.5 * h)
    err_w = np.abs(Pw2 * Pw1 * w[:-1] - w[1:])
    err_z = np.abs(Pz2 * (Pz1 * z[:-1] + Qz1) + Qz2 - z[1:])
    local_err = float(max(err_w.max(), err_z.max())) / 15.0

    n = np.column_stack([w.real, w.imag, z])
    radius = np.linalg.norm(n, axis=1)
    k = int(np.argmax(radius))
    if radius[k] > 1.0 + PHYSICALITY_TOL and on_unphysical == "raise":
        raise NumericalFailure(f"Bloch vector left the unit ball at t={t[k]:g} (|n|={radius[k]:.12g})")
    extra = {"max_radius": float(radius[k]), "t_max_radius": float(t[k])}
    return BlochTrajectory(t=t, n=n, omega0=p.omega0, frame=frame, h=h, max_local_error=local_err,
                           extra=extra)


def steady_state_nz(occupation: float, eta_inf: float, gamma: float) -> float:
    """Long-time ``n_z`` once ``eta`` has settled to ``eta_inf``."""
    denom = gamma * (2.0 * occupation + 1.0) + 2.0 * eta_inf
    if not denom > 0.0:
        raise DomainError(f"nonpositive relaxation rate {denom}")
    return -gamma / denom


def average_energy(traj: BlochTrajectory):
    return traj.energy


def asymptotic_energy(params: SystemParams, eta_inf: float) -> float:
    return 0.5 * params.omega0 * steady_state_nz(params.occupation, eta_inf, params.gamma)


def energy_difference(params: SystemParams, eta_inf: float) -> float:
    """Asymptotic energy with the pump minus without it (never negative)."""
    return asymptotic_energy(params, eta_inf) - asymptotic_energy(params, 0.0)
