"""Bath occupation, canonical decay rates and Markovianity thresholds."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConsistencyError, DomainError, NumericalFailure, ParameterError
from .noise import EtaCurve, NoiseKernel, eta_min

STATISTICS = ("bose", "plus_one")
SHIFT_MODES = ("none", "effective", "effective+constant")


def occupation(omega0: float, temperature: float, statistics: str = "bose") -> float:
    """Mean occupation of the resonant bath mode (k_B = 1).

    ``"bose"`` is ``1/(exp(w0/T) - 1)``. ``"plus_one"`` is
    ``1/(exp(w0/T) + 1)``. It does not reproduce the Markovianity
    temperature and exists for comparison only.
    """
    if not omega0 > 0.0:
        raise ParameterError(f"omega0 must be > 0, got {omega0}")
    if temperature < 0.0:
        raise ParameterError(f"temperature must be >= 0, got {temperature}")
    if statistics not in STATISTICS:
        raise ParameterError(f"statistics must be one of {STATISTICS}, got {statistics!r}")
    if temperature == 0.0:
        return 0.0
    x = omega0 / temperature
    if statistics == "bose":
        return 1.0 / math.expm1(x) if x < 700 else 0.0
    return 1.0 / (math.exp(x) + 1.0) if x < 700 else 0.0


@dataclass(frozen=True)
class SystemParams:
    """Qubit + bath configuration.

    ``temperature`` is absolute (same units as ``omega0``). ``shift`` picks
    which level shifts rotate the coherences: none, the noise-induced
    effective shift, or that plus a constant Lamb shift ``lamb_shift``.
    """

    omega0: float = 1.0
    detuning: float = 2.0
    gamma: float = 1.0
    temperature: float = 0.1
    statistics: str = "bose"
    shift: str = "effective"
    lamb_shift: float = 0.0

    def __post_init__(self):
        if not self.omega0 > 0.0:
            raise ParameterError(f"omega0 must be > 0, got {self.omega0}")
        if not self.gamma > 0.0:
            raise ParameterError(f"gamma must be > 0, got {self.gamma}")
        if not self.temperature >= 0.0:
            raise ParameterError(f"temperature must be >= 0, got {self.temperature}")
        if self.statistics not in STATISTICS:
            raise ParameterError(f"statistics must be one of {STATISTICS}, got {self.statistics!r}")
        if self.shift not in SHIFT_MODES:
            raise ParameterError(f"shift must be one of {SHIFT_MODES}, got {self.shift!r}")

    @classmethod
    def at_ratio(cls, ratio: float, omega0: float = 1.0, **kw) -> "SystemParams":
        """Parameters with ``T = ratio * omega0``."""
        return cls(omega0=omega0, temperature=ratio * omega0, **kw)

    @property
    def occupation(self) -> float:
        return occupation(self.omega0, self.temperature, self.statistics)

    @property
    def constant_shift(self) -> float:
        return self.lamb_shift if self.shift == "effective+constant" else 0.0

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True, eq=False)
class RateTable:
    """Canonical decay rates on the pump-rate grid.

    ``gamma1`` multiplies the absorption channel (sigma_+), ``gamma2`` the
    emission channel (sigma_-). With ``bath=False`` only the pump acts and
    both rates equal ``eta``.
    """

    params: SystemParams
    eta: EtaCurve
    gamma1: np.ndarray
    gamma2: np.ndarray
    bath: bool = True

    @property
    def t(self):
        return self.eta.t

    @property
    def t_max(self):
        return self.eta.t_max

    @property
    def bath_rates(self):
        """Constant thermal parts ``(gamma N, gamma (1 + N))``."""
        return _bath_rates(self.params, self.bath)

    def gamma1_at(self, t):
        return self.bath_rates[0] + self.eta.at(t)

    def gamma2_at(self, t):
        return self.bath_rates[1] + self.eta.at(t)

    def rotation_at(self, t, frame="lab"):
        """Coherence rotation frequency ``omega0 + 2 (shift terms)``."""
        p = self.params
        w = 2.0 * p.constant_shift if self.bath else 0.0
        if frame == "lab":
            w = w + p.omega0
        elif frame != "rotating":
            raise ParameterError(f"frame must be 'lab' or 'rotating', got {frame!r}")
        if p.shift != "none":
            w = w + 2.0 * np.asarray(self.eta.shift_at(t))
        else:
            w = w + 0.0 * np.asarray(t, dtype=float)
        return w if np.ndim(w) else float(w)


def _bath_rates(params, bath):
    if not bath:
        return 0.0, 0.0
    n = params.occupation
    return params.gamma * n, params.gamma * (1.0 + n)


def rate_table(params: SystemParams, eta: EtaCurve, bath: bool = True) -> RateTable:
    if not math.isclose(params.detuning, eta.detuning, rel_tol=1e-12, abs_tol=1e-15):
        raise ConsistencyError(
            f"pump curve detuning {eta.detuning} differs from system detuning {params.detuning}"
        )
    b1, b2 = _bath_rates(params, bath)
    return RateTable(params=params, eta=eta, gamma1=b1 + eta.eta, gamma2=b2 + eta.eta, bath=bath)


def markovianity_temperature(omega0: float, gamma: float, eta_minimum: float) -> float | None:
    """Temperature below which ``gamma1`` dips negative (Bose statistics).

    Returns ``None`` when ``eta_minimum >= 0``: the dynamics is then
    Markovian at every temperature.
    """
    if not omega0 > 0.0 or not gamma > 0.0:
        raise ParameterError("omega0 and gamma must be > 0")
    if eta_minimum >= 0.0:
        return None
    if eta_minimum <= -gamma:
        raise DomainError(
            f"eta_min={eta_minimum} <= -gamma={-gamma}: no temperature restores Markovianity"
        )
    return omega0 / math.log1p(-gamma / eta_minimum)


def threshold_amplitude(kernel: NoiseKernel, detuning: float, gamma: float, temperature: float,
                        omega0: float = 1.0, statistics: str = "bose") -> float:
    """Smallest noise amplitude for which ``gamma1`` touches zero.

    ``eta`` is linear in the amplitude, so the threshold is
    ``gamma N / |eta_min(omega=1)|``. ``kernel.omega`` is ignored. Returns
    ``inf`` when the unit-amplitude pump never goes negative.
    """
    if temperature < 0.0:
        raise ParameterError(f"temperature must be >= 0, got {temperature}")
    _, unit_min = eta_min(kernel.with_amplitude(1.0), detuning)
    if unit_min >= 0.0:
        return math.inf
    bath = gamma * occupation(omega0, temperature, statistics)
    omega_star = bath / -unit_min
    if omega_star > 0.0:
        below = bath + omega_star * (1.0 - 1e-6) * unit_min
        above = bath + omega_star * (1.0 + 1e-6) * unit_min
        if not (below > 0.0 > above):
            raise NumericalFailure("threshold amplitude failed the sign-change check")
    return omega_star
