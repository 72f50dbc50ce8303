"""Experiment configuration: TOML sections mapped onto dataclasses.

Unknown sections or keys are rejected, and validation reports every
violated bound at once. ``system.temperature`` is given in units of
``omega0``.
"""

from __future__ import annotations

import math
import sys
from dataclasses import asdict, dataclass, field, fields, replace

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib
import tomli_w

from .errors import ConfigError, NoisePumpError
from .noise import SHAPES, STEP_DIVISOR, NoiseKernel, max_step
from .oracle import sampler_step_bound
from .thermal import SHIFT_MODES, STATISTICS, SystemParams

FORMATS = ("csv", "json", "both")
FRAMES = ("lab", "rotating")


@dataclass(frozen=True)
class SystemSection:
    omega0: float = 1.0
    detuning: float = 2.0
    gamma: float = 1.0
    temperature: float = 0.1
    statistics: str = "bose"
    shift: str = "effective"
    lamb_shift: float = 0.0


@dataclass(frozen=True)
class NoiseSection:
    shape: str = "OU"
    omega: float = 0.91
    tau_c: float = 4.25
    alpha: float = 3.0


@dataclass(frozen=True)
class GridSection:
    t_max: float = 40.0
    h: float = 0.0  # 0 picks the default step


@dataclass(frozen=True)
class RunSection:
    seed: int = 0
    trajectories: int = 10_000
    with_bath: bool = False
    mc_t_max: float = 30.0
    mc_dt: float = 0.0  # 0 picks the default step
    initial_state: list = field(default_factory=lambda: [1.0, 0.0, 0.0])
    frame: str = "lab"
    on_unphysical: str = "raise"
    z_threshold: float = 3.0
    convergence_tol: float = 1e-5
    until_converged: bool = True
    x_min: float = 0.5
    x_max: float = 100.0
    n_points: int = 200
    temperatures: list = field(default_factory=lambda: [0.1, 0.2, 0.3, 0.325])
    workers: int = 1


@dataclass(frozen=True)
class OutputSection:
    directory: str = "out"
    format: str = "both"


SECTIONS = {
    "system": SystemSection,
    "noise": NoiseSection,
    "grid": GridSection,
    "run": RunSection,
    "output": OutputSection,
}


@dataclass(frozen=True)
class ExperimentConfig:
    system: SystemSection = field(default_factory=SystemSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    grid: GridSection = field(default_factory=GridSection)
    run: RunSection = field(default_factory=RunSection)
    output: OutputSection = field(default_factory=OutputSection)

    def system_params(self) -> SystemParams:
        s = self.system
        return SystemParams(omega0=s.omega0, detuning=s.detuning, gamma=s.gamma,
                            temperature=s.temperature * s.omega0, statistics=s.statistics,
                            shift=s.shift, lamb_shift=s.lamb_shift)

    def kernel(self) -> NoiseKernel:
        n = self.noise
        return NoiseKernel(n.shape, n.omega, n.tau_c, n.alpha)

    @property
    def h(self):
        return self.grid.h or None

    @property
    def mc_dt(self):
        return self.run.mc_dt or None

    def to_dict(self):
        return asdict(self)

    def to_toml(self) -> str:
        return tomli_w.dumps(self.to_dict())


def _coerce(section, key, value, default, problems):
    """Check ``value`` against the type of ``default``; ints widen to floats."""
    where = f"{section}.{key}"
    if isinstance(default, bool):
        if not isinstance(value, bool):
            problems.append(f"{where} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            problems.append(f"{where} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            problems.append(f"{where} must be a number, got {value!r}")
            return value
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            problems.append(f"{where} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            problems.append(f"{where} must be a list of numbers, got {value!r}")
            return value
        return [float(v) for v in value]
    return value


def from_dict(data: dict) -> ExperimentConfig:
    problems = []
    built = {}
    for name, section in data.items():
        if name not in SECTIONS:
            problems.append(f"unknown section [{name}]")
            continue
        if not isinstance(section, dict):
            problems.append(f"[{name}] must be a table")
            continue
        cls = SECTIONS[name]
        defaults = cls()
        known = {f.name for f in fields(cls)}
        values = {}
        for key, value in section.items():
            if key not in known:
                problems.append(f"unknown key {name}.{key}")
                continue
            values[key] = _coerce(name, key, value, getattr(defaults, key), problems)
        built[name] = values
    if problems:
        raise ConfigError(problems)
    cfg = ExperimentConfig(**{name: SECTIONS[name](**vals) for name, vals in built.items()})
    validate_config(cfg)
    return cfg


def loads(text: str) -> ExperimentConfig:
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError([f"malformed TOML: {exc}"]) from exc
    return from_dict(data)


def load(path) -> ExperimentConfig:
    try:
        with open(path, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ConfigError([f"cannot read config {path}: {exc}"]) from exc
    return loads(text)


def parse_override_value(text: str):
    """Interpret an override as a TOML value, falling back to a bare string."""
    try:
        return tomllib.loads(f"v = {text}")["v"]
    except tomllib.TOMLDecodeError:
        return text


def apply_overrides(cfg: ExperimentConfig, overrides: dict) -> ExperimentConfig:
    """Apply ``{"section.key": value}`` overrides and revalidate."""
    data = cfg.to_dict()
    problems = []
    for path, value in overrides.items():
        parts = path.split(".")
        if len(parts) != 2 or parts[0] not in SECTIONS:
            problems.append(f"unknown override path {path!r}")
            continue
        data[parts[0]][parts[1]] = value
    try:
        cfg = from_dict(data)
    except ConfigError as exc:
        raise ConfigError(problems + exc.problems) from None
    if problems:
        raise ConfigError(problems)
    return cfg


def validate_config(cfg: ExperimentConfig) -> None:
    """Collect every violated precondition; raise :class:`ConfigError` if any."""
    p = []
    s, n, g, r, o = cfg.system, cfg.noise, cfg.grid, cfg.run, cfg.output
    if not s.omega0 > 0.0:
        p.append(f"system.omega0={s.omega0} must be > 0")
    if not s.gamma > 0.0:
        p.append(f"system.gamma={s.gamma} must be > 0")
    if not s.temperature >= 0.0:
        p.append(f"system.temperature={s.temperature} must be >= 0")
    if s.statistics not in STATISTICS:
        p.append(f"system.statistics={s.statistics!r} must be one of {STATISTICS}")
    if s.shift not in SHIFT_MODES:
        p.append(f"system.shift={s.shift!r} must be one of {SHIFT_MODES}")
    if not math.isfinite(s.detuning):
        p.append(f"system.detuning={s.detuning} must be finite")
    if n.shape not in SHAPES:
        p.append(f"noise.shape={n.shape!r} must be one of {SHAPES}")
    if not n.omega >= 0.0:
        p.append(f"noise.omega={n.omega} must be >= 0")
    if not n.tau_c > 0.0:
        p.append(f"noise.tau_c={n.tau_c} must be > 0")
    if n.shape == "PL" and not n.alpha > 2.0:
        p.append(f"noise.alpha={n.alpha} must be > 2 for the power-law kernel")
    if not g.t_max > 0.0:
        p.append(f"grid.t_max={g.t_max} must be > 0")
    if not g.h >= 0.0:
        p.append(f"grid.h={g.h} must be >= 0 (0 selects the default)")
    if r.seed < 0 or r.seed >= 2**64:
        p.append(f"run.seed={r.seed} must be an unsigned 64-bit integer")
    if r.trajectories < 100:
        p.append(f"run.trajectories={r.trajectories} must be >= 100")
    if not r.mc_t_max > 0.0:
        p.append(f"run.mc_t_max={r.mc_t_max} must be > 0")
    if not r.mc_dt >= 0.0:
        p.append(f"run.mc_dt={r.mc_dt} must be >= 0 (0 selects the default)")
    if len(r.initial_state) != 3:
        p.append("run.initial_state must have 3 components")
    elif math.fsum(v * v for v in r.initial_state) > (1.0 + 1e-9) ** 2:
        p.append("run.initial_state must satisfy |n| <= 1")
    if r.frame not in FRAMES:
        p.append(f"run.frame={r.frame!r} must be one of {FRAMES}")
    if r.on_unphysical not in ("raise", "record"):
        p.append(f"run.on_unphysical={r.on_unphysical!r} must be 'raise' or 'record'")
    if not r.z_threshold > 0.0:
        p.append(f"run.z_threshold={r.z_threshold} must be > 0")
    if not r.convergence_tol > 0.0:
        p.append(f"run.convergence_tol={r.convergence_tol} must be > 0")
    if not 0.0 < r.x_min < r.x_max:
        p.append(f"run.x_min={r.x_min}, run.x_max={r.x_max} must satisfy 0 < x_min < x_max")
    if r.n_points < 3:
        p.append(f"run.n_points={r.n_points} must be >= 3")
    if not r.temperatures or not all(T > 0.0 for T in r.temperatures):
        p.append("run.temperatures must be a nonempty list of values > 0")
    if r.workers < 1:
        p.append(f"run.workers={r.workers} must be >= 1")
    if o.format not in FORMATS:
        p.append(f"output.format={o.format!r} must be one of {FORMATS}")

    if not any(msg.startswith(("noise.", "system.detuning")) for msg in p):
        # step bounds need a valid kernel
        try:
            kernel = cfg.kernel()
        except NoisePumpError as exc:
            p.append(f"noise: {exc}")
        else:
            bound = max_step(kernel, s.detuning)
            if g.h > bound * (1.0 + 1e-12):
                p.append(f"grid.h={g.h:g} exceeds min(tau_c, 2 pi/|dw|)/{STEP_DIVISOR} = {bound:g}")
            if r.frame == "lab" and s.omega0 > 0.0 and g.h > 2.0 * math.pi / s.omega0 / STEP_DIVISOR * (1.0 + 1e-12):
                p.append(f"grid.h={g.h:g} exceeds 2 pi/omega0/{STEP_DIVISOR} in the lab frame")
            mc_bound = sampler_step_bound(kernel, s.detuning)
            if r.mc_dt > mc_bound * (1.0 + 1e-12):
                p.append(f"run.mc_dt={r.mc_dt:g} exceeds min(tau_c, 2 pi/|dw|)/20 = {mc_bound:g}")
    if p:
        raise ConfigError(p)


def with_section(cfg: ExperimentConfig, name: str, **changes) -> ExperimentConfig:
    """Copy of ``cfg`` with fields of one section replaced (validated)."""
    out = replace(cfg, **{name: replace(getattr(cfg, name), **changes)})
    validate_config(out)
    return out
