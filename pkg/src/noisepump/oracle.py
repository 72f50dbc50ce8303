"""Monte Carlo reference for the master equation.

Individual noise realisations are sampled exactly, each is evolved under
the stochastic Hamiltonian (optionally with the thermal dissipator), and
the ensemble mean is compared against the deterministic Bloch solution.

All trajectory work happens in the frame rotating at ``omega0``, where the
noise coupling reads ``V(t) = i (a sigma_- - a* sigma_+)`` with
``a = exp(-i dw t) xi(t)``, i.e. a rotation of the Bloch vector about
``h = (-2 Im a, 2 Re a, 0)``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .dynamics import BlochTrajectory, _check_state, evolve
from .errors import ConsistencyError, PreconditionError, SamplerError, StepSizeError
from .noise import NoiseKernel, eta_curve, max_step
from .thermal import SystemParams, rate_table

CHUNK = 256
CLIP_TOL = 1e-10
MAX_EMBEDDING = 1 << 24
PHYSICALITY_TOL = 1e-6


def trajectory_seed(seed: int, index: int) -> np.random.SeedSequence:
    """Seed for trajectory ``index``; depends only on ``(seed, index)``."""
    return np.random.SeedSequence(entropy=int(seed), spawn_key=(int(index),))


def _generator(seed) -> np.random.Generator:
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(int(seed))
    return np.random.Generator(np.random.Philox(seed))


@dataclass(frozen=True, eq=False)
class NoisePath:
    dt: float
    xi: np.ndarray  # complex, length n_steps + 1
    seed: object
    kernel: NoiseKernel

    @property
    def t(self):
        return self.dt * np.arange(len(self.xi))


def sampler_step_bound(kernel: NoiseKernel, detuning: float | None = None) -> float:
    if detuning is None:
        return kernel.tau_c / 20.0
    return max_step(kernel, detuning, divisor=20)


def circulant_spectrum(kernel: NoiseKernel, dt: float, n_nodes: int) -> np.ndarray:
    """Eigenvalues of the circulant embedding of ``S(|i - j| dt) / 2``.

    The embedding is doubled until the spectrum is nonnegative up to a
    relative clip of ``CLIP_TOL``; clipped values are set to zero.
    """
    half = max(1, n_nodes - 1)
    while True:
        lags = dt * np.arange(half + 1)
        c = 0.5 * np.asarray(kernel(lags))
        row = np.concatenate([c, c[-2:0:-1]])
        lam = np.fft.fft(row).real
        top = lam.max()
        if lam.min() >= -CLIP_TOL * top:
            return np.clip(lam, 0.0, None)
        half *= 2
        if 2 * half > MAX_EMBEDDING:
            raise SamplerError(
                f"circulant embedding not nonnegative up to size {MAX_EMBEDDING} "
                f"(min eigenvalue {lam.min():.3g}, clip tolerance {CLIP_TOL:g} x max)"
            )


def sample_noise_paths(kernel: NoiseKernel, dt: float, n_steps: int, seeds, method: str | None = None):
    """Stack of complex noise paths, one per seed.

    Every row draws its normals from its own counter-based generator, so a
    row depends only on its seed. ``<xi*(t) xi(t')> = S(|t - t'|)`` with the
    variance split equally between real and imaginary parts.
    """
    seeds = list(seeds)
    n_nodes = n_steps + 1
    if not dt > 0.0 or n_steps < 0:
        raise PreconditionError("need dt > 0 and n_steps >= 0")
    if dt > sampler_step_bound(kernel) * (1.0 + 1e-12):
        raise PreconditionError(f"sampling step dt={dt:g} exceeds tau_c/20 = {kernel.tau_c / 20:g}")
    if method is None:
        method = "ar1" if kernel.shape == "OU" else "circulant"
    if kernel.omega == 0.0:
        return np.zeros((len(seeds), n_nodes), dtype=complex)

    if method == "ar1":
        if kernel.shape != "OU":
            raise PreconditionError("the autoregressive sampler is exact only for the OU kernel")
        var = kernel(0.0)
        r = math.exp(-dt / kernel.tau_c)
        w = np.empty((len(seeds), n_nodes), dtype=complex)
        for k, s in enumerate(seeds):
            g = _generator(s).standard_normal((2, n_nodes))
            w[k] = g[0] + 1j * g[1]
        w *= math.sqrt(0.5 * var)
        w[:, 1:] *= math.sqrt(1.0 - r * r)
        return lfilter([1.0], [1.0, -r], w, axis=1)

    if method == "circulant":
        lam = circulant_spectrum(kernel, dt, n_nodes)
        m = len(lam)
        amp = np.sqrt(lam / m)
        out = np.empty((len(seeds), n_nodes), dtype=complex)
        for k, s in enumerate(seeds):
            g = _generator(s).standard_normal((2, m))
            out[k] = np.fft.fft(amp * (g[0] + 1j * g[1]))[:n_nodes]
        return out
    raise PreconditionError(f"unknown sampling method {method!r}")


def sample_noise_path(kernel: NoiseKernel, dt: float, n_steps: int, seed, method: str | None = None) -> NoisePath:
    xi = sample_noise_paths(kernel, dt, n_steps, [seed], method)[0]
    return NoisePath(dt=dt, xi=xi, seed=seed, kernel=kernel)


def _rotate(n, h, dt):
    norm = np.linalg.norm(h, axis=1)
    theta = norm * dt
    k = h / np.where(norm > 0.0, norm, 1.0)[:, None]
    c, s = np.cos(theta)[:, None], np.sin(theta)[:, None]
    kn = np.sum(k * n, axis=1)[:, None]
    return n * c + np.cross(k, n) * s + k * kn * (1.0 - c)


def _evolve_batch(params: SystemParams, xi, dt, n0, with_bath, record_every=1):
    """Evolve a batch of realisations; returns Bloch vectors at recorded nodes."""
    batch, n_nodes = xi.shape
    n = np.tile(np.asarray(n0, dtype=float), (batch, 1))
    steps = n_nodes - 1
    rec = list(range(0, steps + 1, record_every))
    out = np.empty((len(rec), batch, 3))
    out[0] = n
    if with_bath:
        occ = params.occupation
        g1, g2 = params.gamma * occ, params.gamma * (1.0 + occ)
        gam = g1 + g2
        z_ss = (g1 - g2) / gam
        decay_xy, decay_z = math.exp(-0.25 * gam * dt), math.exp(-0.5 * gam * dt)
        hz = 2.0 * params.constant_shift
    else:
        hz = 0.0
    phase = np.exp(-1j * params.detuning * (np.arange(steps) + 0.5) * dt)
    h = np.zeros((batch, 3))
    j = 1
    for k in range(steps):
        if with_bath:
            n[:, :2] *= decay_xy
            n[:, 2] = z_ss + (n[:, 2] - z_ss) * decay_z
        a = 0.5 * (xi[:, k] + xi[:, k + 1]) * phase[k]
        h[:, 0] = -2.0 * a.imag
        h[:, 1] = 2.0 * a.real
        h[:, 2] = hz
        n = _rotate(n, h, dt)
        if with_bath:
            n[:, :2] *= decay_xy
            n[:, 2] = z_ss + (n[:, 2] - z_ss) * decay_z
        if j < len(rec) and rec[j] == k + 1:
            radius = np.linalg.norm(n, axis=1)
            if radius.max() > 1.0 + PHYSICALITY_TOL:
                raise StepSizeError(f"|n| = {radius.max():.9g} after step {k + 1}; reduce dt")
            out[j] = n
            j += 1
    return out


def evolve_realization(params: SystemParams, path: NoisePath, with_bath: bool = False,
                       n0=(1.0, 0.0, 0.0), record_every: int = 1) -> BlochTrajectory:
    """Rotating-frame Bloch trajectory for one noise realisation.

    With the bath, each step is dissipator half-step, noise rotation,
    dissipator half-step (Strang splitting).
    """
    n0 = _check_state(n0)
    bound = sampler_step_bound(path.kernel, params.detuning)
    if path.dt > bound * (1.0 + 1e-12):
        raise PreconditionError(f"path step {path.dt:g} exceeds min(tau_c, 2 pi/|dw|)/20 = {bound:g}")
    n = _evolve_batch(params, path.xi[None, :], path.dt, n0, with_bath, record_every)[:, 0, :]
    t = path.t[::record_every]
    return BlochTrajectory(t=t, n=n, omega0=params.omega0, frame="rotating",
                           method="strang" if with_bath else "rotation", h=path.dt)


@dataclass(frozen=True, eq=False)
class McResult:
    t: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    trajectories: int
    seed: int
    dt: float
    record_every: int
    with_bath: bool

    def to_dict(self):
        return {
            "t": self.t.tolist(),
            "mean": self.mean.tolist(),
            "stderr": self.stderr.tolist(),
            "trajectories": self.trajectories,
            "seed": self.seed,
            "dt": self.dt,
            "record_every": self.record_every,
            "with_bath": self.with_bath,
        }


def default_mc_step(kernel: NoiseKernel, detuning: float) -> float:
    return sampler_step_bound(kernel, detuning) / 8.0


def monte_carlo(params: SystemParams, kernel: NoiseKernel, trajectories: int, seed: int,
                with_bath: bool = False, n0=(1.0, 0.0, 0.0), t_max: float = 30.0,
                dt: float | None = None, record_every: int | None = None,
                workers: int = 1, chunk: int = CHUNK) -> McResult:
    """Ensemble mean and standard error of the Bloch vector.

    Trajectory ``i`` uses ``trajectory_seed(seed, i)``; chunks of fixed size
    are reduced in index order, so the result is bit-identical for any
    ``workers``.
    """
    if trajectories < 100:
        raise PreconditionError(f"need at least 100 trajectories, got {trajectories}")
    n0 = _check_state(n0)
    if dt is None:
        dt = default_mc_step(kernel, params.detuning)
    bound = sampler_step_bound(kernel, params.detuning)
    if dt > bound * (1.0 + 1e-12):
        raise PreconditionError(f"dt={dt:g} exceeds min(tau_c, 2 pi/|dw|)/20 = {bound:g}")
    # shrink dt so the recording grid lands on whole steps
    if record_every is None:
        n_rec = max(1, int(round(t_max / 0.5)))
        record_every = max(1, int(math.ceil(t_max / n_rec / dt * (1.0 - 1e-12))))
    else:
        n_rec = max(1, int(math.ceil(t_max / (record_every * dt) * (1.0 - 1e-12))))
    steps = n_rec * record_every
    dt = t_max / steps

    def run_chunk(c):
        lo, hi = c * chunk, min(trajectories, (c + 1) * chunk)
        seeds = [trajectory_seed(seed, i) for i in range(lo, hi)]
        xi = sample_noise_paths(kernel, dt, steps, seeds)
        n = _evolve_batch(params, xi, dt, n0, with_bath, record_every)
        mean = n.mean(axis=1)
        m2 = ((n - mean[:, None, :]) ** 2).sum(axis=1)
        return hi - lo, mean, m2

    n_chunks = -(-trajectories // chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run_chunk, range(n_chunks)))
    else:
        parts = [run_chunk(c) for c in range(n_chunks)]

    # Chan et al. pairwise merge, in chunk order
    count, mean, m2 = parts[0]
    for cb, mb, m2b in parts[1:]:
        tot = count + cb
        delta = mb - mean
        mean = mean + delta * (cb / tot)
        m2 = m2 + m2b + delta**2 * (count * cb / tot)
        count = tot
    stderr = np.sqrt(m2 / (count - 1) / count)
    t = dt * np.arange(0, steps + 1, record_every)
    return McResult(t=t, mean=mean, stderr=stderr, trajectories=trajectories, seed=int(seed),
                    dt=dt, record_every=record_every, with_bath=with_bath)


def reference_trajectory(params: SystemParams, kernel: NoiseKernel, mc: McResult, n0,
                         with_bath: bool | None = None) -> BlochTrajectory:
    """Master-equation solution on the Monte Carlo recording grid (rotating frame)."""
    with_bath = mc.with_bath if with_bath is None else with_bath
    t_max = float(mc.t[-1])
    fine = max_step(kernel, params.detuning) / 2.0
    sub = max(1, int(math.ceil(mc.dt / fine)))
    h = mc.dt / sub
    rates = rate_table(params, eta_curve(kernel, params.detuning, t_max, h), bath=with_bath)
    traj = evolve(rates, n0, t_max=t_max, h=h, frame="rotating")
    return traj.subsample(sub * mc.record_every)


@dataclass(frozen=True)
class ValidationReport:
    max_deviation: tuple
    max_z: tuple
    z_threshold: float
    passed: bool

    def to_dict(self):
        return {"max_deviation": list(self.max_deviation), "max_z": list(self.max_z),
                "z_threshold": self.z_threshold, "passed": self.passed}


def validate(mc: McResult, ode: BlochTrajectory, z_threshold: float = 3.0, atol: float = 1e-8) -> ValidationReport:
    """Per-component max deviation and z-score of the ensemble against the ODE.

    Nodes with zero standard error (e.g. ``t = 0``) score 0 if the deviation
    is below ``atol`` and infinity otherwise.
    """
    if len(mc.t) != len(ode.t) or not np.allclose(mc.t, ode.t, rtol=0.0, atol=1e-9):
        raise ConsistencyError("Monte Carlo and ODE grids differ")
    dev = np.abs(mc.mean - ode.n)
    se = mc.stderr
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0.0, dev / se, np.where(dev <= atol, 0.0, np.inf))
    max_dev = tuple(float(v) for v in dev.max(axis=0))
    max_z = tuple(float(v) for v in z.max(axis=0))
    return ValidationReport(max_dev, max_z, float(z_threshold), bool(max(max_z) <= z_threshold))


def bloch_to_density(n) -> np.ndarray:
    """``rho = (1 + n . sigma) / 2`` for one vector or a stack of them."""
    n = np.asarray(n, dtype=float)
    nx, ny, nz = n[..., 0], n[..., 1], n[..., 2]
    rho = np.empty(n.shape[:-1] + (2, 2), dtype=complex)
    rho[..., 0, 0] = 0.5 * (1.0 + nz)
    rho[..., 1, 1] = 0.5 * (1.0 - nz)
    rho[..., 0, 1] = 0.5 * (nx - 1j * ny)
    rho[..., 1, 0] = 0.5 * (nx + 1j * ny)
    return rho
