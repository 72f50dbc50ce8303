import math

import numpy as np
import pytest
from hypothesis import example, given, settings
from hypothesis import strategies as st
from scipy.integrate import solve_ivp

from noisepump.dynamics import (
    PHYSICALITY_TOL,
    asymptotic_energy,
    energy_difference,
    evolve,
    steady_state_nz,
)
from noisepump.errors import DomainError, NumericalFailure, ParameterError, PreconditionError
from noisepump.noise import NoiseKernel, eta_asymptote, eta_curve
from noisepump.thermal import SystemParams, rate_table

OU = NoiseKernel("OU", 0.91, 4.25)


def table(kernel=OU, t_max=30.0, **kw):
    p = SystemParams(**kw)
    return rate_table(p, eta_curve(kernel, p.detuning, t_max))


def reference(rates, n0, t_max, frame):
    def rhs(t, n):
        g1, g2 = rates.gamma1_at(t), rates.gamma2_at(t)
        w = rates.rotation_at(t, frame)
        gam = g1 + g2
        return [-gam / 2 * n[0] - w * n[1], -gam / 2 * n[1] + w * n[0], -gam * n[2] + g1 - g2]

    sol = solve_ivp(rhs, (0, t_max), n0, rtol=1e-11, atol=1e-12, dense_output=True)
    return sol.sol


@pytest.mark.parametrize("frame", ["lab", "rotating"])
def test_rk4_matches_adaptive_reference(frame):
    rates = table(temperature=0.1)
    traj = evolve(rates, (1, 0, 0), t_max=12.0, frame=frame, on_unphysical="record")
    ref = reference(rates, [1, 0, 0], 12.0, frame)
    np.testing.assert_allclose(traj.n, ref(traj.t).T, atol=1e-7)
    assert traj.max_local_error < 1e-9


def test_no_bath_no_pump_is_pure_precession():
    rates = rate_table(SystemParams(), eta_curve(OU.with_amplitude(0.0), 2.0, 10.0), bath=False)
    traj = evolve(rates, (1, 0, 0))
    np.testing.assert_allclose(traj.nx, np.cos(traj.t), rtol=0, atol=1e-8)
    np.testing.assert_allclose(traj.ny, np.sin(traj.t), rtol=0, atol=1e-8)


def test_plus_state_leaves_ball_at_low_temperature():
    # the equation itself is not positive here: the adaptive solver agrees
    rates = table(temperature=0.1)
    with pytest.raises(NumericalFailure, match="unit ball"):
        evolve(rates, (1, 0, 0), t_max=12.0)
    traj = evolve(rates, (1, 0, 0), t_max=12.0, on_unphysical="record")
    ref = reference(rates, [1, 0, 0], 12.0, "lab")
    ref_radius = np.linalg.norm(ref(traj.extra["t_max_radius"]))
    assert traj.extra["max_radius"] == pytest.approx(ref_radius, abs=1e-8)
    assert ref_radius > 1.001


def test_steady_state_reached():
    p = SystemParams(temperature=0.3)
    rates = rate_table(p, eta_curve(OU, 2.0, 80.0))
    traj = evolve(rates, (0, 0, 1), frame="rotating")
    eta_inf = eta_asymptote(OU, 2.0).value
    assert traj.nz[-1] == pytest.approx(steady_state_nz(p.occupation, eta_inf, 1.0), abs=1e-4)


def test_energy_difference_reference():
    p = SystemParams(temperature=0.1)
    eta_inf = 0.91 / (1 + 8.5**2)
    gam = 2 * p.occupation + 1
    expected = 0.5 * (-1 / (gam + 2 * eta_inf) + 1 / gam)
    assert energy_difference(p, eta_inf) == pytest.approx(expected, rel=1e-12)
    assert energy_difference(p, eta_inf) == pytest.approx(0.012120, abs=1e-6)
    assert asymptotic_energy(p, 0.0) < 0.0


def test_steady_state_rejects_nonpositive_relaxation():
    with pytest.raises(DomainError):
        steady_state_nz(0.0, -0.6, 1.0)


def test_evolve_preconditions():
    rates = table(t_max=5.0)
    with pytest.raises(DomainError):
        evolve(rates, t_max=6.0)
    with pytest.raises(PreconditionError):
        evolve(rates, h=0.2)
    with pytest.raises(ParameterError):
        evolve(rates, n0=(1, 1, 0))


@settings(max_examples=25, deadline=None)
@given(
    theta=st.floats(0, math.pi),
    phi=st.floats(0, 2 * math.pi),
    r=st.floats(0, 1),
    omega=st.floats(0, 2.0),
    T=st.floats(0, 1.0),
    shape=st.sampled_from(["OU", "SE", "PL"]),
)
@example(theta=0.0, phi=0.0, r=0.0, omega=1.0, T=0.0, shape="SE")
@example(theta=math.pi / 2, phi=0.0, r=1.0, omega=0.91, T=0.1, shape="OU")
def test_bloch_vector_stays_physical(theta, phi, r, omega, T, shape):
    k = NoiseKernel(shape, omega, 4.25)
    p = SystemParams(temperature=T)
    rates = rate_table(p, eta_curve(k, 2.0, 15.0))
    n0 = r * np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    traj = evolve(rates, n0, frame="rotating", on_unphysical="record")
    assert traj.purity_radius.max() <= 1 + PHYSICALITY_TOL


def test_no_pump_relaxation_closed_form():
    p = SystemParams(temperature=0.5)
    rates = rate_table(p, eta_curve(OU.with_amplitude(0.0), 2.0, 10.0))
    traj = evolve(rates, (1, 0, 0), frame="rotating")
    gam = 2 * p.occupation + 1
    np.testing.assert_allclose(traj.nz, -1 / gam * (1 - np.exp(-gam * traj.t)), atol=1e-10)


def test_reference_steady_state_value():
    p = SystemParams(temperature=0.1)
    assert steady_state_nz(p.occupation, 0.91 / (1 + 8.5**2), 1.0) == pytest.approx(-0.97567, abs=5e-6)
    assert steady_state_nz(0.0, 0.0, 1.0) == -1.0


def test_fourth_order_convergence():
    rates = table(temperature=0.3, t_max=10.0)
    exact = reference(rates, [1, 0, 0], 10.0, "rotating")(10.0)[2]
    h = rates.eta.h * 4
    errs = [abs(evolve(rates, (1, 0, 0), h=hh, frame="rotating").nz[-1] - exact) for hh in (h, h / 2)]
    assert 12 < errs[0] / errs[1] < 20


def test_nz_independent_of_shift_mode():
    base = {}
    for mode in ("none", "effective", "effective+constant"):
        p = SystemParams(temperature=0.3, shift=mode, lamb_shift=0.2)
        traj = evolve(rate_table(p, eta_curve(OU, 2.0, 10.0)), (0.6, 0.0, 0.3))
        base[mode] = traj
    np.testing.assert_array_equal(base["none"].nz, base["effective"].nz)
    np.testing.assert_array_equal(base["none"].nz, base["effective+constant"].nz)
    assert not np.allclose(base["none"].nx, base["effective"].nx)


@settings(max_examples=50)
@given(eta_inf=st.floats(0.0, 10.0), T=st.floats(0.0, 3.0))
def test_energy_difference_sign(eta_inf, T):
    d = energy_difference(SystemParams(temperature=T), eta_inf)
    assert d >= 0.0
    assert (d == 0.0) == (eta_inf == 0.0) or d < 1e-15
