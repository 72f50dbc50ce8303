import numpy as np
import pytest
from scipy.integrate import quad

from noisepump.errors import ConvergenceError, DomainError, ParameterError
from noisepump.measures import (
    achl_density,
    achl_measure,
    blp_qubit_measure,
    converged_measure,
    damping_matrix,
    residual_bound,
    rhp_from_achl,
)
from noisepump.noise import NoiseKernel, eta_curve, eta_ou_closed_form
from noisepump.thermal import SystemParams, occupation, rate_table

OU = NoiseKernel("OU", 0.91, 4.25)


def brute_achl(T, t_end=40.0):
    n = occupation(1.0, T)
    f = lambda t: max(0.0, -(n + eta_ou_closed_form(0.91, 4.25, 2.0, t)))  # noqa: E731
    pts = np.arange(0.25, t_end, 0.25)
    val, _ = quad(f, 0, t_end, points=pts, limit=2000, epsabs=1e-13)
    return val


@pytest.mark.parametrize("T", [0.1, 0.2, 0.3])
def test_achl_matches_brute_quadrature(T):
    report, _ = converged_measure(SystemParams(temperature=T), OU)
    assert report.achl == pytest.approx(brute_achl(T), abs=1e-9)
    assert report.rhp == report.achl
    assert report.converged and report.residual < 1e-5


def test_reference_value_and_windows():
    report, _ = converged_measure(SystemParams(temperature=0.1), OU)
    assert report.achl == pytest.approx(0.054600, abs=1e-6)
    assert len(report.windows) == 3
    assert all(w.rate == "gamma1" for w in report.windows)
    assert sum(w.contribution for w in report.windows) == pytest.approx(report.achl)


def test_windows_bracket_sign_changes():
    report, rates = converged_measure(SystemParams(temperature=0.1), OU)
    for w in report.windows:
        assert abs(rates.gamma1_at(w.t_start)) < 1e-9
        assert rates.gamma1_at(0.5 * (w.t_start + w.t_end)) < 0


def test_touching_configuration_has_no_windows():
    report, _ = converged_measure(SystemParams(temperature=0.33), OU)
    assert report.achl == 0.0 and report.windows == []


def test_blp_is_zero_when_sum_positive():
    rates = rate_table(SystemParams(temperature=0.1), eta_curve(OU, 2.0, 40.0))
    assert blp_qubit_measure(rates) == 0.0


def test_blp_detects_negative_sum():
    # a strong pump without bath drives gamma1 + gamma2 = 2 eta below zero
    k = NoiseKernel("OU", 1.0, 4.25)
    rates = rate_table(SystemParams(), eta_curve(k, 2.0, 40.0), bath=False)
    expected, _ = quad(lambda t: max(0.0, -2 * eta_ou_closed_form(1.0, 4.25, 2.0, t)), 0, 40,
                       points=np.arange(0.5, 40, 0.5), limit=1000)
    assert blp_qubit_measure(rates) == pytest.approx(expected, abs=1e-9)


def test_unconverged_window_raises():
    rates = rate_table(SystemParams(temperature=0.1), eta_curve(NoiseKernel("PL", 1.35, 10.0), 2.0, 3.0))
    assert residual_bound(rates) > 1e-5
    with pytest.raises(ConvergenceError):
        achl_measure(rates)
    report = achl_measure(rates, until_converged=False)
    assert not report.converged


def test_t_end_out_of_range():
    rates = rate_table(SystemParams(), eta_curve(OU, 2.0, 10.0))
    with pytest.raises(DomainError):
        achl_measure(rates, t_end=11.0)


def test_density_nonnegative():
    rates = rate_table(SystemParams(temperature=0.1), eta_curve(OU, 2.0, 20.0))
    f = achl_density(rates)
    assert np.all(f >= 0) and f.max() > 0


@pytest.mark.parametrize("d, expected", [(2, 0.3), (4, 0.15)])
def test_rhp_scaling(d, expected):
    assert rhp_from_achl(0.3, d) == pytest.approx(expected)


def test_rhp_rejects_small_dimension():
    with pytest.raises(ParameterError):
        rhp_from_achl(0.3, 1)


def test_damping_matrix_sign():
    k = NoiseKernel("OU", 1.0, 4.25)
    rates = rate_table(SystemParams(), eta_curve(k, 2.0, 10.0), bath=False)
    _, _, top_neg = damping_matrix(rates, 2.356)
    _, u, top_pos = damping_matrix(rates, 0.5)
    assert top_neg > 0 > top_pos
    assert u[2] == 0.0
