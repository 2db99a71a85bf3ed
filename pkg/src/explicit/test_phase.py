import sys
import os

import numpy as np
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.explicit.config import DECAY_FIT_TIMES
from src.explicit.phase import (
    PhaseConvergenceError,
    PhaseQuadratureConfig,
    explicit_B,
    lattice_check,
    phase_decay_fit,
    phase_integral,
    phase_integral_closed_form,
    phase_sweep,
    scalar_ode_check,
)

SMALL = PhaseQuadratureConfig(M_max=64, quad_tol=1e-9)


@pytest.mark.parametrize("t", [0.5, 3.0, 10.0, 80.0])
def test_phase_is_real(t):
    result = phase_integral(t, SMALL)
    assert abs(result.imag_residual) <= 1e-12
    assert np.isfinite(result.value)


@pytest.mark.parametrize("t", [1.0, 5.0, 10.0])
def test_closed_form_agrees_with_quadrature(t):
    result = phase_integral(t, SMALL)
    closed = phase_integral_closed_form(t, SMALL)
    assert abs(result.value - closed) <= result.tail_bound + 1e-11


def test_doubling_frequency_cutoff_stays_within_tail_bound():
    t = 4.0
    coarse = phase_integral(t, PhaseQuadratureConfig(M_max=64, quad_tol=1e-9))
    fine = phase_integral(t, PhaseQuadratureConfig(M_max=128, quad_tol=1e-9))
    assert abs(fine.remainder - coarse.remainder) <= coarse.tail_bound


def test_phase_decay_envelope():
    cfg = PhaseQuadratureConfig(M_max=256, quad_tol=1e-9)
    results = phase_sweep([10.0, 20.0, 40.0, 80.0], cfg)
    fit = phase_decay_fit(results, cfg)
    assert np.isfinite(fit.slope)
    assert fit.within_envelope
    for r in results:
        assert abs(r.value) <= fit.envelope / r.t


def test_phase_decays_like_inverse_time():
    cfg = PhaseQuadratureConfig(M_max=4096, quad_tol=1e-10)
    results = phase_sweep(list(DECAY_FIT_TIMES), cfg)
    assert all(abs(r.imag_residual) <= 1e-12 for r in results)
    fit = phase_decay_fit(results, cfg)
    assert -1.2 <= fit.slope <= -0.8
    assert fit.within_slope_band and fit.within_envelope


def test_truncation_failure_is_reported():
    with pytest.raises(PhaseConvergenceError) as err:
        phase_integral(10.0, PhaseQuadratureConfig(M_max=64, T_max=15.0, quad_tol=1e-10))
    assert err.value.code == "tail_bound"


def test_invalid_inputs():
    with pytest.raises(ValueError):
        phase_integral(0.0, SMALL)
    with pytest.raises(ValueError):
        PhaseQuadratureConfig(counts={2: 3, -2: 1})
    with pytest.raises(ValueError):
        PhaseQuadratureConfig(M_max=1)


def test_explicit_B():
    assert explicit_B(0.0, 3.0, SMALL) == 0
    alpha = 0.5 - 0.2j
    for t in (0.7, 5.0, 33.0):
        assert abs(explicit_B(alpha, t, SMALL)) == pytest.approx(abs(alpha), rel=1e-14)
    far = explicit_B(alpha, 1e4, PhaseQuadratureConfig(M_max=64, quad_tol=1e-9))
    assert abs(far - alpha) < 1e-3


def test_scalar_ode_matches_explicit_solution():
    report = scalar_ode_check(0.5, (5.0, 50.0), SMALL)
    assert report.sup_relative_error <= 1e-8
    assert scalar_ode_check(0.0, (5.0, 50.0), SMALL).sup_relative_error == 0.0


def test_scalar_ode_error_drops_with_tolerance():
    loose = scalar_ode_check(0.5, (5.0, 20.0), SMALL, rtol=1e-6, atol=1e-8)
    tight = scalar_ode_check(0.5, (5.0, 20.0), SMALL, rtol=1e-8, atol=1e-10)
    assert tight.sup_relative_error <= loose.sup_relative_error


def test_wrapped_lattice_matches_explicit_solution():
    report = lattice_check(0.5, K=4, t_span=(5.0, 50.0), wrap=True, cfg=SMALL)
    assert report.max_error <= 1e-6


def test_scalar_ode_matches_at_full_frequency_cutoff():
    cfg = PhaseQuadratureConfig(M_max=4096, quad_tol=1e-10)
    report = scalar_ode_check(0.5, (48.0, 50.0), cfg, samples=21)
    assert report.sup_relative_error <= 1e-8


def test_hard_truncation_keeps_central_modes_on_explicit_solution():
    cfg = PhaseQuadratureConfig(M_max=4096, quad_tol=1e-10)
    report = lattice_check(0.5, K=8, t_span=(40.0, 80.0), wrap=False, cfg=cfg, samples=21)
    assert not report.wrap
    assert report.central_error(2) <= 1e-3
