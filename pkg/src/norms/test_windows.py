import sys
import os
import math

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.lattice.sequences import ComplexSequence
from src.lattice.resonance import build_table
from src.fixedpoint.mesh import QuadratureConfig
from src.fixedpoint.mapping import picard_solve
from src.norms.windows import (
    WindowSpec,
    decay_profile,
    hsp_norm_estimate,
    sample_windows,
    sampled_norms,
    tilde_hsp_norm,
    window_spectrum,
    xsp_norm,
)


def test_window_grid_must_be_power_of_two():
    with pytest.raises(ValueError):
        WindowSpec(0, 100)
    with pytest.raises(ValueError):
        WindowSpec(0, 128)
    spec = WindowSpec(2, 512)
    assert spec.times[0] == pytest.approx(math.pi)
    assert spec.inner_times[0] == pytest.approx(2 * math.pi)
    assert spec.inner_times[-1] == pytest.approx(4 * math.pi)


def test_spectrum_examples():
    window = WindowSpec(2)
    const = window_spectrum(np.full(window.n, 0.7 - 0.1j), window)
    assert const.coefficient(0.0) == pytest.approx(0.7 - 0.1j)
    npt.assert_allclose(np.abs(const.coefficients[1:]), 0.0, atol=1e-15)

    half = window_spectrum(np.exp(0.5j * window.times), window)
    assert half.coefficient(0.5) == pytest.approx(1.0)
    assert abs(half.coefficient(-0.5)) < 1e-14


def test_spectrum_is_linear_and_satisfies_parseval():
    rng = np.random.default_rng(0)
    window = WindowSpec(5)
    f = rng.normal(size=window.n) + 1j * rng.normal(size=window.n)
    g = rng.normal(size=window.n) + 1j * rng.normal(size=window.n)
    lhs = window_spectrum(2.0 * f - 3j * g, window).coefficients
    rhs = 2.0 * window_spectrum(f, window).coefficients - 3j * window_spectrum(g, window).coefficients
    npt.assert_allclose(lhs, rhs, atol=1e-13)
    spec = window_spectrum(f, window)
    assert np.sum(np.abs(spec.coefficients) ** 2) == pytest.approx(np.mean(np.abs(f) ** 2), rel=1e-12)


def test_tilde_norm_examples():
    window = WindowSpec(1)
    const = window_spectrum(np.full(window.n, -2.0), window)
    for s, p in [(0.0, 2.0), (0.75, 3.0), (0.9, 1.5)]:
        assert tilde_hsp_norm(const, s, p) == pytest.approx(2.0)
    half = window_spectrum(np.exp(0.5j * window.times), window)
    assert tilde_hsp_norm(half, 1.0, 2.0) == pytest.approx(math.sqrt(1.25))
    scaled = window_spectrum(4.0 * np.exp(0.5j * window.times), window)
    assert tilde_hsp_norm(scaled, 0.75, 2.0) == pytest.approx(4.0 * tilde_hsp_norm(half, 0.75, 2.0))
    assert tilde_hsp_norm(const, 0.5, 2.0, homogeneous=True) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ValueError):
        tilde_hsp_norm(const, 0.5, 1.0)


def test_hsp_estimate_examples():
    nu = 3
    window = WindowSpec(nu)
    inner = window.inner_times
    assert hsp_norm_estimate(np.zeros(inner.size), 0.75, 2.0, nu) == 0.0

    c = 0.4 + 0.3j
    bound = tilde_hsp_norm(window_spectrum(window.cutoff * c, window), 0.75, 2.0)
    assert hsp_norm_estimate(np.full(inner.size, c), 0.75, 2.0, nu) <= bound + 1e-14

    periodic = np.exp(1j * window.times)
    natural_norm = tilde_hsp_norm(window_spectrum(window.cutoff * periodic, window), 0.75, 2.0)
    estimate = hsp_norm_estimate(periodic[window.inner_slice], 0.75, 2.0, nu, natural=periodic)
    assert 0 < estimate <= natural_norm + 1e-14


def test_xsp_norm_examples():
    n = 256
    samples = np.zeros((6, 3, n), dtype=complex)
    assert xsp_norm(samples, 0.75, 2.0) == 0.0

    window = WindowSpec(2, n)
    samples[2, 1] = np.sin(window.times) * window.cutoff
    single = hsp_norm_estimate(samples[2, 1][window.inner_slice], 0.75, 2.0, 2, n, natural=samples[2, 1])
    assert xsp_norm(samples, 0.75, 2.0) == pytest.approx(3.0 * single)

    rng = np.random.default_rng(1)
    samples = rng.normal(size=(6, 3, n)) + 1j * rng.normal(size=(6, 3, n))
    values = [xsp_norm(samples, 0.75, 2.0, nu_max=j) for j in range(6)]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert xsp_norm(2.5 * samples, 0.75, 2.0) == pytest.approx(2.5 * values[-1])
    assert xsp_norm(samples, 0.75, 2.0, threads=3) == values[-1]


def test_decay_profile_of_zero_data():
    K = 1
    alpha = ComplexSequence.zeros(K)
    profile = decay_profile("T0", alpha, None, 0.75, 2.0, range(1, 6), quad=QuadratureConfig(T_max=30.0))
    npt.assert_array_equal(profile.scaled, 0.0)


@pytest.mark.parametrize("p", [2.0, 3.0])
def test_T0_profile_stays_in_band(p):
    K = 1
    rng = np.random.default_rng(2)
    values = rng.normal(size=3) + 1j * rng.normal(size=3)
    values *= 0.1 / np.sum(np.abs(values) ** p) ** (1.0 / p)
    alpha = ComplexSequence.from_dense(values)
    quad = QuadratureConfig(T_max=60.0)
    profile = decay_profile("T0", alpha, None, 0.75, p, range(1, 13), quad=quad)
    assert profile.band <= 3.0


def test_T2_profile_decays_faster():
    K = 1
    rng = np.random.default_rng(3)
    values = rng.normal(size=3) + 1j * rng.normal(size=3)
    alpha = ComplexSequence.from_dense(0.1 * values / np.linalg.norm(values))
    table = build_table(K, alpha)
    quad = QuadratureConfig(T_max=60.0)
    R = picard_solve(alpha, table, quad=quad, tol=1e-11).solution
    profile = decay_profile("T2", alpha, R, 0.75, 2.0, range(2, 14), table=table, quad=quad, seminorm=True)
    assert profile.slope <= -0.8


def test_sampled_norms_match_exact_windows():
    times = np.linspace(1.0, 40.0, 8001)

    def exact(t):
        t = np.asarray(t)
        return np.stack([np.exp(1j * t) / t, np.zeros_like(t, dtype=complex), np.cos(2 * t) / t ** 2])

    result = sampled_norms(times, exact(times), 0.75, 2.0)
    assert result.nus[0] == 2 and result.nus[-1] == 9
    windows = sample_windows(exact, 9, nu_start=2)
    assert result.xsp == pytest.approx(xsp_norm(windows, 0.75, 2.0, nu_start=2), rel=1e-6)
    npt.assert_array_equal(result.per_mode[:, 1], 0.0)
    assert len(list(result.rows())) == 8 * 3
    with pytest.raises(ValueError):
        sampled_norms(times, exact(times), 0.75, 2.0, nu_start=1)
