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
from src.fixedpoint.cutoff import CutoffFamily, eta, psi, psi_ext
from src.fixedpoint.mesh import GridFunctionSequence, QuadratureConfig, build_mesh
from src.fixedpoint.mapping import (
    PicardDivergenceError,
    apply_T,
    apply_T_components,
    contraction_threshold,
    picard_solve,
    residual,
    residual_of_samples,
    tail_estimate,
    zero_iterate,
)
from src.dynamics.integrate import integrate
from src.dynamics.system import ModeSystem, SolverConfig

QUAD = QuadratureConfig(T_max=60.0)


def small_alpha(K, norm=0.1, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
    return ComplexSequence.from_dense(norm * values / np.linalg.norm(values))


def test_cutoff_plateaus():
    t = np.linspace(-2.0, 12.0, 701)
    cutoff = CutoffFamily(2)
    values = cutoff(t)
    assert np.all(values[t <= 2 * math.pi] == 0.0)
    assert np.all(values[t >= 3 * math.pi] == 1.0)
    assert np.all((values >= 0.0) & (values <= 1.0))
    assert eta(np.array([math.pi / 2]))[0] == pytest.approx(0.5)


def test_window_cutoffs():
    nu = 3
    inner = np.linspace(math.pi * nu, math.pi * (nu + 2), 50)
    npt.assert_allclose(psi_ext(nu, inner), 1.0)
    outside = np.array([math.pi * (nu - 1) - 0.1, math.pi * (nu + 3) + 0.1])
    npt.assert_array_equal(psi_ext(nu, outside), 0.0)
    t = np.linspace(2 * math.pi, 8 * math.pi, 200)
    total = sum(psi(mu, t) for mu in range(0, 10))
    npt.assert_allclose(total, 1.0, atol=1e-14)


def test_mesh_integrates_oscillations():
    quad = QuadratureConfig(T_max=30.0)
    mesh = build_mesh(math.pi, quad, max_frequency=8)
    t = mesh.times
    f = np.cos(24.0 * t)
    expected = (np.sin(24.0 * 30.0) - np.sin(24.0 * t)) / 24.0
    npt.assert_allclose(mesh.integrate_to_end(f), expected, atol=1e-12)
    assert mesh.integrate(f) == pytest.approx(expected[0] + (np.sin(24 * t[0]) - np.sin(24 * math.pi)) / 24, abs=1e-12)
    points = np.array([math.pi, 4.0, 17.3, 30.0])
    npt.assert_allclose(mesh.interpolate(np.exp(1j * t), points), np.exp(1j * points), atol=1e-12)


def test_first_window_is_refined():
    mesh = build_mesh(0.0, QUAD, max_frequency=4)
    lengths = np.diff(mesh.edges)
    first = lengths[mesh.edges[1:] <= math.pi + 1e-12]
    later = lengths[mesh.edges[:-1] >= math.pi - 1e-12]
    assert first.max() < later.min()


def test_T_of_zero_is_T0():
    K = 1
    alpha = small_alpha(K)
    table = build_table(K, alpha)
    R = zero_iterate(table, 0, QUAD)
    components = apply_T_components(R, alpha, table, 0, QUAD)
    npt.assert_array_equal(components.T1.values, 0.0)
    npt.assert_array_equal(components.T2.values, 0.0)
    npt.assert_array_equal(apply_T(R, alpha, table, 0, QUAD).values, components.T0.values)
    assert np.max(np.abs(components.T0.values)) > 0


def test_T0_is_minus_the_integrated_flow_velocity():
    K = 1
    alpha = small_alpha(K, seed=7)
    table = build_table(K, alpha)
    T0 = apply_T_components(zero_iterate(table, 0, QUAD), alpha, table, 0, QUAD).T0
    system = ModeSystem(table)
    velocity = np.stack([system.rhs_B(t, alpha.dense(K)) for t in T0.times], axis=1)
    expected = T0.at_end().dense(K)[:, None] - T0.mesh.integrate_to_end(velocity)
    plateau = T0.times >= math.pi
    npt.assert_allclose(T0.values[:, plateau], expected[:, plateau], rtol=0, atol=1e-12)


def test_zero_data_maps_to_zero():
    K = 1
    alpha = ComplexSequence.zeros(K)
    table = build_table(K, alpha)
    out = apply_T(zero_iterate(table, 0, QUAD), alpha, table, 0, QUAD)
    npt.assert_array_equal(out.values, 0.0)


def test_components_add_up_and_vanish_before_cutoff():
    K = 1
    N = 2
    alpha = small_alpha(K, seed=1)
    table = build_table(K, alpha)
    R0 = zero_iterate(table, N, QUAD)
    R = apply_T(R0, alpha, table, N, QUAD)
    components = apply_T_components(R, alpha, table, N, QUAD)
    npt.assert_allclose(components.total.values, apply_T(R, alpha, table, N, QUAD).values, rtol=0, atol=1e-17)
    npt.assert_array_equal(components.total.sample(np.array([0.0, 1.0, 2 * math.pi - 0.01])), 0.0)
    early = R.times <= N * math.pi + 1e-3
    assert np.max(np.abs(components.total.values[:, early])) < 1e-12


def test_picard_converges_for_small_data():
    K = 1
    alpha = small_alpha(K, 0.1, seed=2)
    table = build_table(K, alpha)
    result = picard_solve(alpha, table, N=0, tol=1e-10, quad=QUAD, s=0.75, p=2.0)
    assert result.converged
    assert all(r < 1 for r in result.ratios)
    assert result.gaps[-1] < 1e-8
    assert residual(result.solution, alpha, table, 0, QUAD) < 1e-8
    R, ratios = result
    assert ratios == result.ratios


def test_picard_trivial_cases():
    K = 1
    zero = ComplexSequence.zeros(K)
    result = picard_solve(zero, build_table(K, zero), quad=QUAD)
    assert result.converged and result.iterations == 1
    npt.assert_array_equal(result.solution.values, 0.0)

    delta = ComplexSequence.delta(0, 0.3)
    result = picard_solve(delta, build_table(K, delta), quad=QUAD)
    assert result.converged
    assert np.max(np.abs(result.solution.values)) < 1e-12


def test_residual_of_zero_is_positive():
    K = 1
    alpha = small_alpha(K, seed=3)
    table = build_table(K, alpha)
    assert residual(zero_iterate(table, 0, QUAD), alpha, table, 0, QUAD) > 0


def test_fixed_point_matches_flow():
    K = 1
    alpha = small_alpha(K, 0.1, seed=4)
    table = build_table(K, alpha)
    result = picard_solve(alpha, table, N=0, tol=1e-11, quad=QUAD)
    R = result.solution
    T_max = QUAD.T_max
    start = alpha + R.at_end()
    t_eval = np.linspace(math.pi, T_max, 400)
    traj = integrate("B", start, table, SolverConfig(K=K, t_span=(math.pi, T_max), t_eval=t_eval))
    flow = traj.values.T - alpha.dense(K)[:, None]
    assert np.max(np.abs(flow - R.sample(t_eval))) <= 1e-8


def test_ode_perturbation_has_small_residual():
    K = 1
    alpha = small_alpha(K, 0.1, seed=5)
    table = build_table(K, alpha)
    R = picard_solve(alpha, table, N=1, tol=1e-11, quad=QUAD).solution
    t_eval = np.linspace(math.pi, QUAD.T_max, 6000)
    traj = integrate("B", alpha + R.at_end(), table, SolverConfig(K=K, t_span=(math.pi, QUAD.T_max), t_eval=t_eval))
    perturbation = traj.values.T - alpha.dense(K)[:, None]
    assert residual_of_samples(t_eval, perturbation, alpha, table, N=1, quad=QUAD) < 1e-6


def test_tail_estimate_matches_fixed_point_at_horizon():
    K = 1
    alpha = small_alpha(K, 0.1, seed=6)
    table = build_table(K, alpha)
    R = picard_solve(alpha, table, quad=QUAD, tol=1e-11).solution
    estimate = tail_estimate(alpha, table, QUAD.T_max).dense(K)
    end = R.at_end().dense(K)
    assert np.max(np.abs(end - estimate)) <= 0.1 * np.max(np.abs(end)) + 1e-12


def test_divergence_is_reported():
    K = 1
    alpha = small_alpha(K, 40.0, seed=7)
    table = build_table(K, alpha)
    with pytest.raises(PicardDivergenceError) as err:
        picard_solve(alpha, table, quad=QuadratureConfig(T_max=60.0, tail_tol=math.inf), max_iter=40)
    assert err.value.code == "divergence"


def test_contraction_threshold_brackets():
    K = 1
    alpha = small_alpha(K, 1.0, seed=8)
    result = contraction_threshold(alpha, K, quad=QuadratureConfig(T_max=40.0, tail_tol=1e6),
                                   lam_hi=1.0, bisections=3, max_iter=25, tol=1e-8)
    assert 0.0 <= result.lower <= result.upper
    assert len(result.history) >= 4
