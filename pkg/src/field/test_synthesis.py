import sys
import os
import math

import numpy as np
import numpy.testing as npt
import pytest

# Add project root to Python path
sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..', '..')))

from src.lattice.sequences import ComplexSequence, trig_synthesis
from src.lattice.resonance import build_table
from src.dynamics.integrate import integrate
from src.dynamics.diagnostics import lab_frame
from src.dynamics.system import SolverConfig, Trajectory
from src.field.synthesis import (
    AliasingError,
    FieldGrid,
    comb_profile,
    free_comb,
    pseudo_conformal_u,
    synthesize_trajectory,
    synthesize_v,
    vnls_residual,
)


def random_alpha(K, norm=0.5, seed=0):
    rng = np.random.default_rng(seed)
    values = rng.normal(size=2 * K + 1) + 1j * rng.normal(size=2 * K + 1)
    return ComplexSequence.from_dense(norm * values / np.linalg.norm(values))


def test_grid_validation():
    with pytest.raises(ValueError):
        FieldGrid(12)
    with pytest.raises(AliasingError):
        synthesize_v(random_alpha(4), FieldGrid(8))
    npt.assert_allclose(FieldGrid(4).x, [0.0, math.pi / 2, math.pi, 3 * math.pi / 2])


def test_synthesis_examples():
    a = 0.3 - 0.4j
    npt.assert_allclose(synthesize_v(ComplexSequence.delta(0, a), FieldGrid(8)), a, atol=1e-15)

    state = ComplexSequence(0, np.array([0.5, 0.25j]))
    v = synthesize_v(state, FieldGrid(8))
    assert v[0] == pytest.approx(0.5 + 0.25j)
    assert v[4] == pytest.approx(0.5 - 0.25j)


@pytest.mark.parametrize("K", [1, 4, 9])
def test_parseval(K):
    state = random_alpha(K, seed=K)
    v = synthesize_v(state, FieldGrid(64))
    assert np.mean(np.abs(v) ** 2) == pytest.approx(state.mass(), rel=1e-12)


def test_trajectory_synthesis_keeps_mass():
    K = 2
    alpha = random_alpha(K, seed=3)
    table = build_table(K, alpha)
    traj = integrate("B", alpha, table, SolverConfig(K=K, t_span=(1.0, 4.0), samples=7))
    v = synthesize_trajectory(traj, FieldGrid(16))
    assert v.shape == (7, 16)
    npt.assert_allclose(np.mean(np.abs(v) ** 2, axis=1), alpha.mass(), rtol=1e-8)


def test_pseudo_conformal_transform():
    v_at = comb_profile(random_alpha(3, seed=4))
    x = np.linspace(-5.0, 5.0, 41)
    t = 0.7
    u = pseudo_conformal_u(v_at, t, x)
    npt.assert_allclose(np.abs(u), np.abs(v_at(1 / t, x / t)) / math.sqrt(t), rtol=1e-13)
    assert complex(pseudo_conformal_u(v_at, 1.0, 0.0)) == pytest.approx(complex(np.conj(v_at(1.0, 0.0))))
    twice = pseudo_conformal_u(lambda s, y: pseudo_conformal_u(v_at, s, y), t, x)
    npt.assert_allclose(twice, v_at(t, x), atol=1e-12)
    with pytest.raises(ValueError):
        pseudo_conformal_u(v_at, 0.0, x)


def test_free_comb():
    alpha = ComplexSequence.delta(0, 0.8 + 0.1j)
    assert complex(free_comb(2.0, 0.0, alpha)) == pytest.approx((0.8 + 0.1j) / math.sqrt(2.0))

    a, b = random_alpha(2, seed=5), random_alpha(2, seed=6)
    x = np.linspace(-3.0, 3.0, 13)
    npt.assert_allclose(free_comb(0.4, x, a + b.scaled(2j)),
                        free_comb(0.4, x, a) + 2j * free_comb(0.4, x, b), atol=1e-13)
    npt.assert_allclose(free_comb(0.4, x, a), pseudo_conformal_u(comb_profile(a), 0.4, x), atol=1e-12)
    with pytest.raises(ValueError):
        free_comb(-1.0, x, a)


def test_residual_of_single_delta_is_at_floor():
    K = 2
    alpha = ComplexSequence.delta(0, 0.5)
    table = build_table(K, alpha)
    traj = integrate("B", alpha, table, SolverConfig(K=K, t_span=(2.0, 2.02), samples=21))
    assert vnls_residual(traj).max < 1e-8


def test_residual_of_zero_field():
    K = 2
    zero = ComplexSequence.zeros(K)
    traj = Trajectory(np.array([1.0, 1.5, 2.0]), np.zeros((3, 5)), "B", np.zeros(5))
    assert vnls_residual(traj, FieldGrid(16)).max == 0.0
    with pytest.raises(ValueError):
        vnls_residual(Trajectory(np.array([1.0, 2.0]), np.zeros((2, 5)), "B", np.abs(zero.dense(K)) ** 2))


def test_residual_is_second_order_in_time_spacing():
    K = 2
    alpha = random_alpha(K, seed=7)
    table = build_table(K, alpha)
    results = []
    for h in (0.05, 0.025):
        cfg = SolverConfig(K=K, t_span=(1.5, 2.5), t_eval=np.array([2.0 - h, 2.0, 2.0 + h]))
        results.append(vnls_residual(integrate("B", alpha, table, cfg)).max)
    assert 3.5 <= results[0] / results[1] <= 4.5


def test_unprojected_residual_includes_truncation_floor():
    K = 2
    alpha = random_alpha(K, seed=8)
    table = build_table(K, alpha)
    traj = integrate("B", alpha, table, SolverConfig(K=K, t_span=(2.0, 2.1), samples=11))
    projected = vnls_residual(traj, FieldGrid(16))
    raw = vnls_residual(traj, FieldGrid(16), project=False)
    assert np.all(raw.l2 >= projected.l2 - 1e-14)


def test_residual_in_rescaled_conjugate_variables():
    K = 2
    alpha = random_alpha(K, seed=9)
    table = build_table(K, alpha)
    traj = integrate("B", alpha, table, SolverConfig(K=K, t_span=(2.0, 2.1), samples=11))
    n = 16
    k = traj.modes
    W = lab_frame(traj)
    s = 4.0 * traj.times
    V = np.conj(trig_synthesis(W, n))
    V_yy = np.conj(trig_synthesis(-(k * k) * W, n)) / 4.0
    V_s = (V[2:] - V[:-2]) / (s[2:] - s[:-2])[:, None]
    V, V_yy = V[1:-1], V_yy[1:-1]
    coupling = 1.0 / (8.0 * math.pi * s[1:-1])[:, None]
    r = 1j * V_s + V_yy - coupling * (np.abs(V) ** 2 - 2.0 * traj.mass_reference) * V
    l2 = np.sqrt(4.0 * math.pi * np.mean(np.abs(r) ** 2, axis=1))
    raw = vnls_residual(traj, FieldGrid(n), project=False)
    npt.assert_allclose(l2, math.sqrt(2.0) / 4.0 * raw.l2, rtol=1e-9)
