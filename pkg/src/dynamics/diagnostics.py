"""
Conserved and monitored quantities along mode trajectories.

Energy and the PDE residual are measured on the lab-frame field

    w(t, x) = sum_k W_k(t) e^{ikx},   W_k = B_k e^{-i|a_k|^2 log(4t) / (8 pi)} e^{i k^2 t},

which solves i w_t - w_xx + (1 / 8 pi t) P_K[(|w|^2 - 2M) w] = 0 in the
B-time variable t, with P_K the projection onto |k| <= K.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.lattice.sequences import ComplexSequence, grid_size_for, trig_synthesis

from . import config
from .system import SolverConfig, Trajectory, gauge_trajectory, time_inversion


def mass(state: ComplexSequence) -> float:
    """sum_k |A_k|^2"""
    return state.mass()


def mass_drift(traj: Trajectory) -> np.ndarray:
    """|mass(t) - M| at every sample, with M = sum |a_k|^2."""
    return np.abs(np.sum(np.abs(traj.values) ** 2, axis=1) - traj.mass_reference)


def as_B(traj: Trajectory) -> Trajectory:
    """Converts A or A_tilde trajectories to B variables."""
    if traj.variable_tag == "A":
        traj = gauge_trajectory(traj, inverse=True)
    if traj.variable_tag == "A_tilde":
        traj = time_inversion(traj)
    return traj


def lab_frame(traj: Trajectory) -> np.ndarray:
    """Lab-frame modes W_k(t), shape (n_times, 2K + 1), on the B-time samples of `traj`."""
    traj = as_B(traj)
    k = traj.modes
    phase = (-config.COUPLING * np.outer(np.log(4.0 * traj.times), traj.alpha_abs2)
             + np.outer(traj.times, k * k))
    return traj.values * np.exp(1j * phase)


def _quartic_term(dense: np.ndarray, c: float) -> np.ndarray:
    """int_0^{2pi} (|w|^2 - c)^2 dx, exact for the degree-4K integrand."""
    K = dense.shape[-1] // 2
    n = grid_size_for(K)
    w = trig_synthesis(dense, n)
    return 2.0 * math.pi * np.mean((np.abs(w) ** 2 - c) ** 2, axis=-1)


def _energy_constant(dense: np.ndarray, solver_config: Optional[SolverConfig]) -> float:
    if solver_config is not None and solver_config.energy_c is not None:
        return float(solver_config.energy_c)
    # mean of |w|^2 over the period
    return float(np.sum(np.abs(np.atleast_2d(dense)[0]) ** 2))


def energy(state: ComplexSequence, t: float, solver_config: Optional[SolverConfig] = None) -> float:
    """
    E = 1/2 int |w_x|^2 - (theta / t) int (|w|^2 - c)^2 over one period.

    Args:
        state: Field modes W_k at time t (lab frame).
        t: Positive time.
        solver_config: Supplies theta and c; c defaults to the mean of |w|^2.
    """
    if not t > 0:
        raise ValueError(f"Energy is defined for t > 0, got t = {t}.")
    theta = solver_config.energy_theta if solver_config is not None else config.ENERGY_THETA
    K = state.radius()
    dense = state.dense(K)
    c = _energy_constant(dense, solver_config)
    k = np.arange(-K, K + 1)
    kinetic = math.pi * float(np.sum(k * k * np.abs(dense) ** 2))
    return kinetic - theta / t * float(_quartic_term(dense, c))


def energy_series(W: np.ndarray, times: np.ndarray, solver_config: Optional[SolverConfig] = None) -> np.ndarray:
    theta = solver_config.energy_theta if solver_config is not None else config.ENERGY_THETA
    K = W.shape[1] // 2
    k = np.arange(-K, K + 1)
    c = _energy_constant(W, solver_config)
    kinetic = math.pi * np.sum(k * k * np.abs(W) ** 2, axis=1)
    return kinetic - theta / times * _quartic_term(W, c)


@dataclass
class EnergyRateCheck:
    """Finite-difference dE/dt against (theta / t^2) int (|w|^2 - c)^2."""
    times: np.ndarray
    fd_rate: np.ndarray
    predicted_rate: np.ndarray

    @property
    def max_relative_error(self) -> float:
        scale = float(np.max(np.abs(self.predicted_rate)))
        if scale == 0.0:
            return float(np.max(np.abs(self.fd_rate)))
        return float(np.max(np.abs(self.fd_rate - self.predicted_rate)) / scale)


def energy_rate_check(traj: Trajectory, solver_config: Optional[SolverConfig] = None,
                      richardson: bool = True) -> EnergyRateCheck:
    """
    Checks the energy identity along a uniformly sampled trajectory.

    Centered differences with spacing h (and 2h when `richardson` is set,
    combined as (4 D_h - D_2h) / 3) are compared with the predicted rate at
    the interior samples.
    """
    traj = as_B(traj)
    times = traj.times
    h = np.diff(times)
    if not np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        raise ValueError("energy_rate_check needs uniformly spaced samples.")
    h = float(h[0])
    W = lab_frame(traj)
    E = energy_series(W, times, solver_config)
    theta = solver_config.energy_theta if solver_config is not None else config.ENERGY_THETA
    c = _energy_constant(W, solver_config)
    predicted = theta / times ** 2 * _quartic_term(W, c)

    if richardson:
        if times.size < 5:
            raise ValueError("Richardson extrapolation needs at least five samples.")
        d_h = (E[3:-1] - E[1:-3]) / (2 * h)
        d_2h = (E[4:] - E[:-4]) / (4 * h)
        return EnergyRateCheck(times[2:-2], (4 * d_h - d_2h) / 3, predicted[2:-2])
    if times.size < 3:
        raise ValueError("Centered differences need at least three samples.")
    return EnergyRateCheck(times[1:-1], (E[2:] - E[:-2]) / (2 * h), predicted[1:-1])
