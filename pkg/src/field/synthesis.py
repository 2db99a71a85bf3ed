"""
Physical fields built from mode amplitudes.

    v(t, x) = sum_k A_k(t) e^{ikx}                       periodic field
    u(t, x) = sum_k A_k(t) e^{i(x - k)^2 / 4t} / sqrt(t)  comb solution
    T(v)(t, x) = e^{ix^2 / 4t} / sqrt(t) * conj(v(1/t, x/t))

The residual diagnostic works in the lab frame of the B variables
(see src.dynamics.diagnostics.lab_frame).
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.dynamics.diagnostics import as_B, lab_frame
from src.dynamics.system import Trajectory, gauge_trajectory, time_inversion
from src.lattice.sequences import ComplexSequence, grid_size_for, trig_analysis, trig_synthesis

from . import config

COUPLING = 1.0 / (8.0 * math.pi)


class AliasingError(ValueError):
    code = "aliasing"


def _check_positive(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError(f"Fields are defined for t > 0, got t = {t}.")
    return t


@dataclass(frozen=True)
class FieldGrid:
    """Uniform grid of n points on [0, 2 pi)."""
    n: int = config.DEFAULT_X_SAMPLES

    def __post_init__(self):
        if self.n < 1 or self.n & (self.n - 1):
            raise ValueError(f"Field grids must have a power-of-two size, got {self.n}.")

    @property
    def x(self) -> np.ndarray:
        return 2.0 * math.pi * np.arange(self.n) / self.n

    def require(self, K: int):
        if self.n < config.ALIASING_FACTOR * K:
            raise AliasingError(
                f"Grid of {self.n} points aliases modes |k| <= {K}; need at least {config.ALIASING_FACTOR * K}."
            )


def synthesize_v(state: ComplexSequence, grid: FieldGrid) -> np.ndarray:
    """Samples of sum_k A_k e^{ikx} on the grid."""
    K = state.radius()
    grid.require(K)
    return trig_synthesis(state.dense(K), grid.n)


def as_A(traj: Trajectory) -> Trajectory:
    """Converts B or A_tilde trajectories to the raw amplitudes A."""
    if traj.variable_tag == "B":
        traj = time_inversion(traj)
    if traj.variable_tag == "A_tilde":
        traj = gauge_trajectory(traj)
    return traj


def synthesize_trajectory(traj: Trajectory, grid: FieldGrid) -> np.ndarray:
    """v(t_i, x_j) for every sample of the A trajectory, shape (n_times, n)."""
    traj = as_A(traj)
    grid.require(traj.K)
    return trig_synthesis(traj.values, grid.n)


def pseudo_conformal_u(v_at: Callable, t: float, x) -> np.ndarray:
    """
    T(v)(t, x) = e^{ix^2 / 4t} / sqrt(t) * conj(v(1/t, x/t)).

    `v_at(s, y)` must accept an array y.
    """
    t = float(_check_positive(t))
    x = np.asarray(x, dtype=float)
    return np.exp(1j * x * x / (4.0 * t)) / math.sqrt(t) * np.conj(v_at(1.0 / t, x / t))


def comb_solution(state: ComplexSequence, t: float, x) -> np.ndarray:
    """sum_k A_k e^{i(x - k)^2 / 4t} / sqrt(t) at fixed amplitudes A_k."""
    t = float(_check_positive(t))
    x = np.asarray(x, dtype=float)
    k = state.indices.astype(float)
    phases = np.exp(1j * (x[..., None] - k) ** 2 / (4.0 * t))
    return phases @ state.values / math.sqrt(t)


def free_comb(t: float, x, alpha: ComplexSequence) -> np.ndarray:
    """e^{it Laplacian} applied to sum_k alpha_k delta_k."""
    return comb_solution(alpha, t, x)


def comb_profile(alpha: ComplexSequence) -> Callable:
    """
    v(s, y) = sum_k conj(alpha_k) e^{-ik^2 s / 4} e^{iky / 2}.

    Its pseudo-conformal image is the free comb: T(v) = free_comb(., ., alpha).
    """
    k = alpha.indices.astype(float)
    coeffs = np.conj(alpha.values)

    def v_at(s: float, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.exp(1j * (0.5 * y[..., None] * k - 0.25 * s * k * k)) @ coeffs

    return v_at


@dataclass
class ResidualReport:
    times: np.ndarray
    l2: np.ndarray

    @property
    def max(self) -> float:
        return float(np.max(self.l2)) if self.l2.size else 0.0


def vnls_residual(traj: Trajectory, grid: Optional[FieldGrid] = None, project: bool = True) -> ResidualReport:
    """
    L2 residual of i w_t - w_xx + (1 / 8 pi t) (|w|^2 - 2M) w on the lab-frame field.

    w_t is a centered difference over neighbouring samples, w_xx is spectral
    and M = sum |a_k|^2 is fixed by the data. With project=True the
    nonlinearity is projected onto |k| <= K, which is the equation the
    truncated flow solves; otherwise the residual is taken pointwise on
    `grid` and includes the truncation floor.

    In the variables V(s, y) = conj(w(s / 4, y / 2)) the same equation reads
    i V_s + V_yy - (1 / 8 pi s) (|V|^2 - 2M) V = 0, the periodic NLS with the
    1 / 2t coupling of the comb problem written in the mode-system
    normalization. Its residual is -conj(r) / 4 pointwise, so its L2 norm
    over [0, 4 pi) is sqrt(2) / 4 times the one reported here.

    Returns:
        ResidualReport at the interior sample times.
    """
    traj = as_B(traj)
    if len(traj) < config.MIN_RESIDUAL_TIMES:
        raise ValueError(f"vnls_residual needs at least {config.MIN_RESIDUAL_TIMES} times, got {len(traj)}.")
    K = traj.K
    W = lab_frame(traj)
    times = traj.times
    k = traj.modes
    M = traj.mass_reference

    dW = (W[2:] - W[:-2]) / (times[2:] - times[:-2])[:, None]
    t = times[1:-1]
    W = W[1:-1]
    linear = 1j * dW + (k * k) * W

    n = grid_size_for(K) if project or grid is None else grid.n
    if grid is not None:
        grid.require(K)
    w = trig_synthesis(W, n)
    nonlinear = (np.abs(w) ** 2 - 2.0 * M) * w * (COUPLING / t)[:, None]

    if project:
        modes = linear + trig_analysis(nonlinear, K)
        l2 = np.sqrt(2.0 * math.pi * np.sum(np.abs(modes) ** 2, axis=1))
    else:
        r = trig_synthesis(linear, n) + nonlinear
        l2 = np.sqrt(2.0 * math.pi * np.mean(np.abs(r) ** 2, axis=1))
    return ResidualReport(t, l2)
